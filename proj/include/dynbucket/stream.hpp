/*
 * Copyright 2026 The dynbucket Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DYNBUCKET_STREAM_HPP
#define DYNBUCKET_STREAM_HPP

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "dynbucket/source.hpp"

namespace dynbucket {

// Synthetic read latency for the sample at a given 0-based position. Also
// called once with index == source length for the read that ends the stream.
using DelayModel = std::function<std::chrono::nanoseconds(std::size_t index)>;

struct BufferedStreamConfig {
  std::size_t capacity = 10'000;
  double start_fraction = 0.10;
  DelayModel producer_delay;  // empty: no delay
};

void validate(const BufferedStreamConfig& config);

// Queue occupancy the consumer waits for before its first read:
// ceil(start_fraction * capacity), at least 1.
std::size_t start_threshold(const BufferedStreamConfig& config);

// Bounded single-producer/single-consumer queue in front of a source. A
// background thread pulls from the source; the first read blocks until the
// start threshold is reached or the producer has finished. Delivery is
// order-preserving and exactly-once. A producer exception is rethrown to the
// consumer after the samples queued before it have been delivered.
class BufferedStream final : public SampleSource {
 public:
  BufferedStream(std::unique_ptr<SampleSource> source,
                 BufferedStreamConfig config);
  ~BufferedStream() override;

  BufferedStream(const BufferedStream&) = delete;
  BufferedStream& operator=(const BufferedStream&) = delete;

  std::optional<Sample> next() override;

  // Time from construction until the first read was released; nullopt before
  // the first read returns.
  std::optional<std::chrono::nanoseconds> first_read_latency() const;

 private:
  void produce();

  std::unique_ptr<SampleSource> source_;
  BufferedStreamConfig config_;
  std::size_t threshold_;
  std::chrono::steady_clock::time_point opened_;

  mutable std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<Sample> queue_;
  bool producer_done_ = false;
  bool stop_ = false;
  bool started_ = false;
  std::exception_ptr error_;
  std::optional<std::chrono::nanoseconds> first_latency_;

  std::thread producer_;
};

// Wraps `source` in a BufferedStream.
std::unique_ptr<SampleSource> open_buffered(
    std::unique_ptr<SampleSource> source, BufferedStreamConfig config);

}  // namespace dynbucket

#endif  // DYNBUCKET_STREAM_HPP
