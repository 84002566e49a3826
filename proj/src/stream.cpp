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

#include "dynbucket/stream.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "dynbucket/error.hpp"

namespace dynbucket {

void validate(const BufferedStreamConfig& config) {
  if (config.capacity < 1) throw InvalidArgument("stream capacity must be >= 1");
  if (!(config.start_fraction > 0.0 && config.start_fraction <= 1.0)) {
    throw InvalidArgument("start_fraction must lie in (0, 1]");
  }
}

std::size_t start_threshold(const BufferedStreamConfig& config) {
  const double raw =
      config.start_fraction * static_cast<double>(config.capacity);
  // Tolerate representation error: 0.1 * 50 must give 5, not 6.
  auto n = static_cast<std::size_t>(std::ceil(raw - 1e-9 * raw));
  return std::clamp<std::size_t>(n, 1, config.capacity);
}

BufferedStream::BufferedStream(std::unique_ptr<SampleSource> source,
                               BufferedStreamConfig config)
    : source_(std::move(source)), config_(std::move(config)) {
  if (!source_) throw InvalidArgument("buffered stream needs a source");
  validate(config_);
  threshold_ = start_threshold(config_);
  opened_ = std::chrono::steady_clock::now();
  producer_ = std::thread([this] { produce(); });
}

BufferedStream::~BufferedStream() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  not_full_.notify_all();
  producer_.join();
}

void BufferedStream::produce() {
  std::size_t index = 0;
  try {
    for (;;) {
      if (config_.producer_delay) {
        const auto d = config_.producer_delay(index);
        if (d.count() > 0) std::this_thread::sleep_for(d);
      }
      std::optional<Sample> s = source_->next();
      if (!s) break;
      ++index;
      std::unique_lock lock(mu_);
      not_full_.wait(lock,
                     [&] { return stop_ || queue_.size() < config_.capacity; });
      if (stop_) return;
      queue_.push_back(std::move(*s));
      lock.unlock();
      not_empty_.notify_one();
    }
  } catch (...) {
    std::lock_guard lock(mu_);
    error_ = std::current_exception();
  }
  {
    std::lock_guard lock(mu_);
    producer_done_ = true;
  }
  not_empty_.notify_all();
}

std::optional<Sample> BufferedStream::next() {
  std::unique_lock lock(mu_);
  if (!started_) {
    not_empty_.wait(lock, [&] {
      return producer_done_ || queue_.size() >= threshold_;
    });
    started_ = true;
    first_latency_ = std::chrono::duration_cast<std::chrono::nanoseconds>(
        std::chrono::steady_clock::now() - opened_);
  }
  not_empty_.wait(lock, [&] { return producer_done_ || !queue_.empty(); });
  if (queue_.empty()) {
    if (error_) {
      auto err = std::exchange(error_, nullptr);
      std::rethrow_exception(err);
    }
    return std::nullopt;
  }
  Sample s = std::move(queue_.front());
  queue_.pop_front();
  lock.unlock();
  not_full_.notify_one();
  return s;
}

std::optional<std::chrono::nanoseconds> BufferedStream::first_read_latency()
    const {
  std::lock_guard lock(mu_);
  return first_latency_;
}

std::unique_ptr<SampleSource> open_buffered(
    std::unique_ptr<SampleSource> source, BufferedStreamConfig config) {
  return std::make_unique<BufferedStream>(std::move(source), std::move(config));
}

}  // namespace dynbucket
