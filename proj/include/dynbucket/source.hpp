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

#ifndef DYNBUCKET_SOURCE_HPP
#define DYNBUCKET_SOURCE_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "dynbucket/datamodel.hpp"

namespace dynbucket {

// Pull-based, single-consumer stream of samples. next() returns nullopt at
// end-of-stream and keeps returning nullopt afterwards.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual std::optional<Sample> next() = 0;
};

class VectorSource final : public SampleSource {
 public:
  explicit VectorSource(std::vector<Sample> samples)
      : samples_(std::move(samples)) {}

  std::optional<Sample> next() override {
    if (pos_ >= samples_.size()) return std::nullopt;
    return samples_[pos_++];
  }

 private:
  std::vector<Sample> samples_;
  std::size_t pos_ = 0;
};

// Drains a source into a vector.
std::vector<Sample> collect(SampleSource& source);

}  // namespace dynbucket

#endif  // DYNBUCKET_SOURCE_HPP
