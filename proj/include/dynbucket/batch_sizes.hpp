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

#ifndef DYNBUCKET_BATCH_SIZES_HPP
#define DYNBUCKET_BATCH_SIZES_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dynbucket {

// Batch size per flat bucket index.
class BucketBatchSizes {
 public:
  BucketBatchSizes() = default;
  // Throws InvalidArgument if any size is zero.
  explicit BucketBatchSizes(std::vector<std::size_t> sizes);

  std::size_t num_buckets() const noexcept { return sizes_.size(); }
  std::size_t at(std::size_t flat) const { return sizes_.at(flat); }
  const std::vector<std::size_t>& values() const noexcept { return sizes_; }
  std::size_t max() const noexcept;

  friend bool operator==(const BucketBatchSizes&,
                         const BucketBatchSizes&) = default;

 private:
  std::vector<std::size_t> sizes_;
};

std::string to_text(const BucketBatchSizes& sizes);
BucketBatchSizes batch_sizes_from_text(std::string_view text);

}  // namespace dynbucket

#endif  // DYNBUCKET_BATCH_SIZES_HPP
