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

#include "dynbucket/batch_sizes.hpp"

#include <algorithm>

#include "dynbucket/error.hpp"
#include "text_util.hpp"

namespace dynbucket {

BucketBatchSizes::BucketBatchSizes(std::vector<std::size_t> sizes)
    : sizes_(std::move(sizes)) {
  if (std::find(sizes_.begin(), sizes_.end(), 0u) != sizes_.end()) {
    throw InvalidArgument("bucket batch sizes must be positive");
  }
}

std::size_t BucketBatchSizes::max() const noexcept {
  return sizes_.empty() ? 0 : *std::max_element(sizes_.begin(), sizes_.end());
}

std::string to_text(const BucketBatchSizes& sizes) {
  std::string out = "dynbucket-batch-sizes 1\n";
  out += "buckets " + std::to_string(sizes.num_buckets()) + "\n";
  for (std::size_t i = 0; i < sizes.num_buckets(); ++i) {
    out += std::to_string(i) + " " + std::to_string(sizes.at(i)) + "\n";
  }
  return out;
}

BucketBatchSizes batch_sizes_from_text(std::string_view text) {
  using detail::parse_number;
  const auto lines = detail::content_lines(text);
  if (lines.size() < 2) throw ParseError(1, "truncated batch sizes document");
  const auto header = detail::split_ws(lines[0].text);
  if (header.size() != 2 || header[0] != "dynbucket-batch-sizes" ||
      header[1] != "1") {
    throw ParseError(lines[0].no, "expected 'dynbucket-batch-sizes 1'");
  }
  const auto count = detail::split_ws(lines[1].text);
  if (count.size() != 2 || count[0] != "buckets") {
    throw ParseError(lines[1].no, "expected 'buckets <n>'");
  }
  const auto n = parse_number<std::size_t>(count[1], lines[1].no);
  if (lines.size() != n + 2) {
    throw ParseError(lines.back().no, "expected " + std::to_string(n) +
                                          " bucket rows");
  }
  std::vector<std::size_t> sizes;
  sizes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& line = lines[i + 2];
    const auto tok = detail::split_ws(line.text);
    if (tok.size() != 2 || parse_number<std::size_t>(tok[0], line.no) != i) {
      throw ParseError(line.no, "expected '<bucket> <size>' in index order");
    }
    const auto size = parse_number<std::size_t>(tok[1], line.no);
    if (size == 0) throw ParseError(line.no, "batch size must be positive");
    sizes.push_back(size);
  }
  return BucketBatchSizes(std::move(sizes));
}

}  // namespace dynbucket
