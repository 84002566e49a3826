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

#ifndef DYNBUCKET_DATAMODEL_HPP
#define DYNBUCKET_DATAMODEL_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dynbucket {

class SampleSource;

// One training example: input length in seconds, output length in tokens.
struct Sample {
  std::string id;
  double input_len = 0.0;
  std::int64_t output_len = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

// Throws ValidationError unless input_len > 0 and output_len >= 0.
void validate(const Sample& sample);

// Output token rate (tokens per second of input).
double tps(const Sample& sample);

// Fixed padded shape, used when every batch is padded to the same size.
struct PadShape {
  double input_seconds = 0.0;
  std::int64_t output_tokens = 0;
};

// A non-empty group of samples that is padded to a common shape.
class MiniBatch {
 public:
  explicit MiniBatch(std::vector<Sample> samples,
                     std::optional<std::size_t> bucket_id = std::nullopt);

  const std::vector<Sample>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  std::optional<std::size_t> bucket_id() const noexcept { return bucket_id_; }
  double max_input() const noexcept { return max_input_; }
  std::int64_t max_output() const noexcept { return max_output_; }
  double total_input() const noexcept { return total_input_; }
  std::int64_t total_output() const noexcept { return total_output_; }

 private:
  std::vector<Sample> samples_;
  std::optional<std::size_t> bucket_id_;
  double max_input_ = 0.0;
  std::int64_t max_output_ = 0;
  double total_input_ = 0.0;
  std::int64_t total_output_ = 0;
};

// Padded-cell accounting. Input cells are seconds x rows, output cells are
// token slots.
struct PaddingStats {
  double input_pad_frac = 0.0;
  double output_pad_frac = 0.0;
  double total_input_cells = 0.0;
  double padded_input_cells = 0.0;
  std::int64_t total_output_cells = 0;
  std::int64_t padded_output_cells = 0;

  // Sums the cell counts and recomputes both fractions.
  PaddingStats& operator+=(const PaddingStats& other);
};

// Throws InvalidArgument if pad_to is smaller than the batch maxima.
PaddingStats padding_stats(const MiniBatch& batch,
                           std::optional<PadShape> pad_to = std::nullopt);

struct TpsBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double mean = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
};

struct TpsHistogram {
  double bin_width = 0.0;
  std::vector<TpsBin> bins;  // contiguous from [0, w); trailing empty bins trimmed

  std::size_t total_count() const noexcept;
};

// Nearest-rank percentile of an ascending-sorted, non-empty range.
double nearest_rank(std::span<const double> sorted, double percent);

TpsHistogram tps_histogram(std::span<const Sample> samples,
                           double duration_bin_width);
TpsHistogram tps_histogram(SampleSource& source, double duration_bin_width);

}  // namespace dynbucket

#endif  // DYNBUCKET_DATAMODEL_HPP
