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

#include "dynbucket/datamodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dynbucket/error.hpp"
#include "dynbucket/source.hpp"

namespace dynbucket {

void validate(const Sample& sample) {
  if (!(sample.input_len > 0.0) || !std::isfinite(sample.input_len)) {
    throw ValidationError("sample '" + sample.id +
                          "': duration must be positive and finite");
  }
  if (sample.output_len < 0) {
    throw ValidationError("sample '" + sample.id +
                          "': token count must be non-negative");
  }
}

double tps(const Sample& sample) {
  return static_cast<double>(sample.output_len) / sample.input_len;
}

MiniBatch::MiniBatch(std::vector<Sample> samples,
                     std::optional<std::size_t> bucket_id)
    : samples_(std::move(samples)), bucket_id_(bucket_id) {
  if (samples_.empty()) throw InvalidArgument("mini-batch must not be empty");
  for (const Sample& s : samples_) {
    max_input_ = std::max(max_input_, s.input_len);
    max_output_ = std::max(max_output_, s.output_len);
    total_input_ += s.input_len;
    total_output_ += s.output_len;
  }
}

namespace {

double fraction(double padded, double total) {
  return total > 0.0 ? padded / total : 0.0;
}

}  // namespace

PaddingStats& PaddingStats::operator+=(const PaddingStats& other) {
  total_input_cells += other.total_input_cells;
  padded_input_cells += other.padded_input_cells;
  total_output_cells += other.total_output_cells;
  padded_output_cells += other.padded_output_cells;
  input_pad_frac = fraction(padded_input_cells, total_input_cells);
  output_pad_frac = fraction(static_cast<double>(padded_output_cells),
                             static_cast<double>(total_output_cells));
  return *this;
}

PaddingStats padding_stats(const MiniBatch& batch,
                           std::optional<PadShape> pad_to) {
  double width_in = batch.max_input();
  std::int64_t width_out = batch.max_output();
  if (pad_to) {
    if (pad_to->input_seconds < width_in ||
        pad_to->output_tokens < width_out) {
      throw InvalidArgument("pad_to shape is smaller than the batch maxima");
    }
    width_in = pad_to->input_seconds;
    width_out = pad_to->output_tokens;
  }
  const auto rows = static_cast<std::int64_t>(batch.size());
  PaddingStats stats;
  stats.total_input_cells = static_cast<double>(rows) * width_in;
  // Clamp rounding noise; padded cells can never be negative.
  stats.padded_input_cells =
      std::max(0.0, stats.total_input_cells - batch.total_input());
  stats.total_output_cells = rows * width_out;
  stats.padded_output_cells = stats.total_output_cells - batch.total_output();
  stats.input_pad_frac =
      fraction(stats.padded_input_cells, stats.total_input_cells);
  stats.output_pad_frac =
      fraction(static_cast<double>(stats.padded_output_cells),
               static_cast<double>(stats.total_output_cells));
  return stats;
}

std::size_t TpsHistogram::total_count() const noexcept {
  std::size_t n = 0;
  for (const TpsBin& b : bins) n += b.count;
  return n;
}

double nearest_rank(std::span<const double> sorted, double percent) {
  if (sorted.empty()) throw InvalidArgument("percentile of empty range");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(percent / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

namespace {

class TpsAccumulator {
 public:
  explicit TpsAccumulator(double width) : width_(width) {
    if (!(width > 0.0)) {
      throw InvalidArgument("duration bin width must be positive");
    }
  }

  void add(const Sample& s) {
    const auto k = static_cast<std::size_t>(std::floor(s.input_len / width_));
    if (k >= values_.size()) values_.resize(k + 1);
    values_[k].push_back(tps(s));
  }

  TpsHistogram finish() {
    TpsHistogram hist;
    hist.bin_width = width_;
    hist.bins.reserve(values_.size());
    for (std::size_t k = 0; k < values_.size(); ++k) {
      auto& v = values_[k];
      TpsBin bin;
      bin.lo = static_cast<double>(k) * width_;
      bin.hi = static_cast<double>(k + 1) * width_;
      bin.count = v.size();
      if (!v.empty()) {
        std::sort(v.begin(), v.end());
        bin.mean = std::accumulate(v.begin(), v.end(), 0.0) /
                   static_cast<double>(v.size());
        bin.p50 = nearest_rank(v, 50.0);
        bin.p90 = nearest_rank(v, 90.0);
        bin.p99 = nearest_rank(v, 99.0);
      }
      hist.bins.push_back(bin);
    }
    return hist;
  }

 private:
  double width_;
  std::vector<std::vector<double>> values_;
};

}  // namespace

TpsHistogram tps_histogram(std::span<const Sample> samples,
                           double duration_bin_width) {
  TpsAccumulator acc(duration_bin_width);
  for (const Sample& s : samples) acc.add(s);
  return acc.finish();
}

TpsHistogram tps_histogram(SampleSource& source, double duration_bin_width) {
  TpsAccumulator acc(duration_bin_width);
  while (auto s = source.next()) acc.add(*s);
  return acc.finish();
}

std::vector<Sample> collect(SampleSource& source) {
  std::vector<Sample> out;
  while (auto s = source.next()) out.push_back(std::move(*s));
  return out;
}

}  // namespace dynbucket
