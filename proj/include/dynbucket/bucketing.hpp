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

#ifndef DYNBUCKET_BUCKETING_HPP
#define DYNBUCKET_BUCKETING_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dynbucket/datamodel.hpp"

namespace dynbucket {

class SampleSource;

// Duration bins with optional token sub-bins. Bucket (i, j) has flat index
// i * num_subbins() + j; a 1D spec behaves as one unbounded sub-bin per bin.
class BucketSpec {
 public:
  BucketSpec() = default;

  // Throws InvalidArgument when the bounds break the spec invariants.
  explicit BucketSpec(std::vector<double> duration_bounds,
                      std::vector<std::vector<std::int64_t>> token_bounds = {});

  const std::vector<double>& duration_bounds() const noexcept {
    return duration_bounds_;
  }
  const std::vector<std::vector<std::int64_t>>& token_bounds() const noexcept {
    return token_bounds_;
  }

  bool is_2d() const noexcept { return !token_bounds_.empty(); }
  std::size_t num_duration_bins() const noexcept {
    return duration_bounds_.size();
  }
  std::size_t num_subbins() const noexcept {
    return is_2d() ? token_bounds_.front().size() : 1;
  }
  std::size_t num_buckets() const noexcept {
    return num_duration_bins() * num_subbins();
  }

  std::size_t flat_index(std::size_t bin, std::size_t subbin) const noexcept {
    return bin * num_subbins() + subbin;
  }
  std::size_t bin_of(std::size_t flat) const noexcept {
    return flat / num_subbins();
  }
  std::size_t subbin_of(std::size_t flat) const noexcept {
    return flat % num_subbins();
  }

  double duration_bound(std::size_t flat) const {
    return duration_bounds_.at(bin_of(flat));
  }
  // nullopt for 1D specs (no token cap).
  std::optional<std::int64_t> token_bound(std::size_t flat) const;

  // True when the sample fits inside the bucket's bounds.
  bool fits(const Sample& sample, std::size_t flat) const;

  friend bool operator==(const BucketSpec&, const BucketSpec&) = default;

 private:
  std::vector<double> duration_bounds_;
  std::vector<std::vector<std::int64_t>> token_bounds_;
};

// Text serialization; the format is described in docs/formats.md.
std::string to_text(const BucketSpec& spec);
BucketSpec bucket_spec_from_text(std::string_view text);

enum class DiscardReason {
  kExceedsMaxDuration,
  kExceedsTokenBoundStrict,
  kExceedsAllBucketsFlexible,
  kTpsFiltered,
};

std::string_view to_string(DiscardReason reason) noexcept;

class Allocation {
 public:
  static Allocation assigned(std::size_t bucket) {
    return Allocation(bucket, DiscardReason::kExceedsMaxDuration);
  }
  static Allocation discarded(DiscardReason reason) {
    return Allocation(std::nullopt, reason);
  }

  bool is_assigned() const noexcept { return bucket_.has_value(); }
  std::size_t bucket() const { return bucket_.value(); }
  // Only meaningful when !is_assigned().
  DiscardReason reason() const noexcept { return reason_; }

  friend bool operator==(const Allocation& a, const Allocation& b) {
    return a.bucket_ == b.bucket_ &&
           (a.bucket_.has_value() || a.reason_ == b.reason_);
  }

 private:
  Allocation(std::optional<std::size_t> bucket, DiscardReason reason)
      : bucket_(bucket), reason_(reason) {}

  std::optional<std::size_t> bucket_;
  DiscardReason reason_;
};

enum class AllocationPolicy { kStrict, kFlexible };

Allocation allocate_strict(const Sample& sample, const BucketSpec& spec);
Allocation allocate_flexible(const Sample& sample, const BucketSpec& spec);
Allocation allocate(const Sample& sample, const BucketSpec& spec,
                    AllocationPolicy policy);

struct EstimationDiagnostics {
  // Number of duplicate bounds removed (degenerate populations).
  std::size_t merged_bounds = 0;
  // Sub-bounds synthesized to keep every duration bin at the same number of
  // token sub-bins.
  std::size_t padded_subbounds = 0;
  // Duration bins that received sub-bounds from a neighbouring bin.
  std::size_t inherited_bins = 0;
};

// Greedy equal-occupancy split of a sorted sequence: samples accumulate until
// the running weight reaches total / num_bins, the crossing value closes the
// bin and the surplus carries over. The last bound is the maximum value and
// duplicate bounds are merged.
std::vector<double> equal_occupancy_bounds(std::span<const double> sorted,
                                           std::span<const double> weights,
                                           std::size_t num_bins,
                                           std::size_t* merged = nullptr);

BucketSpec estimate_duration_bins(std::span<const Sample> samples,
                                  std::size_t num_buckets,
                                  EstimationDiagnostics* diag = nullptr);
BucketSpec estimate_duration_bins(SampleSource& source,
                                  std::size_t num_buckets,
                                  EstimationDiagnostics* diag = nullptr);

// How sub-bin occupancy is measured.
enum class SubbinWeighting { kTokens, kCount };

BucketSpec estimate_token_subbins(
    std::span<const Sample> samples, const BucketSpec& spec1d,
    std::size_t num_subbins,
    SubbinWeighting weighting = SubbinWeighting::kTokens,
    EstimationDiagnostics* diag = nullptr);

// Per-duration-bin cumulative duration of the samples that fall in each bin
// (samples beyond the last bound are ignored).
std::vector<double> bin_occupancy(std::span<const Sample> samples,
                                  const BucketSpec& spec);

}  // namespace dynbucket

#endif  // DYNBUCKET_BUCKETING_HPP
