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

#ifndef DYNBUCKET_SAMPLER_HPP
#define DYNBUCKET_SAMPLER_HPP

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "dynbucket/batch_sizes.hpp"
#include "dynbucket/bucketing.hpp"
#include "dynbucket/datamodel.hpp"
#include "dynbucket/rng.hpp"
#include "dynbucket/source.hpp"

namespace dynbucket {

enum class TpsDecision { kKeep, kDrop };

// Drops samples whose token rate strictly exceeds the threshold.
TpsDecision filter_tps(const Sample& sample, double threshold);

// Accumulate samples until their cumulative duration reaches the threshold.
struct DurationHeuristic {
  double threshold_seconds = 360.0;
};

// Bucketing bypassed: stream-order groups padded to a fixed shape.
struct FixedBatch {
  std::size_t size = 768;
  PadShape pad_to{40.0, 0};
};

// Calibrated batch size per flat bucket.
struct PerBucketSizes {
  BucketBatchSizes sizes;
};

using BatchingMode = std::variant<DurationHeuristic, FixedBatch, PerBucketSizes>;

struct SyncConfig {
  std::uint64_t shared_seed = 0;
  std::size_t rank = 0;
  std::size_t world_size = 1;
};

// How a bucket is drawn among ready buckets when no SyncConfig is set.
enum class SelectionWeighting { kUniform, kOccupancy };

struct SamplerConfig {
  BucketSpec spec;
  std::size_t buffer_capacity = 10'000;
  BatchingMode batching = DurationHeuristic{};
  std::optional<double> tps_threshold;
  AllocationPolicy allocation = AllocationPolicy::kStrict;
  std::optional<SyncConfig> sync;
  std::uint64_t seed = 0;
  SelectionWeighting selection = SelectionWeighting::kUniform;
};

// Throws InvalidArgument on inconsistent configurations.
void validate(const SamplerConfig& config);

struct SamplerStats {
  std::size_t batches_emitted = 0;
  std::size_t samples_emitted = 0;
  std::size_t samples_filtered_tps = 0;
  std::size_t samples_discarded_allocation = 0;
  double mean_batch_size = 0.0;
  PaddingStats padding;
  std::size_t fallback_selections = 0;
  // Batches emitted from a full buffer in which no bucket was ready.
  std::size_t forced_batches = 0;
};

// Target bucket of the rank-synchronized draw: uniform on [0, total_buckets),
// a function of (shared_seed, step) only.
std::size_t sync_target(std::uint64_t shared_seed, std::uint64_t step,
                        std::size_t total_buckets);

// Returns the target bucket if ready, else the ready bucket closest to it by
// flat index (ties to the lower index). `ready` must be non-empty.
std::size_t select_bucket_synced(const SyncConfig& sync, std::uint64_t step,
                                 std::span<const std::size_t> ready,
                                 std::size_t total_buckets);

// Dynamic bucketing mini-batch sampler. Single consumer; not thread-safe.
class Sampler {
 public:
  Sampler(std::unique_ptr<SampleSource> source, SamplerConfig config);

  // Next mini-batch, or nullopt once the stream and every queue are drained.
  std::optional<MiniBatch> next_batch();

  const SamplerStats& stats() const noexcept { return stats_; }
  const SamplerConfig& config() const noexcept { return config_; }

 private:
  struct Bucket {
    std::deque<Sample> queue;
    double duration = 0.0;  // left fold of queued durations
  };

  std::optional<MiniBatch> next_fixed();
  std::optional<MiniBatch> next_bucketed();
  bool keep(const Sample& s);
  void refill();
  bool ready(std::size_t bucket) const;
  std::size_t choose(const std::vector<std::size_t>& ready);
  std::size_t forced_choice() const;
  MiniBatch take(std::size_t bucket);
  void record(const MiniBatch& batch, std::optional<PadShape> pad_to);

  std::unique_ptr<SampleSource> source_;
  SamplerConfig config_;
  Rng select_rng_;
  std::vector<Bucket> buckets_;
  std::size_t buffered_ = 0;
  bool exhausted_ = false;
  std::uint64_t step_ = 0;
  SamplerStats stats_;
};

}  // namespace dynbucket

#endif  // DYNBUCKET_SAMPLER_HPP
