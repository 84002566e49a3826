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

#include "dynbucket/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dynbucket/error.hpp"

namespace dynbucket {

namespace {

constexpr std::uint64_t kSelectTag = 0x73796E632D73656CULL;  // "sync-sel"

}  // namespace

TpsDecision filter_tps(const Sample& sample, double threshold) {
  if (!(threshold > 0.0)) throw InvalidArgument("TPS threshold must be > 0");
  return tps(sample) > threshold ? TpsDecision::kDrop : TpsDecision::kKeep;
}

void validate(const SamplerConfig& config) {
  if (config.tps_threshold && !(*config.tps_threshold > 0.0)) {
    throw InvalidArgument("TPS threshold must be > 0");
  }
  if (config.sync) {
    const SyncConfig& s = *config.sync;
    if (s.world_size == 0 || s.rank >= s.world_size) {
      throw InvalidArgument("sync config needs 0 <= rank < world_size");
    }
  }
  if (const auto* fixed = std::get_if<FixedBatch>(&config.batching)) {
    if (fixed->size < 1) throw InvalidArgument("fixed batch size must be >= 1");
    if (!(fixed->pad_to.input_seconds > 0.0) ||
        fixed->pad_to.output_tokens < 0) {
      throw InvalidArgument("fixed batch pad_to shape must be positive");
    }
    return;
  }
  if (config.spec.num_duration_bins() == 0) {
    throw InvalidArgument("bucketed sampling needs a bucket spec");
  }
  if (config.buffer_capacity < 1) {
    throw InvalidArgument("buffer capacity must be >= 1");
  }
  if (const auto* dh = std::get_if<DurationHeuristic>(&config.batching)) {
    if (!(dh->threshold_seconds > 0.0)) {
      throw InvalidArgument("duration threshold must be > 0");
    }
  }
  if (const auto* pb = std::get_if<PerBucketSizes>(&config.batching)) {
    if (pb->sizes.num_buckets() != config.spec.num_buckets()) {
      throw InvalidArgument("batch sizes must cover every bucket (" +
                            std::to_string(config.spec.num_buckets()) +
                            " expected, got " +
                            std::to_string(pb->sizes.num_buckets()) + ")");
    }
    if (config.buffer_capacity < pb->sizes.max()) {
      throw InvalidArgument(
          "buffer capacity must be >= the largest bucket batch size");
    }
  }
}

std::size_t sync_target(std::uint64_t shared_seed, std::uint64_t step,
                        std::size_t total_buckets) {
  return static_cast<std::size_t>(
      scale_to_range(mix_seed(shared_seed, kSelectTag, step), total_buckets));
}

std::size_t select_bucket_synced(const SyncConfig& sync, std::uint64_t step,
                                 std::span<const std::size_t> ready,
                                 std::size_t total_buckets) {
  if (ready.empty()) {
    throw InvalidArgument("synchronized selection needs a ready bucket");
  }
  if (total_buckets == 0) throw InvalidArgument("total_buckets must be >= 1");
  const std::size_t target = sync_target(sync.shared_seed, step, total_buckets);
  std::size_t best = ready.front();
  std::size_t best_dist = std::numeric_limits<std::size_t>::max();
  for (std::size_t b : ready) {
    const std::size_t dist = b > target ? b - target : target - b;
    if (dist < best_dist || (dist == best_dist && b < best)) {
      best = b;
      best_dist = dist;
    }
  }
  return best;
}

Sampler::Sampler(std::unique_ptr<SampleSource> source, SamplerConfig config)
    : source_(std::move(source)),
      config_(std::move(config)),
      select_rng_(mix_seed(config_.seed, kSelectTag)) {
  if (!source_) throw InvalidArgument("sampler needs a sample source");
  validate(config_);
  if (!std::holds_alternative<FixedBatch>(config_.batching)) {
    buckets_.resize(config_.spec.num_buckets());
  }
}

std::optional<MiniBatch> Sampler::next_batch() {
  return std::holds_alternative<FixedBatch>(config_.batching)
             ? next_fixed()
             : next_bucketed();
}

bool Sampler::keep(const Sample& s) {
  if (config_.tps_threshold &&
      filter_tps(s, *config_.tps_threshold) == TpsDecision::kDrop) {
    ++stats_.samples_filtered_tps;
    return false;
  }
  return true;
}

std::optional<MiniBatch> Sampler::next_fixed() {
  const auto& fixed = std::get<FixedBatch>(config_.batching);
  std::vector<Sample> group;
  group.reserve(fixed.size);
  while (group.size() < fixed.size) {
    auto s = source_->next();
    if (!s) break;
    if (!keep(*s)) continue;
    // A sample larger than the fixed shape cannot be padded into it.
    if (s->input_len > fixed.pad_to.input_seconds ||
        s->output_len > fixed.pad_to.output_tokens) {
      ++stats_.samples_discarded_allocation;
      continue;
    }
    group.push_back(std::move(*s));
  }
  if (group.empty()) return std::nullopt;
  MiniBatch batch(std::move(group));
  record(batch, fixed.pad_to);
  return batch;
}

void Sampler::refill() {
  while (!exhausted_ && buffered_ < config_.buffer_capacity) {
    auto s = source_->next();
    if (!s) {
      exhausted_ = true;
      break;
    }
    if (!keep(*s)) continue;
    const Allocation alloc = allocate(*s, config_.spec, config_.allocation);
    if (!alloc.is_assigned()) {
      ++stats_.samples_discarded_allocation;
      continue;
    }
    Bucket& b = buckets_[alloc.bucket()];
    b.duration += s->input_len;
    b.queue.push_back(std::move(*s));
    ++buffered_;
  }
}

bool Sampler::ready(std::size_t bucket) const {
  const Bucket& b = buckets_[bucket];
  if (b.queue.empty()) return false;
  if (exhausted_) return true;
  if (const auto* dh = std::get_if<DurationHeuristic>(&config_.batching)) {
    return b.duration >= dh->threshold_seconds;
  }
  const auto& sizes = std::get<PerBucketSizes>(config_.batching).sizes;
  return b.queue.size() >= sizes.at(bucket);
}

std::size_t Sampler::choose(const std::vector<std::size_t>& ready) {
  if (config_.sync) {
    const std::size_t pick = select_bucket_synced(*config_.sync, step_, ready,
                                                  buckets_.size());
    if (pick != sync_target(config_.sync->shared_seed, step_,
                            buckets_.size())) {
      ++stats_.fallback_selections;
    }
    return pick;
  }
  if (config_.selection == SelectionWeighting::kOccupancy) {
    std::uint64_t total = 0;
    for (std::size_t b : ready) total += buckets_[b].queue.size();
    std::uint64_t r = select_rng_.index(total);
    for (std::size_t b : ready) {
      const std::uint64_t w = buckets_[b].queue.size();
      if (r < w) return b;
      r -= w;
    }
    return ready.back();
  }
  return ready[static_cast<std::size_t>(select_rng_.index(ready.size()))];
}

std::size_t Sampler::forced_choice() const {
  // Fullest bucket by queued duration; ties go to the lower index.
  std::size_t best = 0;
  for (std::size_t i = 1; i < buckets_.size(); ++i) {
    if (buckets_[i].duration > buckets_[best].duration) best = i;
  }
  return best;
}

MiniBatch Sampler::take(std::size_t bucket) {
  Bucket& b = buckets_[bucket];
  std::size_t n = b.queue.size();
  if (const auto* dh = std::get_if<DurationHeuristic>(&config_.batching)) {
    double acc = 0.0;
    for (std::size_t k = 0; k < b.queue.size(); ++k) {
      acc += b.queue[k].input_len;
      if (acc >= dh->threshold_seconds) {
        n = k + 1;
        break;
      }
    }
  } else {
    const auto& sizes = std::get<PerBucketSizes>(config_.batching).sizes;
    n = std::min(n, sizes.at(bucket));
  }

  std::vector<Sample> out(std::make_move_iterator(b.queue.begin()),
                          std::make_move_iterator(b.queue.begin() +
                                                  static_cast<long>(n)));
  b.queue.erase(b.queue.begin(), b.queue.begin() + static_cast<long>(n));
  buffered_ -= n;
  // Recompute from the front so later prefix scans see the same fold.
  b.duration = 0.0;
  for (const Sample& s : b.queue) b.duration += s.input_len;
  return MiniBatch(std::move(out), bucket);
}

std::optional<MiniBatch> Sampler::next_bucketed() {
  refill();
  std::vector<std::size_t> ready_set;
  for (std::size_t i = 0; i < buckets_.size(); ++i) {
    if (ready(i)) ready_set.push_back(i);
  }

  std::size_t bucket = 0;
  if (!ready_set.empty()) {
    bucket = choose(ready_set);
  } else if (buffered_ > 0) {
    // Full buffer with no ready bucket: flush the fullest bucket.
    bucket = forced_choice();
    ++stats_.forced_batches;
  } else {
    return std::nullopt;
  }
  ++step_;
  MiniBatch batch = take(bucket);
  record(batch, std::nullopt);
  return batch;
}

void Sampler::record(const MiniBatch& batch, std::optional<PadShape> pad_to) {
  ++stats_.batches_emitted;
  stats_.samples_emitted += batch.size();
  stats_.mean_batch_size = static_cast<double>(stats_.samples_emitted) /
                           static_cast<double>(stats_.batches_emitted);
  stats_.padding += padding_stats(batch, pad_to);
}

}  // namespace dynbucket
