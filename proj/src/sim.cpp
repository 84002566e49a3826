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

#include "dynbucket/sim.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "dynbucket/error.hpp"
#include "dynbucket/rng.hpp"

namespace dynbucket {

namespace {

constexpr std::uint64_t kDataTag = 0x646174612D72616EULL;    // "data-ran"
constexpr std::uint64_t kSelectTag = 0x73656C6563742D72ULL;  // "select-r"

}  // namespace

void validate(const StepCostModel& m) {
  for (double v : {m.k0, m.k1, m.k2, m.k3, m.k4}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("step cost coefficients must be finite and >= 0");
    }
  }
}

StepCostModel quadratic_step_cost_model() {
  return StepCostModel{0.2, 1e-3, 5e-4, 1e-4, 0.0};
}

StepCostModel constant_step_cost_model() {
  return StepCostModel{1.0, 0.0, 0.0, 0.0, 0.0};
}

std::uint64_t rank_data_seed(std::uint64_t seed, std::size_t rank) {
  return mix_seed(seed, kDataTag, rank);
}

std::uint64_t rank_selection_seed(std::uint64_t seed, std::size_t rank) {
  return mix_seed(seed, kSelectTag, rank);
}

namespace {

struct RunResult {
  double mean_step_time = 0.0;
  std::size_t fallbacks = 0;
};

RunResult run(std::size_t world_size, std::size_t steps,
              const SamplerConfig& base, const StepCostModel& cost,
              const SynthSpec& data, std::uint64_t seed, bool synced) {
  std::vector<Sampler> ranks;
  ranks.reserve(world_size);
  for (std::size_t r = 0; r < world_size; ++r) {
    SynthSpec stream = data;
    stream.seed = rank_data_seed(seed, r);
    SamplerConfig cfg = base;
    cfg.sync = SyncConfig{rank_selection_seed(seed, synced ? 0 : r), r,
                          world_size};
    ranks.emplace_back(std::make_unique<SynthGenerator>(stream),
                       std::move(cfg));
  }

  double total = 0.0;
  for (std::size_t step = 0; step < steps; ++step) {
    double slowest = 0.0;
    for (std::size_t r = 0; r < world_size; ++r) {
      auto batch = ranks[r].next_batch();
      if (!batch) {
        throw SimulationError("rank " + std::to_string(r) +
                              " ran out of data at step " +
                              std::to_string(step) + " of " +
                              std::to_string(steps));
      }
      slowest = std::max(slowest, cost(*batch));
    }
    total += slowest;
  }

  RunResult result;
  result.mean_step_time = total / static_cast<double>(steps);
  for (const Sampler& s : ranks) result.fallbacks += s.stats().fallback_selections;
  return result;
}

}  // namespace

DdpSimReport simulate_ddp(std::size_t world_size, std::size_t steps,
                          const SamplerConfig& sampler_config,
                          const StepCostModel& cost, const SynthSpec& data,
                          std::uint64_t seed) {
  if (world_size < 1) throw InvalidArgument("world_size must be >= 1");
  if (steps < 1) throw InvalidArgument("steps must be >= 1");
  validate(cost);
  validate(data);
  if (std::holds_alternative<FixedBatch>(sampler_config.batching)) {
    throw InvalidArgument("DDP simulation needs a bucketed batching mode");
  }

  const RunResult synced =
      run(world_size, steps, sampler_config, cost, data, seed, true);
  const RunResult unsynced =
      run(world_size, steps, sampler_config, cost, data, seed, false);

  DdpSimReport report;
  report.world_size = world_size;
  report.steps = steps;
  report.mean_step_time_sync = synced.mean_step_time;
  report.mean_step_time_unsync = unsynced.mean_step_time;
  report.speedup_percent =
      unsynced.mean_step_time > 0.0
          ? 100.0 * (unsynced.mean_step_time - synced.mean_step_time) /
                unsynced.mean_step_time
          : 0.0;
  report.fallback_selections_sync = synced.fallbacks;
  return report;
}

void validate(const InferenceCostModel& m) {
  if (!(m.enc_layer_cost > 0.0) || !(m.dec_layer_step_cost > 0.0)) {
    throw InvalidArgument("layer costs must be > 0");
  }
  if (m.enc_layers < 1) throw InvalidArgument("enc_layers must be >= 1");
  if (!(m.tokens_per_second_out >= 0.0)) {
    throw InvalidArgument("tokens_per_second_out must be >= 0");
  }
}

double predict_rtfx(const InferenceCostModel& m, double audio_seconds) {
  validate(m);
  if (!(audio_seconds > 0.0)) throw InvalidArgument("audio_seconds must be > 0");
  const double wall =
      audio_seconds *
      (static_cast<double>(m.enc_layers) * m.enc_layer_cost +
       m.tokens_per_second_out * static_cast<double>(m.dec_layers) *
           m.dec_layer_step_cost);
  return audio_seconds / wall;
}

InferenceCostModel fit_inference_cost(const RtfxObservation& first,
                                      const RtfxObservation& second) {
  if (!(first.rtfx > 0.0) || !(second.rtfx > 0.0)) {
    throw InvalidArgument("observed RTFx must be > 0");
  }
  const double e1 = static_cast<double>(first.enc_layers);
  const double d1 = static_cast<double>(first.dec_layers);
  const double e2 = static_cast<double>(second.enc_layers);
  const double d2 = static_cast<double>(second.dec_layers);
  const double det = e1 * d2 - e2 * d1;
  if (det == 0.0) {
    throw InvalidArgument("observations do not determine both layer costs");
  }
  const double w1 = 1.0 / first.rtfx;
  const double w2 = 1.0 / second.rtfx;
  InferenceCostModel m;
  m.enc_layer_cost = (w1 * d2 - w2 * d1) / det;
  m.dec_layer_step_cost = (e1 * w2 - e2 * w1) / det;
  m.enc_layers = first.enc_layers;
  m.dec_layers = first.dec_layers;
  m.tokens_per_second_out = 1.0;
  validate(m);
  return m;
}

}  // namespace dynbucket
