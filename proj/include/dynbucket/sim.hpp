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

#ifndef DYNBUCKET_SIM_HPP
#define DYNBUCKET_SIM_HPP

#include <cstddef>
#include <cstdint>

#include "dynbucket/datamodel.hpp"
#include "dynbucket/ingest.hpp"
#include "dynbucket/sampler.hpp"

namespace dynbucket {

// Training step time t(B, Tin, Tout) = k0 + B * (k1*Tin + k2*Tin^2 + k3*Tout
// + k4*Tout^2). Units are arbitrary but fixed.
struct StepCostModel {
  double k0 = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double k4 = 0.0;

  double operator()(double batch, double tin, double tout) const noexcept {
    return k0 + batch * (k1 * tin + k2 * tin * tin + k3 * tout +
                         k4 * tout * tout);
  }
  double operator()(const MiniBatch& b) const noexcept {
    return (*this)(static_cast<double>(b.size()), b.max_input(),
                   static_cast<double>(b.max_output()));
  }
};

void validate(const StepCostModel& model);

// Reference step cost with a quadratic input-length term (attention-like).
StepCostModel quadratic_step_cost_model();
// Shape-independent cost (k0 only).
StepCostModel constant_step_cost_model();

struct DdpSimReport {
  std::size_t world_size = 0;
  std::size_t steps = 0;
  double mean_step_time_sync = 0.0;
  double mean_step_time_unsync = 0.0;
  double speedup_percent = 0.0;  // 100 * (unsync - sync) / unsync
  std::size_t fallback_selections_sync = 0;
};

// Simulates `world_size` data-parallel ranks for `steps` global steps. Rank r
// draws from its own synthetic stream (`data` with a seed derived from
// (seed, r)); a global step lasts as long as the slowest rank's batch. The
// synced run gives every rank the same selection seed, the unsynced run a
// per-rank one (rank 0's equals the shared seed). Both runs see identical
// data streams. Any `sync` in `sampler_config` is overridden.
// Throws SimulationError if a rank runs out of data before `steps`.
DdpSimReport simulate_ddp(std::size_t world_size, std::size_t steps,
                          const SamplerConfig& sampler_config,
                          const StepCostModel& cost, const SynthSpec& data,
                          std::uint64_t seed);

// Per-rank data seed and bucket-selection seeds used by simulate_ddp.
std::uint64_t rank_data_seed(std::uint64_t seed, std::size_t rank);
std::uint64_t rank_selection_seed(std::uint64_t seed, std::size_t rank);

// Per-audio-second inference cost: enc_layers * enc_layer_cost +
// tokens_per_second_out * dec_layers * dec_layer_step_cost.
struct InferenceCostModel {
  double enc_layer_cost = 0.0;       // time per encoder layer per audio second
  double dec_layer_step_cost = 0.0;  // time per decoder layer per token
  std::size_t enc_layers = 1;
  std::size_t dec_layers = 1;        // 0 models an encoder-only network
  double tokens_per_second_out = 1.0;
};

void validate(const InferenceCostModel& model);

// Inverse real-time factor: audio seconds processed per second of wall time.
double predict_rtfx(const InferenceCostModel& model, double audio_seconds);

struct RtfxObservation {
  std::size_t enc_layers = 0;
  std::size_t dec_layers = 0;
  double rtfx = 0.0;
};

// Solves enc_layers * e + dec_layers * d = 1 / rtfx for two observations.
// The emission rate is folded into d (tokens_per_second_out = 1). The layer
// counts of the returned model are those of `first`.
InferenceCostModel fit_inference_cost(const RtfxObservation& first,
                                      const RtfxObservation& second);

}  // namespace dynbucket

#endif  // DYNBUCKET_SIM_HPP
