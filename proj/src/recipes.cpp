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

#include "dynbucket/recipes.hpp"

#include <numeric>
#include <vector>

#include "dynbucket/error.hpp"

namespace dynbucket {

std::optional<Scheme> parse_scheme(std::string_view name) noexcept {
  if (name == "A" || name == "a") return Scheme::kA;
  if (name == "B" || name == "b") return Scheme::kB;
  if (name == "C" || name == "c") return Scheme::kC;
  if (name == "D" || name == "d") return Scheme::kD;
  return std::nullopt;
}

char scheme_letter(Scheme scheme) noexcept {
  switch (scheme) {
    case Scheme::kA: return 'A';
    case Scheme::kB: return 'B';
    case Scheme::kC: return 'C';
    case Scheme::kD: return 'D';
  }
  return '?';
}

SchemeSetup prepare_scheme(Scheme scheme, std::span<const Sample> population,
                           const SchemeOptions& options) {
  SchemeSetup setup;
  SamplerConfig& cfg = setup.config;
  cfg.buffer_capacity = options.buffer_capacity;
  cfg.allocation = options.allocation;
  cfg.seed = options.seed;

  std::vector<Sample> filtered;
  std::span<const Sample> basis = population;
  if (scheme != Scheme::kA) {
    cfg.tps_threshold = options.tps_threshold;
    for (const Sample& s : population) {
      if (filter_tps(s, options.tps_threshold) == TpsDecision::kKeep) {
        filtered.push_back(s);
      }
    }
    basis = filtered;
  }

  BucketSpec spec1d =
      estimate_duration_bins(basis, options.num_buckets, &setup.diagnostics);
  if (scheme == Scheme::kA || scheme == Scheme::kB) {
    cfg.spec = std::move(spec1d);
    cfg.batching = DurationHeuristic{options.duration_threshold};
    return setup;
  }

  const std::size_t subbins = scheme == Scheme::kD ? options.num_subbins : 1;
  cfg.spec = estimate_token_subbins(basis, spec1d, subbins,
                                    SubbinWeighting::kTokens,
                                    &setup.diagnostics);
  BucketBatchSizes sizes = oomptimize(cfg.spec, options.memory,
                                      options.capacity, options.max_batch);
  const auto& v = sizes.values();
  cfg.buffer_capacity = std::max(
      cfg.buffer_capacity, std::accumulate(v.begin(), v.end(), std::size_t{0}));
  cfg.batching = PerBucketSizes{sizes};
  setup.sizes = std::move(sizes);
  return setup;
}

}  // namespace dynbucket
