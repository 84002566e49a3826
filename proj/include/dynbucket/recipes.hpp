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

#ifndef DYNBUCKET_RECIPES_HPP
#define DYNBUCKET_RECIPES_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "dynbucket/batch_sizes.hpp"
#include "dynbucket/bucketing.hpp"
#include "dynbucket/oomptimizer.hpp"
#include "dynbucket/sampler.hpp"

namespace dynbucket {

// Sampling scheme ladder:
//   A  1D duration bins, duration heuristic (360 s), no TPS filter
//   B  A + TPS filter (25)
//   C  B with calibrated per-bucket batch sizes (token cap per bin)
//   D  C with two token sub-bins per duration bin
enum class Scheme { kA, kB, kC, kD };

std::optional<Scheme> parse_scheme(std::string_view name) noexcept;
char scheme_letter(Scheme scheme) noexcept;

struct SchemeOptions {
  std::size_t num_buckets = 30;
  std::size_t num_subbins = 2;  // used by scheme D
  double duration_threshold = 360.0;
  double tps_threshold = 25.0;
  MemoryModel memory = transformer_like_memory_model();
  double capacity = reference_capacity();
  std::size_t max_batch = kDefaultMaxBatch;
  std::size_t buffer_capacity = 10'000;
  AllocationPolicy allocation = AllocationPolicy::kStrict;
  std::uint64_t seed = 0;
};

struct SchemeSetup {
  SamplerConfig config;
  std::optional<BucketBatchSizes> sizes;  // schemes C and D
  EstimationDiagnostics diagnostics;
};

// Estimates buckets (and for C/D calibrates batch sizes) on `population`.
// Schemes B-D estimate on the TPS-filtered population. For C/D the buffer is
// raised to at least the sum of all bucket batch sizes, so a full buffer
// always holds a ready bucket.
SchemeSetup prepare_scheme(Scheme scheme, std::span<const Sample> population,
                           const SchemeOptions& options);

}  // namespace dynbucket

#endif  // DYNBUCKET_RECIPES_HPP
