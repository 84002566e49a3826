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

#ifndef DYNBUCKET_OOMPTIMIZER_HPP
#define DYNBUCKET_OOMPTIMIZER_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dynbucket/batch_sizes.hpp"
#include "dynbucket/bucketing.hpp"
#include "dynbucket/datamodel.hpp"

namespace dynbucket {

// Analytic memory surrogate
//   m(B, Tin, Tout) = c0 + B * (c1*Tin + c2*Tin^2 + c3*Tout + c4*Tout^2
//                               + c5*Tin*Tout)
// with Tin in seconds and Tout in tokens. Units are arbitrary but fixed.
struct MemoryModel {
  std::array<double, 6> c{};

  double operator()(double batch, double tin, double tout) const noexcept {
    return c[0] + batch * (c[1] * tin + c[2] * tin * tin + c[3] * tout +
                           c[4] * tout * tout + c[5] * tin * tout);
  }
};

// Throws InvalidArgument on negative or non-finite coefficients.
void validate(const MemoryModel& model);

// Reference models. The coefficients are project choices, not measurements.
// Transformer-like: fixed weight/optimizer state plus linear activation
// terms, quadratic self-attention terms on both axes and a cross-attention
// term. Linear: m = B * Tin.
MemoryModel transformer_like_memory_model();
MemoryModel linear_memory_model();

// Capacity paired with transformer_like_memory_model(): the memory of a
// 360 s batch of 40 s / 1000-token samples, i.e. the largest shape the
// duration heuristic admits at 25 tokens/s.
double reference_capacity();

inline constexpr std::size_t kDefaultMaxBatch = std::size_t{1} << 16;

// Largest B in [1, max_batch] with model(B, tin, tout) <= capacity, by
// doubling then bisection. Throws CalibrationError (bucket index as given)
// if B = 1 does not fit. `evaluations`, if set, receives the model call count.
std::size_t max_batch_size(const MemoryModel& model, double tin, double tout,
                           double capacity, std::size_t max_batch,
                           std::size_t bucket = 0,
                           std::size_t* evaluations = nullptr);

// Calibrates every flat bucket at its (duration bound, token bound) corner.
// Requires a 2D spec (a 1D spec has no token bound to calibrate against).
BucketBatchSizes oomptimize(const BucketSpec& spec, const MemoryModel& model,
                            double capacity,
                            std::size_t max_batch = kDefaultMaxBatch);

struct MemoryTrace {
  std::vector<double> values;
  double max = 0.0;
  double mean = 0.0;
  double cv = 0.0;  // population standard deviation / mean
};

MemoryTrace memory_trace(std::span<const MiniBatch> batches,
                         const MemoryModel& model);

// Summary statistics of an arbitrary trace.
MemoryTrace summarize_trace(std::vector<double> values);

}  // namespace dynbucket

#endif  // DYNBUCKET_OOMPTIMIZER_HPP
