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

#include "dynbucket/oomptimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dynbucket/error.hpp"

namespace dynbucket {

void validate(const MemoryModel& model) {
  for (double v : model.c) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("memory model coefficients must be finite and >= 0");
    }
  }
}

MemoryModel transformer_like_memory_model() {
  return MemoryModel{{2000.0, 5.0, 1.0, 0.5, 0.002, 0.02}};
}

MemoryModel linear_memory_model() {
  return MemoryModel{{0.0, 1.0, 0.0, 0.0, 0.0, 0.0}};
}

double reference_capacity() {
  return transformer_like_memory_model()(9.0, 40.0, 1000.0);
}

std::size_t max_batch_size(const MemoryModel& model, double tin, double tout,
                           double capacity, std::size_t max_batch,
                           std::size_t bucket, std::size_t* evaluations) {
  if (!(capacity > 0.0)) throw InvalidArgument("capacity must be > 0");
  if (max_batch < 1) throw InvalidArgument("max_batch must be >= 1");
  std::size_t calls = 0;
  auto fits = [&](std::size_t b) {
    ++calls;
    return model(static_cast<double>(b), tin, tout) <= capacity;
  };
  auto done = [&](std::size_t b) {
    if (evaluations) *evaluations = calls;
    return b;
  };

  if (!fits(1)) {
    if (evaluations) *evaluations = calls;
    throw CalibrationError(
        bucket, "bucket " + std::to_string(bucket) +
                    " too large for capacity: batch size 1 needs " +
                    std::to_string(model(1.0, tin, tout)) + " > " +
                    std::to_string(capacity));
  }

  // Doubling: lo always fits; stop at the first power of two that does not.
  std::size_t lo = 1;
  std::size_t hi = 0;
  while (lo < max_batch) {
    const std::size_t next = std::min(lo * 2, max_batch);
    if (!fits(next)) {
      hi = next;
      break;
    }
    lo = next;
  }
  if (hi == 0) return done(lo);

  // Bisection on (lo fits, hi does not).
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (fits(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return done(lo);
}

BucketBatchSizes oomptimize(const BucketSpec& spec, const MemoryModel& model,
                            double capacity, std::size_t max_batch) {
  validate(model);
  if (!spec.is_2d()) {
    throw InvalidArgument(
        "oomptimize needs token bounds; estimate at least one token sub-bin");
  }
  std::vector<std::size_t> sizes(spec.num_buckets());
  for (std::size_t flat = 0; flat < sizes.size(); ++flat) {
    sizes[flat] = max_batch_size(
        model, spec.duration_bound(flat),
        static_cast<double>(*spec.token_bound(flat)), capacity, max_batch,
        flat);
  }
  return BucketBatchSizes(std::move(sizes));
}

MemoryTrace summarize_trace(std::vector<double> values) {
  MemoryTrace trace;
  trace.values = std::move(values);
  if (trace.values.empty()) return trace;
  const auto n = static_cast<double>(trace.values.size());
  trace.max = *std::max_element(trace.values.begin(), trace.values.end());
  trace.mean = std::accumulate(trace.values.begin(), trace.values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : trace.values) ss += (v - trace.mean) * (v - trace.mean);
  trace.cv = trace.mean != 0.0 ? std::sqrt(ss / n) / trace.mean : 0.0;
  return trace;
}

MemoryTrace memory_trace(std::span<const MiniBatch> batches,
                         const MemoryModel& model) {
  std::vector<double> values;
  values.reserve(batches.size());
  for (const MiniBatch& b : batches) {
    values.push_back(model(static_cast<double>(b.size()), b.max_input(),
                           static_cast<double>(b.max_output())));
  }
  return summarize_trace(std::move(values));
}

}  // namespace dynbucket
