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

#include <algorithm>
#include <numeric>

#include <doctest.h>

#include "dynbucket/ingest.hpp"
#include "dynbucket/recipes.hpp"
#include "dynbucket/sampler.hpp"

using namespace dynbucket;

TEST_CASE("scheme names") {
  CHECK(parse_scheme("A") == Scheme::kA);
  CHECK(parse_scheme("d") == Scheme::kD);
  CHECK_FALSE(parse_scheme("E").has_value());
  CHECK(scheme_letter(Scheme::kC) == 'C');
}

TEST_CASE("scheme ladder configurations") {
  SynthSpec spec = default_synth_spec();
  spec.count = 20'000;
  const auto pop = generate(spec);
  const SchemeOptions opts;

  const SchemeSetup a = prepare_scheme(Scheme::kA, pop, opts);
  CHECK_FALSE(a.config.spec.is_2d());
  CHECK_FALSE(a.config.tps_threshold.has_value());
  CHECK(std::holds_alternative<DurationHeuristic>(a.config.batching));
  CHECK(a.config.spec.num_buckets() == 30);

  const SchemeSetup b = prepare_scheme(Scheme::kB, pop, opts);
  CHECK(b.config.tps_threshold == 25.0);
  CHECK(std::holds_alternative<DurationHeuristic>(b.config.batching));

  const SchemeSetup c = prepare_scheme(Scheme::kC, pop, opts);
  REQUIRE(c.sizes.has_value());
  CHECK(c.config.spec.num_subbins() == 1);
  CHECK(c.config.spec.is_2d());
  CHECK(std::holds_alternative<PerBucketSizes>(c.config.batching));
  const auto& cs = c.sizes->values();
  CHECK(c.config.buffer_capacity >=
        std::accumulate(cs.begin(), cs.end(), std::size_t{0}));

  const SchemeSetup d = prepare_scheme(Scheme::kD, pop, opts);
  REQUIRE(d.sizes.has_value());
  CHECK(d.config.spec.num_subbins() == 2);
  CHECK(d.config.spec.num_buckets() <= 60);
  CHECK(d.sizes->num_buckets() == d.config.spec.num_buckets());
}
