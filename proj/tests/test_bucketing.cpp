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
#include <cmath>
#include <numeric>

#include <doctest.h>

#include "dynbucket/bucketing.hpp"
#include "dynbucket/error.hpp"
#include "dynbucket/ingest.hpp"
#include "dynbucket/rng.hpp"
#include "dynbucket/sampler.hpp"
#include "dynbucket/source.hpp"
#include "helpers.hpp"

using namespace dynbucket;
using dynbucket::testing::mk;

namespace {

BucketSpec example_spec() { return BucketSpec({10, 20}, {{50, 100}, {80, 160}}); }

// First flat bucket, in index order, whose bounds hold the sample.
std::optional<std::size_t> brute_force_smallest(const Sample& s,
                                                const BucketSpec& spec) {
  const auto& d = spec.duration_bounds();
  const auto& t = spec.token_bounds();
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < spec.num_subbins(); ++j) {
      if (s.input_len <= d[i] && (t.empty() || s.output_len <= t[i][j])) {
        return i * spec.num_subbins() + j;
      }
    }
  }
  return std::nullopt;
}

BucketSpec random_spec(Rng& rng) {
  const std::size_t bins = 1 + rng.index(8);
  const std::size_t subs = 1 + rng.index(4);
  std::vector<double> d;
  double acc = 0;
  for (std::size_t i = 0; i < bins; ++i) {
    acc += 0.5 + 5 * rng.uniform();
    d.push_back(acc);
  }
  std::vector<std::vector<std::int64_t>> t(bins);
  for (auto& row : t) {
    std::int64_t v = 0;
    for (std::size_t j = 0; j < subs; ++j) {
      v += 1 + static_cast<std::int64_t>(rng.index(120));
      row.push_back(v);
    }
  }
  return BucketSpec(d, t);
}

}  // namespace

TEST_CASE("spec construction validates bounds") {
  CHECK_THROWS_AS(BucketSpec(std::vector<double>{}), InvalidArgument);
  CHECK_THROWS_AS(BucketSpec({2, 1}), InvalidArgument);
  CHECK_THROWS_AS(BucketSpec({1, 1}), InvalidArgument);
  CHECK_THROWS_AS(BucketSpec({0}), InvalidArgument);
  CHECK_THROWS_AS(BucketSpec({1, 2}, {{5}}), InvalidArgument);
  CHECK_THROWS_AS(BucketSpec({1, 2}, {{5, 6}, {5}}), InvalidArgument);
  CHECK_THROWS_AS(BucketSpec({1}, {{6, 5}}), InvalidArgument);
  CHECK_THROWS_AS(BucketSpec({1}, {{-1}}), InvalidArgument);
  const BucketSpec s = example_spec();
  CHECK(s.num_buckets() == 4);
  CHECK(s.flat_index(1, 1) == 3);
  CHECK(s.bin_of(3) == 1);
  CHECK(s.subbin_of(3) == 1);
  CHECK(s.token_bound(2) == 80);
  CHECK_FALSE(BucketSpec({5}).token_bound(0).has_value());
}

TEST_CASE("strict allocation") {
  const BucketSpec s = example_spec();
  CHECK(allocate_strict(mk(8, 60), s) == Allocation::assigned(1));
  const Allocation over = allocate_strict(mk(8, 120), s);
  REQUIRE_FALSE(over.is_assigned());
  CHECK(over.reason() == DiscardReason::kExceedsTokenBoundStrict);
  const Allocation far = allocate_strict(mk(25, 10), s);
  REQUIRE_FALSE(far.is_assigned());
  CHECK(far.reason() == DiscardReason::kExceedsMaxDuration);
  // Bounds are inclusive.
  CHECK(allocate_strict(mk(10, 50), s) == Allocation::assigned(0));
  CHECK(allocate_strict(mk(20, 160), s) == Allocation::assigned(3));
}

TEST_CASE("flexible allocation") {
  const BucketSpec s = example_spec();
  CHECK(allocate_flexible(mk(8, 120), s) == Allocation::assigned(3));
  const Allocation none = allocate_flexible(mk(25, 500), s);
  REQUIRE_FALSE(none.is_assigned());
  CHECK(none.reason() == DiscardReason::kExceedsAllBucketsFlexible);
  CHECK(allocate(mk(8, 120), s, AllocationPolicy::kStrict) !=
        allocate(mk(8, 120), s, AllocationPolicy::kFlexible));
}

TEST_CASE("1D specs allocate on duration only") {
  const BucketSpec s({3, 4});
  CHECK(allocate_strict(mk(3.5, 100000), s) == Allocation::assigned(1));
  CHECK(allocate_flexible(mk(1, 0), s) == Allocation::assigned(0));
  CHECK_FALSE(allocate_flexible(mk(4.5, 0), s).is_assigned());
}

TEST_CASE("flexible allocation matches a brute-force search") {
  Rng rng(2024);
  for (int spec_no = 0; spec_no < 20; ++spec_no) {
    const BucketSpec spec = random_spec(rng);
    const double dmax = spec.duration_bounds().back();
    for (int k = 0; k < 2000; ++k) {
      const Sample s = mk(0.01 + 1.2 * dmax * rng.uniform(),
                          static_cast<std::int64_t>(rng.index(600)), "x");
      const Allocation flex = allocate_flexible(s, spec);
      const Allocation strict = allocate_strict(s, spec);
      const auto oracle = brute_force_smallest(s, spec);
      REQUIRE(flex.is_assigned() == oracle.has_value());
      if (oracle) REQUIRE(flex.bucket() == *oracle);
      if (flex.is_assigned()) REQUIRE(spec.fits(s, flex.bucket()));
      if (strict.is_assigned()) {
        REQUIRE(spec.fits(s, strict.bucket()));
        REQUIRE(flex == strict);
      }
    }
  }
}

TEST_CASE("equal occupancy greedy split") {
  const std::vector<double> v{1, 2, 3, 4};
  std::size_t merged = 0;
  CHECK(equal_occupancy_bounds(v, v, 2, &merged) == std::vector<double>{3, 4});
  CHECK(merged == 0);
}

TEST_CASE("identical durations merge into one bin") {
  const std::vector<Sample> v(50, mk(5, 3, "x"));
  for (std::size_t n : {1, 2, 7, 30}) {
    EstimationDiagnostics diag;
    const BucketSpec s = estimate_duration_bins(v, n, &diag);
    CHECK(s.duration_bounds() == std::vector<double>{5});
    CHECK(diag.merged_bounds + 1 == n);
  }
}

TEST_CASE("estimation errors") {
  CHECK_THROWS_AS(estimate_duration_bins(std::vector<Sample>{}, 3),
                  EstimationError);
  CHECK_THROWS_AS(estimate_duration_bins(std::vector<Sample>{mk(1, 1)}, 0),
                  InvalidArgument);
}

TEST_CASE("bins balance cumulative duration on the default manifest") {
  const auto pop = generate(default_synth_spec());
  VectorSource src(pop);
  const BucketSpec spec = estimate_duration_bins(src, 30);
  CHECK(spec == estimate_duration_bins(pop, 30));
  REQUIRE(spec.num_duration_bins() == 30);
  const auto occ = bin_occupancy(pop, spec);
  double total = 0, max_dur = 0;
  for (const Sample& s : pop) {
    total += s.input_len;
    max_dur = std::max(max_dur, s.input_len);
  }
  CHECK(std::accumulate(occ.begin(), occ.end(), 0.0) ==
        doctest::Approx(total));
  for (double o : occ) CHECK(std::abs(o - total / 30) <= max_dur);
  CHECK(spec.duration_bounds().back() == max_dur);
}

TEST_CASE("a single token sub-bin caps each bin at its maximum") {
  const std::vector<Sample> v{mk(1, 10), mk(2, 40), mk(3, 7), mk(4, 9)};
  const BucketSpec s1 = BucketSpec({2, 4});
  const BucketSpec s2 = estimate_token_subbins(v, s1, 1);
  CHECK(s2.token_bounds() ==
        std::vector<std::vector<std::int64_t>>{{40}, {9}});
  for (const Sample& s : v) {
    CHECK(allocate_strict(s, s2) == allocate_strict(s, s1));
  }
}

TEST_CASE("token sub-bins by count and by token weight") {
  const std::vector<Sample> v{mk(1, 10), mk(1, 20), mk(1, 30), mk(1, 40)};
  const BucketSpec s1({5});
  CHECK(estimate_token_subbins(v, s1, 2, SubbinWeighting::kCount)
            .token_bounds()[0] == std::vector<std::int64_t>{20, 40});
  // Token weighting: 10+20+30 = 60 is the first prefix reaching 100/2.
  CHECK(estimate_token_subbins(v, s1, 2, SubbinWeighting::kTokens)
            .token_bounds()[0] == std::vector<std::int64_t>{30, 40});
}

TEST_CASE("sub-bins stay rectangular on degenerate bins") {
  const std::vector<Sample> v{mk(1, 7), mk(1, 7), mk(3, 0), mk(3, 0),
                              mk(3.5, 4), mk(3.6, 9)};
  EstimationDiagnostics diag;
  const BucketSpec s =
      estimate_token_subbins(v, BucketSpec({1, 2, 3, 4}), 2,
                             SubbinWeighting::kTokens, &diag);
  CHECK(s.token_bounds()[0] == std::vector<std::int64_t>{6, 7});
  CHECK(s.token_bounds()[1] == s.token_bounds()[0]);  // empty: inherits
  CHECK(s.token_bounds()[2] == std::vector<std::int64_t>{0, 1});
  // 4 + 9 crosses half of 13 only at 9, so the bin collapses to one bound.
  CHECK(s.token_bounds()[3] == std::vector<std::int64_t>{8, 9});
  CHECK(diag.inherited_bins == 1);
  CHECK(diag.padded_subbounds == 3);
  CHECK(diag.merged_bounds == 3);
}

TEST_CASE("30x2 estimation keeps every sample that passes the tps filter") {
  const auto pop = generate(default_synth_spec());
  std::vector<Sample> kept;
  for (const Sample& s : pop) {
    if (filter_tps(s, 25.0) == TpsDecision::kKeep) kept.push_back(s);
  }
  const BucketSpec spec =
      estimate_token_subbins(kept, estimate_duration_bins(kept, 30), 2);
  CHECK(spec.num_buckets() <= 60);
  std::size_t discarded = 0;
  for (const Sample& s : kept) {
    if (!allocate_strict(s, spec).is_assigned()) ++discarded;
  }
  CHECK(discarded == 0);
}

TEST_CASE("bucket spec text round trip") {
  Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    const BucketSpec s = random_spec(rng);
    CHECK(bucket_spec_from_text(to_text(s)) == s);
    const BucketSpec one(s.duration_bounds());
    CHECK(bucket_spec_from_text(to_text(one)) == one);
  }
}

TEST_CASE("bucket spec text format") {
  CHECK(to_text(example_spec()) ==
        "dynbucket-bucket-spec 1\n"
        "duration_bins 2\n"
        "sub_bins 2\n"
        "duration_bounds 10 20\n"
        "token_bounds 0 50 100\n"
        "token_bounds 1 80 160\n");
  CHECK(to_text(BucketSpec({0.5, 1.25})) ==
        "dynbucket-bucket-spec 1\n"
        "duration_bins 2\n"
        "sub_bins 0\n"
        "duration_bounds 0.5 1.25\n");
}

TEST_CASE("bucket spec parse errors carry a line number") {
  CHECK_THROWS_AS(bucket_spec_from_text(""), ParseError);
  CHECK_THROWS_AS(bucket_spec_from_text("dynbucket-bucket-spec 2\n"),
                  ParseError);
  try {
    bucket_spec_from_text(
        "dynbucket-bucket-spec 1\nduration_bins 2\nsub_bins 0\n"
        "duration_bounds 1 x\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  CHECK_THROWS_AS(bucket_spec_from_text("dynbucket-bucket-spec 1\n"
                                        "duration_bins 2\nsub_bins 0\n"
                                        "duration_bounds 2 1\n"),
                  ParseError);
  CHECK_NOTHROW(bucket_spec_from_text("# comment\n\ndynbucket-bucket-spec 1\n"
                                      "duration_bins 1\nsub_bins 0\n"
                                      "duration_bounds 3\n"));
}

TEST_CASE("discard reasons have stable names") {
  CHECK(to_string(DiscardReason::kExceedsMaxDuration) == "exceeds-max-duration");
  CHECK(to_string(DiscardReason::kExceedsTokenBoundStrict) ==
        "exceeds-token-bound-strict");
  CHECK(to_string(DiscardReason::kExceedsAllBucketsFlexible) ==
        "exceeds-all-buckets-flexible");
  CHECK(to_string(DiscardReason::kTpsFiltered) == "tps-filtered");
}
