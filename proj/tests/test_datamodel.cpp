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

#include <doctest.h>

#include "dynbucket/datamodel.hpp"
#include "dynbucket/error.hpp"
#include "dynbucket/rng.hpp"
#include "dynbucket/source.hpp"
#include "helpers.hpp"

using namespace dynbucket;
using dynbucket::testing::mk;

TEST_CASE("padding of a single sample is zero") {
  const PaddingStats p = padding_stats(MiniBatch({mk(10, 20)}));
  CHECK(p.input_pad_frac == 0.0);
  CHECK(p.output_pad_frac == 0.0);
}

TEST_CASE("padding counts cells against the batch maxima") {
  const PaddingStats p = padding_stats(MiniBatch({mk(10, 5), mk(5, 5)}));
  CHECK(p.input_pad_frac == doctest::Approx(0.25));
  CHECK(p.output_pad_frac == 0.0);
  CHECK(p.total_input_cells == doctest::Approx(20.0));
  CHECK(p.padded_input_cells == doctest::Approx(5.0));
}

TEST_CASE("padding against an explicit pad shape") {
  const PaddingStats p =
      padding_stats(MiniBatch({mk(10, 5)}), PadShape{40.0, 5});
  CHECK(p.input_pad_frac == doctest::Approx(0.75));
  CHECK(p.output_pad_frac == 0.0);
}

TEST_CASE("pad shape equal to the maxima changes nothing") {
  const MiniBatch b({mk(3, 7), mk(9, 2), mk(4, 11)});
  const PaddingStats a = padding_stats(b);
  const PaddingStats c = padding_stats(b, PadShape{9.0, 11});
  CHECK(a.input_pad_frac == doctest::Approx(c.input_pad_frac));
  CHECK(a.output_pad_frac == doctest::Approx(c.output_pad_frac));
}

TEST_CASE("pad shape smaller than a member is rejected") {
  CHECK_THROWS_AS(padding_stats(MiniBatch({mk(10, 5)}), PadShape{5.0, 5}),
                  InvalidArgument);
}

TEST_CASE("padding fractions stay in [0,1] and identical batches have none") {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    std::vector<Sample> v;
    const std::size_t n = 1 + rng.index(20);
    for (std::size_t i = 0; i < n; ++i) {
      v.push_back(mk(0.5 + 30 * rng.uniform(),
                     static_cast<std::int64_t>(rng.index(500))));
    }
    const MiniBatch b(v);
    const PaddingStats p = padding_stats(b);
    CHECK(p.input_pad_frac >= 0.0);
    CHECK(p.input_pad_frac <= 1.0);
    CHECK(p.output_pad_frac >= 0.0);
    CHECK(p.output_pad_frac <= 1.0);

    // Adding a sample at the maxima never increases padding.
    v.push_back(mk(b.max_input(), b.max_output()));
    const PaddingStats q = padding_stats(MiniBatch(v));
    CHECK(q.input_pad_frac <= p.input_pad_frac + 1e-12);
    CHECK(q.output_pad_frac <= p.output_pad_frac + 1e-12);
  }
  const PaddingStats same =
      padding_stats(MiniBatch({mk(4, 8), mk(4, 8), mk(4, 8)}));
  CHECK(same.input_pad_frac == 0.0);
  CHECK(same.output_pad_frac == 0.0);
}

TEST_CASE("empty mini-batches are rejected") {
  CHECK_THROWS_AS(MiniBatch({}), InvalidArgument);
}

TEST_CASE("padding stats aggregate by cell counts") {
  PaddingStats a = padding_stats(MiniBatch({mk(10, 5), mk(5, 5)}));
  a += padding_stats(MiniBatch({mk(10, 10), mk(10, 0)}));
  CHECK(a.input_pad_frac == doctest::Approx(5.0 / 40.0));
  CHECK(a.output_pad_frac == doctest::Approx(10.0 / 30.0));
}

TEST_CASE("tokens per second") {
  CHECK(tps(mk(10, 250)) == doctest::Approx(25.0));
  CHECK(tps(mk(4, 0)) == 0.0);
  CHECK(tps(mk(0.5, 30)) == doctest::Approx(60.0));
}

TEST_CASE("sample validation") {
  CHECK_NOTHROW(validate(mk(1, 0)));
  CHECK_THROWS_AS(validate(mk(0, 1)), ValidationError);
  CHECK_THROWS_AS(validate(mk(-1, 1)), ValidationError);
  CHECK_THROWS_AS(validate(mk(1, -1)), ValidationError);
}

TEST_CASE("tps histogram groups by duration") {
  const std::vector<Sample> v{mk(1, 10), mk(1.5, 30), mk(3, 30)};
  const TpsHistogram h = tps_histogram(v, 2.0);
  REQUIRE(h.bins.size() == 2);
  CHECK(h.bins[0].lo == 0.0);
  CHECK(h.bins[0].hi == 2.0);
  CHECK(h.bins[0].count == 2);
  CHECK(h.bins[0].mean == doctest::Approx(15.0));
  CHECK(h.bins[1].count == 1);
  CHECK(h.bins[1].mean == doctest::Approx(10.0));
  CHECK(h.total_count() == 3);
}

TEST_CASE("tps histogram of a single sample") {
  const std::vector<Sample> v{mk(7, 35)};
  const TpsHistogram h = tps_histogram(v, 2.0);
  std::size_t nonempty = 0;
  for (const TpsBin& b : h.bins) {
    if (b.count == 0) continue;
    ++nonempty;
    CHECK(b.p50 == doctest::Approx(5.0));
    CHECK(b.mean == doctest::Approx(5.0));
  }
  CHECK(nonempty == 1);
}

TEST_CASE("tps histogram of identical samples") {
  const std::vector<Sample> v(9, mk(3, 12, "x"));
  const TpsHistogram h = tps_histogram(v, 2.0);
  const TpsBin& b = h.bins.back();
  CHECK(b.count == 9);
  CHECK(b.p50 == doctest::Approx(4.0));
  CHECK(b.p90 == doctest::Approx(4.0));
  CHECK(b.p99 == doctest::Approx(4.0));
}

TEST_CASE("tps histogram counts sum to the sample count") {
  Rng rng(11);
  std::vector<Sample> v;
  for (int i = 0; i < 1000; ++i) {
    v.push_back(mk(0.5 + 39.5 * rng.uniform(),
                   static_cast<std::int64_t>(rng.index(800))));
  }
  VectorSource src(v);
  CHECK(tps_histogram(src, 2.0).total_count() == v.size());
  CHECK(tps_histogram(std::vector<Sample>{}, 2.0).bins.empty());
  CHECK_THROWS_AS(tps_histogram(v, 0.0), InvalidArgument);
}

TEST_CASE("nearest rank percentiles") {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(nearest_rank(v, 50) == 5);
  CHECK(nearest_rank(v, 90) == 9);
  CHECK(nearest_rank(v, 99) == 10);
  CHECK(nearest_rank(v, 100) == 10);
}
