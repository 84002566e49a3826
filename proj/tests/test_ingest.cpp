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

#include <cmath>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "dynbucket/error.hpp"
#include "dynbucket/ingest.hpp"
#include "helpers.hpp"

using namespace dynbucket;
using dynbucket::testing::mk;
using dynbucket::testing::TempFile;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SynthSpec fixed_spec(double duration, double rate, std::int64_t prompt) {
  SynthSpec s;
  s.count = 50;
  s.duration = DurationDist{std::log(duration), 0.0, 0.5, 40.0};
  s.rate.kind = RateDist::Kind::kConstant;
  s.rate.value = rate;
  s.prompt_tokens = prompt;
  s.seed = 5;
  return s;
}

}  // namespace

TEST_CASE("manifest with three lines reads back in order") {
  TempFile f("three");
  write_text(f.path(),
             "{\"id\":\"a\",\"duration\":1.5,\"num_tokens\":10}\n"
             "{\"id\":\"b\",\"duration\":2,\"num_tokens\":0}\n"
             "{\"id\":\"c\",\"duration\":0.25,\"num_tokens\":7}\n");
  const auto v = read_manifest(f.path());
  REQUIRE(v.size() == 3);
  CHECK(v[0] == Sample{"a", 1.5, 10});
  CHECK(v[1] == Sample{"b", 2.0, 0});
  CHECK(v[2] == Sample{"c", 0.25, 7});
}

TEST_CASE("empty manifest is an empty stream") {
  TempFile f("empty");
  write_text(f.path(), "");
  CHECK(read_manifest(f.path()).empty());
}

TEST_CASE("non-positive duration is a parse error at its line") {
  TempFile f("bad");
  write_text(f.path(),
             "{\"id\":\"a\",\"duration\":1.5,\"num_tokens\":10}\n"
             "{\"id\":\"b\",\"duration\":0,\"num_tokens\":3}\n");
  try {
    read_manifest(f.path());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("malformed records are parse errors") {
  CHECK_THROWS_AS(parse_manifest_line("not json", 1), ParseError);
  CHECK_THROWS_AS(parse_manifest_line("[1,2]", 1), ParseError);
  CHECK_THROWS_AS(parse_manifest_line(R"({"duration":1,"num_tokens":1})", 1),
                  ParseError);
  CHECK_THROWS_AS(
      parse_manifest_line(R"({"id":"x","duration":1,"num_tokens":-1})", 1),
      ParseError);
  CHECK_THROWS_AS(
      parse_manifest_line(R"({"id":"x","duration":1,"num_tokens":1.5})", 1),
      ParseError);
  CHECK_THROWS_AS(
      parse_manifest_line(R"({"id":"x","duration":-3,"num_tokens":1})", 1),
      ParseError);
}

TEST_CASE("duplicate ids are rejected") {
  TempFile f("dup");
  write_text(f.path(),
             "{\"id\":\"a\",\"duration\":1,\"num_tokens\":1}\n"
             "{\"id\":\"a\",\"duration\":2,\"num_tokens\":1}\n");
  CHECK_THROWS_AS(read_manifest(f.path()), ValidationError);
}

TEST_CASE("missing manifest is an io error") {
  CHECK_THROWS_AS(read_manifest("/nonexistent/dir/x.jsonl"), IoError);
}

TEST_CASE("write then read is the identity") {
  std::vector<Sample> v{mk(0.1, 0, "q\"uote"), mk(1.0 / 3.0, 12, "b"),
                        mk(39.999999, 1234567, "c")};
  for (const Sample& s : generate(default_synth_spec())) {
    v.push_back(s);
    if (v.size() > 2000) break;
  }
  TempFile f("rt");
  write_manifest(f.path(), v);
  CHECK(read_manifest(f.path()) == v);
}

TEST_CASE("generation is deterministic") {
  SynthSpec s = default_synth_spec();
  s.count = 100;
  s.seed = 7;
  TempFile a("ga"), b("gb");
  write_manifest(a.path(), generate(s));
  write_manifest(b.path(), generate(s));
  CHECK(slurp(a.path()) == slurp(b.path()));
  s.seed = 8;
  CHECK(generate(s) != generate(default_synth_spec()));
}

TEST_CASE("degenerate rate and duration give a fixed token count") {
  for (const Sample& s : generate(fixed_spec(2.0, 10.0, 0))) {
    CHECK(s.input_len == 2.0);
    CHECK(s.output_len == 20);
  }
}

TEST_CASE("a prompt inflates the token rate of short samples") {
  for (const Sample& s : generate(fixed_spec(0.5, 10.0, 16))) {
    CHECK(s.output_len == 21);
    CHECK(tps(s) == doctest::Approx(42.0));
  }
}

TEST_CASE("mean tps per duration bin falls with duration under a prompt") {
  SynthSpec s = default_synth_spec();
  s.count = 20'000;
  s.rate.kind = RateDist::Kind::kConstant;
  s.rate.value = 10.0;
  s.outlier_frac = 0.0;
  const TpsHistogram h = tps_histogram(generate(s), 2.0);
  double prev = 1e300;
  for (const TpsBin& b : h.bins) {
    if (b.count == 0) continue;
    CHECK(b.mean < prev);
    prev = b.mean;
  }
}

TEST_CASE("generator counts outliers") {
  SynthSpec s = default_synth_spec();
  s.count = 10'000;
  SynthGenerator g(s);
  while (g.next()) {
  }
  CHECK(g.outliers_emitted() > 50);
  CHECK(g.outliers_emitted() < 150);
}

TEST_CASE("generated durations respect the clip range and tick") {
  for (const Sample& s : generate(default_synth_spec())) {
    REQUIRE(s.input_len >= 0.5);
    REQUIRE(s.input_len <= 40.0);
    const double ticks = s.input_len * kDurationTicksPerSecond;
    REQUIRE(std::abs(ticks - std::round(ticks)) < 1e-3);
  }
}

TEST_CASE("invalid synth specs are rejected") {
  SynthSpec s = default_synth_spec();
  s.count = 0;
  CHECK_THROWS_AS(validate(s), InvalidArgument);
  s = default_synth_spec();
  s.duration.min_dur = 0.0;
  CHECK_THROWS_AS(validate(s), InvalidArgument);
  s = default_synth_spec();
  s.rate.shape = -1;
  CHECK_THROWS_AS(validate(s), InvalidArgument);
  s = default_synth_spec();
  s.outlier_frac = 1.5;
  CHECK_THROWS_AS(validate(s), InvalidArgument);
}
