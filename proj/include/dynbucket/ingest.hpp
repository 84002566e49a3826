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

#ifndef DYNBUCKET_INGEST_HPP
#define DYNBUCKET_INGEST_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "dynbucket/datamodel.hpp"
#include "dynbucket/rng.hpp"
#include "dynbucket/source.hpp"

namespace dynbucket {

// Manifest format: UTF-8, LF-terminated lines, one flat JSON object per line
// with keys "id" (string), "duration" (seconds) and "num_tokens" (integer).
// Blank lines are skipped. See docs/formats.md.

// Serializes one sample as a manifest line (without the trailing LF). Numbers
// use the shortest representation that round-trips exactly.
std::string format_manifest_line(const Sample& sample);

// Parses one manifest line; errors are reported against `line_no`.
Sample parse_manifest_line(std::string_view line, std::size_t line_no);

// Streams samples from a manifest file in file order.
class ManifestReader final : public SampleSource {
 public:
  explicit ManifestReader(const std::filesystem::path& path);

  std::optional<Sample> next() override;

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
  std::unordered_set<std::string> seen_ids_;
};

std::vector<Sample> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path,
                    std::span<const Sample> samples);

// Log-normal duration law exp(N(mu, sigma^2)), clipped to [min_dur, max_dur].
struct DurationDist {
  double mu = 0.0;
  double sigma = 0.0;
  double min_dur = 0.5;
  double max_dur = 40.0;
};

// Output token rate law. kConstant ignores shape/scale.
struct RateDist {
  enum class Kind { kGamma, kConstant };
  Kind kind = Kind::kGamma;
  double shape = 1.0;
  double scale = 1.0;
  double value = 0.0;
};

struct SynthSpec {
  std::size_t count = 1;
  DurationDist duration;
  RateDist rate;
  std::int64_t prompt_tokens = 0;
  double outlier_frac = 0.0;
  double outlier_factor = 1.0;
  std::uint64_t seed = 0;
};

void validate(const SynthSpec& spec);

// Documented default population: clipped log-normal durations with median
// 6 s, gamma token rate with mean 12 tokens/s, 16 prompt tokens, 1% of
// samples with a 4x rate. 100k samples, seed 1234.
SynthSpec default_synth_spec();

// Durations are rounded to whole microseconds so manifests print compactly.
inline constexpr double kDurationTicksPerSecond = 1e6;

// Lazy synthetic sample stream; a pure function of the spec.
class SynthGenerator final : public SampleSource {
 public:
  explicit SynthGenerator(SynthSpec spec);

  std::optional<Sample> next() override;

  // Number of samples emitted so far whose token rate was scaled by the
  // outlier factor.
  std::size_t outliers_emitted() const noexcept { return outliers_; }

 private:
  SynthSpec spec_;
  Rng rng_;
  std::size_t emitted_ = 0;
  std::size_t outliers_ = 0;
};

std::vector<Sample> generate(const SynthSpec& spec);

}  // namespace dynbucket

#endif  // DYNBUCKET_INGEST_HPP
