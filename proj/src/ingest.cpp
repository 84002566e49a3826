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

#include "dynbucket/ingest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "dynbucket/error.hpp"
#include "text_util.hpp"

namespace dynbucket {

std::string format_manifest_line(const Sample& sample) {
  std::string line = R"({"id":)";
  line += nlohmann::json(sample.id).dump();
  line += R"(,"duration":)";
  line += detail::format_double(sample.input_len);
  line += R"(,"num_tokens":)";
  line += std::to_string(sample.output_len);
  line += '}';
  return line;
}

Sample parse_manifest_line(std::string_view line, std::size_t line_no) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(line_no, "record is not an object");

  const auto id = obj.find("id");
  const auto dur = obj.find("duration");
  const auto tok = obj.find("num_tokens");
  if (id == obj.end() || !id->is_string()) {
    throw ParseError(line_no, "missing string field 'id'");
  }
  if (dur == obj.end() || !dur->is_number()) {
    throw ParseError(line_no, "missing numeric field 'duration'");
  }
  if (tok == obj.end() || !tok->is_number_integer()) {
    throw ParseError(line_no, "missing integer field 'num_tokens'");
  }

  Sample s;
  s.id = id->get<std::string>();
  s.input_len = dur->get<double>();
  s.output_len = tok->get<std::int64_t>();
  if (tok->is_number_unsigned() && tok->get<std::uint64_t>() > INT64_MAX) {
    throw ParseError(line_no, "num_tokens out of range");
  }
  if (!(s.input_len > 0.0) || !std::isfinite(s.input_len)) {
    throw ParseError(line_no, "duration must be positive");
  }
  if (s.output_len < 0) {
    throw ParseError(line_no, "num_tokens must be non-negative");
  }
  return s;
}

ManifestReader::ManifestReader(const std::filesystem::path& path)
    : path_(path), in_(path) {
  if (!in_) throw IoError("cannot open manifest " + path.string());
}

std::optional<Sample> ManifestReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Sample s = parse_manifest_line(line, line_no_);
    if (!seen_ids_.insert(s.id).second) {
      throw ValidationError(path_.string() + ":" + std::to_string(line_no_) +
                            ": duplicate id '" + s.id + "'");
    }
    return s;
  }
  if (in_.bad()) throw IoError("read error on " + path_.string());
  return std::nullopt;
}

std::vector<Sample> read_manifest(const std::filesystem::path& path) {
  ManifestReader reader(path);
  return collect(reader);
}

void write_manifest(const std::filesystem::path& path,
                    std::span<const Sample> samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path.string());
  for (const Sample& s : samples) {
    out << format_manifest_line(s) << '\n';
  }
  out.flush();
  if (!out) throw IoError("write error on " + path.string());
}

void validate(const SynthSpec& spec) {
  const DurationDist& d = spec.duration;
  if (spec.count < 1) throw InvalidArgument("synth count must be >= 1");
  if (!(d.min_dur > 0.0)) throw InvalidArgument("min_dur must be positive");
  if (!(d.max_dur >= d.min_dur)) {
    throw InvalidArgument("max_dur must be >= min_dur");
  }
  if (!(d.sigma >= 0.0) || !std::isfinite(d.mu)) {
    throw InvalidArgument("duration law needs finite mu and sigma >= 0");
  }
  if (spec.rate.kind == RateDist::Kind::kGamma) {
    if (!(spec.rate.shape > 0.0) || !(spec.rate.scale > 0.0)) {
      throw InvalidArgument("gamma rate needs shape > 0 and scale > 0");
    }
  } else if (!(spec.rate.value >= 0.0)) {
    throw InvalidArgument("constant rate must be non-negative");
  }
  if (spec.prompt_tokens < 0) {
    throw InvalidArgument("prompt_tokens must be non-negative");
  }
  if (!(spec.outlier_frac >= 0.0 && spec.outlier_frac <= 1.0)) {
    throw InvalidArgument("outlier_frac must lie in [0, 1]");
  }
  if (spec.outlier_frac > 0.0 && !(spec.outlier_factor > 1.0)) {
    throw InvalidArgument("outlier_factor must exceed 1");
  }
}

SynthSpec default_synth_spec() {
  SynthSpec spec;
  spec.count = 100'000;
  spec.duration = DurationDist{std::log(6.0), 0.6, 0.5, 40.0};
  spec.rate = RateDist{RateDist::Kind::kGamma, 4.0, 3.0, 0.0};
  spec.prompt_tokens = 16;
  spec.outlier_frac = 0.01;
  spec.outlier_factor = 4.0;
  spec.seed = 1234;
  return spec;
}

SynthGenerator::SynthGenerator(SynthSpec spec)
    : spec_(std::move(spec)), rng_(spec_.seed) {
  validate(spec_);
}

std::optional<Sample> SynthGenerator::next() {
  if (emitted_ >= spec_.count) return std::nullopt;
  const DurationDist& dd = spec_.duration;

  // Draw order is part of the format contract: duration, rate, outlier.
  double dur = std::exp(dd.mu + dd.sigma * rng_.normal());
  dur = std::round(dur * kDurationTicksPerSecond) / kDurationTicksPerSecond;
  dur = std::clamp(dur, dd.min_dur, dd.max_dur);

  double rate = spec_.rate.kind == RateDist::Kind::kGamma
                    ? rng_.gamma(spec_.rate.shape, spec_.rate.scale)
                    : spec_.rate.value;
  if (rng_.uniform() < spec_.outlier_frac) {
    rate *= spec_.outlier_factor;
    ++outliers_;
  }

  const double tokens =
      std::round(static_cast<double>(spec_.prompt_tokens) + rate * dur);

  std::array<char, 32> id{};
  std::snprintf(id.data(), id.size(), "s%08zu", emitted_);
  ++emitted_;
  return Sample{id.data(), dur,
                std::max<std::int64_t>(0, static_cast<std::int64_t>(tokens))};
}

std::vector<Sample> generate(const SynthSpec& spec) {
  SynthGenerator gen(spec);
  std::vector<Sample> out;
  out.reserve(spec.count);
  while (auto s = gen.next()) out.push_back(std::move(*s));
  return out;
}

}  // namespace dynbucket
