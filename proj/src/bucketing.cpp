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

#include "dynbucket/bucketing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dynbucket/error.hpp"
#include "dynbucket/source.hpp"
#include "text_util.hpp"

namespace dynbucket {

BucketSpec::BucketSpec(std::vector<double> duration_bounds,
                       std::vector<std::vector<std::int64_t>> token_bounds)
    : duration_bounds_(std::move(duration_bounds)),
      token_bounds_(std::move(token_bounds)) {
  if (duration_bounds_.empty()) {
    throw InvalidArgument("bucket spec needs at least one duration bound");
  }
  for (std::size_t i = 0; i < duration_bounds_.size(); ++i) {
    const double b = duration_bounds_[i];
    if (!(b > 0.0) || !std::isfinite(b)) {
      throw InvalidArgument("duration bounds must be positive and finite");
    }
    if (i > 0 && !(b > duration_bounds_[i - 1])) {
      throw InvalidArgument("duration bounds must be strictly increasing");
    }
  }
  if (token_bounds_.empty()) return;
  if (token_bounds_.size() != duration_bounds_.size()) {
    throw InvalidArgument("need one token bound list per duration bin");
  }
  const std::size_t width = token_bounds_.front().size();
  if (width == 0) throw InvalidArgument("token bound lists must be non-empty");
  for (const auto& row : token_bounds_) {
    if (row.size() != width) {
      throw InvalidArgument("token bound lists must have equal lengths");
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] < 0) throw InvalidArgument("token bounds must be >= 0");
      if (j > 0 && row[j] <= row[j - 1]) {
        throw InvalidArgument("token bounds must be strictly increasing");
      }
    }
  }
}

std::optional<std::int64_t> BucketSpec::token_bound(std::size_t flat) const {
  if (!is_2d()) return std::nullopt;
  return token_bounds_.at(bin_of(flat)).at(subbin_of(flat));
}

bool BucketSpec::fits(const Sample& sample, std::size_t flat) const {
  if (sample.input_len > duration_bound(flat)) return false;
  const auto cap = token_bound(flat);
  return !cap || sample.output_len <= *cap;
}

std::string to_text(const BucketSpec& spec) {
  std::string out = "dynbucket-bucket-spec 1\n";
  out += "duration_bins " + std::to_string(spec.num_duration_bins()) + "\n";
  out += "sub_bins " + std::to_string(spec.is_2d() ? spec.num_subbins() : 0) +
         "\n";
  out += "duration_bounds";
  for (double b : spec.duration_bounds()) out += " " + detail::format_double(b);
  out += "\n";
  for (std::size_t i = 0; i < spec.token_bounds().size(); ++i) {
    out += "token_bounds " + std::to_string(i);
    for (std::int64_t t : spec.token_bounds()[i]) {
      out += " " + std::to_string(t);
    }
    out += "\n";
  }
  return out;
}

BucketSpec bucket_spec_from_text(std::string_view text) {
  using detail::parse_number;
  const auto lines = detail::content_lines(text);
  auto expect = [&](std::size_t idx, std::string_view key) {
    if (idx >= lines.size()) {
      throw ParseError(lines.empty() ? 0 : lines.back().no + 1,
                       "missing '" + std::string(key) + "' line");
    }
    auto tok = detail::split_ws(lines[idx].text);
    if (tok.empty() || tok[0] != key) {
      throw ParseError(lines[idx].no, "expected '" + std::string(key) + "'");
    }
    return tok;
  };

  auto header = expect(0, "dynbucket-bucket-spec");
  if (header.size() != 2 || header[1] != "1") {
    throw ParseError(lines[0].no, "unsupported bucket spec version");
  }
  auto bins_tok = expect(1, "duration_bins");
  auto subs_tok = expect(2, "sub_bins");
  auto bounds_tok = expect(3, "duration_bounds");
  if (bins_tok.size() != 2 || subs_tok.size() != 2) {
    throw ParseError(lines[1].no, "malformed header counts");
  }
  const auto bins = parse_number<std::size_t>(bins_tok[1], lines[1].no);
  const auto subs = parse_number<std::size_t>(subs_tok[1], lines[2].no);
  if (bounds_tok.size() != bins + 1) {
    throw ParseError(lines[3].no, "expected " + std::to_string(bins) +
                                      " duration bounds");
  }
  std::vector<double> durations;
  for (std::size_t k = 1; k < bounds_tok.size(); ++k) {
    durations.push_back(parse_number<double>(bounds_tok[k], lines[3].no));
  }

  std::vector<std::vector<std::int64_t>> tokens;
  if (subs > 0) {
    for (std::size_t i = 0; i < bins; ++i) {
      auto row = expect(4 + i, "token_bounds");
      const std::size_t no = lines[4 + i].no;
      if (row.size() != subs + 2 ||
          parse_number<std::size_t>(row[1], no) != i) {
        throw ParseError(no, "malformed token_bounds row");
      }
      std::vector<std::int64_t> r;
      for (std::size_t k = 2; k < row.size(); ++k) {
        r.push_back(parse_number<std::int64_t>(row[k], no));
      }
      tokens.push_back(std::move(r));
    }
  }
  const std::size_t used = 4 + (subs > 0 ? bins : 0);
  if (lines.size() > used) {
    throw ParseError(lines[used].no, "unexpected trailing content");
  }
  try {
    return BucketSpec(std::move(durations), std::move(tokens));
  } catch (const InvalidArgument& e) {
    throw ParseError(lines[3].no, e.what());
  }
}

std::string_view to_string(DiscardReason reason) noexcept {
  switch (reason) {
    case DiscardReason::kExceedsMaxDuration:
      return "exceeds-max-duration";
    case DiscardReason::kExceedsTokenBoundStrict:
      return "exceeds-token-bound-strict";
    case DiscardReason::kExceedsAllBucketsFlexible:
      return "exceeds-all-buckets-flexible";
    case DiscardReason::kTpsFiltered:
      return "tps-filtered";
  }
  return "unknown";
}

namespace {

// First duration bin whose bound holds the sample, or num_duration_bins().
std::size_t duration_bin(const Sample& s, const BucketSpec& spec) {
  const auto& b = spec.duration_bounds();
  return static_cast<std::size_t>(
      std::lower_bound(b.begin(), b.end(), s.input_len) - b.begin());
}

// First sub-bin of `bin` whose bound holds the sample, or num_subbins().
std::size_t token_subbin(const Sample& s, const BucketSpec& spec,
                         std::size_t bin) {
  if (!spec.is_2d()) return 0;
  const auto& row = spec.token_bounds()[bin];
  return static_cast<std::size_t>(
      std::lower_bound(row.begin(), row.end(), s.output_len) - row.begin());
}

}  // namespace

Allocation allocate_strict(const Sample& sample, const BucketSpec& spec) {
  const std::size_t bin = duration_bin(sample, spec);
  if (bin == spec.num_duration_bins()) {
    return Allocation::discarded(DiscardReason::kExceedsMaxDuration);
  }
  const std::size_t sub = token_subbin(sample, spec, bin);
  if (sub == spec.num_subbins()) {
    return Allocation::discarded(DiscardReason::kExceedsTokenBoundStrict);
  }
  return Allocation::assigned(spec.flat_index(bin, sub));
}

Allocation allocate_flexible(const Sample& sample, const BucketSpec& spec) {
  // Duration bounds are strictly increasing, so the first duration bin with
  // any feasible sub-bin holds the minimum under (duration, tokens, i, j).
  for (std::size_t bin = duration_bin(sample, spec);
       bin < spec.num_duration_bins(); ++bin) {
    const std::size_t sub = token_subbin(sample, spec, bin);
    if (sub < spec.num_subbins()) {
      return Allocation::assigned(spec.flat_index(bin, sub));
    }
  }
  return Allocation::discarded(DiscardReason::kExceedsAllBucketsFlexible);
}

Allocation allocate(const Sample& sample, const BucketSpec& spec,
                    AllocationPolicy policy) {
  return policy == AllocationPolicy::kStrict ? allocate_strict(sample, spec)
                                             : allocate_flexible(sample, spec);
}

std::vector<double> equal_occupancy_bounds(std::span<const double> sorted,
                                           std::span<const double> weights,
                                           std::size_t num_bins,
                                           std::size_t* merged) {
  if (sorted.empty()) throw EstimationError("cannot estimate bins: no samples");
  if (num_bins == 0) throw InvalidArgument("number of bins must be >= 1");
  if (weights.size() != sorted.size()) {
    throw InvalidArgument("weights must match values");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double target = total / static_cast<double>(num_bins);

  std::vector<double> bounds;
  double acc = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    acc += weights[k];
    // The last bin always closes at the maximum, never early.
    if (bounds.size() + 1 < num_bins && acc >= target) {
      bounds.push_back(sorted[k]);
      acc -= target;
    }
  }
  bounds.push_back(sorted.back());

  const std::size_t before = bounds.size();
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
  if (merged) *merged += before - bounds.size();
  return bounds;
}

namespace {

BucketSpec duration_bins_from(std::vector<double> durations,
                              std::size_t num_buckets,
                              EstimationDiagnostics* diag) {
  if (durations.empty()) {
    throw EstimationError("cannot estimate duration bins from an empty stream");
  }
  std::sort(durations.begin(), durations.end());
  std::size_t merged = 0;
  auto bounds = equal_occupancy_bounds(durations, durations, num_buckets,
                                       &merged);
  if (diag) diag->merged_bounds += merged;
  return BucketSpec(std::move(bounds));
}

}  // namespace

BucketSpec estimate_duration_bins(std::span<const Sample> samples,
                                  std::size_t num_buckets,
                                  EstimationDiagnostics* diag) {
  if (num_buckets == 0) throw InvalidArgument("num_buckets must be >= 1");
  std::vector<double> durations;
  durations.reserve(samples.size());
  for (const Sample& s : samples) durations.push_back(s.input_len);
  return duration_bins_from(std::move(durations), num_buckets, diag);
}

BucketSpec estimate_duration_bins(SampleSource& source,
                                  std::size_t num_buckets,
                                  EstimationDiagnostics* diag) {
  if (num_buckets == 0) throw InvalidArgument("num_buckets must be >= 1");
  std::vector<double> durations;
  while (auto s = source.next()) durations.push_back(s->input_len);
  return duration_bins_from(std::move(durations), num_buckets, diag);
}

BucketSpec estimate_token_subbins(std::span<const Sample> samples,
                                  const BucketSpec& spec1d,
                                  std::size_t num_subbins,
                                  SubbinWeighting weighting,
                                  EstimationDiagnostics* diag) {
  if (spec1d.is_2d()) throw InvalidArgument("expected a 1D bucket spec");
  if (num_subbins == 0) throw InvalidArgument("num_subbins must be >= 1");

  const std::size_t bins = spec1d.num_duration_bins();
  std::vector<std::vector<double>> members(bins);
  for (const Sample& s : samples) {
    const std::size_t bin = duration_bin(s, spec1d);
    if (bin < bins) members[bin].push_back(static_cast<double>(s.output_len));
  }

  std::vector<std::vector<std::int64_t>> rows(bins);
  std::vector<bool> filled(bins, false);
  for (std::size_t i = 0; i < bins; ++i) {
    auto& tok = members[i];
    if (tok.empty()) continue;
    std::sort(tok.begin(), tok.end());
    std::vector<double> weights =
        weighting == SubbinWeighting::kTokens
            ? tok
            : std::vector<double>(tok.size(), 1.0);
    std::size_t merged = 0;
    const auto bounds =
        equal_occupancy_bounds(tok, weights, num_subbins, &merged);
    std::vector<std::int64_t> row;
    for (double b : bounds) row.push_back(static_cast<std::int64_t>(b));
    // Keep the index space rectangular: pad below the smallest bound while
    // it stays non-negative, otherwise above the largest.
    while (row.size() < num_subbins) {
      if (row.front() > 0) {
        row.insert(row.begin(), row.front() - 1);
      } else {
        row.push_back(row.back() + 1);
      }
      if (diag) ++diag->padded_subbounds;
    }
    if (diag) diag->merged_bounds += merged;
    rows[i] = std::move(row);
    filled[i] = true;
  }

  if (std::none_of(filled.begin(), filled.end(), [](bool f) { return f; })) {
    throw EstimationError("no samples fall inside the duration bins");
  }
  for (std::size_t i = 0; i < bins; ++i) {
    if (filled[i]) continue;
    std::size_t src = bins;
    for (std::size_t k = i; k-- > 0;) {
      if (filled[k]) {
        src = k;
        break;
      }
    }
    if (src == bins) {
      for (std::size_t k = i + 1; k < bins; ++k) {
        if (filled[k]) {
          src = k;
          break;
        }
      }
    }
    rows[i] = rows[src];
    if (diag) ++diag->inherited_bins;
  }
  return BucketSpec(spec1d.duration_bounds(), std::move(rows));
}

std::vector<double> bin_occupancy(std::span<const Sample> samples,
                                  const BucketSpec& spec) {
  std::vector<double> occ(spec.num_duration_bins(), 0.0);
  for (const Sample& s : samples) {
    const std::size_t bin = duration_bin(s, spec);
    if (bin < occ.size()) occ[bin] += s.input_len;
  }
  return occ;
}

}  // namespace dynbucket
