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

// dynbucket command-line tool. Links only the C API.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dynbucket/dynbucket.h"

namespace {

using nlohmann::ordered_json;

// Library failure, carrying the status for the exit code.
struct LibraryFailure {
  dynb_status status;
  std::string message;
};

void check(dynb_status st) {
  if (st != DYNB_OK) {
    throw LibraryFailure{st, std::string(dynb_status_name(st)) + ": " +
                                 dynb_last_error_message()};
  }
}

struct ManifestDeleter {
  void operator()(dynb_manifest* p) const { dynb_manifest_free(p); }
};
struct SpecDeleter {
  void operator()(dynb_bucket_spec* p) const { dynb_bucket_spec_free(p); }
};
struct SizesDeleter {
  void operator()(dynb_batch_sizes* p) const { dynb_batch_sizes_free(p); }
};
struct SamplerDeleter {
  void operator()(dynb_sampler* p) const { dynb_sampler_free(p); }
};
struct StringDeleter {
  void operator()(char* p) const { dynb_string_free(p); }
};

using Manifest = std::unique_ptr<dynb_manifest, ManifestDeleter>;
using Spec = std::unique_ptr<dynb_bucket_spec, SpecDeleter>;
using Sizes = std::unique_ptr<dynb_batch_sizes, SizesDeleter>;
using SamplerHandle = std::unique_ptr<dynb_sampler, SamplerDeleter>;
using CString = std::unique_ptr<char, StringDeleter>;

Manifest read_manifest(const std::string& path) {
  dynb_manifest* m = nullptr;
  check(dynb_manifest_read(path.c_str(), &m));
  return Manifest(m);
}

Spec load_spec(const std::string& path) {
  dynb_bucket_spec* s = nullptr;
  check(dynb_bucket_spec_load(path.c_str(), &s));
  return Spec(s);
}

Sizes load_sizes(const std::string& path) {
  dynb_batch_sizes* s = nullptr;
  check(dynb_batch_sizes_load(path.c_str(), &s));
  return Sizes(s);
}

std::string fmt(double v, int digits = 6) {
  std::ostringstream ss;
  ss.precision(digits);
  ss << std::fixed << v;
  return ss.str();
}

// Writes `text` to `path`, or to stdout when the path is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LibraryFailure{DYNB_IO_ERROR, "cannot write " + path};
  out << text;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw CLI::ValidationError("bad number: " + item);
    out.push_back(v);
  }
  return out;
}

// ---- shared option groups -------------------------------------------------

struct Common {
  std::uint64_t seed = 0;
  std::string output;
  std::string format = "text";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--output,-o", c.output, "Output path (default: stdout)");
  cmd->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"text", "json", "csv"}))
      ->capture_default_str();
}

struct ModelArgs {
  std::string model = "transformer";
  std::string coeffs;
  double capacity = 0.0;

  dynb_memory_model memory() const {
    dynb_memory_model m{};
    if (!coeffs.empty()) {
      const auto v = parse_list(coeffs);
      if (v.size() != 6) {
        throw CLI::ValidationError("--coeffs needs six values c0..c5");
      }
      for (std::size_t i = 0; i < 6; ++i) m.c[i] = v[i];
    } else if (model == "linear") {
      dynb_memory_model_linear(&m);
    } else {
      dynb_memory_model_transformer_like(&m);
    }
    return m;
  }

  double cap() const {
    return capacity > 0.0 ? capacity : dynb_reference_capacity();
  }
};

void add_model(CLI::App* cmd, ModelArgs& m) {
  cmd->add_option("--model", m.model, "Reference memory model")
      ->check(CLI::IsMember({"transformer", "linear"}))
      ->capture_default_str();
  cmd->add_option("--coeffs", m.coeffs,
                  "Memory model coefficients c0,c1,c2,c3,c4,c5");
  cmd->add_option("--capacity", m.capacity,
                  "Memory capacity (default: reference capacity)");
}

struct SamplerArgs {
  std::string manifest;
  std::string spec;
  std::string sizes;
  std::string scheme;
  std::string mode = "duration";
  double threshold = 360.0;
  std::size_t fixed_size = 768;
  double pad_to_input = 40.0;
  std::int64_t pad_to_output = -1;
  double tps_filter = 0.0;
  std::string allocation = "strict";
  std::string selection = "uniform";
  std::size_t buffer_capacity = 10'000;
  bool buffered = false;
  double start_fraction = 0.10;
  bool sync = false;
  std::uint64_t shared_seed = 0;
  std::size_t rank = 0;
  std::size_t world_size = 1;
  std::size_t buckets = 30;
  std::size_t sub_buckets = 2;
};

void add_sampler(CLI::App* cmd, SamplerArgs& s) {
  cmd->add_option("--manifest,-m", s.manifest, "Input manifest")->required();
  cmd->add_option("--spec", s.spec, "Bucket spec file");
  cmd->add_option("--sizes", s.sizes, "Bucket batch sizes file");
  cmd->add_option("--scheme", s.scheme, "Preset scheme A|B|C|D")
      ->check(CLI::IsMember({"A", "B", "C", "D"}));
  cmd->add_option("--mode", s.mode, "Batching mode")
      ->check(CLI::IsMember({"duration", "fixed", "per-bucket"}))
      ->capture_default_str();
  cmd->add_option("--threshold", s.threshold,
                  "Cumulative duration threshold in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--fixed-size", s.fixed_size, "Fixed batch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--pad-to-input", s.pad_to_input,
                  "Fixed padded input length (seconds)")
      ->capture_default_str();
  cmd->add_option("--pad-to-output", s.pad_to_output,
                  "Fixed padded output length (default: manifest maximum)");
  cmd->add_option("--tps-filter", s.tps_filter,
                  "Drop samples above this tokens/second (0: off)")
      ->capture_default_str();
  cmd->add_option("--allocation", s.allocation, "Bucket allocation policy")
      ->check(CLI::IsMember({"strict", "flexible"}))
      ->capture_default_str();
  cmd->add_option("--selection", s.selection, "Unsynced bucket selection")
      ->check(CLI::IsMember({"uniform", "occupancy"}))
      ->capture_default_str();
  cmd->add_option("--buffer-capacity", s.buffer_capacity,
                  "Samples held by the sampler (and the producer queue)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_flag("--buffered", s.buffered,
                "Read the manifest through a producer thread");
  cmd->add_option("--start-fraction", s.start_fraction,
                  "Queue fill fraction before the first read")
      ->capture_default_str();
  cmd->add_flag("--sync", s.sync, "Rank-synchronized bucket selection");
  cmd->add_option("--shared-seed", s.shared_seed, "Shared selection seed");
  cmd->add_option("--rank", s.rank, "Rank index")->capture_default_str();
  cmd->add_option("--world-size", s.world_size, "Number of ranks")
      ->capture_default_str();
  cmd->add_option("--buckets", s.buckets, "Duration bins for --scheme")
      ->capture_default_str();
  cmd->add_option("--sub-buckets", s.sub_buckets,
                  "Token sub-bins for --scheme D")
      ->capture_default_str();
}

// Sampler plus the handles it borrows.
struct SamplerSetup {
  Manifest manifest;
  Spec spec;
  Sizes sizes;
  dynb_sampler_config cfg{};
  SamplerHandle sampler;
};

SamplerSetup make_sampler(const SamplerArgs& a, const ModelArgs& model,
                          std::uint64_t seed) {
  SamplerSetup s;
  s.manifest = read_manifest(a.manifest);
  dynb_sampler_config_init(&s.cfg);

  if (!a.scheme.empty()) {
    dynb_scheme_options opts;
    dynb_scheme_options_init(&opts);
    opts.num_buckets = a.buckets;
    opts.num_subbins = a.sub_buckets;
    opts.duration_threshold = a.threshold;
    if (a.tps_filter > 0.0) opts.tps_threshold = a.tps_filter;
    opts.memory = model.memory();
    opts.capacity = model.cap();
    opts.buffer_capacity = a.buffer_capacity;
    opts.allocation = a.allocation == "flexible" ? DYNB_ALLOCATION_FLEXIBLE
                                                 : DYNB_ALLOCATION_STRICT;
    opts.seed = seed;
    dynb_bucket_spec* spec = nullptr;
    dynb_batch_sizes* sizes = nullptr;
    check(dynb_scheme_prepare(a.scheme[0], s.manifest.get(), &opts, &spec,
                              &sizes, &s.cfg));
    s.spec.reset(spec);
    s.sizes.reset(sizes);
  } else {
    if (a.mode == "fixed") {
      s.cfg.batching = DYNB_BATCHING_FIXED;
      s.cfg.fixed_size = a.fixed_size;
      s.cfg.pad_to_input = a.pad_to_input;
      std::int64_t pad_out = a.pad_to_output;
      if (pad_out < 0) {
        dynb_manifest_summary sum{};
        check(dynb_manifest_summarize(s.manifest.get(), 0.0, &sum));
        pad_out = sum.max_tokens;
      }
      s.cfg.pad_to_output = pad_out;
    } else {
      if (a.spec.empty()) {
        throw CLI::ValidationError("--spec is required for mode " + a.mode);
      }
      s.spec = load_spec(a.spec);
      if (a.mode == "per-bucket") {
        if (a.sizes.empty()) {
          throw CLI::ValidationError("--sizes is required for per-bucket");
        }
        s.sizes = load_sizes(a.sizes);
        s.cfg.batching = DYNB_BATCHING_PER_BUCKET;
        s.cfg.sizes = s.sizes.get();
      } else {
        s.cfg.batching = DYNB_BATCHING_DURATION;
        s.cfg.duration_threshold = a.threshold;
      }
    }
    s.cfg.tps_threshold = a.tps_filter;
    s.cfg.allocation = a.allocation == "flexible" ? DYNB_ALLOCATION_FLEXIBLE
                                                  : DYNB_ALLOCATION_STRICT;
    s.cfg.buffer_capacity = a.buffer_capacity;
    s.cfg.seed = seed;
  }
  s.cfg.selection =
      a.selection == "occupancy" ? DYNB_SELECT_OCCUPANCY : DYNB_SELECT_UNIFORM;
  if (a.sync) {
    s.cfg.sync_enabled = 1;
    s.cfg.shared_seed = a.shared_seed;
    s.cfg.rank = a.rank;
    s.cfg.world_size = a.world_size;
  }
  s.cfg.buffered_stream = a.buffered ? 1 : 0;
  s.cfg.stream_capacity = a.buffer_capacity;
  s.cfg.start_fraction = a.start_fraction;

  dynb_sampler* sampler = nullptr;
  if (a.buffered) {
    check(dynb_sampler_create_from_file(a.manifest.c_str(), s.spec.get(),
                                        &s.cfg, &sampler));
  } else {
    check(dynb_sampler_create(s.manifest.get(), s.spec.get(), &s.cfg,
                              &sampler));
  }
  s.sampler.reset(sampler);
  return s;
}

ordered_json padding_json(const dynb_padding_stats& p) {
  ordered_json j;
  j["input_pad_frac"] = p.input_pad_frac;
  j["output_pad_frac"] = p.output_pad_frac;
  j["total_input_cells"] = p.total_input_cells;
  j["padded_input_cells"] = p.padded_input_cells;
  j["total_output_cells"] = p.total_output_cells;
  j["padded_output_cells"] = p.padded_output_cells;
  return j;
}

// Flat key/value rendering of a JSON object for text and csv formats.
void flatten(const ordered_json& j, const std::string& prefix,
             std::vector<std::pair<std::string, std::string>>& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      flatten(*it, key, out);
    } else if (it->is_string()) {
      out.emplace_back(key, it->get<std::string>());
    } else if (it->is_number_float()) {
      out.emplace_back(key, fmt(it->get<double>()));
    } else {
      out.emplace_back(key, it->dump());
    }
  }
}

std::string render_kv(const ordered_json& j, const std::string& format) {
  if (format == "json") return j.dump(2) + "\n";
  std::vector<std::pair<std::string, std::string>> kv;
  flatten(j, "", kv);
  std::string out;
  if (format == "csv") {
    out = "key,value\n";
    for (const auto& [k, v] : kv) out += k + "," + v + "\n";
  } else {
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  }
  return out;
}

// ---- gen-data --------------------------------------------------------------

struct GenArgs {
  Common common;
  std::int64_t count = 100'000;
  dynb_synth_spec spec{};
  std::optional<double> rate_constant;
};

int run_gen_data(GenArgs& a) {
  if (a.common.output.empty()) {
    throw CLI::ValidationError("gen-data needs --output <manifest>");
  }
  a.spec.count = static_cast<std::uint64_t>(a.count);
  a.spec.seed = a.common.seed;
  if (a.rate_constant) {
    a.spec.rate_kind = DYNB_RATE_CONSTANT;
    a.spec.rate_value = *a.rate_constant;
  }
  dynb_manifest* raw = nullptr;
  std::uint64_t outliers = 0;
  check(dynb_manifest_generate(&a.spec, &raw, &outliers));
  Manifest m(raw);
  check(dynb_manifest_write(m.get(), a.common.output.c_str()));

  dynb_manifest_summary s{};
  check(dynb_manifest_summarize(m.get(), 25.0, &s));
  ordered_json j;
  j["count"] = s.count;
  j["total_hours"] = s.total_seconds / 3600.0;
  j["mean_duration"] = s.mean_duration;
  j["min_duration"] = s.min_duration;
  j["max_duration"] = s.max_duration;
  j["total_tokens"] = s.total_tokens;
  j["max_tokens"] = s.max_tokens;
  j["mean_tps"] = s.mean_tps;
  j["outliers_generated"] = outliers;
  j["above_tps_25"] = s.above_tps;
  std::cout << render_kv(j, a.common.format);
  return 0;
}

// ---- estimate-buckets ------------------------------------------------------

struct EstimateArgs {
  Common common;
  std::string manifest;
  std::size_t buckets = 30;
  std::size_t sub_buckets = 0;
  double tps_filter = 0.0;
};

int run_estimate(const EstimateArgs& a) {
  Manifest m = read_manifest(a.manifest);
  dynb_bucket_spec* raw = nullptr;
  dynb_estimation_diagnostics diag{};
  check(dynb_bucket_spec_estimate(m.get(), a.buckets, a.sub_buckets,
                                  a.tps_filter, &raw, &diag));
  Spec spec(raw);
  char* text_raw = nullptr;
  check(dynb_bucket_spec_to_text(spec.get(), &text_raw));
  CString text(text_raw);
  emit(a.common.output, text.get());
  if (a.common.output.empty()) return 0;

  const std::size_t bins = dynb_bucket_spec_num_bins(spec.get());
  std::vector<double> occ(bins);
  check(dynb_bucket_spec_occupancy(spec.get(), m.get(), occ.data()));
  dynb_manifest_summary s{};
  check(dynb_manifest_summarize(m.get(), 0.0, &s));
  double total = 0.0;
  for (double o : occ) total += o;
  const double ideal = total / static_cast<double>(bins);
  double worst = 0.0;
  for (double o : occ) worst = std::max(worst, std::abs(o - ideal));

  ordered_json j;
  j["duration_bins"] = bins;
  j["sub_bins"] = dynb_bucket_spec_num_subbins(spec.get());
  j["flat_buckets"] = dynb_bucket_spec_num_buckets(spec.get());
  j["merged_bounds"] = diag.merged_bounds;
  j["padded_subbounds"] = diag.padded_subbounds;
  j["inherited_bins"] = diag.inherited_bins;
  j["ideal_bin_duration"] = ideal;
  j["max_occupancy_deviation"] = worst;
  j["max_sample_duration"] = s.max_duration;
  j["occupancy_within_tolerance"] = worst <= s.max_duration;
  std::cout << render_kv(j, a.common.format);
  return 0;
}

// ---- oomptimize ------------------------------------------------------------

struct OomArgs {
  Common common;
  ModelArgs model;
  std::string spec;
  std::size_t max_batch = std::size_t{1} << 16;
};

int run_oomptimize(const OomArgs& a) {
  Spec spec = load_spec(a.spec);
  const dynb_memory_model model = a.model.memory();
  dynb_batch_sizes* raw = nullptr;
  std::size_t failed = 0;
  check(dynb_oomptimize(spec.get(), &model, a.model.cap(), a.max_batch, &raw,
                        &failed));
  Sizes sizes(raw);
  char* text_raw = nullptr;
  check(dynb_batch_sizes_to_text(sizes.get(), &text_raw));
  CString text(text_raw);
  emit(a.common.output, text.get());
  if (a.common.output.empty()) return 0;

  const std::size_t subs =
      std::max<std::size_t>(1, dynb_bucket_spec_num_subbins(spec.get()));
  if (a.common.format == "json") {
    ordered_json rows = ordered_json::array();
    for (std::size_t b = 0; b < dynb_batch_sizes_count(sizes.get()); ++b) {
      ordered_json r;
      r["bucket"] = b;
      r["duration_bound"] = dynb_bucket_spec_duration_bound(spec.get(), b / subs);
      r["token_bound"] =
          dynb_bucket_spec_token_bound(spec.get(), b / subs, b % subs);
      r["batch_size"] = dynb_batch_sizes_get(sizes.get(), b);
      rows.push_back(r);
    }
    ordered_json j;
    j["capacity"] = a.model.cap();
    j["buckets"] = rows;
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  const char* sep = a.common.format == "csv" ? "," : " ";
  std::cout << "bucket" << sep << "duration_bound" << sep << "token_bound"
            << sep << "batch_size\n";
  for (std::size_t b = 0; b < dynb_batch_sizes_count(sizes.get()); ++b) {
    std::cout << b << sep
              << fmt(dynb_bucket_spec_duration_bound(spec.get(), b / subs))
              << sep
              << dynb_bucket_spec_token_bound(spec.get(), b / subs, b % subs)
              << sep << dynb_batch_sizes_get(sizes.get(), b) << "\n";
  }
  return 0;
}

// ---- sample ----------------------------------------------------------------

struct SampleArgs {
  Common common;
  SamplerArgs sampler;
  ModelArgs model;
  std::size_t max_batches = 0;
  bool verbose = false;
};

int run_sample(const SampleArgs& a) {
  SamplerSetup s = make_sampler(a.sampler, a.model, a.common.seed);
  std::string out;
  if (a.common.format == "csv") {
    out = "batch,bucket,size,max_input,max_output,input_pad_frac,"
          "output_pad_frac,ids\n";
  }
  dynb_batch_info info{};
  int has = 0;
  for (std::size_t k = 0; a.max_batches == 0 || k < a.max_batches; ++k) {
    check(dynb_sampler_next(s.sampler.get(), &info, &has));
    if (!has) break;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < info.size; ++i) {
      dynb_sample smp{};
      check(dynb_sampler_batch_sample(s.sampler.get(), i, &smp));
      ids.emplace_back(smp.id);
    }
    const std::string bucket =
        info.has_bucket ? std::to_string(info.bucket) : std::string("-");
    if (a.common.format == "json") {
      ordered_json j;
      j["batch"] = k;
      j["bucket"] = info.has_bucket ? ordered_json(info.bucket) : ordered_json();
      j["size"] = info.size;
      j["max_input"] = info.max_input;
      j["max_output"] = info.max_output;
      j["padding"] = padding_json(info.padding);
      j["ids"] = ids;
      out += j.dump() + "\n";
    } else {
      std::string joined;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        joined += (i ? (a.common.format == "csv" ? ";" : ",") : "") + ids[i];
      }
      if (a.common.format == "csv") {
        out += std::to_string(k) + "," + bucket + "," +
               std::to_string(info.size) + "," + fmt(info.max_input) + "," +
               std::to_string(info.max_output) + "," +
               fmt(info.padding.input_pad_frac) + "," +
               fmt(info.padding.output_pad_frac) + "," + joined + "\n";
      } else {
        out += "batch " + std::to_string(k) + " bucket " + bucket + " size " +
               std::to_string(info.size) + " max_input " +
               fmt(info.max_input) + " max_output " +
               std::to_string(info.max_output) + " ids " + joined + "\n";
      }
    }
  }
  emit(a.common.output, out);
  if (a.verbose) {
    const std::int64_t ns = dynb_sampler_first_read_latency_ns(s.sampler.get());
    if (ns >= 0) std::cerr << "first read latency: " << ns << " ns\n";
  }
  return 0;
}

// ---- profile ---------------------------------------------------------------

struct ProfileArgs {
  Common common;
  SamplerArgs sampler;
  ModelArgs model;
  std::string series;
  double tps_bin_width = 0.0;
};

int run_profile(const ProfileArgs& a) {
  SamplerSetup s = make_sampler(a.sampler, a.model, a.common.seed);
  const dynb_memory_model model = a.model.memory();
  std::vector<double> memory;
  std::string series =
      "step,bucket,batch_size,max_input,max_output,input_pad_frac,"
      "output_pad_frac,memory\n";
  dynb_batch_info info{};
  int has = 0;
  for (std::size_t step = 0;; ++step) {
    check(dynb_sampler_next(s.sampler.get(), &info, &has));
    if (!has) break;
    const double mem = dynb_memory_model_eval(
        &model, static_cast<double>(info.size), info.max_input,
        static_cast<double>(info.max_output));
    memory.push_back(mem);
    series += std::to_string(step) + "," +
              (info.has_bucket ? std::to_string(info.bucket) : "-") + "," +
              std::to_string(info.size) + "," + fmt(info.max_input) + "," +
              std::to_string(info.max_output) + "," +
              fmt(info.padding.input_pad_frac) + "," +
              fmt(info.padding.output_pad_frac) + "," + fmt(mem, 3) + "\n";
  }
  dynb_sampler_stats st{};
  check(dynb_sampler_stats_get(s.sampler.get(), &st));
  dynb_trace_summary trace{};
  check(dynb_trace_summarize(memory.data(), memory.size(), &trace));

  ordered_json j;
  j["scheme"] = a.sampler.scheme.empty() ? a.sampler.mode : a.sampler.scheme;
  j["batches_emitted"] = st.batches_emitted;
  j["samples_emitted"] = st.samples_emitted;
  j["samples_filtered_tps"] = st.samples_filtered_tps;
  j["samples_discarded_allocation"] = st.samples_discarded_allocation;
  j["mean_batch_size"] = st.mean_batch_size;
  j["fallback_selections"] = st.fallback_selections;
  j["forced_batches"] = st.forced_batches;
  j["padding"] = padding_json(st.padding);
  j["memory"]["capacity"] = a.model.cap();
  j["memory"]["max"] = trace.max;
  j["memory"]["mean"] = trace.mean;
  j["memory"]["cv"] = trace.cv;
  if (a.tps_bin_width > 0.0) {
    std::size_t n = 0;
    check(dynb_manifest_tps_histogram(s.manifest.get(), a.tps_bin_width,
                                      nullptr, 0, &n));
    std::vector<dynb_tps_bin> bins(n);
    check(dynb_manifest_tps_histogram(s.manifest.get(), a.tps_bin_width,
                                      bins.data(), bins.size(), &n));
    ordered_json hist;
    for (const auto& b : bins) {
      ordered_json h;
      h["count"] = b.count;
      h["mean"] = b.mean;
      h["p50"] = b.p50;
      h["p90"] = b.p90;
      h["p99"] = b.p99;
      hist[fmt(b.lo, 1) + "-" + fmt(b.hi, 1)] = h;
    }
    j["tps_by_duration"] = hist;
  }
  emit(a.common.output, render_kv(j, a.common.format));
  if (!a.series.empty()) emit(a.series, series);
  return 0;
}

// ---- simulate-ddp ----------------------------------------------------------

struct DdpArgs {
  Common common;
  std::string world_sizes = "2,16,128";
  std::size_t steps = 1000;
  std::string cost = "quadratic";
  std::string cost_coeffs;
  std::size_t buckets = 30;
  double threshold = 360.0;
  std::size_t buffer_capacity = 10'000;
  std::uint64_t samples_per_rank = 70'000;
  std::uint64_t data_seed = 1234;
};

int run_simulate_ddp(const DdpArgs& a) {
  // Bucket bins come from a reference population drawn from the same law.
  dynb_synth_spec data;
  dynb_synth_spec_init_default(&data);
  data.seed = a.data_seed;
  dynb_manifest* pop_raw = nullptr;
  check(dynb_manifest_generate(&data, &pop_raw, nullptr));
  Manifest pop(pop_raw);
  dynb_bucket_spec* spec_raw = nullptr;
  check(dynb_bucket_spec_estimate(pop.get(), a.buckets, 0, 0.0, &spec_raw,
                                  nullptr));
  Spec spec(spec_raw);

  dynb_sampler_config cfg;
  dynb_sampler_config_init(&cfg);
  cfg.batching = DYNB_BATCHING_DURATION;
  cfg.duration_threshold = a.threshold;
  cfg.buffer_capacity = a.buffer_capacity;
  cfg.seed = a.common.seed;

  dynb_step_cost_model cost{};
  if (!a.cost_coeffs.empty()) {
    const auto v = parse_list(a.cost_coeffs);
    if (v.size() != 5) throw CLI::ValidationError("--cost-coeffs needs k0..k4");
    for (std::size_t i = 0; i < 5; ++i) cost.k[i] = v[i];
  } else if (a.cost == "constant") {
    dynb_step_cost_constant(&cost);
  } else {
    dynb_step_cost_quadratic(&cost);
  }
  data.count = a.samples_per_rank;

  std::vector<dynb_ddp_report> reports;
  for (double w : parse_list(a.world_sizes)) {
    if (w < 1 || w != std::floor(w)) {
      throw CLI::ValidationError("world sizes must be positive integers");
    }
    dynb_ddp_report r{};
    check(dynb_simulate_ddp(static_cast<std::size_t>(w), a.steps, spec.get(),
                            &cfg, &cost, &data, a.common.seed, &r));
    reports.push_back(r);
  }

  std::string out;
  if (a.common.format == "json") {
    ordered_json rows = ordered_json::array();
    for (const auto& r : reports) {
      ordered_json j;
      j["world_size"] = r.world_size;
      j["steps"] = r.steps;
      j["mean_step_time_sync"] = r.mean_step_time_sync;
      j["mean_step_time_unsync"] = r.mean_step_time_unsync;
      j["speedup_percent"] = r.speedup_percent;
      j["fallback_selections_sync"] = r.fallback_selections_sync;
      rows.push_back(j);
    }
    out = rows.dump(2) + "\n";
  } else if (a.common.format == "csv") {
    out = "world_size,steps,mean_step_time_sync,mean_step_time_unsync,"
          "speedup_percent,fallback_selections_sync\n";
    for (const auto& r : reports) {
      out += std::to_string(r.world_size) + "," + std::to_string(r.steps) +
             "," + fmt(r.mean_step_time_sync) + "," +
             fmt(r.mean_step_time_unsync) + "," + fmt(r.speedup_percent, 3) +
             "," + std::to_string(r.fallback_selections_sync) + "\n";
    }
  } else {
    out = "| GPUs | Training step speedup [%] |\n";
    out += "|------|---------------------------|\n";
    for (const auto& r : reports) {
      char line[96];
      std::snprintf(line, sizeof line, "| %4zu | %25.2f |\n", r.world_size,
                    r.speedup_percent);
      out += line;
    }
  }
  emit(a.common.output, out);
  return 0;
}

// ---- rtfx ------------------------------------------------------------------

struct RtfxArgs {
  Common common;
  std::vector<std::string> observe = {"24:24:345", "24:4:1097"};
  std::vector<std::string> predict = {"24:24", "24:4", "32:4"};
};

std::vector<double> colon_fields(const std::string& text, std::size_t n) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) out.push_back(std::stod(item));
  if (out.size() != n) throw CLI::ValidationError("malformed field: " + text);
  return out;
}

int run_rtfx(const RtfxArgs& a) {
  if (a.observe.size() != 2) {
    throw CLI::ValidationError("--observe needs exactly two ENC:DEC:RTFX rows");
  }
  const auto o1 = colon_fields(a.observe[0], 3);
  const auto o2 = colon_fields(a.observe[1], 3);
  dynb_inference_cost_model fit{};
  check(dynb_fit_inference_cost(
      static_cast<std::size_t>(o1[0]), static_cast<std::size_t>(o1[1]), o1[2],
      static_cast<std::size_t>(o2[0]), static_cast<std::size_t>(o2[1]), o2[2],
      &fit));
  ordered_json j;
  j["enc_layer_cost"] = fit.enc_layer_cost;
  j["dec_layer_cost"] = fit.dec_layer_step_cost;
  ordered_json rows = ordered_json::array();
  for (const auto& p : a.predict) {
    const auto f = colon_fields(p, 2);
    dynb_inference_cost_model m = fit;
    m.enc_layers = static_cast<std::size_t>(f[0]);
    m.dec_layers = static_cast<std::size_t>(f[1]);
    double rtfx = 0.0;
    check(dynb_predict_rtfx(&m, 1.0, &rtfx));
    ordered_json r;
    r["enc_layers"] = m.enc_layers;
    r["dec_layers"] = m.dec_layers;
    r["rtfx"] = rtfx;
    rows.push_back(r);
  }
  j["predictions"] = rows;
  std::string out;
  if (a.common.format == "json") {
    out = j.dump(2) + "\n";
  } else {
    const char* sep = a.common.format == "csv" ? "," : " ";
    out = "enc_layers" + std::string(sep) + "dec_layers" + sep + "rtfx\n";
    for (const auto& r : rows) {
      out += r["enc_layers"].dump() + sep + r["dec_layers"].dump() + sep +
             fmt(r["rtfx"].get<double>(), 1) + "\n";
    }
  }
  emit(a.common.output, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Padding-minimizing mini-batch construction toolkit"};
  app.set_config("--config", "", "TOML experiment configuration");
  app.require_subcommand(1);

  GenArgs gen;
  dynb_synth_spec_init_default(&gen.spec);
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic manifest");
  add_common(gen_cmd, gen.common);
  gen.common.seed = gen.spec.seed;
  gen_cmd->add_option("--count", gen.count, "Number of samples")
      ->check(CLI::Range(std::int64_t{1},
                         std::numeric_limits<std::int64_t>::max()))
      ->capture_default_str();
  gen_cmd->add_option("--mu", gen.spec.duration_mu, "Log-duration mean");
  gen_cmd->add_option("--sigma", gen.spec.duration_sigma,
                      "Log-duration standard deviation");
  gen_cmd->add_option("--min-duration", gen.spec.min_duration);
  gen_cmd->add_option("--max-duration", gen.spec.max_duration);
  gen_cmd->add_option("--rate-shape", gen.spec.rate_shape);
  gen_cmd->add_option("--rate-scale", gen.spec.rate_scale);
  gen_cmd->add_option("--rate-constant", gen.rate_constant,
                      "Use a constant token rate instead of gamma");
  gen_cmd->add_option("--prompt-tokens", gen.spec.prompt_tokens);
  gen_cmd->add_option("--outlier-frac", gen.spec.outlier_frac);
  gen_cmd->add_option("--outlier-factor", gen.spec.outlier_factor);

  EstimateArgs est;
  auto* est_cmd =
      app.add_subcommand("estimate-buckets", "Estimate bucket bins");
  add_common(est_cmd, est.common);
  est_cmd->add_option("--manifest,-m", est.manifest)->required();
  est_cmd->add_option("--buckets", est.buckets, "Duration bins")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  est_cmd->add_option("--sub-buckets", est.sub_buckets,
                      "Token sub-bins per duration bin (0: 1D)")
      ->capture_default_str();
  est_cmd->add_option("--tps-filter", est.tps_filter,
                      "Estimate on samples at or below this tokens/second");

  OomArgs oom;
  auto* oom_cmd =
      app.add_subcommand("oomptimize", "Calibrate per-bucket batch sizes");
  add_common(oom_cmd, oom.common);
  add_model(oom_cmd, oom.model);
  oom_cmd->add_option("--spec", oom.spec, "Bucket spec file")->required();
  oom_cmd->add_option("--max-batch", oom.max_batch)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  SampleArgs smp;
  auto* smp_cmd = app.add_subcommand("sample", "Emit mini-batches");
  add_common(smp_cmd, smp.common);
  add_sampler(smp_cmd, smp.sampler);
  add_model(smp_cmd, smp.model);
  smp_cmd->add_option("--max-batches", smp.max_batches, "Stop after N batches");
  smp_cmd->add_flag("--verbose,-v", smp.verbose);

  ProfileArgs prof;
  auto* prof_cmd =
      app.add_subcommand("profile", "Sampler statistics and CSV series");
  add_common(prof_cmd, prof.common);
  add_sampler(prof_cmd, prof.sampler);
  add_model(prof_cmd, prof.model);
  prof_cmd->add_option("--series", prof.series, "Per-step CSV series path");
  prof_cmd->add_option("--tps-bin-width", prof.tps_bin_width,
                       "Add a TPS-by-duration histogram (seconds per bin)");

  DdpArgs ddp;
  auto* ddp_cmd = app.add_subcommand(
      "simulate-ddp", "Synchronized vs unsynchronized bucket selection");
  add_common(ddp_cmd, ddp.common);
  ddp_cmd->add_option("--world-sizes", ddp.world_sizes)->capture_default_str();
  ddp_cmd->add_option("--steps", ddp.steps)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ddp_cmd->add_option("--cost", ddp.cost, "Reference step cost model")
      ->check(CLI::IsMember({"quadratic", "constant"}))
      ->capture_default_str();
  ddp_cmd->add_option("--cost-coeffs", ddp.cost_coeffs, "k0,k1,k2,k3,k4");
  ddp_cmd->add_option("--buckets", ddp.buckets)->capture_default_str();
  ddp_cmd->add_option("--threshold", ddp.threshold)->capture_default_str();
  ddp_cmd->add_option("--buffer-capacity", ddp.buffer_capacity)
      ->capture_default_str();
  ddp_cmd->add_option("--samples-per-rank", ddp.samples_per_rank)
      ->capture_default_str();
  ddp_cmd->add_option("--data-seed", ddp.data_seed,
                      "Seed of the population used to estimate bins")
      ->capture_default_str();

  RtfxArgs rtfx;
  auto* rtfx_cmd =
      app.add_subcommand("rtfx", "Fit and extrapolate the RTFx cost model");
  add_common(rtfx_cmd, rtfx.common);
  rtfx_cmd->add_option("--observe", rtfx.observe, "ENC:DEC:RTFX (twice)")
      ->capture_default_str();
  rtfx_cmd->add_option("--predict", rtfx.predict, "ENC:DEC")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
    if (gen_cmd->parsed()) return run_gen_data(gen);
    if (est_cmd->parsed()) return run_estimate(est);
    if (oom_cmd->parsed()) return run_oomptimize(oom);
    if (smp_cmd->parsed()) return run_sample(smp);
    if (prof_cmd->parsed()) return run_profile(prof);
    if (ddp_cmd->parsed()) return run_simulate_ddp(ddp);
    if (rtfx_cmd->parsed()) return run_rtfx(rtfx);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; every usage error exits 2.
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const LibraryFailure& e) {
    std::cerr << "error: " << e.message << "\n";
    return 10 + static_cast<int>(e.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
