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

#include "dynbucket/dynbucket.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "dynbucket/batch_sizes.hpp"
#include "dynbucket/bucketing.hpp"
#include "dynbucket/datamodel.hpp"
#include "dynbucket/error.hpp"
#include "dynbucket/ingest.hpp"
#include "dynbucket/oomptimizer.hpp"
#include "dynbucket/recipes.hpp"
#include "dynbucket/sampler.hpp"
#include "dynbucket/sim.hpp"
#include "dynbucket/stream.hpp"

using namespace dynbucket;

struct dynb_manifest {
  std::vector<Sample> samples;
  // Built on the first append; ids must stay unique.
  std::optional<std::unordered_set<std::string>> ids;
};

struct dynb_bucket_spec {
  BucketSpec spec;
};

struct dynb_batch_sizes {
  BucketBatchSizes sizes;
};

struct dynb_sampler {
  std::unique_ptr<Sampler> sampler;
  BufferedStream* stream = nullptr;  // owned by `sampler` when buffered
  std::optional<MiniBatch> current;
};

namespace {

thread_local std::string last_error;

template <typename F>
dynb_status guarded(F&& body) noexcept {
  try {
    body();
    last_error.clear();
    return DYNB_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return static_cast<dynb_status>(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return DYNB_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    last_error = e.what();
    return DYNB_INTERNAL_ERROR;
  } catch (...) {
    last_error = "unknown error";
    return DYNB_INTERNAL_ERROR;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string slurp(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot open ") + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const char* path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(std::string("cannot write ") + path);
  out << text;
  out.flush();
  if (!out) throw IoError(std::string("write error on ") + path);
}

dynb_sample to_c(const Sample& s) {
  return dynb_sample{s.id.c_str(), s.input_len, s.output_len};
}

dynb_padding_stats to_c(const PaddingStats& p) {
  return dynb_padding_stats{p.input_pad_frac,    p.output_pad_frac,
                            p.total_input_cells, p.padded_input_cells,
                            p.total_output_cells, p.padded_output_cells};
}

SynthSpec from_c(const dynb_synth_spec& c) {
  SynthSpec s;
  s.count = c.count;
  s.duration = DurationDist{c.duration_mu, c.duration_sigma, c.min_duration,
                            c.max_duration};
  s.rate.kind = c.rate_kind == DYNB_RATE_CONSTANT ? RateDist::Kind::kConstant
                                                  : RateDist::Kind::kGamma;
  s.rate.shape = c.rate_shape;
  s.rate.scale = c.rate_scale;
  s.rate.value = c.rate_value;
  s.prompt_tokens = c.prompt_tokens;
  s.outlier_frac = c.outlier_frac;
  s.outlier_factor = c.outlier_factor;
  s.seed = c.seed;
  return s;
}

MemoryModel from_c(const dynb_memory_model& c) {
  MemoryModel m;
  for (std::size_t i = 0; i < m.c.size(); ++i) m.c[i] = c.c[i];
  return m;
}

dynb_memory_model to_c(const MemoryModel& m) {
  dynb_memory_model c{};
  for (std::size_t i = 0; i < m.c.size(); ++i) c.c[i] = m.c[i];
  return c;
}

SamplerConfig from_c(const dynb_sampler_config& c,
                     const dynb_bucket_spec* spec) {
  SamplerConfig cfg;
  switch (c.batching) {
    case DYNB_BATCHING_DURATION:
      cfg.batching = DurationHeuristic{c.duration_threshold};
      break;
    case DYNB_BATCHING_FIXED:
      cfg.batching =
          FixedBatch{c.fixed_size, PadShape{c.pad_to_input, c.pad_to_output}};
      break;
    case DYNB_BATCHING_PER_BUCKET:
      require(c.sizes != nullptr, "per-bucket batching needs batch sizes");
      cfg.batching = PerBucketSizes{c.sizes->sizes};
      break;
    default:
      throw InvalidArgument("unknown batching mode");
  }
  if (c.batching != DYNB_BATCHING_FIXED) {
    require(spec != nullptr, "bucketed batching needs a bucket spec");
  }
  if (spec) cfg.spec = spec->spec;
  if (c.tps_threshold > 0.0) cfg.tps_threshold = c.tps_threshold;
  cfg.allocation = c.allocation == DYNB_ALLOCATION_FLEXIBLE
                       ? AllocationPolicy::kFlexible
                       : AllocationPolicy::kStrict;
  cfg.buffer_capacity = c.buffer_capacity;
  cfg.selection = c.selection == DYNB_SELECT_OCCUPANCY
                      ? SelectionWeighting::kOccupancy
                      : SelectionWeighting::kUniform;
  if (c.sync_enabled) {
    cfg.sync = SyncConfig{c.shared_seed, c.rank, c.world_size};
  }
  cfg.seed = c.seed;
  return cfg;
}

dynb_sampler_config to_c(const SamplerConfig& cfg,
                         const dynb_batch_sizes* sizes) {
  dynb_sampler_config c;
  dynb_sampler_config_init(&c);
  if (const auto* dh = std::get_if<DurationHeuristic>(&cfg.batching)) {
    c.batching = DYNB_BATCHING_DURATION;
    c.duration_threshold = dh->threshold_seconds;
  } else if (const auto* fb = std::get_if<FixedBatch>(&cfg.batching)) {
    c.batching = DYNB_BATCHING_FIXED;
    c.fixed_size = fb->size;
    c.pad_to_input = fb->pad_to.input_seconds;
    c.pad_to_output = fb->pad_to.output_tokens;
  } else {
    c.batching = DYNB_BATCHING_PER_BUCKET;
    c.sizes = sizes;
  }
  c.tps_threshold = cfg.tps_threshold.value_or(0.0);
  c.allocation = cfg.allocation == AllocationPolicy::kFlexible
                     ? DYNB_ALLOCATION_FLEXIBLE
                     : DYNB_ALLOCATION_STRICT;
  c.buffer_capacity = cfg.buffer_capacity;
  c.selection = cfg.selection == SelectionWeighting::kOccupancy
                    ? DYNB_SELECT_OCCUPANCY
                    : DYNB_SELECT_UNIFORM;
  c.seed = cfg.seed;
  return c;
}

dynb_discard_reason to_c(DiscardReason r) {
  switch (r) {
    case DiscardReason::kExceedsMaxDuration:
      return DYNB_DISCARD_EXCEEDS_MAX_DURATION;
    case DiscardReason::kExceedsTokenBoundStrict:
      return DYNB_DISCARD_EXCEEDS_TOKEN_BOUND_STRICT;
    case DiscardReason::kExceedsAllBucketsFlexible:
      return DYNB_DISCARD_EXCEEDS_ALL_BUCKETS_FLEXIBLE;
    case DiscardReason::kTpsFiltered:
      return DYNB_DISCARD_TPS_FILTERED;
  }
  return DYNB_DISCARD_NONE;
}

dynb_status make_sampler(std::unique_ptr<SampleSource> source,
                         const dynb_bucket_spec* spec,
                         const dynb_sampler_config* cfg, dynb_sampler** out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    SamplerConfig config = from_c(*cfg, spec);
    auto handle = std::make_unique<dynb_sampler>();
    if (cfg->buffered_stream) {
      BufferedStreamConfig bc;
      bc.capacity = cfg->stream_capacity;
      bc.start_fraction = cfg->start_fraction;
      auto stream = std::make_unique<BufferedStream>(std::move(source), bc);
      handle->stream = stream.get();
      source = std::move(stream);
    }
    handle->sampler =
        std::make_unique<Sampler>(std::move(source), std::move(config));
    *out = handle.release();
  });
}

}  // namespace

extern "C" {

const char* dynb_version(void) { return "1.0.0"; }

const char* dynb_status_name(dynb_status status) {
  switch (status) {
    case DYNB_OK: return "ok";
    case DYNB_INVALID_ARGUMENT: return "invalid-argument";
    case DYNB_PARSE_ERROR: return "parse-error";
    case DYNB_VALIDATION_ERROR: return "validation-error";
    case DYNB_IO_ERROR: return "io-error";
    case DYNB_ESTIMATION_ERROR: return "estimation-error";
    case DYNB_CALIBRATION_ERROR: return "calibration-error";
    case DYNB_SIMULATION_ERROR: return "simulation-error";
    case DYNB_INTERNAL_ERROR: return "internal-error";
  }
  return "unknown";
}

const char* dynb_last_error_message(void) { return last_error.c_str(); }

void dynb_string_free(char* str) { delete[] str; }

void dynb_synth_spec_init_default(dynb_synth_spec* c) {
  if (!c) return;
  const SynthSpec s = default_synth_spec();
  c->count = s.count;
  c->duration_mu = s.duration.mu;
  c->duration_sigma = s.duration.sigma;
  c->min_duration = s.duration.min_dur;
  c->max_duration = s.duration.max_dur;
  c->rate_kind = DYNB_RATE_GAMMA;
  c->rate_shape = s.rate.shape;
  c->rate_scale = s.rate.scale;
  c->rate_value = s.rate.value;
  c->prompt_tokens = s.prompt_tokens;
  c->outlier_frac = s.outlier_frac;
  c->outlier_factor = s.outlier_factor;
  c->seed = s.seed;
}

dynb_status dynb_manifest_create(dynb_manifest** out) {
  return guarded([&] {
    require(out, "null argument");
    *out = new dynb_manifest{};
  });
}

dynb_status dynb_manifest_append(dynb_manifest* m, const dynb_sample* s) {
  return guarded([&] {
    require(m && s && s->id, "null argument");
    Sample sample{s->id, s->duration, s->num_tokens};
    validate(sample);
    if (!m->ids) {
      m->ids.emplace();
      for (const Sample& x : m->samples) m->ids->insert(x.id);
    }
    if (!m->ids->insert(sample.id).second) {
      throw ValidationError("duplicate sample id '" + sample.id + "'");
    }
    m->samples.push_back(std::move(sample));
  });
}

dynb_status dynb_manifest_generate(const dynb_synth_spec* spec,
                                   dynb_manifest** out, uint64_t* outliers) {
  return guarded([&] {
    require(spec && out, "null argument");
    SynthGenerator gen(from_c(*spec));
    auto m = std::make_unique<dynb_manifest>();
    m->samples.reserve(spec->count);
    while (auto s = gen.next()) m->samples.push_back(std::move(*s));
    if (outliers) *outliers = gen.outliers_emitted();
    *out = m.release();
  });
}

dynb_status dynb_manifest_read(const char* path, dynb_manifest** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto m = std::make_unique<dynb_manifest>();
    m->samples = read_manifest(path);
    *out = m.release();
  });
}

dynb_status dynb_manifest_write(const dynb_manifest* m, const char* path) {
  return guarded([&] {
    require(m && path, "null argument");
    write_manifest(path, m->samples);
  });
}

size_t dynb_manifest_size(const dynb_manifest* m) {
  return m ? m->samples.size() : 0;
}

dynb_status dynb_manifest_get(const dynb_manifest* m, size_t index,
                              dynb_sample* out) {
  return guarded([&] {
    require(m && out, "null argument");
    require(index < m->samples.size(), "sample index out of range");
    *out = to_c(m->samples[index]);
  });
}

void dynb_manifest_free(dynb_manifest* m) { delete m; }

dynb_status dynb_manifest_summarize(const dynb_manifest* m,
                                    double tps_threshold,
                                    dynb_manifest_summary* out) {
  return guarded([&] {
    require(m && out, "null argument");
    dynb_manifest_summary s{};
    s.count = m->samples.size();
    double tps_sum = 0.0;
    for (const Sample& x : m->samples) {
      if (s.total_seconds == 0.0 || x.input_len < s.min_duration) {
        s.min_duration = x.input_len;
      }
      s.max_duration = std::max(s.max_duration, x.input_len);
      s.total_seconds += x.input_len;
      s.total_tokens += x.output_len;
      s.max_tokens = std::max(s.max_tokens, x.output_len);
      tps_sum += tps(x);
      if (tps(x) > tps_threshold) ++s.above_tps;
    }
    if (s.count > 0) {
      s.mean_duration = s.total_seconds / static_cast<double>(s.count);
      s.mean_tps = tps_sum / static_cast<double>(s.count);
    }
    *out = s;
  });
}

dynb_status dynb_manifest_tps_histogram(const dynb_manifest* m,
                                        double bin_width, dynb_tps_bin* bins,
                                        size_t capacity, size_t* num_bins) {
  return guarded([&] {
    require(m && num_bins, "null argument");
    const TpsHistogram h = tps_histogram(m->samples, bin_width);
    *num_bins = h.bins.size();
    for (std::size_t i = 0; i < h.bins.size() && i < capacity && bins; ++i) {
      const TpsBin& b = h.bins[i];
      bins[i] = dynb_tps_bin{b.lo, b.hi, b.count, b.mean, b.p50, b.p90, b.p99};
    }
  });
}

dynb_status dynb_padding_stats_compute(const dynb_sample* samples,
                                       size_t count, int has_pad_to,
                                       double pad_input_seconds,
                                       int64_t pad_output_tokens,
                                       dynb_padding_stats* out) {
  return guarded([&] {
    require(samples && out, "null argument");
    std::vector<Sample> v;
    v.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      v.push_back(Sample{samples[i].id ? samples[i].id : "",
                         samples[i].duration, samples[i].num_tokens});
      validate(v.back());
    }
    MiniBatch batch(std::move(v));
    std::optional<PadShape> pad;
    if (has_pad_to) pad = PadShape{pad_input_seconds, pad_output_tokens};
    *out = to_c(padding_stats(batch, pad));
  });
}

dynb_status dynb_bucket_spec_create(const double* duration_bounds,
                                    size_t num_bins,
                                    const int64_t* token_bounds,
                                    size_t num_subbins,
                                    dynb_bucket_spec** out) {
  return guarded([&] {
    require(duration_bounds && out, "null argument");
    std::vector<double> d(duration_bounds, duration_bounds + num_bins);
    std::vector<std::vector<std::int64_t>> t;
    if (token_bounds && num_subbins > 0) {
      for (size_t i = 0; i < num_bins; ++i) {
        t.emplace_back(token_bounds + i * num_subbins,
                       token_bounds + (i + 1) * num_subbins);
      }
    }
    *out = new dynb_bucket_spec{BucketSpec(std::move(d), std::move(t))};
  });
}

dynb_status dynb_bucket_spec_estimate(const dynb_manifest* m,
                                      size_t num_buckets, size_t num_subbins,
                                      double tps_threshold,
                                      dynb_bucket_spec** out,
                                      dynb_estimation_diagnostics* diag) {
  return guarded([&] {
    require(m && out, "null argument");
    std::vector<Sample> filtered;
    std::span<const Sample> basis = m->samples;
    if (tps_threshold > 0.0) {
      for (const Sample& s : m->samples) {
        if (filter_tps(s, tps_threshold) == TpsDecision::kKeep) {
          filtered.push_back(s);
        }
      }
      basis = filtered;
    }
    EstimationDiagnostics d;
    BucketSpec spec = estimate_duration_bins(basis, num_buckets, &d);
    if (num_subbins > 0) {
      spec = estimate_token_subbins(basis, spec, num_subbins,
                                    SubbinWeighting::kTokens, &d);
    }
    if (diag) {
      *diag = dynb_estimation_diagnostics{d.merged_bounds, d.padded_subbounds,
                                          d.inherited_bins};
    }
    *out = new dynb_bucket_spec{std::move(spec)};
  });
}

dynb_status dynb_bucket_spec_load(const char* path, dynb_bucket_spec** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new dynb_bucket_spec{bucket_spec_from_text(slurp(path))};
  });
}

dynb_status dynb_bucket_spec_save(const dynb_bucket_spec* spec,
                                  const char* path) {
  return guarded([&] {
    require(spec && path, "null argument");
    spit(path, to_text(spec->spec));
  });
}

dynb_status dynb_bucket_spec_to_text(const dynb_bucket_spec* spec, char** out) {
  return guarded([&] {
    require(spec && out, "null argument");
    *out = dup_string(to_text(spec->spec));
  });
}

size_t dynb_bucket_spec_num_bins(const dynb_bucket_spec* spec) {
  return spec ? spec->spec.num_duration_bins() : 0;
}

size_t dynb_bucket_spec_num_subbins(const dynb_bucket_spec* spec) {
  return spec && spec->spec.is_2d() ? spec->spec.num_subbins() : 0;
}

size_t dynb_bucket_spec_num_buckets(const dynb_bucket_spec* spec) {
  return spec ? spec->spec.num_buckets() : 0;
}

double dynb_bucket_spec_duration_bound(const dynb_bucket_spec* spec,
                                       size_t bin) {
  if (!spec || bin >= spec->spec.num_duration_bins()) return -1.0;
  return spec->spec.duration_bounds()[bin];
}

int64_t dynb_bucket_spec_token_bound(const dynb_bucket_spec* spec, size_t bin,
                                     size_t subbin) {
  if (!spec || !spec->spec.is_2d() || bin >= spec->spec.num_duration_bins() ||
      subbin >= spec->spec.num_subbins()) {
    return -1;
  }
  return spec->spec.token_bounds()[bin][subbin];
}

dynb_status dynb_bucket_spec_occupancy(const dynb_bucket_spec* spec,
                                       const dynb_manifest* m, double* out) {
  return guarded([&] {
    require(spec && m && out, "null argument");
    const auto occ = bin_occupancy(m->samples, spec->spec);
    std::copy(occ.begin(), occ.end(), out);
  });
}

void dynb_bucket_spec_free(dynb_bucket_spec* spec) { delete spec; }

dynb_status dynb_allocate(const dynb_bucket_spec* spec, double duration,
                          int64_t num_tokens, dynb_allocation_policy policy,
                          dynb_allocation* out) {
  return guarded([&] {
    require(spec && out, "null argument");
    Sample s{"", duration, num_tokens};
    validate(s);
    const Allocation a =
        allocate(s, spec->spec,
                 policy == DYNB_ALLOCATION_FLEXIBLE ? AllocationPolicy::kFlexible
                                                    : AllocationPolicy::kStrict);
    *out = a.is_assigned()
               ? dynb_allocation{1, a.bucket(), DYNB_DISCARD_NONE}
               : dynb_allocation{0, 0, to_c(a.reason())};
  });
}

void dynb_memory_model_transformer_like(dynb_memory_model* out) {
  if (out) *out = to_c(transformer_like_memory_model());
}

void dynb_memory_model_linear(dynb_memory_model* out) {
  if (out) *out = to_c(linear_memory_model());
}

double dynb_reference_capacity(void) { return reference_capacity(); }

double dynb_memory_model_eval(const dynb_memory_model* model, double batch,
                              double tin, double tout) {
  return model ? from_c(*model)(batch, tin, tout) : 0.0;
}

dynb_status dynb_trace_summarize(const double* values, size_t count,
                                 dynb_trace_summary* out) {
  return guarded([&] {
    require(out && (values || count == 0), "null argument");
    const MemoryTrace t =
        summarize_trace(std::vector<double>(values, values + count));
    *out = dynb_trace_summary{t.max, t.mean, t.cv};
  });
}

dynb_status dynb_oomptimize(const dynb_bucket_spec* spec,
                            const dynb_memory_model* model, double capacity,
                            size_t max_batch, dynb_batch_sizes** out,
                            size_t* failed_bucket) {
  return guarded([&] {
    require(spec && model && out, "null argument");
    try {
      *out = new dynb_batch_sizes{
          oomptimize(spec->spec, from_c(*model), capacity, max_batch)};
    } catch (const CalibrationError& e) {
      if (failed_bucket) *failed_bucket = e.bucket();
      throw;
    }
  });
}

dynb_status dynb_batch_sizes_create(const size_t* sizes, size_t count,
                                    dynb_batch_sizes** out) {
  return guarded([&] {
    require(sizes && out, "null argument");
    *out = new dynb_batch_sizes{
        BucketBatchSizes(std::vector<std::size_t>(sizes, sizes + count))};
  });
}

dynb_status dynb_batch_sizes_load(const char* path, dynb_batch_sizes** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new dynb_batch_sizes{batch_sizes_from_text(slurp(path))};
  });
}

dynb_status dynb_batch_sizes_save(const dynb_batch_sizes* sizes,
                                  const char* path) {
  return guarded([&] {
    require(sizes && path, "null argument");
    spit(path, to_text(sizes->sizes));
  });
}

dynb_status dynb_batch_sizes_to_text(const dynb_batch_sizes* sizes,
                                     char** out) {
  return guarded([&] {
    require(sizes && out, "null argument");
    *out = dup_string(to_text(sizes->sizes));
  });
}

size_t dynb_batch_sizes_count(const dynb_batch_sizes* sizes) {
  return sizes ? sizes->sizes.num_buckets() : 0;
}

size_t dynb_batch_sizes_get(const dynb_batch_sizes* sizes, size_t bucket) {
  if (!sizes || bucket >= sizes->sizes.num_buckets()) return 0;
  return sizes->sizes.at(bucket);
}

void dynb_batch_sizes_free(dynb_batch_sizes* sizes) { delete sizes; }

void dynb_sampler_config_init(dynb_sampler_config* c) {
  if (!c) return;
  *c = dynb_sampler_config{};
  c->batching = DYNB_BATCHING_DURATION;
  c->duration_threshold = 360.0;
  c->fixed_size = 768;
  c->pad_to_input = 40.0;
  c->pad_to_output = 0;
  c->sizes = nullptr;
  c->tps_threshold = 0.0;
  c->allocation = DYNB_ALLOCATION_STRICT;
  c->buffer_capacity = 10'000;
  c->selection = DYNB_SELECT_UNIFORM;
  c->sync_enabled = 0;
  c->world_size = 1;
  c->stream_capacity = 10'000;
  c->start_fraction = 0.10;
}

dynb_status dynb_sampler_create(const dynb_manifest* m,
                                const dynb_bucket_spec* spec,
                                const dynb_sampler_config* cfg,
                                dynb_sampler** out) {
  if (!m) {
    last_error = "null argument";
    return DYNB_INVALID_ARGUMENT;
  }
  std::unique_ptr<SampleSource> source;
  const dynb_status st = guarded(
      [&] { source = std::make_unique<VectorSource>(m->samples); });
  if (st != DYNB_OK) return st;
  return make_sampler(std::move(source), spec, cfg, out);
}

dynb_status dynb_sampler_create_from_file(const char* path,
                                          const dynb_bucket_spec* spec,
                                          const dynb_sampler_config* cfg,
                                          dynb_sampler** out) {
  std::unique_ptr<SampleSource> source;
  const dynb_status st = guarded([&] {
    require(path, "null argument");
    source = std::make_unique<ManifestReader>(path);
  });
  if (st != DYNB_OK) return st;
  return make_sampler(std::move(source), spec, cfg, out);
}

dynb_status dynb_sampler_next(dynb_sampler* s, dynb_batch_info* info,
                              int* has_batch) {
  return guarded([&] {
    require(s && has_batch, "null argument");
    s->current.reset();
    s->current = s->sampler->next_batch();
    *has_batch = s->current ? 1 : 0;
    if (!s->current || !info) return;
    const MiniBatch& b = *s->current;
    info->has_bucket = b.bucket_id() ? 1 : 0;
    info->bucket = b.bucket_id().value_or(0);
    info->size = b.size();
    info->max_input = b.max_input();
    info->max_output = b.max_output();
    std::optional<PadShape> pad;
    if (const auto* fixed =
            std::get_if<FixedBatch>(&s->sampler->config().batching)) {
      pad = fixed->pad_to;
    }
    info->padding = to_c(padding_stats(b, pad));
  });
}

dynb_status dynb_sampler_batch_sample(const dynb_sampler* s, size_t index,
                                      dynb_sample* out) {
  return guarded([&] {
    require(s && out, "null argument");
    require(s->current.has_value(), "no current batch");
    require(index < s->current->size(), "sample index out of range");
    *out = to_c(s->current->samples()[index]);
  });
}

dynb_status dynb_sampler_stats_get(const dynb_sampler* s,
                                   dynb_sampler_stats* out) {
  return guarded([&] {
    require(s && out, "null argument");
    const SamplerStats& st = s->sampler->stats();
    *out = dynb_sampler_stats{st.batches_emitted,
                              st.samples_emitted,
                              st.samples_filtered_tps,
                              st.samples_discarded_allocation,
                              st.mean_batch_size,
                              to_c(st.padding),
                              st.fallback_selections,
                              st.forced_batches};
  });
}

int64_t dynb_sampler_first_read_latency_ns(const dynb_sampler* s) {
  if (!s || !s->stream) return -1;
  const auto latency = s->stream->first_read_latency();
  return latency ? latency->count() : -1;
}

void dynb_sampler_free(dynb_sampler* s) { delete s; }

void dynb_scheme_options_init(dynb_scheme_options* o) {
  if (!o) return;
  const SchemeOptions d;
  o->num_buckets = d.num_buckets;
  o->num_subbins = d.num_subbins;
  o->duration_threshold = d.duration_threshold;
  o->tps_threshold = d.tps_threshold;
  o->memory = to_c(d.memory);
  o->capacity = d.capacity;
  o->max_batch = d.max_batch;
  o->buffer_capacity = d.buffer_capacity;
  o->allocation = DYNB_ALLOCATION_STRICT;
  o->seed = d.seed;
}

dynb_status dynb_scheme_prepare(char scheme, const dynb_manifest* m,
                                const dynb_scheme_options* o,
                                dynb_bucket_spec** spec_out,
                                dynb_batch_sizes** sizes_out,
                                dynb_sampler_config* cfg_out) {
  return guarded([&] {
    require(m && o && spec_out && sizes_out && cfg_out, "null argument");
    const auto which = parse_scheme(std::string_view(&scheme, 1));
    require(which.has_value(), "scheme must be one of A, B, C, D");
    SchemeOptions opts;
    opts.num_buckets = o->num_buckets;
    opts.num_subbins = o->num_subbins;
    opts.duration_threshold = o->duration_threshold;
    opts.tps_threshold = o->tps_threshold;
    opts.memory = from_c(o->memory);
    opts.capacity = o->capacity;
    opts.max_batch = o->max_batch;
    opts.buffer_capacity = o->buffer_capacity;
    opts.allocation = o->allocation == DYNB_ALLOCATION_FLEXIBLE
                          ? AllocationPolicy::kFlexible
                          : AllocationPolicy::kStrict;
    opts.seed = o->seed;
    SchemeSetup setup = prepare_scheme(*which, m->samples, opts);

    auto spec = std::make_unique<dynb_bucket_spec>(
        dynb_bucket_spec{setup.config.spec});
    std::unique_ptr<dynb_batch_sizes> sizes;
    if (setup.sizes) {
      sizes = std::make_unique<dynb_batch_sizes>(
          dynb_batch_sizes{std::move(*setup.sizes)});
    }
    *cfg_out = to_c(setup.config, sizes.get());
    *spec_out = spec.release();
    *sizes_out = sizes.release();
  });
}

void dynb_step_cost_quadratic(dynb_step_cost_model* out) {
  if (!out) return;
  const StepCostModel m = quadratic_step_cost_model();
  *out = dynb_step_cost_model{{m.k0, m.k1, m.k2, m.k3, m.k4}};
}

void dynb_step_cost_constant(dynb_step_cost_model* out) {
  if (!out) return;
  const StepCostModel m = constant_step_cost_model();
  *out = dynb_step_cost_model{{m.k0, m.k1, m.k2, m.k3, m.k4}};
}

dynb_status dynb_simulate_ddp(size_t world_size, size_t steps,
                              const dynb_bucket_spec* spec,
                              const dynb_sampler_config* cfg,
                              const dynb_step_cost_model* cost,
                              const dynb_synth_spec* data, uint64_t seed,
                              dynb_ddp_report* out) {
  return guarded([&] {
    require(spec && cfg && cost && data && out, "null argument");
    const StepCostModel model{cost->k[0], cost->k[1], cost->k[2], cost->k[3],
                              cost->k[4]};
    const DdpSimReport r = simulate_ddp(world_size, steps, from_c(*cfg, spec),
                                        model, from_c(*data), seed);
    *out = dynb_ddp_report{r.world_size,          r.steps,
                           r.mean_step_time_sync, r.mean_step_time_unsync,
                           r.speedup_percent,     r.fallback_selections_sync};
  });
}

dynb_status dynb_predict_rtfx(const dynb_inference_cost_model* model,
                              double audio_seconds, double* rtfx) {
  return guarded([&] {
    require(model && rtfx, "null argument");
    const InferenceCostModel m{model->enc_layer_cost,
                               model->dec_layer_step_cost, model->enc_layers,
                               model->dec_layers,
                               model->tokens_per_second_out};
    *rtfx = predict_rtfx(m, audio_seconds);
  });
}

dynb_status dynb_fit_inference_cost(size_t enc_layers_a, size_t dec_layers_a,
                                    double rtfx_a, size_t enc_layers_b,
                                    size_t dec_layers_b, double rtfx_b,
                                    dynb_inference_cost_model* out) {
  return guarded([&] {
    require(out, "null argument");
    const InferenceCostModel m =
        fit_inference_cost(RtfxObservation{enc_layers_a, dec_layers_a, rtfx_a},
                           RtfxObservation{enc_layers_b, dec_layers_b, rtfx_b});
    *out = dynb_inference_cost_model{m.enc_layer_cost, m.dec_layer_step_cost,
                                     m.enc_layers, m.dec_layers,
                                     m.tokens_per_second_out};
  });
}

}  // extern "C"
