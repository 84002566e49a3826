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

/* C interface to the dynbucket library.
 *
 * Objects are opaque handles created by dynb_*_create / _load / _estimate
 * functions and released with the matching dynb_*_free. Every fallible call
 * returns a dynb_status; on failure a message is available from
 * dynb_last_error_message() on the calling thread. Strings returned through
 * char** out-parameters are owned by the caller and released with
 * dynb_string_free(). */

#ifndef DYNBUCKET_H
#define DYNBUCKET_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(DYNBUCKET_BUILDING)
#    define DYNB_API __declspec(dllexport)
#  else
#    define DYNB_API __declspec(dllimport)
#  endif
#else
#  define DYNB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dynb_status {
  DYNB_OK = 0,
  DYNB_INVALID_ARGUMENT = 1,
  DYNB_PARSE_ERROR = 2,
  DYNB_VALIDATION_ERROR = 3,
  DYNB_IO_ERROR = 4,
  DYNB_ESTIMATION_ERROR = 5,
  DYNB_CALIBRATION_ERROR = 6,
  DYNB_SIMULATION_ERROR = 7,
  DYNB_INTERNAL_ERROR = 99
} dynb_status;

DYNB_API const char* dynb_version(void);
DYNB_API const char* dynb_status_name(dynb_status status);
/* Message of the last failed call on this thread ("" if none). */
DYNB_API const char* dynb_last_error_message(void);
DYNB_API void dynb_string_free(char* str);

/* ---- samples and manifests ------------------------------------------- */

typedef struct dynb_sample {
  const char* id; /* borrowed; valid while the owning handle is unchanged */
  double duration;
  int64_t num_tokens;
} dynb_sample;

typedef enum dynb_rate_kind {
  DYNB_RATE_GAMMA = 0,
  DYNB_RATE_CONSTANT = 1
} dynb_rate_kind;

typedef struct dynb_synth_spec {
  uint64_t count;
  double duration_mu;
  double duration_sigma;
  double min_duration;
  double max_duration;
  dynb_rate_kind rate_kind;
  double rate_shape;
  double rate_scale;
  double rate_value;
  int64_t prompt_tokens;
  double outlier_frac;
  double outlier_factor;
  uint64_t seed;
} dynb_synth_spec;

/* Fills the documented default synthetic population. */
DYNB_API void dynb_synth_spec_init_default(dynb_synth_spec* spec);

typedef struct dynb_manifest dynb_manifest;

DYNB_API dynb_status dynb_manifest_create(dynb_manifest** out);
DYNB_API dynb_status dynb_manifest_append(dynb_manifest* manifest,
                                          const dynb_sample* sample);
/* `outliers` (nullable) receives the number of rate-scaled samples. */
DYNB_API dynb_status dynb_manifest_generate(const dynb_synth_spec* spec,
                                            dynb_manifest** out,
                                            uint64_t* outliers);
DYNB_API dynb_status dynb_manifest_read(const char* path, dynb_manifest** out);
DYNB_API dynb_status dynb_manifest_write(const dynb_manifest* manifest,
                                         const char* path);
DYNB_API size_t dynb_manifest_size(const dynb_manifest* manifest);
DYNB_API dynb_status dynb_manifest_get(const dynb_manifest* manifest,
                                       size_t index, dynb_sample* out);
DYNB_API void dynb_manifest_free(dynb_manifest* manifest);

typedef struct dynb_manifest_summary {
  uint64_t count;
  double total_seconds;
  double min_duration;
  double max_duration;
  double mean_duration;
  int64_t total_tokens;
  int64_t max_tokens;
  double mean_tps;      /* mean of per-sample tokens/second */
  uint64_t above_tps;   /* samples with tps strictly above the threshold */
} dynb_manifest_summary;

DYNB_API dynb_status dynb_manifest_summarize(const dynb_manifest* manifest,
                                             double tps_threshold,
                                             dynb_manifest_summary* out);

typedef struct dynb_tps_bin {
  double lo;
  double hi;
  uint64_t count;
  double mean;
  double p50;
  double p90;
  double p99;
} dynb_tps_bin;

/* Writes up to `capacity` bins; `num_bins` always receives the full count. */
DYNB_API dynb_status dynb_manifest_tps_histogram(const dynb_manifest* manifest,
                                                 double bin_width,
                                                 dynb_tps_bin* bins,
                                                 size_t capacity,
                                                 size_t* num_bins);

/* ---- padding --------------------------------------------------------- */

typedef struct dynb_padding_stats {
  double input_pad_frac;
  double output_pad_frac;
  double total_input_cells;
  double padded_input_cells;
  int64_t total_output_cells;
  int64_t padded_output_cells;
} dynb_padding_stats;

/* Padding of the batch formed by `samples`. When `has_pad_to` is non-zero the
 * batch is padded to (pad_input_seconds, pad_output_tokens). */
DYNB_API dynb_status dynb_padding_stats_compute(const dynb_sample* samples,
                                                size_t count, int has_pad_to,
                                                double pad_input_seconds,
                                                int64_t pad_output_tokens,
                                                dynb_padding_stats* out);

/* ---- bucket specs and allocation ------------------------------------- */

typedef struct dynb_bucket_spec dynb_bucket_spec;

typedef struct dynb_estimation_diagnostics {
  uint64_t merged_bounds;
  uint64_t padded_subbounds;
  uint64_t inherited_bins;
} dynb_estimation_diagnostics;

/* token_bounds is row-major [num_bins][num_subbins]; pass NULL/0 for 1D. */
DYNB_API dynb_status dynb_bucket_spec_create(const double* duration_bounds,
                                             size_t num_bins,
                                             const int64_t* token_bounds,
                                             size_t num_subbins,
                                             dynb_bucket_spec** out);
/* num_subbins == 0 estimates a 1D spec. tps_threshold > 0 estimates on the
 * samples that pass the TPS filter. `diag` is nullable. */
DYNB_API dynb_status dynb_bucket_spec_estimate(
    const dynb_manifest* manifest, size_t num_buckets, size_t num_subbins,
    double tps_threshold, dynb_bucket_spec** out,
    dynb_estimation_diagnostics* diag);
DYNB_API dynb_status dynb_bucket_spec_load(const char* path,
                                           dynb_bucket_spec** out);
DYNB_API dynb_status dynb_bucket_spec_save(const dynb_bucket_spec* spec,
                                           const char* path);
DYNB_API dynb_status dynb_bucket_spec_to_text(const dynb_bucket_spec* spec,
                                              char** out);
DYNB_API size_t dynb_bucket_spec_num_bins(const dynb_bucket_spec* spec);
/* 0 for a 1D spec. */
DYNB_API size_t dynb_bucket_spec_num_subbins(const dynb_bucket_spec* spec);
DYNB_API size_t dynb_bucket_spec_num_buckets(const dynb_bucket_spec* spec);
DYNB_API double dynb_bucket_spec_duration_bound(const dynb_bucket_spec* spec,
                                                size_t bin);
/* -1 for a 1D spec or an out-of-range index. */
DYNB_API int64_t dynb_bucket_spec_token_bound(const dynb_bucket_spec* spec,
                                              size_t bin, size_t subbin);
/* Cumulative duration per duration bin; `out` holds num_bins values. */
DYNB_API dynb_status dynb_bucket_spec_occupancy(const dynb_bucket_spec* spec,
                                                const dynb_manifest* manifest,
                                                double* out);
DYNB_API void dynb_bucket_spec_free(dynb_bucket_spec* spec);

typedef enum dynb_allocation_policy {
  DYNB_ALLOCATION_STRICT = 0,
  DYNB_ALLOCATION_FLEXIBLE = 1
} dynb_allocation_policy;

typedef enum dynb_discard_reason {
  DYNB_DISCARD_NONE = 0,
  DYNB_DISCARD_EXCEEDS_MAX_DURATION = 1,
  DYNB_DISCARD_EXCEEDS_TOKEN_BOUND_STRICT = 2,
  DYNB_DISCARD_EXCEEDS_ALL_BUCKETS_FLEXIBLE = 3,
  DYNB_DISCARD_TPS_FILTERED = 4
} dynb_discard_reason;

typedef struct dynb_allocation {
  int assigned;
  size_t bucket;
  dynb_discard_reason reason;
} dynb_allocation;

DYNB_API dynb_status dynb_allocate(const dynb_bucket_spec* spec,
                                   double duration, int64_t num_tokens,
                                   dynb_allocation_policy policy,
                                   dynb_allocation* out);

/* ---- batch size calibration ------------------------------------------ */

/* m(B, Tin, Tout) = c0 + B*(c1*Tin + c2*Tin^2 + c3*Tout + c4*Tout^2
 *                          + c5*Tin*Tout) */
typedef struct dynb_memory_model {
  double c[6];
} dynb_memory_model;

DYNB_API void dynb_memory_model_transformer_like(dynb_memory_model* out);
DYNB_API void dynb_memory_model_linear(dynb_memory_model* out);
DYNB_API double dynb_reference_capacity(void);
DYNB_API double dynb_memory_model_eval(const dynb_memory_model* model,
                                       double batch, double tin, double tout);

typedef struct dynb_trace_summary {
  double max;
  double mean;
  double cv;
} dynb_trace_summary;

DYNB_API dynb_status dynb_trace_summarize(const double* values, size_t count,
                                          dynb_trace_summary* out);

typedef struct dynb_batch_sizes dynb_batch_sizes;

/* On DYNB_CALIBRATION_ERROR, `failed_bucket` (nullable) names the bucket. */
DYNB_API dynb_status dynb_oomptimize(const dynb_bucket_spec* spec,
                                     const dynb_memory_model* model,
                                     double capacity, size_t max_batch,
                                     dynb_batch_sizes** out,
                                     size_t* failed_bucket);
DYNB_API dynb_status dynb_batch_sizes_create(const size_t* sizes, size_t count,
                                             dynb_batch_sizes** out);
DYNB_API dynb_status dynb_batch_sizes_load(const char* path,
                                           dynb_batch_sizes** out);
DYNB_API dynb_status dynb_batch_sizes_save(const dynb_batch_sizes* sizes,
                                           const char* path);
DYNB_API dynb_status dynb_batch_sizes_to_text(const dynb_batch_sizes* sizes,
                                              char** out);
DYNB_API size_t dynb_batch_sizes_count(const dynb_batch_sizes* sizes);
DYNB_API size_t dynb_batch_sizes_get(const dynb_batch_sizes* sizes,
                                     size_t bucket);
DYNB_API void dynb_batch_sizes_free(dynb_batch_sizes* sizes);

/* ---- sampler ---------------------------------------------------------- */

typedef enum dynb_batching {
  DYNB_BATCHING_DURATION = 0,
  DYNB_BATCHING_FIXED = 1,
  DYNB_BATCHING_PER_BUCKET = 2
} dynb_batching;

typedef enum dynb_selection {
  DYNB_SELECT_UNIFORM = 0,
  DYNB_SELECT_OCCUPANCY = 1
} dynb_selection;

typedef struct dynb_sampler_config {
  dynb_batching batching;
  double duration_threshold;       /* DYNB_BATCHING_DURATION */
  size_t fixed_size;               /* DYNB_BATCHING_FIXED */
  double pad_to_input;             /* DYNB_BATCHING_FIXED */
  int64_t pad_to_output;           /* DYNB_BATCHING_FIXED */
  const dynb_batch_sizes* sizes;   /* DYNB_BATCHING_PER_BUCKET, borrowed */
  double tps_threshold;            /* <= 0 disables the filter */
  dynb_allocation_policy allocation;
  size_t buffer_capacity;
  dynb_selection selection;
  int sync_enabled;
  uint64_t shared_seed;
  size_t rank;
  size_t world_size;
  uint64_t seed;
  int buffered_stream;             /* read through a producer thread */
  size_t stream_capacity;
  double start_fraction;
} dynb_sampler_config;

DYNB_API void dynb_sampler_config_init(dynb_sampler_config* cfg);

typedef struct dynb_sampler dynb_sampler;

/* `spec` may be NULL for DYNB_BATCHING_FIXED. The manifest is copied. */
DYNB_API dynb_status dynb_sampler_create(const dynb_manifest* manifest,
                                         const dynb_bucket_spec* spec,
                                         const dynb_sampler_config* cfg,
                                         dynb_sampler** out);
/* Streams the manifest file instead of holding it in memory. */
DYNB_API dynb_status dynb_sampler_create_from_file(
    const char* path, const dynb_bucket_spec* spec,
    const dynb_sampler_config* cfg, dynb_sampler** out);

typedef struct dynb_batch_info {
  int has_bucket;
  size_t bucket;
  size_t size;
  double max_input;
  int64_t max_output;
  dynb_padding_stats padding;
} dynb_batch_info;

/* *has_batch is set to 0 at end-of-stream. The batch's samples can be read
 * with dynb_sampler_batch_sample until the next call. */
DYNB_API dynb_status dynb_sampler_next(dynb_sampler* sampler,
                                       dynb_batch_info* info, int* has_batch);
DYNB_API dynb_status dynb_sampler_batch_sample(const dynb_sampler* sampler,
                                               size_t index, dynb_sample* out);

typedef struct dynb_sampler_stats {
  uint64_t batches_emitted;
  uint64_t samples_emitted;
  uint64_t samples_filtered_tps;
  uint64_t samples_discarded_allocation;
  double mean_batch_size;
  dynb_padding_stats padding;
  uint64_t fallback_selections;
  uint64_t forced_batches;
} dynb_sampler_stats;

DYNB_API dynb_status dynb_sampler_stats_get(const dynb_sampler* sampler,
                                            dynb_sampler_stats* out);
/* First-read latency of the buffered stream in nanoseconds, or -1. */
DYNB_API int64_t dynb_sampler_first_read_latency_ns(
    const dynb_sampler* sampler);
DYNB_API void dynb_sampler_free(dynb_sampler* sampler);

/* ---- scheme presets --------------------------------------------------- */

typedef struct dynb_scheme_options {
  size_t num_buckets;
  size_t num_subbins;
  double duration_threshold;
  double tps_threshold;
  dynb_memory_model memory;
  double capacity;
  size_t max_batch;
  size_t buffer_capacity;
  dynb_allocation_policy allocation;
  uint64_t seed;
} dynb_scheme_options;

DYNB_API void dynb_scheme_options_init(dynb_scheme_options* opts);

/* Prepares scheme 'A'..'D' on the manifest population. *sizes_out is NULL
 * for schemes A and B; otherwise cfg_out->sizes points at it. */
DYNB_API dynb_status dynb_scheme_prepare(char scheme,
                                         const dynb_manifest* manifest,
                                         const dynb_scheme_options* opts,
                                         dynb_bucket_spec** spec_out,
                                         dynb_batch_sizes** sizes_out,
                                         dynb_sampler_config* cfg_out);

/* ---- simulation ------------------------------------------------------- */

/* t(B, Tin, Tout) = k0 + B*(k1*Tin + k2*Tin^2 + k3*Tout + k4*Tout^2) */
typedef struct dynb_step_cost_model {
  double k[5];
} dynb_step_cost_model;

DYNB_API void dynb_step_cost_quadratic(dynb_step_cost_model* out);
DYNB_API void dynb_step_cost_constant(dynb_step_cost_model* out);

typedef struct dynb_ddp_report {
  size_t world_size;
  size_t steps;
  double mean_step_time_sync;
  double mean_step_time_unsync;
  double speedup_percent;
  uint64_t fallback_selections_sync;
} dynb_ddp_report;

/* `data->count` is the number of samples available to each rank. */
DYNB_API dynb_status dynb_simulate_ddp(size_t world_size, size_t steps,
                                       const dynb_bucket_spec* spec,
                                       const dynb_sampler_config* cfg,
                                       const dynb_step_cost_model* cost,
                                       const dynb_synth_spec* data,
                                       uint64_t seed, dynb_ddp_report* out);

typedef struct dynb_inference_cost_model {
  double enc_layer_cost;
  double dec_layer_step_cost;
  size_t enc_layers;
  size_t dec_layers;
  double tokens_per_second_out;
} dynb_inference_cost_model;

DYNB_API dynb_status dynb_predict_rtfx(const dynb_inference_cost_model* model,
                                       double audio_seconds, double* rtfx);
DYNB_API dynb_status dynb_fit_inference_cost(
    size_t enc_layers_a, size_t dec_layers_a, double rtfx_a,
    size_t enc_layers_b, size_t dec_layers_b, double rtfx_b,
    dynb_inference_cost_model* out);

#ifdef __cplusplus
}
#endif

#endif /* DYNBUCKET_H */
