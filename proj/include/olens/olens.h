/*
 * Copyright 2026 The Olens Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


/* C interface to the olens library. Every function returns an olens_status;
 * on failure olens_last_error() describes what went wrong (thread-local,
 * valid until the next call on the same thread). Objects are opaque and
 * released with their matching _free function. Strings returned through
 * char** out-parameters are owned by the caller: release with
 * olens_string_free. */
#ifndef OLENS_OLENS_H_
#define OLENS_OLENS_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define OLENS_API __declspec(dllexport)
#elif defined(__GNUC__)
#define OLENS_API __attribute__((visibility("default")))
#else
#define OLENS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum olens_status {
  OLENS_OK = 0,
  OLENS_E_INVALID_ARGUMENT = 1,
  OLENS_E_IO = 2,               /* unreadable or unwritable file */
  OLENS_E_FORMAT = 3,           /* truncated or corrupt file contents */
  OLENS_E_DATA_MISMATCH = 4,    /* dataset does not fit the request */
  OLENS_E_CHECKPOINT_MISMATCH = 5,
  OLENS_E_BAD_TARGET = 6,
  OLENS_E_INTERNAL = 7
} olens_status;

typedef struct olens_dataset olens_dataset;
typedef struct olens_network olens_network;
typedef struct olens_image olens_image;
typedef struct olens_uncertainty olens_uncertainty;
typedef struct olens_saliency olens_saliency;

OLENS_API const char* olens_version(void);
OLENS_API const char* olens_last_error(void);
/* Name of the library's internal error kind for the last failure, e.g.
 * "BadSize"; empty after success. */
OLENS_API const char* olens_last_error_kind(void);
OLENS_API const char* olens_status_name(olens_status status);
OLENS_API void olens_string_free(char* s);

/* ---- datasets ---- */

/* task: "vessels" or "lesions"; mode: "binary" or "quadrant" (lesions only,
 * may be NULL). */
OLENS_API olens_status olens_dataset_synth(const char* task, size_t n,
                                           size_t size, uint64_t seed,
                                           const char* mode,
                                           olens_dataset** out);
OLENS_API olens_status olens_dataset_load(const char* dir, olens_dataset** out);
OLENS_API olens_status olens_dataset_save(const olens_dataset* ds,
                                          const char* dir);
OLENS_API olens_status olens_dataset_manifest(const olens_dataset* ds,
                                              char** json);
OLENS_API size_t olens_dataset_count(const olens_dataset* ds);
OLENS_API void olens_dataset_free(olens_dataset* ds);

/* ---- networks ---- */

OLENS_API olens_status olens_network_load(const char* path, olens_network** out);
/* bytes_written may be NULL. */
OLENS_API olens_status olens_network_save(const olens_network* net,
                                          const char* path,
                                          size_t* bytes_written);
/* Checkpoint metadata as JSON. */
OLENS_API olens_status olens_network_info(const olens_network* net, char** json);
OLENS_API void olens_network_free(olens_network* net);

typedef struct olens_train_options {
  const char* task;        /* "vessels" or "lesions" */
  size_t epochs;
  double learning_rate;    /* negative: task default (1e-3 vessels, 1e-2 lesions) */
  double dropout;
  uint64_t seed;
  size_t batch_size;
  const char* optimizer;   /* "adam" or "sgd" */
  size_t base_channels;
  double val_fraction;
  size_t pretrain_epochs;  /* lesions only */
  size_t pretrain_samples; /* lesions only */
} olens_train_options;

OLENS_API void olens_train_options_init(olens_train_options* options);

/* Called after every epoch with a one-line JSON record (no newline) and the
 * epoch's wall-clock time. */
typedef void (*olens_epoch_fn)(const char* json, double wall_seconds,
                               void* user);

OLENS_API olens_status olens_train(const olens_dataset* ds,
                                   const olens_train_options* options,
                                   olens_epoch_fn on_epoch, void* user,
                                   olens_network** out);

/* JSON {"count", "loss", "accuracy"?}; deterministic, dropout off. */
OLENS_API olens_status olens_evaluate(const olens_network* net,
                                      const olens_dataset* ds, char** json);

/* ---- images ---- */

OLENS_API olens_status olens_image_read(const char* path, olens_image** out);
OLENS_API olens_status olens_image_dims(const olens_image* img, size_t* channels,
                                        size_t* height, size_t* width);
OLENS_API const double* olens_image_data(const olens_image* img);
OLENS_API void olens_image_free(olens_image* img);

/* ---- uncertainty ---- */

/* decomposition: "variance" or "entropy". */
OLENS_API olens_status olens_uncertainty_run(const olens_network* net,
                                             const olens_image* input,
                                             size_t samples,
                                             const char* decomposition,
                                             uint64_t seed,
                                             olens_uncertainty** out);
/* which: "mean", "epistemic" or "aleatoric". */
OLENS_API olens_status olens_uncertainty_map(const olens_uncertainty* u,
                                             const char* which,
                                             const double** data, size_t* n);
OLENS_API olens_status olens_uncertainty_stats(const olens_uncertainty* u,
                                               char** json);
OLENS_API olens_status olens_uncertainty_write(const olens_uncertainty* u,
                                               const char* dir);
OLENS_API void olens_uncertainty_free(olens_uncertainty* u);

/* ---- saliency ---- */

typedef struct olens_explain_options {
  const char* method;   /* "vanilla", "guided" or "ig" */
  int smooth;
  const char* target;   /* "class:K", "region:auto" or NULL for default */
  size_t ig_steps;
  double sigma;
  size_t n_noise;
  uint64_t seed;
  const char* baseline; /* "zeros" or "gray" */
} olens_explain_options;

OLENS_API void olens_explain_options_init(olens_explain_options* options);

OLENS_API olens_status olens_explain_run(const olens_network* net,
                                         const olens_image* input,
                                         const olens_explain_options* options,
                                         olens_saliency** out);
/* Signed [H,W] attribution grid. */
OLENS_API olens_status olens_saliency_map(const olens_saliency* s,
                                          const double** data, size_t* height,
                                          size_t* width);
OLENS_API olens_status olens_saliency_params(const olens_saliency* s,
                                             char** json);
OLENS_API olens_status olens_saliency_write(const olens_saliency* s,
                                            const char* dir);
OLENS_API void olens_saliency_free(olens_saliency* s);

/* ---- report ---- */

typedef struct olens_report_options {
  size_t samples;
  uint64_t seed;
  size_t ig_steps;
  size_t n_noise;
  double sigma;
} olens_report_options;

OLENS_API void olens_report_options_init(olens_report_options* options);

/* Writes report.ppm and report.json into dir; json may be NULL. */
OLENS_API olens_status olens_report_write(const olens_network* net,
                                          const olens_image* input,
                                          const olens_report_options* options,
                                          const char* dir, char** json);

#ifdef __cplusplus
}
#endif

#endif /* OLENS_OLENS_H_ */
