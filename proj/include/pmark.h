// Copyright 2026 The pmark Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the pmark watermarking engine.
 *
 * Every function returns a pmark_status. On failure pmark_last_error()
 * describes the problem for the calling thread. Strings returned through
 * char** outputs are owned by the caller and released with
 * pmark_string_free().
 */
#ifndef PMARK_H
#define PMARK_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PMARK_API __declspec(dllexport)
#else
#define PMARK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pmark_status {
  PMARK_OK = 0,
  PMARK_ERR_ZERO_VECTOR = 1,
  PMARK_ERR_DIM_MISMATCH = 2,
  PMARK_ERR_INVALID_SHAPE = 3,
  PMARK_ERR_DOMAIN = 4,
  PMARK_ERR_CHANNEL_OUT_OF_RANGE = 5,
  PMARK_ERR_EMPTY_INPUT = 6,
  PMARK_ERR_ODD_SET_SIZE = 7,
  PMARK_ERR_BUDGET_NOT_DIVISIBLE = 8,
  PMARK_ERR_EMPTY_CANDIDATE_SET = 9,
  PMARK_ERR_INVALID_COUNT = 10,
  PMARK_ERR_MISSING_RESAMPLE = 11,
  PMARK_ERR_SEED_COVERAGE = 12,
  PMARK_ERR_ZERO_GREEN_MASS = 13,
  PMARK_ERR_ENUMERATION_TOO_LARGE = 14,
  PMARK_ERR_BUDGET_OUT_OF_RANGE = 15,
  PMARK_ERR_EMPTY_SCORE_SET = 16,
  PMARK_ERR_ENDPOINT_UNAVAILABLE = 17,
  PMARK_ERR_EMPTY_COMPLETION = 18,
  PMARK_ERR_INVALID_CONFIG = 19,
  PMARK_ERR_IO = 20,
  PMARK_ERR_PARSE = 21,
  PMARK_ERR_INVALID_ARGUMENT = 100,
  PMARK_ERR_INTERNAL = 101
} pmark_status;

typedef struct pmark_key pmark_key;
typedef struct pmark_engine pmark_engine;

PMARK_API const char* pmark_version(void);
PMARK_API const char* pmark_status_name(pmark_status status);
/* Message of the last failure on this thread; empty when none. */
PMARK_API const char* pmark_last_error(void);
PMARK_API void pmark_string_free(char* s);

/* ---- keys ---- */

PMARK_API pmark_status pmark_key_create(uint64_t seed, size_t dim, size_t channels,
                                        pmark_key** out);
/* Seed drawn from the operating system's entropy source. */
PMARK_API pmark_status pmark_key_create_random(size_t dim, size_t channels, pmark_key** out);
PMARK_API pmark_status pmark_key_load(const char* path, pmark_key** out);
PMARK_API pmark_status pmark_key_save(const pmark_key* key, const char* path);
PMARK_API void pmark_key_free(pmark_key* key);

PMARK_API size_t pmark_key_dim(const pmark_key* key);
PMARK_API size_t pmark_key_channels(const pmark_key* key);
/* 16 hex digits plus NUL; identifies the key file without revealing it. */
PMARK_API pmark_status pmark_key_fingerprint(const pmark_key* key, char out[17]);
/* Copies pivot `channel` (0-based) into out[0..len). len must equal dim. */
PMARK_API pmark_status pmark_key_pivot(const pmark_key* key, size_t channel, double* out,
                                       size_t len);
/* Seed bit for sentence t (1-based) and channel (0-based). */
PMARK_API pmark_status pmark_key_seed_bit(const pmark_key* key, size_t t, size_t channel,
                                          int* out);

/* ---- generation and detection ---- */

/* config_json may be NULL for defaults. mock != 0 uses the built-in
 * deterministic endpoint instead of HTTP. */
PMARK_API pmark_status pmark_engine_create(const pmark_key* key, const char* config_json,
                                           int mock, pmark_engine** out);
PMARK_API void pmark_engine_free(pmark_engine* engine);
/* Checks that `mode` ("online" or "offline") can run with this config. */
PMARK_API pmark_status pmark_engine_check_mode(const pmark_engine* engine, const char* mode);
PMARK_API pmark_status pmark_engine_get_detection(const pmark_engine* engine, double* alpha,
                                                  double* delta, double* K);
PMARK_API pmark_status pmark_engine_set_detection(pmark_engine* engine, double alpha,
                                                  double delta, double K);

/* Writes one JSON record line (no trailing newline) to *record even when
 * generation fails; the failure is then in the record's "error" field and
 * in the returned status. Safe to call from several threads. */
PMARK_API pmark_status pmark_engine_generate(const pmark_engine* engine, const char* mode,
                                             const char* prompt, char** record);
/* `line` is one input JSONL line: a generation record or {"text", "prompt"}.
 * *verdict is 1 or 0 on success and -1 on failure. */
PMARK_API pmark_status pmark_engine_detect(const pmark_engine* engine, const char* mode,
                                           const char* line, char** record, int* verdict);

/* ---- simulation and verification ---- */

PMARK_API pmark_status pmark_simulate(const char* config_json, char** metrics_json,
                                      char** trials_jsonl);
/* suite is "theory" or "all". *passed is 1 when every check passed. */
PMARK_API pmark_status pmark_verify(const char* suite, int inject_nonuniform,
                                    char** report_json, int* passed);

/* ---- numeric helpers ---- */

PMARK_API pmark_status pmark_z_statistic(double n_green, size_t n_total, double* out);
PMARK_API pmark_status pmark_z_threshold(double alpha, double* out);
PMARK_API pmark_status pmark_hd_median(const double* values, size_t n, double* out);

#ifdef __cplusplus
}
#endif

#endif /* PMARK_H */
