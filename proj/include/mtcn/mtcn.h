// Copyright 2026 The MTCN Authors.
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

#ifndef MTCN_MTCN_H
#define MTCN_MTCN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MTCN_API __declspec(dllexport)
#else
#define MTCN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mtcn_status {
  MTCN_OK = 0,
  MTCN_ERR_INVALID_ARGUMENT = 1,
  MTCN_ERR_IO = 2,
  MTCN_ERR_FORMAT = 3,
  MTCN_ERR_DIMENSION = 4,
  MTCN_ERR_NUMERIC = 5,
  MTCN_ERR_STATE = 6,
  MTCN_ERR_INTERNAL = 7
} mtcn_status;

typedef struct mtcn_config mtcn_config;
typedef struct mtcn_store mtcn_store;
typedef struct mtcn_av mtcn_av;
typedef struct mtcn_lm mtcn_lm;

typedef void (*mtcn_log_fn)(const char* line, void* user);

MTCN_API const char* mtcn_version(void);
MTCN_API const char* mtcn_status_name(mtcn_status status);
/* Message of the last failed call on this thread, "" if none. */
MTCN_API const char* mtcn_last_error(void);
/* Same as a JSON object {"error": {"code": ..., "message": ...}}. */
MTCN_API const char* mtcn_last_error_json(void);
/* Frees strings returned through char** out-parameters. */
MTCN_API void mtcn_string_free(char* s);

/* Run configuration. Keys are dotted JSON paths such as "seed", "window",
   "fusion.lambda" or "av.layers"; every setter revalidates the whole config. */
MTCN_API mtcn_status mtcn_config_default(mtcn_config** out);
MTCN_API mtcn_status mtcn_config_load(const char* path, mtcn_config** out);
MTCN_API mtcn_status mtcn_config_from_json(const char* text, mtcn_config** out);
MTCN_API mtcn_status mtcn_config_set_string(mtcn_config* cfg, const char* key, const char* value);
MTCN_API mtcn_status mtcn_config_set_int(mtcn_config* cfg, const char* key, int64_t value);
MTCN_API mtcn_status mtcn_config_set_double(mtcn_config* cfg, const char* key, double value);
MTCN_API mtcn_status mtcn_config_to_json(const mtcn_config* cfg, char** out);
MTCN_API void mtcn_config_free(mtcn_config* cfg);

/* Runs one pipeline command ("synth", "train-av", "train-lm", "eval",
   "rescore", "gridsearch-lambda", "dump-attention") in run_dir. `log` may be
   NULL; `summary` (may be NULL) receives a JSON summary. */
MTCN_API mtcn_status mtcn_run_command(const mtcn_config* cfg, const char* run_dir, const char* command,
                                      mtcn_log_fn log, void* user, char** summary);

MTCN_API mtcn_status mtcn_store_open(const char* dir, mtcn_store** out);
MTCN_API size_t mtcn_store_size(const mtcn_store* store);
MTCN_API mtcn_status mtcn_store_label(const mtcn_store* store, size_t row, int* verb, int* noun);
MTCN_API void mtcn_store_free(mtcn_store* store);

/* Beam search over w positions of verb (w*num_verbs) and noun (w*num_nouns)
   log-probabilities. `padded` may be NULL. Writes up to k hypotheses:
   out_actions holds k*w (verb, noun) pairs, -1 for padding; out_scores k sums. */
MTCN_API mtcn_status mtcn_beam_search(size_t w, size_t num_verbs, size_t num_nouns, const float* verb_logp,
                                      const float* noun_logp, const unsigned char* padded, size_t k,
                                      int* out_actions, double* out_scores, size_t* out_count);

MTCN_API mtcn_status mtcn_av_load(const mtcn_config* cfg, const char* checkpoint, mtcn_av** out);
MTCN_API mtcn_status mtcn_av_parameter_count(const mtcn_av* av, size_t* out);
MTCN_API void mtcn_av_free(mtcn_av* av);

MTCN_API mtcn_status mtcn_lm_load(const mtcn_config* cfg, const char* checkpoint, mtcn_lm** out);
/* Pseudo-log-likelihood of a label sequence of the LM's window length; a
   verb/noun pair of -1 marks padding. */
MTCN_API mtcn_status mtcn_lm_pll(const mtcn_lm* lm, const int* verbs, const int* nouns, size_t len, double* out);
MTCN_API void mtcn_lm_free(mtcn_lm* lm);

#ifdef __cplusplus
}
#endif

#endif
