/* Copyright 2026 The convasr Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the convasr speech recognition engine.
 *
 * Every fallible call returns a cvasr_status. On failure the message is
 * available from cvasr_last_error() on the same thread until the next call.
 * Strings returned through char** out-parameters are heap allocated and must
 * be released with cvasr_free_string(). Handles are not thread safe.
 */
#ifndef CONVASR_CONVASR_H_
#define CONVASR_CONVASR_H_

#include <stddef.h>
#include <stdint.h>

#if defined(CONVASR_BUILDING_LIBRARY)
#define CVASR_API __attribute__((visibility("default")))
#else
#define CVASR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cvasr_status {
  CVASR_OK = 0,
  CVASR_ERR_INVALID_ARGUMENT = 1,
  CVASR_ERR_SHAPE = 2,
  CVASR_ERR_IO = 3,
  CVASR_ERR_WAV_FORMAT = 4,
  CVASR_ERR_UNSUPPORTED_AUDIO = 5,
  CVASR_ERR_PARSE = 6,
  CVASR_ERR_UNMAPPED_SYMBOL = 7,
  CVASR_ERR_DIACRITIC = 8,
  CVASR_ERR_INFEASIBLE_LABEL = 9,
  CVASR_ERR_CORRUPT_CHECKPOINT = 10,
  CVASR_ERR_VERSION_MISMATCH = 11,
  CVASR_ERR_CONFIG = 12,
  CVASR_ERR_INTERNAL = 13
} cvasr_status;

typedef struct cvasr_translit cvasr_translit;
typedef struct cvasr_session cvasr_session;
typedef struct cvasr_model cvasr_model;

CVASR_API const char* cvasr_version(void);
CVASR_API const char* cvasr_status_name(cvasr_status status);
CVASR_API const char* cvasr_last_error(void);
/* Details of the last CVASR_ERR_UNMAPPED_SYMBOL / CVASR_ERR_DIACRITIC:
 * zero-based character position and code point. Returns 0 when unavailable.
 * For CVASR_ERR_PARSE, *position receives the one-based line number. */
CVASR_API int cvasr_last_error_location(size_t* position, uint32_t* codepoint);
CVASR_API void cvasr_free_string(char* s);
/* Path of the bundled Arabic/romanization table. */
CVASR_API const char* cvasr_default_translit_table(void);

/* ---- transliteration ---- */

/* path may be NULL for the bundled table. */
CVASR_API cvasr_status cvasr_translit_open(const char* path, cvasr_translit** out);
CVASR_API void cvasr_translit_close(cvasr_translit* t);
CVASR_API cvasr_status cvasr_translit_to_roman(const cvasr_translit* t, const char* arabic_utf8,
                                               char** out);
CVASR_API cvasr_status cvasr_translit_to_arabic(const cvasr_translit* t, const char* roman,
                                                char** out);

/* ---- corpus preparation ---- */

typedef struct cvasr_prepare_summary {
  size_t ok;
  size_t failed;
  double total_seconds;
} cvasr_prepare_summary;

/* Validates every manifest row and writes manifest.validated.csv and
 * stats.txt into out_dir. table may be NULL. report (may be NULL) receives
 * per-row diagnostics and totals. Rows failing validation are not an error. */
CVASR_API cvasr_status cvasr_prepare(const char* manifest, const char* audio_root,
                                     const char* table, const char* out_dir,
                                     cvasr_prepare_summary* summary, char** report);

/* ---- training ---- */

typedef struct cvasr_session_info {
  long step;
  long max_steps;
  long eval_every;
  long checkpoint_every;
  long param_count;
  long receptive_field;
  size_t train_utterances;
  size_t eval_utterances;
  size_t batch_size;
  size_t batches_per_epoch;
} cvasr_session_info;

typedef struct cvasr_step_result {
  long step; /* step count after the update */
  double mean_nll;
  size_t used;
  size_t skipped;
} cvasr_step_result;

typedef struct cvasr_eval_summary {
  double ler_percent;
  double accuracy_percent;
  size_t total_edits;
  size_t total_reference;
  size_t utterances;
  size_t too_short;
} cvasr_eval_summary;

/* Opens a training run from a JSON configuration file. resume may be NULL or
 * the path of a checkpoint written by an earlier run of the same config. */
CVASR_API cvasr_status cvasr_session_open(const char* config_path, const char* resume,
                                          cvasr_session** out);
CVASR_API void cvasr_session_close(cvasr_session* s);
CVASR_API cvasr_status cvasr_session_info_get(const cvasr_session* s, cvasr_session_info* info);
/* Effective output directory (after environment overrides). */
CVASR_API cvasr_status cvasr_session_output_dir(const cvasr_session* s, char** out);
CVASR_API cvasr_status cvasr_session_step(cvasr_session* s, cvasr_step_result* result);
/* Evaluates the held-out split in inference mode. text may be NULL. */
CVASR_API cvasr_status cvasr_session_evaluate(const cvasr_session* s, cvasr_eval_summary* summary,
                                              char** text);
CVASR_API cvasr_status cvasr_session_save(const cvasr_session* s, const char* path);

/* Loads and validates a run configuration and returns its effective output
 * directory (after environment overrides). */
CVASR_API cvasr_status cvasr_config_output_dir(const char* config_path, char** out);

/* ---- evaluation of a saved checkpoint ---- */

typedef enum cvasr_split { CVASR_SPLIT_TRAIN = 0, CVASR_SPLIT_EVAL = 1 } cvasr_split;

/* text, csv and kv may each be NULL. csv holds one row per utterance
 * (id,reference_length,distance,hypothesis); kv holds key=value lines. */
CVASR_API cvasr_status cvasr_evaluate(const char* config_path, const char* checkpoint,
                                      cvasr_split split, cvasr_eval_summary* summary,
                                      char** text, char** csv, char** kv);

/* ---- inference ---- */

CVASR_API cvasr_status cvasr_model_open(const char* checkpoint, cvasr_model** out);
CVASR_API void cvasr_model_close(cvasr_model* m);
/* Either output may be NULL. */
CVASR_API cvasr_status cvasr_model_transcribe_file(const cvasr_model* m, const char* wav_path,
                                                   char** arabic, char** roman);

#ifdef __cplusplus
}
#endif

#endif /* CONVASR_CONVASR_H_ */
