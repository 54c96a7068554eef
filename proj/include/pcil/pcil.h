/* Copyright 2026 The pcil Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to libpcil. Every function returns a pcil_status; on failure
 * pcil_last_error() describes the problem (thread-local, valid until the next
 * call on the same thread). Strings returned through char** out-parameters
 * are owned by the caller and released with pcil_string_free(). Handles are
 * released with their matching *_free function, which accepts NULL.
 */
#ifndef PCIL_PCIL_H_
#define PCIL_PCIL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(PCIL_BUILDING_LIBRARY)
#define PCIL_API __attribute__((visibility("default")))
#else
#define PCIL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pcil_status {
  PCIL_OK = 0,
  PCIL_E_CONFIG = 1,
  PCIL_E_FORMAT = 2,
  PCIL_E_CORRUPT = 3,
  PCIL_E_DATA = 4,
  PCIL_E_SHAPE = 5,
  PCIL_E_DEGENERATE = 6,
  PCIL_E_PROTOCOL = 7,
  PCIL_E_NUMERIC = 8,
  PCIL_E_PARSE = 9,
  PCIL_E_PIPELINE = 10,
  PCIL_E_IO = 11,
  PCIL_E_EVALUATION = 12,
  PCIL_E_INVALID_ARGUMENT = 13,
  PCIL_E_INTERNAL = 14
} pcil_status;

typedef struct pcil_dataset pcil_dataset;
typedef struct pcil_learner pcil_learner;
typedef struct pcil_report pcil_report;
typedef struct pcil_manifest pcil_manifest;
typedef struct pcil_llm_client pcil_llm_client;
typedef struct pcil_image_client pcil_image_client;

PCIL_API const char* pcil_version(void);
PCIL_API const char* pcil_last_error(void);
PCIL_API const char* pcil_status_name(pcil_status status);
/* Process exit code for a status: 0 ok, 2 configuration, 3 data/format,
 * 4 protocol, 1 anything else. */
PCIL_API int pcil_exit_code(pcil_status status);
PCIL_API void pcil_string_free(char* s);

/* ---- Feature files ---------------------------------------------------- */

PCIL_API pcil_status pcil_dataset_load(const char* path, pcil_dataset** out);
PCIL_API void pcil_dataset_free(pcil_dataset* ds);
PCIL_API pcil_status pcil_dataset_dim(const pcil_dataset* ds, uint32_t* dim);
PCIL_API pcil_status pcil_dataset_size(const pcil_dataset* ds, uint64_t* count);
/* JSON summary: {"dim", "count", "split", "classes": {id: name}}. */
PCIL_API pcil_status pcil_dataset_describe(const pcil_dataset* ds, char** json);

/* Task partition of the dataset's class ids as JSON
 * {"tasks", "seed", "task_classes": [[...], ...]}. */
PCIL_API pcil_status pcil_split_classes(const pcil_dataset* ds, uint32_t tasks, uint64_t seed,
                                        char** partition_json);

/* ---- Learners ---------------------------------------------------------- */

/* learner_json uses the "learner" object of the experiment config, e.g.
 * {"kind": "ranpac", "M": 2048, "lambda": 1.0}. */
PCIL_API pcil_status pcil_learner_create(const char* learner_json, uint32_t dim,
                                         const char* prototypes_path, pcil_learner** out);
PCIL_API void pcil_learner_free(pcil_learner* learner);
PCIL_API pcil_status pcil_learner_begin_task(pcil_learner* learner, const uint32_t* class_ids,
                                             size_t count);
PCIL_API pcil_status pcil_learner_observe(pcil_learner* learner, uint32_t label,
                                          const float* feature, size_t length);
PCIL_API pcil_status pcil_learner_end_task(pcil_learner* learner);
PCIL_API pcil_status pcil_learner_predict(const pcil_learner* learner, const float* feature,
                                          size_t length, uint32_t* label);

/* ---- Experiments ------------------------------------------------------- */

PCIL_API pcil_status pcil_config_validate(const char* config_json);
PCIL_API pcil_status pcil_experiment_run(const char* config_json, pcil_report** out);
PCIL_API pcil_status pcil_report_load(const char* json_path, pcil_report** out);
PCIL_API void pcil_report_free(pcil_report* report);
PCIL_API pcil_status pcil_report_final_average(const pcil_report* report, double* a_t);
PCIL_API pcil_status pcil_report_csv(const pcil_report* report, char** csv);
PCIL_API pcil_status pcil_report_json(const pcil_report* report, char** json);
/* One CSV table for several reports sharing T. */
PCIL_API pcil_status pcil_report_table(const pcil_report* const* reports, size_t count,
                                       char** csv);

enum { PCIL_REPORT_CSV = 1, PCIL_REPORT_JSON = 2 };
/* Writes report.csv and/or report.json into dir (created if needed). */
PCIL_API pcil_status pcil_report_emit(const pcil_report* report, const char* dir, int formats);

/* ---- Prompts ----------------------------------------------------------- */

/* realm_json: {"name": "Birds", "kind": "biological", "subtype_noun": "orders"}.
 * Each function returns a JSON array of {"system", "user"} chat prompts. */
PCIL_API pcil_status pcil_prompts_subtype(const char* realm_json, char** chats_json);
PCIL_API pcil_status pcil_prompts_description(const char* realm_json,
                                              const char* subtypes_json, char** chats_json);
PCIL_API pcil_status pcil_prompts_class_names(const char* realm_json, const char* names_json,
                                              char** chats_json);

/* Replays a recorded transcript file. */
PCIL_API pcil_status pcil_llm_client_replay(const char* transcript_path, pcil_llm_client** out);
/* Live client from PCIL_LLM_ENDPOINT / PCIL_LLM_API_KEY / PCIL_LLM_MODEL. */
PCIL_API pcil_status pcil_llm_client_http_from_env(pcil_llm_client** out);
PCIL_API void pcil_llm_client_free(pcil_llm_client* client);

/* Runs class discovery. The result JSON holds "subtypes", "classes" and
 * "rejected". With transcript_out set, every exchange is saved there.
 * max_subtypes = 0 keeps all subtypes. */
PCIL_API pcil_status pcil_discover_classes(const char* realm_json, pcil_llm_client* client,
                                           size_t max_subtypes, const char* transcript_out,
                                           char** result_json);
/* ';'-separated CSV for a JSON array of class specs, in the realm's schema. */
PCIL_API pcil_status pcil_class_specs_csv(const char* realm_json, const char* classes_json,
                                          char** csv);

/* ---- Manifests and generation ----------------------------------------- */

/* request_json: {"realm": {...}, "classes": [...] or "classes_csv": path,
 *                "per_class": n, "seed": s, "style": "description"|"class_only",
 *                "params": {"image_size", "inference_steps", "guidance_scale"},
 *                "extension": "png"} */
PCIL_API pcil_status pcil_manifest_build(const char* request_json, pcil_manifest** out);
PCIL_API pcil_status pcil_manifest_load(const char* path, pcil_manifest** out);
PCIL_API pcil_status pcil_manifest_save(const pcil_manifest* manifest, const char* path);
PCIL_API pcil_status pcil_manifest_job_count(const pcil_manifest* manifest, uint64_t* count);
PCIL_API void pcil_manifest_free(pcil_manifest* manifest);

/* Reply slot handed to submit callbacks. */
typedef struct pcil_submit_reply pcil_submit_reply;
PCIL_API void pcil_submit_reply_image(pcil_submit_reply* reply, const uint8_t* bytes,
                                      size_t length);
PCIL_API void pcil_submit_reply_error(pcil_submit_reply* reply, const char* message,
                                      int retryable);

/* Callback client: return 0 after pcil_submit_reply_image, or non-zero after
 * pcil_submit_reply_error. Must be thread-safe if parallelism > 1. */
typedef int (*pcil_submit_fn)(void* user_data, const char* job_key, const char* prompt,
                              uint64_t seed, uint32_t image_size, uint32_t inference_steps,
                              double guidance_scale, pcil_submit_reply* reply);
PCIL_API pcil_status pcil_image_client_callback(pcil_submit_fn fn, void* user_data,
                                                pcil_image_client** out);
/* Live client from PCIL_IMAGE_ENDPOINT / PCIL_IMAGE_API_KEY. */
PCIL_API pcil_status pcil_image_client_http_from_env(pcil_image_client** out);
PCIL_API void pcil_image_client_free(pcil_image_client* client);

/* options_json: {"output_root", "max_attempts", "initial_backoff_ms",
 *                "backoff_factor", "max_backoff_ms", "parallelism",
 *                "event_log", "report_path"}.
 * report_json (optional) receives the completion report, also when every
 * job failed (status PCIL_E_PIPELINE). */
PCIL_API pcil_status pcil_generation_run(const pcil_manifest* manifest,
                                         pcil_image_client* client, const char* options_json,
                                         char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* PCIL_PCIL_H_ */
