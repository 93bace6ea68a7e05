#ifndef DCMSG_DCMSG_H
#define DCMSG_DCMSG_H

/* C interface to the choice-modelling game engine.
 *
 * Every function returns a dcm_status. On failure the message is available
 * from dcm_last_error() on the calling thread until the next call. Strings
 * returned through char** parameters are owned by the caller and released
 * with dcm_string_free. Structured values travel as JSON text. */

#include <stddef.h>

#if defined(_WIN32)
#define DCM_API __declspec(dllexport)
#else
#define DCM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dcm_status {
  DCM_OK = 0,
  DCM_INVALID_ARGUMENT = 1,
  DCM_IO = 2,
  DCM_MALFORMED_FILE = 3,
  DCM_EMPTY_DATASET = 4,
  DCM_UNKNOWN_VARIABLE = 5,
  DCM_ARITY_MISMATCH = 6,
  DCM_ZERO_VARIANCE = 7,
  DCM_ALL_ROWS_DELETED = 8,
  DCM_UNKNOWN_TASK = 9,
  DCM_INVALID_CONFIG = 10,
  DCM_INVALID_SPEC = 11,
  DCM_INCOMPLETE_DATA = 12,
  DCM_NON_POSITIVE_FOR_LOG = 13,
  DCM_NON_FINITE_UTILITY = 14,
  DCM_NON_FINITE_OBJECTIVE = 15,
  DCM_SINGULAR_HESSIAN = 16,
  DCM_NO_COST_COEFFICIENT = 17,
  DCM_TOO_FEW_MODELS = 18,
  DCM_NO_LATENT_CLASS_MODELS = 19,
  DCM_UNKNOWN_DATASET = 20,
  DCM_UNKNOWN_SESSION = 21,
  DCM_SESSION_CLOSED = 22,
  DCM_UNKNOWN_ACTION = 23,
  DCM_UNKNOWN_MODEL_ID = 24,
  DCM_MODEL_PENDING = 25,
  DCM_EMPTY_REPORT = 26,
  DCM_SCHEMA_MISMATCH = 27,
  DCM_NO_TRANSITIONS = 28,
  DCM_NO_MODELS = 29,
  DCM_DEGENERATE_GROUPS = 30,
  DCM_INTERNAL = 100
} dcm_status;

typedef struct dcm_dataset dcm_dataset;
typedef struct dcm_manager dcm_manager;
typedef struct dcm_service dcm_service;

DCM_API const char* dcm_version(void);
DCM_API const char* dcm_last_error(void);
DCM_API const char* dcm_status_name(dcm_status status);
DCM_API void dcm_string_free(char* s);

/* ---- datasets ---- */

/* config: {"n_individuals", "n_tasks", "seed", "missing_rate", "true_params": {..},
 *          "random_sd": {..}, "classes": [{"share", "params": {..}}]}; NULL for defaults. */
DCM_API dcm_status dcm_dataset_generate(const char* config_json, dcm_dataset** out);
DCM_API dcm_status dcm_dataset_load(const char* path, dcm_dataset** out);
DCM_API dcm_status dcm_dataset_save(const dcm_dataset* data, const char* path);
/* {"n_individuals", "n_tasks", "n_rows", "complete", "fingerprint"} */
DCM_API dcm_status dcm_dataset_describe(const dcm_dataset* data, char** out_json);
DCM_API void dcm_dataset_free(dcm_dataset* data);

/* ---- specifications and estimation ---- */

/* Writes the list of violated constraints; an empty array means valid. */
DCM_API dcm_status dcm_spec_validate(const char* spec_json, char** violations_json);

/* options: {"draws", "n_starts", "seed", "threads", "tolerance", "max_iterations",
 *           "covariance"}; NULL for defaults. */
DCM_API dcm_status dcm_estimate(const dcm_dataset* data, const char* spec_json, const char* options_json,
                                char** result_json);

/* Fits every valid mixed logit and latent class specification into the
 * repository file. limit = 0 fits all of them; workers = 0 uses all cores.
 * Writes {"specs", "estimated", "cached", "failed"}. */
DCM_API dcm_status dcm_precompute(const dcm_dataset* data, const char* options_json, const char* repository_path,
                                  unsigned workers, size_t limit, char** stats_json);

/* ---- sessions ---- */

/* options: estimation options plus "time_limit_seconds", "workers",
 * "pending_threshold_ms" and "journal_dir". repository_path may be NULL. */
DCM_API dcm_status dcm_manager_create(const char* options_json, const char* repository_path, dcm_manager** out);
DCM_API dcm_status dcm_manager_add_dataset(dcm_manager* m, const char* name, const dcm_dataset* data);
DCM_API dcm_status dcm_manager_recover(dcm_manager* m, size_t* restored);
DCM_API dcm_status dcm_manager_wait_idle(dcm_manager* m);
/* session_id NULL exports every session; format is "csv" or "jsonl". */
DCM_API dcm_status dcm_manager_export(dcm_manager* m, const char* session_id, const char* format, char** out);
DCM_API void dcm_manager_free(dcm_manager* m);

DCM_API dcm_status dcm_session_create(dcm_manager* m, const char* user_id, const char* dataset, char** session_id);
DCM_API dcm_status dcm_session_summary(dcm_manager* m, const char* session_id, char** out_json);
/* phase is "DA", "MS" or "OI". */
DCM_API dcm_status dcm_session_action(dcm_manager* m, const char* session_id, const char* phase, const char* action,
                                      const char* payload_json, char** result_json);
/* Writes {"model_id", "status", "cached"}. idempotency_key may be NULL. */
DCM_API dcm_status dcm_session_estimate(dcm_manager* m, const char* session_id, const char* spec_json,
                                        const char* idempotency_key, char** ticket_json);
DCM_API dcm_status dcm_session_model(dcm_manager* m, const char* session_id, int model_id, char** out_json);
/* report: {"model_ids": [..], "text": ".."} */
DCM_API dcm_status dcm_session_report(dcm_manager* m, const char* session_id, const char* report_json);

/* Rebuilds one session from its journal against `data`, refitting models
 * through the optional repository. Writes {"summary", "models", "telemetry"}. */
DCM_API dcm_status dcm_replay_journal(const char* journal_path, const dcm_dataset* data, const char* repository_path,
                                      char** out_json);

/* ---- workflow analytics ---- */

/* options: {"min_support", "max_len", "rule": "bic"|"aic"|"ll"|"rho2",
 *           "level": "phase"|"action", "alpha"}. Writes the report files into
 * out_dir and a JSON summary. */
DCM_API dcm_status dcm_analyze(const char* export_path, const char* options_json, const char* out_dir,
                               char** summary_json);

/* ---- HTTP service ---- */

/* config_path may be NULL; DCMSG_* environment variables apply on top. */
DCM_API dcm_status dcm_service_create(const char* config_path, dcm_service** out);
/* port < 0 uses the configured port, 0 any free port. */
DCM_API dcm_status dcm_service_bind(dcm_service* s, int port, int* bound_port);
DCM_API dcm_status dcm_service_start(dcm_service* s);
DCM_API dcm_status dcm_service_stop(dcm_service* s);
DCM_API void dcm_service_free(dcm_service* s);

#ifdef __cplusplus
}
#endif

#endif
