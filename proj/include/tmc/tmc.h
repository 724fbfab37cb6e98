/*
 * tmc — turning-movement-count estimation toolkit, C API.
 *
 * The core is C++; this header is the stable surface for the CLI and for
 * other language bindings. All functions return a tmc_status; on failure a
 * thread-local message is available from tmc_last_error(). Objects are
 * opaque handles released with the matching *_free function. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with tmc_string_free().
 *
 * Configuration is a JSON document (see README for the schema); every
 * function that takes config_json accepts NULL or "" for all defaults.
 */
#ifndef TMC_H
#define TMC_H

#include <stdint.h>

#if defined(_WIN32)
#define TMC_API __declspec(dllexport)
#else
#define TMC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tmc_status {
  TMC_OK = 0,
  TMC_ERR_USAGE = 1,   /* bad arguments or configuration */
  TMC_ERR_DATA = 2,    /* validation, parsing or I/O failure */
  TMC_ERR_NUMERIC = 3  /* numeric failure (non-finite inputs etc.) */
} tmc_status;

typedef struct tmc_dataset tmc_dataset;
typedef struct tmc_plan tmc_plan;

TMC_API const char* tmc_version(void);

/* Message for the most recent failure on this thread; empty if none. */
TMC_API const char* tmc_last_error(void);

TMC_API void tmc_string_free(char* s);

/* ---- datasets ------------------------------------------------------- */

/* allow_unlabeled != 0 permits rows with empty v_lm/v_tm/v_rm cells
 * (target-domain feature files). */
TMC_API tmc_status tmc_dataset_read_csv(const char* path, int allow_unlabeled,
                                        tmc_dataset** out);
TMC_API tmc_status tmc_dataset_write_csv(const tmc_dataset* dataset, const char* path);
TMC_API int64_t tmc_dataset_size(const tmc_dataset* dataset);
TMC_API tmc_status tmc_dataset_summary(const tmc_dataset* dataset, char** json_out);
TMC_API void tmc_dataset_free(tmc_dataset* dataset);

/* ---- synthetic data -------------------------------------------------- */

/* Writes the network CSV and the ground-truth params JSON. When the config
 * requests shifted target intersections (datagen.targets > 0), out_target_csv
 * must be non-NULL and receives them (ids T00, T01, ...), labels included. */
TMC_API tmc_status tmc_generate(const char* config_json, const char* out_csv,
                                const char* out_params_json, const char* out_target_csv);

/* ---- feature selection ------------------------------------------------ */

/* Writes the 24x3 coefficient table CSV and the selected-variable JSON.
 * summary_json (optional) receives {"selected": [...], "lambda": {...}}. */
TMC_API tmc_status tmc_select(const tmc_dataset* source, const char* config_json,
                              const char* coefficients_csv, const char* selected_json,
                              char** summary_json);

/* ---- intersection matching -------------------------------------------- */

/* result_json receives one ranked source list per target intersection. */
TMC_API tmc_status tmc_match(const tmc_dataset* source, const tmc_dataset* target,
                             const char* config_json, char** result_json);

/* ---- transfer pipeline ------------------------------------------------- */

/* Full pipeline: selection, matching, substitution, per-movement training,
 * prediction. Writes the predictions CSV and the plan JSON (reloadable with
 * tmc_plan_load). Labels in the target dataset, if present, are ignored. */
TMC_API tmc_status tmc_run(const tmc_dataset* source, const tmc_dataset* target,
                           const char* config_json, const char* predictions_csv,
                           const char* plan_json, char** summary_json);

TMC_API tmc_status tmc_plan_load(const char* path, tmc_plan** out);
TMC_API tmc_status tmc_plan_predict(const tmc_plan* plan, const tmc_dataset* target,
                                    const char* predictions_csv, char** summary_json);
TMC_API void tmc_plan_free(tmc_plan* plan);

/* ---- evaluation --------------------------------------------------------- */

/* Leave-one-intersection-out benchmark over the configured model list.
 * Writes <out_dir>/mae.csv, <out_dir>/rmse.csv and <out_dir>/report.json. */
TMC_API tmc_status tmc_evaluate(const tmc_dataset* dataset, const char* config_json,
                                const char* out_dir, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* TMC_H */
