#ifndef PLANBENCH_H
#define PLANBENCH_H

/* C interface to the evaluation harness.  Every entry point returns a
 * pb_status; on failure, pb_last_error() carries a human-readable message
 * for the calling thread.  Pointers returned by getters stay valid until
 * the owning handle is closed. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pb_status {
  PB_OK = 0,
  PB_ERR_INVALID_ARGUMENT = 1,
  PB_ERR_PARSE = 2,
  PB_ERR_IO = 3,
  PB_ERR_BAD_CONFIG = 4,
  PB_ERR_UNSATISFIABLE = 5,
  PB_ERR_UNKNOWN_OBJECT = 6,
  PB_ERR_BAD_SAMPLE = 7,
  PB_ERR_TOO_LARGE = 8,
  PB_ERR_EMPTY_SCENARIO = 9,
  PB_ERR_TRANSPORT = 10,
  PB_ERR_INTERNAL = 11
} pb_status;

/* Semantic library version, e.g. "1.0.0". */
const char* pb_version(void);

/* Message for the most recent failure on this thread; "" when the last
 * call succeeded. */
const char* pb_last_error(void);

/* ---- Environments ----------------------------------------------------- */

typedef struct pb_env pb_env;

/* Loads and fully validates an environment description (JSON). */
pb_status pb_env_open(const char* path, pb_env** out_env);
void pb_env_close(pb_env* env);

const char* pb_env_name(const pb_env* env);
/* Number of objects to place (the task length k). */
int pb_env_task_length(const pb_env* env);
int pb_env_constraint_count(const pb_env* env);
/* Object name at roster position index, or NULL out of range. */
const char* pb_env_object_name(const pb_env* env, int index);

/* Counts full-roster placement orders satisfying every constraint.
 * Exhaustive k! sweep; PB_ERR_TOO_LARGE for k > 10. */
pb_status pb_env_satisfying_orders(const pb_env* env, uint64_t* out_count);

/* ---- Experiments ------------------------------------------------------ */

/* Overrides applied on top of the JSON experiment config.  Zero-initialize
 * and set only what you need. */
typedef struct pb_run_options {
  const char* out_dir;       /* NULL: keep the config's output directory */
  const uint64_t* base_seed; /* NULL: keep the config's base seed */
  int parallelism;           /* <= 0: keep the config's worker bound */
  /* Restrict the run to these agent ids / variant labels (each an array of
   * n_* strings); NULL or zero count means "all from the config". */
  const char* const* agents;
  size_t n_agents;
  const char* const* variants;
  size_t n_variants;
  /* Called once per finished trial with its JSONL record, in deterministic
   * order.  May be NULL. */
  void (*on_record)(const char* record_json, void* user_data);
  void* user_data;
} pb_run_options;

/* Runs the (environment x agent x variant x seed) grid described by the
 * JSON config and writes results.jsonl into the output directory.  The
 * effective output directory is copied into out_results_dir (truncated to
 * out_results_dir_len, always NUL-terminated) when that buffer is given. */
pb_status pb_run_experiment(const char* config_path,
                            const pb_run_options* options,
                            char* out_results_dir,
                            size_t out_results_dir_len);

/* Aggregates <results_dir>/results.jsonl into report_<env>.csv and
 * ztests_<env>.csv under out_dir (results_dir when NULL). */
pb_status pb_generate_report(const char* results_dir, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* PLANBENCH_H */
