/* C interface to the block alternating minimization library.
 *
 * Every function returning bam_status reports failures through the code and
 * bam_last_error(); nothing throws across this boundary. Handles are opaque
 * and owned by the caller once created. Strings returned through char** are
 * released with bam_string_free. */
#ifndef BAM_BAM_H
#define BAM_BAM_H

#include <stddef.h>
#include <stdint.h>

#if defined(BAM_BUILDING_LIBRARY)
#define BAM_API __attribute__((visibility("default")))
#else
#define BAM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bam_status {
  BAM_OK = 0,
  BAM_ERR_INVALID_INPUT = 1,
  BAM_ERR_SHAPE = 2,
  BAM_ERR_PARAMETER = 3,
  BAM_ERR_EVALUATION = 4,
  BAM_ERR_CONFIGURATION = 5,
  BAM_ERR_ESTIMATION = 6,
  BAM_ERR_IO = 7,
  BAM_ERR_NULL_ARGUMENT = 8,
  BAM_ERR_INTERNAL = 9
} bam_status;

/* Message for the most recent failure on the calling thread; "" if none. */
BAM_API const char* bam_last_error(void);
BAM_API const char* bam_status_string(bam_status status);
BAM_API void bam_string_free(char* s);

typedef struct bam_problem bam_problem;
typedef struct bam_result bam_result;

/* name: separable_quadratic | sparse_group | multiblock_quadratic.
 * params_json: the "params" object of a config file, or NULL for defaults. */
BAM_API bam_status bam_problem_create(const char* name, const char* params_json, uint64_t seed,
                                      bam_problem** out);
BAM_API void bam_problem_destroy(bam_problem* p);

BAM_API size_t bam_problem_num_blocks(const bam_problem* p);
BAM_API size_t bam_problem_total_dim(const bam_problem* p);
BAM_API bam_status bam_problem_block_dim(const bam_problem* p, size_t block, size_t* out);

/* Points are flat arrays of length total_dim, blocks in declaration order. */
BAM_API bam_status bam_problem_initial_point(const bam_problem* p, double* out, size_t len);
BAM_API bam_status bam_problem_phi(const bam_problem* p, const double* x, size_t len,
                                   double* out);

typedef enum bam_strategy_kind {
  BAM_STRATEGY_EXACT = 0,
  BAM_STRATEGY_LINEARIZED = 1,
  BAM_STRATEGY_AUGMENTED = 2,
  BAM_STRATEGY_CUSTOM = 3
} bam_strategy_kind;

typedef enum bam_alpha_kind { BAM_ALPHA_CONSTANT = 0, BAM_ALPHA_SAFETY = 1 } bam_alpha_kind;

/* Generator for BAM_STRATEGY_CUSTOM blocks. value/gradient act on one block
 * of dimension dim; modulus and lipschitz (INFINITY if unbounded) describe it. */
typedef struct bam_custom_generator {
  double (*value)(const double* x, size_t dim, void* user);
  void (*gradient)(const double* x, size_t dim, double* out, void* user);
  double modulus;
  double lipschitz;
  void* user;
} bam_custom_generator;

typedef struct bam_strategy {
  bam_strategy_kind kind;
  bam_alpha_kind alpha_kind;
  double alpha_value; /* constant c, or the safety factor gamma */
  bam_custom_generator custom;
} bam_strategy;

/* Fills out[0..n_blocks) for am | plam | aam | am-plam | plam-am. */
BAM_API bam_status bam_resolve_preset(const char* name, size_t n_blocks, bam_strategy* out);

typedef struct bam_solver_config {
  size_t max_outer_iter;
  double residual_tol;
  double step_tol;
  double inner_tol;
  size_t inner_max_iter;
  size_t record_every;
  uint64_t seed;
  double certificate_tol;
} bam_solver_config;

BAM_API bam_solver_config bam_solver_config_default(void);

/* x0 may be NULL to start from the problem's initial point. */
BAM_API bam_status bam_run(const bam_problem* p, const bam_strategy* strategies, size_t n,
                           const bam_solver_config* cfg, const double* x0, size_t x0_len,
                           bam_result** out);
BAM_API void bam_result_destroy(bam_result* r);

typedef enum bam_run_status {
  BAM_RUN_RESIDUAL_CONVERGED = 0,
  BAM_RUN_STEP_CONVERGED = 1,
  BAM_RUN_MAX_ITER = 2,
  BAM_RUN_DIVERGED = 3
} bam_run_status;

typedef struct bam_record {
  size_t k;
  double phi;
  double phi_half;
  double step_norm_sq;
  double bregman_paid;
  double residual;
  double cum_step;
  int inner_flag;
} bam_record;

BAM_API bam_run_status bam_result_status(const bam_result* r);
BAM_API size_t bam_result_sweeps(const bam_result* r);
BAM_API double bam_result_final_phi(const bam_result* r);
BAM_API double bam_result_final_residual(const bam_result* r);
BAM_API double bam_result_phi0(const bam_result* r);
BAM_API size_t bam_result_num_records(const bam_result* r);
BAM_API bam_status bam_result_record(const bam_result* r, size_t index, bam_record* out);
BAM_API bam_status bam_result_final_x(const bam_result* r, double* out, size_t len);
BAM_API bam_status bam_result_trace_csv(const bam_result* r, char** out);

typedef enum bam_verdict {
  BAM_VERDICT_PASS = 0,
  BAM_VERDICT_FAIL = 1,
  BAM_VERDICT_SKIPPED = 2,
  BAM_VERDICT_INCONCLUSIVE = 3
} bam_verdict;

typedef struct bam_check_report {
  bam_verdict verdict;
  double worst_violation;
  double tolerance;
  size_t worst_iteration;
} bam_check_report;

/* Runs one named diagnostic (see the CLI "checks" list) on a finished run.
 * note_out, if non-NULL, receives the human-readable note. */
BAM_API bam_status bam_check(const bam_problem* p, const bam_strategy* strategies, size_t n,
                             const bam_solver_config* cfg, const bam_result* r,
                             const char* check_name, bam_check_report* out, char** note_out);

/* command: run | compare | check. out_dir may be NULL ("."); seed is applied
 * when has_seed is nonzero. Returns the process exit code (0, 1 or 2). */
BAM_API int bam_cli_execute(const char* command, const char* config_path, const char* out_dir,
                            int has_seed, uint64_t seed, int quiet);

#ifdef __cplusplus
}
#endif

#endif /* BAM_BAM_H */
