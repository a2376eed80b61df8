/*
 * ttrecover: robust recovery of low-tensor-train-rank tensors from
 * outlier-corrupted linear measurements.
 *
 * C interface of the shared library. All functions return a ttr_status;
 * on failure a thread-local message is available via ttr_last_error().
 * Objects are opaque handles released with their matching *_free call.
 * Numeric file payloads are little-endian IEEE-754 doubles.
 */

#ifndef TTRECOVER_H
#define TTRECOVER_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ttr_status {
  TTR_OK = 0,
  TTR_ERR_INVALID_ARGUMENT = 1, /* bad parameter or precondition */
  TTR_ERR_STRUCTURE = 2,        /* rank/shape structure violation */
  TTR_ERR_CONFIG = 3,           /* malformed JSON configuration */
  TTR_ERR_IO = 4,               /* file missing, short, or malformed */
  TTR_ERR_SOLVER_ABORT = 5,     /* solver stopped on a diagnostic */
  TTR_ERR_RUNTIME = 6
} ttr_status;

/* Message describing the most recent failure on this thread. */
const char* ttr_last_error(void);

typedef struct ttr_dense ttr_dense;
typedef struct ttr_tt ttr_tt;
typedef struct ttr_ensemble ttr_ensemble;
typedef struct ttr_trace ttr_trace;

/* ---- dense tensors (DTF v1 on disk) ---- */

/* data may be NULL for a zero tensor; entries are in vectorization order
 * (first index fastest). */
ttr_status ttr_dense_create(const int64_t* dims, int32_t order,
                            const double* data, ttr_dense** out);
void ttr_dense_free(ttr_dense* t);
int32_t ttr_dense_order(const ttr_dense* t);
void ttr_dense_dims(const ttr_dense* t, int64_t* dims_out);
int64_t ttr_dense_size(const ttr_dense* t);
const double* ttr_dense_data(const ttr_dense* t);
ttr_status ttr_dense_load(const char* path, ttr_dense** out);
ttr_status ttr_dense_save(const ttr_dense* t, const char* path);

/* ---- tensor trains (TTF v1 on disk) ---- */

void ttr_tt_free(ttr_tt* t);
int32_t ttr_tt_order(const ttr_tt* t);
/* ranks_out receives the N-1 internal ranks. */
void ttr_tt_ranks(const ttr_tt* t, int64_t* ranks_out);
ttr_status ttr_tt_load(const char* path, ttr_tt** out);
ttr_status ttr_tt_save(const ttr_tt* t, const char* path);
ttr_status ttr_tt_random(const int64_t* dims, int32_t order,
                         const int64_t* ranks, uint64_t seed, ttr_tt** out);
ttr_status ttr_tt_svd(const ttr_dense* x, const int64_t* ranks, ttr_tt** out);
ttr_status ttr_tt_to_dense(const ttr_tt* t, ttr_dense** out);

/* ---- Gaussian measurement ensembles ---- */

/* storage: -1 auto, 0 materialized, 1 streamed. */
ttr_status ttr_ensemble_create(int64_t m, const int64_t* dims, int32_t order,
                               uint64_t master_seed, int32_t storage,
                               ttr_ensemble** out);
void ttr_ensemble_free(ttr_ensemble* e);
/* y_out must hold m doubles. */
ttr_status ttr_ensemble_apply(const ttr_ensemble* e, const ttr_dense* x,
                              double* y_out);
ttr_status ttr_ensemble_adjoint(const ttr_ensemble* e, const double* z,
                                ttr_dense** out);

/* Adds outliers to y in place. support_out (capacity m) and support_count
 * may be NULL when the support is not wanted. */
ttr_status ttr_corrupt(double* y, int64_t m, double p_s, double outlier_sigma2,
                       uint64_t support_seed, uint64_t value_seed,
                       int64_t* support_out, int64_t* support_count);

/* ---- solvers ---- */

typedef struct ttr_solver_opts {
  double lambda;             /* initial step size */
  double q;                  /* geometric decay, in (0, 1) */
  int64_t max_iters;
  double target_rel_error;   /* early stop; needs x_star */
  int64_t trace_every;
  int32_t sigma_bar_mode;    /* 0 from_init, 1 true_value, 2 override */
  double sigma_bar_override; /* used when sigma_bar_mode == 2 */
} ttr_solver_opts;

void ttr_solver_opts_init(ttr_solver_opts* opts);

/* x_star and trace_out may be NULL. Returns TTR_ERR_SOLVER_ABORT when the
 * run stops on a non-finite objective or a failed retraction; the partial
 * trace is still produced. */
ttr_status ttr_psubgm_run(const ttr_ensemble* e, const double* y,
                          const ttr_tt* x0, const ttr_solver_opts* opts,
                          const ttr_dense* x_star, ttr_tt** out,
                          ttr_trace** trace_out);
ttr_status ttr_frsubgm_run(const ttr_ensemble* e, const double* y,
                           const ttr_tt* x0, const ttr_solver_opts* opts,
                           const ttr_dense* x_star, ttr_tt** out,
                           ttr_trace** trace_out);
ttr_status ttr_truncated_spectral_init(const ttr_ensemble* e, const double* y,
                                       const int64_t* ranks, double alpha,
                                       ttr_tt** out);
ttr_status ttr_loss_l1(const ttr_ensemble* e, const ttr_dense* x,
                       const double* y, double* out);
/* ||x - x*||_F^2 / ||x*||_F^2 */
ttr_status ttr_recovery_error(const ttr_dense* x, const ttr_dense* x_star,
                              double* out);

/* ---- traces ---- */

int64_t ttr_trace_length(const ttr_trace* tr);
/* Any output pointer may be NULL; absent fields read back as NaN. */
ttr_status ttr_trace_row(const ttr_trace* tr, int64_t i, int64_t* t,
                         double* objective, double* rel_error, double* mu,
                         double* factor_dist2);
ttr_status ttr_trace_save_csv(const ttr_trace* tr, const char* path);
void ttr_trace_free(ttr_trace* tr);

/* ---- harness entry points (JSON text in, files out) ---- */

ttr_status ttr_make_problem(const char* config_json, const char* out_dir);
ttr_status ttr_recover(const char* bundle_path, const char* options_json,
                       const char* out_dir);
ttr_status ttr_run_experiment(const char* spec_json, const char* out_dir);
ttr_status ttr_rip_check(const char* config_json, char** report_json_out);
ttr_status ttr_render_plots(const char* results_dir, const char* out_dir);
ttr_status ttr_factor_distance_report(const ttr_tt* x, const ttr_tt* x_star,
                                      char** report_json_out);
void ttr_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* TTRECOVER_H */
