#ifndef SHGQ_H
#define SHGQ_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SHGQ_API __declspec(dllexport)
#else
#define SHGQ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum shgq_status {
  SHGQ_OK = 0,
  SHGQ_ERR_INVALID_PARAMETER = 1,
  SHGQ_ERR_NUMERIC,
  SHGQ_ERR_POSITIVITY,
  SHGQ_ERR_NEAR_DEGENERACY,
  SHGQ_ERR_THRESHOLD_DIVERGENCE,
  SHGQ_ERR_NO_BRACKET,
  SHGQ_ERR_AMBIGUOUS_BRACKET,
  SHGQ_ERR_SHAPE_MISMATCH,
  SHGQ_ERR_INSUFFICIENT_SAMPLES,
  SHGQ_ERR_ZERO_VARIANCE,
  SHGQ_ERR_IO,
  SHGQ_ERR_UNSUPPORTED,
  SHGQ_ERR_SINK_FAILURE,
  SHGQ_ERR_NULL_ARGUMENT = 50,
  SHGQ_ERR_OUT_OF_RANGE,
  SHGQ_ERR_INTERNAL = 100
} shgq_status;

/* Message of the last failed call on this thread; empty after success. */
SHGQ_API const char* shgq_last_error(void);
SHGQ_API const char* shgq_status_name(shgq_status s);
SHGQ_API const char* shgq_version(void);

/* ---- model ------------------------------------------------------------- */

typedef struct shgq_params {
  double delta1, delta2, gamma, E;
  double n_th; /* +inf disables the noise */
} shgq_params;

typedef struct shgq_physical_params {
  double gamma1, gamma2, delta1, delta2, g, omega1, c, E_in;
} shgq_physical_params;

typedef struct shgq_scales {
  double l_d, time_unit, field_scale;
} shgq_scales;

typedef struct shgq_steady_state {
  double a1_re, a1_im, a2_re, a2_im;
  double phase1, phase2, residual;
  int marginal;
} shgq_steady_state;

SHGQ_API void shgq_params_default(shgq_params* p);
SHGQ_API void shgq_physical_params_default(shgq_physical_params* p);
SHGQ_API shgq_status shgq_rescale_physical(const shgq_physical_params* in, shgq_params* out, shgq_scales* scales);

/* Writes up to `capacity` states, ascending intensity; `count` gets the total. */
SHGQ_API shgq_status shgq_steady_states(const shgq_params* p, shgq_steady_state* out, size_t capacity, size_t* count);

/* a2 holds n interleaved (re, im) values. */
SHGQ_API shgq_status shgq_q_validity(const double* a2, size_t n, double* margin, int* valid, size_t* worst_index);

/* ---- linear analysis --------------------------------------------------- */

typedef enum shgq_instability {
  SHGQ_STATIONARY_TRANSVERSE = 0,
  SHGQ_OSCILLATORY_TRANSVERSE = 1,
  SHGQ_SELF_PULSING = 2
} shgq_instability;

typedef enum shgq_eigen_filter { SHGQ_FILTER_ALL = 0, SHGQ_FILTER_REAL = 1, SHGQ_FILTER_COMPLEX = 2 } shgq_eigen_filter;

typedef struct shgq_threshold_options {
  double k_min, k_max;
  int k_points;
  double k_tol;
  double E_min, E_max;
  int E_scan_points;
  double E_tol;
  int zero_k_only;
  int filter; /* shgq_eigen_filter */
  int branch;
  int first_crossing;
} shgq_threshold_options;

typedef struct shgq_threshold {
  double E_t, k_c, lambda_imag;
  int kind; /* shgq_instability */
} shgq_threshold;

SHGQ_API void shgq_threshold_options_default(shgq_threshold_options* o);

/* Eigenvalues of M(k) on the lowest steady state, sorted by descending real part. */
SHGQ_API shgq_status shgq_eigenvalues(const shgq_params* p, double k, double re[4], double im[4]);
SHGQ_API shgq_status shgq_growth_rate(const shgq_params* p, double k, double* rate);
SHGQ_API shgq_status shgq_find_threshold(const shgq_params* p, const shgq_threshold_options* o, shgq_threshold* out);

typedef struct shgq_scan shgq_scan;

typedef struct shgq_scan_row {
  double delta2;
  int has_stationary, has_oscillatory, has_self_pulsing;
  shgq_threshold stationary, oscillatory, self_pulsing;
  double A2_stationary, A2_oscillatory, A2_self_pulsing;
  int primary; /* shgq_instability, or -1 */
} shgq_scan_row;

SHGQ_API shgq_status shgq_bifurcation_scan(const double* delta2, size_t n, double delta1, double gamma,
                                           const shgq_threshold_options* o, int threads, shgq_scan** out);
SHGQ_API size_t shgq_scan_size(const shgq_scan* s);
SHGQ_API shgq_status shgq_scan_row_get(const shgq_scan* s, size_t i, shgq_scan_row* out);
/* Failure notes for row i; valid until the scan is freed. */
SHGQ_API const char* shgq_scan_note(const shgq_scan* s, size_t i);
SHGQ_API void shgq_scan_free(shgq_scan* s);

/* ---- linear correlations ----------------------------------------------- */

/* 2x2 complex matrices are stored row-major as (re, im) pairs. */
typedef struct shgq_prediction {
  double k;
  double cn11, cn22, cn12_same, cn12_opp;
  double self_minus[2], self_plus[2];
  double cross_same_minus, cross_same_plus;
  double cross_opp_minus, cross_opp_plus;
  double g_minus[8], g_plus[8];
} shgq_prediction;

/* At k = 0 the cn and variance fields hold the interference (k = 0) values. */
SHGQ_API shgq_status shgq_predict(const shgq_params* p, double k, shgq_prediction* out);
SHGQ_API shgq_status shgq_correlation_spectrum(const shgq_params* p, const double* k, size_t n, int threads,
                                               shgq_prediction* out);

/* ---- stochastic simulation --------------------------------------------- */

typedef struct shgq_run_config {
  int N;
  double L, dt, t_transient, t_total;
  long sample_stride;
  uint64_t seed, trajectory;
  double perturbation;
} shgq_run_config;

typedef struct shgq_run_report {
  long steps, samples;
  int discards, completed;
  double abort_time, wall_seconds, min_margin;
} shgq_run_report;

/* Far-field snapshot, interleaved (re, im), N values per field in FFT order.
   Return nonzero to abort the run. */
typedef int (*shgq_snapshot_fn)(void* user, double t, uint64_t trajectory, const double* a1, const double* a2, int N);

SHGQ_API void shgq_run_config_default(shgq_run_config* c);
SHGQ_API double shgq_mode_kappa(const shgq_params* p, int N, double L);

/* final_a1 / final_a2 (2N doubles each, near field) may be NULL. */
SHGQ_API shgq_status shgq_run_trajectory(const shgq_params* p, const shgq_run_config* c, shgq_snapshot_fn fn,
                                         void* user, shgq_run_report* report, double* final_a1, double* final_a2);

/* Grid transforms, interleaved (re, im) arrays of N values. */
SHGQ_API shgq_status shgq_far_field(const double* near, int N, double L, double* far);
SHGQ_API shgq_status shgq_near_field(const double* far, int N, double L, double* near);

typedef enum shgq_snapshot_format { SHGQ_SNAPSHOT_BINARY = 0, SHGQ_SNAPSHOT_CSV = 1 } shgq_snapshot_format;

/* ---- estimators -------------------------------------------------------- */

typedef struct shgq_estimator shgq_estimator;

typedef struct shgq_ensemble_config {
  shgq_run_config run; /* run.t_total is split over the trajectories */
  int trajectories, threads, batches_per_trajectory;
  int full_pairs;
  const char* snapshot_path; /* NULL: no snapshots */
  int snapshot_format;       /* shgq_snapshot_format */
} shgq_ensemble_config;

typedef struct shgq_ensemble_summary {
  int trajectories, discards;
  long samples;
  double wall_seconds, sample_interval, kappa;
} shgq_ensemble_summary;

typedef struct shgq_estimate {
  double value, standard_error, n_effective;
} shgq_estimate;

typedef struct shgq_k0_estimate {
  shgq_estimate cn12;
  shgq_estimate cross_minus, cross_plus;
  shgq_estimate self_plus[2];
} shgq_k0_estimate;

SHGQ_API void shgq_ensemble_config_default(shgq_ensemble_config* c);
/* reports: room for c->trajectories entries, or NULL. */
SHGQ_API shgq_status shgq_run_ensemble(const shgq_params* p, const shgq_ensemble_config* c, shgq_run_report* reports,
                                       shgq_ensemble_summary* summary, shgq_estimator** out);
SHGQ_API shgq_status shgq_analyze_snapshots(const char* path, double n_th, int batches_per_trajectory,
                                            int full_pairs, shgq_estimator** out);
SHGQ_API void shgq_estimator_free(shgq_estimator* e);

SHGQ_API shgq_status shgq_estimator_grid(const shgq_estimator* e, int* N, double* L, long* samples, double* kappa);
/* field is 1 or 2; mode is a signed grid index. */
SHGQ_API shgq_status shgq_mean_intensity(const shgq_estimator* e, int field, int mode, shgq_estimate* out);
SHGQ_API shgq_status shgq_corr_normalized(const shgq_estimator* e, int f1, int m1, int f2, int m2, shgq_estimate* out);
SHGQ_API shgq_status shgq_variance_normalized(const shgq_estimator* e, int f1, int m1, int f2, int m2, int sign,
                                              shgq_estimate* out);
SHGQ_API shgq_status shgq_estimate_k0(const shgq_estimator* e, shgq_k0_estimate* out);
SHGQ_API shgq_status shgq_tau_int(const shgq_estimator* e, int field, int mode, double* tau);

typedef struct shgq_observables shgq_observables;

SHGQ_API shgq_status shgq_standard_observables(const shgq_estimator* e, shgq_observables** out);
SHGQ_API size_t shgq_observables_count(const shgq_observables* o);
SHGQ_API const char* shgq_observable_name(const shgq_observables* o, size_t i);
SHGQ_API size_t shgq_observable_rows(const shgq_observables* o, size_t i);
SHGQ_API shgq_status shgq_observable_row(const shgq_observables* o, size_t i, size_t row, double* k,
                                         shgq_estimate* out);
SHGQ_API shgq_status shgq_observable_write_csv(const shgq_observables* o, size_t i, const char* path);
SHGQ_API void shgq_observables_free(shgq_observables* o);

/* ---- snapshot files ---------------------------------------------------- */

typedef struct shgq_snapshots shgq_snapshots;

SHGQ_API shgq_status shgq_snapshots_read(const char* path, shgq_snapshots** out);
SHGQ_API shgq_status shgq_snapshots_info(const shgq_snapshots* s, int* N, double* L, size_t* records);
SHGQ_API shgq_status shgq_snapshots_record(const shgq_snapshots* s, size_t i, double* t, uint64_t* trajectory,
                                           double* a1, double* a2);
SHGQ_API void shgq_snapshots_free(shgq_snapshots* s);

#ifdef __cplusplus
}
#endif

#endif
