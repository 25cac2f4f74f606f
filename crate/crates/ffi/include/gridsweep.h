#ifndef GRIDSWEEP_H
#define GRIDSWEEP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GsFamily {
  GS_FAMILY_NORMAL = 0,
  GS_FAMILY_WEIBULL = 1,
} GsFamily;

typedef enum GsKsMode {
  GS_KS_MODE_ASYMPTOTIC = 0,
  GS_KS_MODE_PARAMETRIC_BOOTSTRAP = 1,
} GsKsMode;

typedef enum GsPreset {
  /**
   * All hosts registered with the project.
   */
  GS_PRESET_REGISTERED = 0,
  /**
   * Hosts that ran the MD application.
   */
  GS_PRESET_LAMMPS = 1,
} GsPreset;

typedef enum GsStatus {
  GS_STATUS_OK = 0,
  GS_STATUS_NULL_POINTER = 1,
  GS_STATUS_INVALID_PARAMETER = 2,
  GS_STATUS_DEGENERATE_SAMPLE = 3,
  GS_STATUS_DOMAIN_ERROR = 4,
  GS_STATUS_NOT_CONVERGED = 5,
  GS_STATUS_OUT_OF_RANGE = 6,
  GS_STATUS_INTERNAL = 99,
} GsStatus;

/**
 * Opaque host population.
 */
typedef struct GsPopulation GsPopulation;

/**
 * Opaque sample of finite values.
 */
typedef struct GsSample GsSample;

/**
 * Normal: `param1` = mean, `param2` = sd. Weibull: shape, scale.
 */
typedef struct GsFit {
  enum GsFamily family;
  double param1;
  double param2;
  double log_likelihood;
  bool converged;
} GsFit;

typedef struct GsKsOutcome {
  double statistic;
  double p_value;
  size_t n;
  enum GsKsMode mode;
} GsKsOutcome;

typedef struct GsMoments {
  double mean;
  double variance;
  double skewness;
  double kurtosis;
  double beta1;
  double beta2;
} GsMoments;

typedef struct GsHost {
  uint32_t id;
  double gflops;
  uint32_t n_cpus;
  double ram_gb;
  double hdd_gb;
  double on_rate;
  double off_rate;
} GsHost;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next gridsweep call on the same thread.
 */
const char *gs_last_error(void);

/**
 * Copies `n` values into a new sample handle.
 *
 * # Safety
 * `values` must point to `n` readable doubles (may be NULL when `n == 0`);
 * `out` must be a valid pointer to a handle slot.
 */
enum GsStatus gs_sample_new(const double *values, size_t n, struct GsSample **out);

/**
 * # Safety
 * `sample` must be NULL or a handle from [`gs_sample_new`] not yet freed.
 */
void gs_sample_free(struct GsSample *sample);

/**
 * # Safety
 * `sample` must be a live sample handle and `out` writable.
 */
enum GsStatus gs_fit_normal(const struct GsSample *sample, struct GsFit *out);

/**
 * Two-parameter Weibull MLE. A fit that ran out of iterations is still
 * written to `out` (with `converged = false`) and reported as
 * `NotConverged`.
 *
 * # Safety
 * `sample` must be a live sample handle and `out` writable.
 */
enum GsStatus gs_fit_weibull(const struct GsSample *sample, struct GsFit *out);

/**
 * Kolmogorov-Smirnov test of `sample` against `fit`. `resamples` and
 * `seed` are used only in parametric-bootstrap mode.
 *
 * # Safety
 * `sample` must be a live sample handle; `fit` readable; `out` writable.
 */
enum GsStatus gs_ks_test(const struct GsSample *sample,
                         const struct GsFit *fit,
                         enum GsKsMode mode,
                         size_t resamples,
                         uint64_t seed,
                         struct GsKsOutcome *out);

/**
 * # Safety
 * `sample` must be a live sample handle and `out` writable.
 */
enum GsStatus gs_moment_summary(const struct GsSample *sample, struct GsMoments *out);

/**
 * Pearson-plane point `(β1, β2)` of a Weibull law with shape `k`.
 *
 * # Safety
 * `beta1` and `beta2` must be writable.
 */
enum GsStatus gs_weibull_locus(double k, double *beta1, double *beta2);

/**
 * Job runtime on a host of `host_gflops`, given its runtime `t_ref_s` on
 * the reference host of `reference_gflops` (pass 0 for the default).
 *
 * # Safety
 * `out` must be writable.
 */
enum GsStatus gs_scaled_runtime(double t_ref_s,
                                double host_gflops,
                                double reference_gflops,
                                double *out);

/**
 * Samples `n_hosts` hosts from a preset population law.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum GsStatus gs_sample_hosts(enum GsPreset preset,
                              size_t n_hosts,
                              uint64_t seed,
                              struct GsPopulation **out);

/**
 * Number of hosts; 0 for a NULL handle.
 *
 * # Safety
 * `pop` must be NULL or a live population handle.
 */
size_t gs_population_len(const struct GsPopulation *pop);

/**
 * # Safety
 * `pop` must be a live population handle and `out` writable.
 */
enum GsStatus gs_population_host(const struct GsPopulation *pop, size_t index, struct GsHost *out);

/**
 * # Safety
 * `pop` must be NULL or a handle from [`gs_sample_hosts`] not yet freed.
 */
void gs_population_free(struct GsPopulation *pop);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRIDSWEEP_H */
