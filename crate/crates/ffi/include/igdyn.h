#ifndef IGDYN_H
#define IGDYN_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Outcome of a call.
 */
typedef enum IgdynStatus {
  IGDYN_STATUS_OK = 0,
  IGDYN_STATUS_NULL_POINTER = 1,
  IGDYN_STATUS_INVALID_ARGUMENT = 2,
  IGDYN_STATUS_DOMAIN = 3,
  IGDYN_STATUS_DIMENSION_MISMATCH = 4,
  IGDYN_STATUS_SINGULAR_METRIC = 5,
  IGDYN_STATUS_INTEGRATION_FAILED = 6,
  IGDYN_STATUS_CONFIG_PARSE = 7,
  IGDYN_STATUS_BUFFER_TOO_SMALL = 8,
  IGDYN_STATUS_PANIC = 9,
  IGDYN_STATUS_OTHER = 10,
} IgdynStatus;

/**
 * Opaque statistical model.
 */
typedef struct IgdynModel IgdynModel;

/**
 * Opaque sampled geodesic.
 */
typedef struct IgdynTrajectory IgdynTrajectory;

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *igdyn_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *igdyn_version(void);

/**
 * Product of `3 n_particles` univariate Gaussian pairs.
 *
 * # Safety
 * `out` must be null or writable.
 */
enum IgdynStatus igdyn_model_gaussian_product(size_t n_particles, struct IgdynModel **out);

/**
 * Bivariate Gaussian with fixed correlation `r` in (-1, 1).
 *
 * # Safety
 * `out` must be null or writable.
 */
enum IgdynStatus igdyn_model_correlated_gaussian(double r, struct IgdynModel **out);

/**
 * Inverted oscillators with the given frequencies.
 *
 * # Safety
 * `frequencies` must point to `len` doubles; `out` must be null or writable.
 */
enum IgdynStatus igdyn_model_iho(const double *frequencies, size_t len, struct IgdynModel **out);

/**
 * Releases a model; null is ignored.
 *
 * # Safety
 * `model` must come from a constructor above and not be used afterwards.
 */
void igdyn_model_free(struct IgdynModel *model);

/**
 * Number of manifold coordinates.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum IgdynStatus igdyn_model_dimension(const struct IgdynModel *model, size_t *out);

/**
 * Metric at `x`, written row-major into `out` of capacity `out_len`.
 *
 * # Safety
 * `x` must hold `dim` doubles and `out` `out_len` writable doubles.
 */
enum IgdynStatus igdyn_metric(const struct IgdynModel *model,
                              const double *x,
                              size_t dim,
                              double *out,
                              size_t out_len);

/**
 * Scalar curvature at `x`; finite differences when `finite_diff` is true.
 *
 * # Safety
 * `x` must hold `dim` doubles; `out` must be writable.
 */
enum IgdynStatus igdyn_ricci_scalar(const struct IgdynModel *model,
                                    const double *x,
                                    size_t dim,
                                    bool finite_diff,
                                    double *out);

/**
 * Integrates a geodesic from `(theta, velocity)` to `tau_end`, sampled
 * every `output_step` (every accepted step when `output_step <= 0`).
 *
 * # Safety
 * `theta` and `velocity` must hold `dim` doubles; `out` must be writable.
 */
enum IgdynStatus igdyn_geodesic(const struct IgdynModel *model,
                                const double *theta,
                                const double *velocity,
                                size_t dim,
                                double tau_end,
                                double output_step,
                                struct IgdynTrajectory **out);

/**
 * Number of samples in a trajectory.
 *
 * # Safety
 * `trajectory` must be a live handle; `out` must be writable.
 */
enum IgdynStatus igdyn_trajectory_len(const struct IgdynTrajectory *trajectory, size_t *out);

/**
 * Sample `index`: its time, and position and velocity written into
 * buffers of `dim` doubles each.
 *
 * # Safety
 * `tau` must be writable; `theta` and `velocity` must hold `dim` writable doubles.
 */
enum IgdynStatus igdyn_trajectory_sample(const struct IgdynTrajectory *trajectory,
                                         size_t index,
                                         double *tau,
                                         double *theta,
                                         double *velocity,
                                         size_t dim);

/**
 * Releases a trajectory; null is ignored.
 *
 * # Safety
 * `trajectory` must come from [`igdyn_geodesic`] and not be used afterwards.
 */
void igdyn_trajectory_free(struct IgdynTrajectory *trajectory);

/**
 * Runs a scenario given as config text and returns the JSON report as a
 * string owned by the library; `all_pass` receives whether every claim held.
 *
 * # Safety
 * `config` must be a nul-terminated string; `report_json` and `all_pass`
 * must be writable. Free the report with [`igdyn_string_free`].
 */
enum IgdynStatus igdyn_run_scenario(const char *config, char **report_json, bool *all_pass);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void igdyn_string_free(char *s);

#endif  /* IGDYN_H */
