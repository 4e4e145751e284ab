#ifndef CFACTOR_H
#define CFACTOR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum CfStatus {
  CF_STATUS_OK = 0,
  CF_STATUS_NULL_POINTER = 1,
  CF_STATUS_INVALID_UTF8 = 2,
  CF_STATUS_VALIDATION = 3,
  CF_STATUS_DOMAIN = 4,
  CF_STATUS_INVALID_INPUT = 5,
  CF_STATUS_UNSUPPORTED = 6,
  CF_STATUS_IMPROPER_POSTERIOR = 7,
  CF_STATUS_EMPTY_LIKELIHOOD = 8,
  CF_STATUS_SINGULARITY = 9,
  CF_STATUS_NON_CONVERGENCE = 10,
  CF_STATUS_CALIBRATION_INFEASIBLE = 11,
  CF_STATUS_BUFFER_TOO_SMALL = 12,
  CF_STATUS_IO = 13,
  CF_STATUS_PANIC = 14,
} CfStatus;

/**
 * A sampling family with fixed hyperparameters.
 */
typedef struct CfFamily CfFamily;

/**
 * A normalized posterior on a grid.
 */
typedef struct CfPosterior CfPosterior;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * failing call on this thread; do not free.
 */
const char *cf_last_error_message(void);

/**
 * Library version, static storage.
 */
const char *cf_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` is null or came from this library and was not freed before.
 */
void cf_string_free(char *s);

/**
 * Builds a family from its id and a JSON object of hyperparameters
 * (`params_json` may be null for none).
 *
 * # Safety
 * `id` is a NUL-terminated string, `params_json` is null or one, and `out`
 * is a valid pointer.
 */
enum CfStatus cf_family_new(const char *id, const char *params_json, struct CfFamily **out);

/**
 * # Safety
 * `family` is null or a handle from `cf_family_new` not freed before.
 */
void cf_family_free(struct CfFamily *family);

/**
 * Number of free parameters, or 0 for a null handle.
 *
 * # Safety
 * `family` is null or a live handle.
 */
size_t cf_family_dim(const struct CfFamily *family);

/**
 * Density (pmf for discrete families) at `x`.
 *
 * # Safety
 * `family` is a live handle, `theta` points to `theta_len` doubles and
 * `out` is valid.
 */
enum CfStatus cf_family_density(const struct CfFamily *family,
                                double x,
                                const double *theta,
                                size_t theta_len,
                                double *out);

/**
 * Distribution function at `x`.
 *
 * # Safety
 * As for `cf_family_density`.
 */
enum CfStatus cf_family_cdf(const struct CfFamily *family,
                            double x,
                            const double *theta,
                            size_t theta_len,
                            double *out);

/**
 * Assigns the posterior for `sample` under the factor described by
 * `factor_json` (e.g. `{"kind": "location"}`). `grid_points` of 0 keeps
 * the default resolution.
 *
 * # Safety
 * `family` is a live handle, `factor_json` a NUL-terminated string,
 * `sample` points to `sample_len` doubles and `out` is valid.
 */
enum CfStatus cf_posterior_assign(const struct CfFamily *family,
                                  const char *factor_json,
                                  const double *sample,
                                  size_t sample_len,
                                  size_t grid_points,
                                  struct CfPosterior **out);

/**
 * New posterior after observing `x`, on the prior's grid.
 *
 * # Safety
 * `prior` and `family` are live handles and `out` is valid.
 */
enum CfStatus cf_posterior_update(const struct CfPosterior *prior,
                                  const struct CfFamily *family,
                                  double x,
                                  struct CfPosterior **out);

/**
 * # Safety
 * `post` is null or a live handle not freed before.
 */
void cf_posterior_free(struct CfPosterior *post);

/**
 * Equal-tail interval of content `delta` for parameter `target`; other
 * parameters are integrated out.
 *
 * # Safety
 * `post` is a live handle; `lo` and `hi` are valid.
 */
enum CfStatus cf_posterior_interval(const struct CfPosterior *post,
                                    size_t target,
                                    double delta,
                                    double *lo,
                                    double *hi);

/**
 * Number of grid nodes along `axis` (0 if out of range or null).
 *
 * # Safety
 * `post` is null or a live handle.
 */
size_t cf_posterior_axis_len(const struct CfPosterior *post, size_t axis);

/**
 * Copies the nodes of `axis` into `buf`. `written` receives the node count
 * even when `buf` is too small.
 *
 * # Safety
 * `post` is a live handle, `buf` points to `cap` writable doubles (or is
 * null with `cap` 0), and `written` is valid.
 */
enum CfStatus cf_posterior_nodes(const struct CfPosterior *post,
                                 size_t axis,
                                 double *buf,
                                 size_t cap,
                                 size_t *written);

/**
 * Copies the density at every node (row-major over axes) into `buf`.
 *
 * # Safety
 * As for `cf_posterior_nodes`.
 */
enum CfStatus cf_posterior_values(const struct CfPosterior *post,
                                  double *buf,
                                  size_t cap,
                                  size_t *written);

/**
 * Trapezoid L1 distance between two posteriors on the same nodes.
 *
 * # Safety
 * `a` and `b` are live handles; `out` is valid.
 */
enum CfStatus cf_posterior_l1(const struct CfPosterior *a,
                              const struct CfPosterior *b,
                              double *out);

/**
 * Runs a coverage simulation from a JSON calibration spec and returns the
 * JSON coverage report in `*out_json` (free with `cf_string_free`).
 *
 * # Safety
 * `spec_json` is a NUL-terminated string and `out_json` is valid.
 */
enum CfStatus cf_calibrate_json(const char *spec_json, char **out_json);

/**
 * Runs any CLI command except `self-check` on a JSON run config and
 * returns the report envelope in `*out_json` (free with `cf_string_free`).
 *
 * # Safety
 * `command` and `config_json` are NUL-terminated strings and `out_json` is
 * valid.
 */
enum CfStatus cf_run_json(const char *command, const char *config_json, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CFACTOR_H */
