#ifndef SPARKLE_H
#define SPARKLE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SparkleStatus {
  SPARKLE_STATUS_OK = 0,
  SPARKLE_STATUS_NULL_POINTER = 1,
  SPARKLE_STATUS_INVALID_ARGUMENT = 2,
  SPARKLE_STATUS_CONFIG_ERROR = 3,
  SPARKLE_STATUS_RUNTIME_ERROR = 4,
  SPARKLE_STATUS_PANIC = 5,
} SparkleStatus;

/**
 * A validated experiment configuration.
 */
typedef struct SparkleExperiment SparkleExperiment;

/**
 * A fitted sparse additive reward model.
 */
typedef struct SparkleModel SparkleModel;

/**
 * Traces of a finished experiment, ordered by policy name then seed.
 */
typedef struct SparkleRun SparkleRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * call into this library from the same thread.
 */
const char *sparkle_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sparkle_version(void);

/**
 * Matérn kernel with smoothness `m` (unit lengthscale and variance) at `(x, y)`.
 *
 * # Safety
 * `out` must point to writable storage for one `double`.
 */
enum SparkleStatus sparkle_kernel_eval(double m, double x, double y, double *out);

/**
 * Parses and validates an experiment configuration from JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SparkleStatus sparkle_experiment_from_json(const char *json, struct SparkleExperiment **out);

/**
 * # Safety
 * `exp` must be null or a handle from [`sparkle_experiment_from_json`] not yet freed.
 */
void sparkle_experiment_free(struct SparkleExperiment *exp);

/**
 * Runs every policy for every replication. Nothing is written to disk.
 *
 * # Safety
 * `exp` must be a live experiment handle; `out` must be writable.
 */
enum SparkleStatus sparkle_experiment_run(const struct SparkleExperiment *exp,
                                          struct SparkleRun **out);

/**
 * # Safety
 * `run` must be null or a handle from [`sparkle_experiment_run`] not yet freed.
 */
void sparkle_run_free(struct SparkleRun *run);

/**
 * Number of traces (policies times replications).
 *
 * # Safety
 * `run` must be a live run handle; `out` must be writable.
 */
enum SparkleStatus sparkle_run_count(const struct SparkleRun *run, size_t *out);

/**
 * Horizon and seed of trace `index`. Either output may be null.
 *
 * # Safety
 * `run` must be a live run handle; non-null outputs must be writable.
 */
enum SparkleStatus sparkle_run_trace_info(const struct SparkleRun *run,
                                          size_t index,
                                          size_t *horizon,
                                          uint64_t *seed);

/**
 * Policy name of trace `index`, owned by the run handle.
 *
 * # Safety
 * `run` must be a live run handle; `out` must be writable.
 */
enum SparkleStatus sparkle_run_policy_name(const struct SparkleRun *run,
                                           size_t index,
                                           const char **out);

/**
 * Copies the cumulative regret curve of trace `index` into `buf`, which must
 * hold exactly the trace's horizon.
 *
 * # Safety
 * `run` must be a live run handle; `buf` must have room for `len` doubles.
 */
enum SparkleStatus sparkle_run_cumulative_regret(const struct SparkleRun *run,
                                                 size_t index,
                                                 double *buf,
                                                 size_t len);

/**
 * Fits the doubly penalized sparse additive estimator on `n` rows of `d`
 * covariates (row-major) with responses `y`, using the sample-size driven
 * regularization schedule with constants `c3`, `c4`, smoothness `m` and
 * confidence `delta`.
 *
 * # Safety
 * `x` must hold `n * d` doubles, `y` must hold `n`, `out` must be writable.
 */
enum SparkleStatus sparkle_fit_additive(const double *x,
                                        size_t n,
                                        size_t d,
                                        const double *y,
                                        double c3,
                                        double c4,
                                        double m,
                                        double delta,
                                        struct SparkleModel **out);

/**
 * # Safety
 * `model` must be null or a handle from [`sparkle_fit_additive`] not yet freed.
 */
void sparkle_model_free(struct SparkleModel *model);

/**
 * Evaluates the model at one point of dimension `d`.
 *
 * # Safety
 * `model` must be live, `x` must hold `d` doubles and `out` must be writable.
 */
enum SparkleStatus sparkle_model_predict(const struct SparkleModel *model,
                                         const double *x,
                                         size_t d,
                                         double *out);

/**
 * Writes the selected coordinates (ascending) into `buf` and their number
 * into `count`. With `cap` too small, only `count` is written and the call
 * fails with `InvalidArgument`; `buf` may be null when `cap` is 0.
 *
 * # Safety
 * `model` must be live, `count` writable, and `buf` must have room for `cap` entries.
 */
enum SparkleStatus sparkle_model_support(const struct SparkleModel *model,
                                         size_t *buf,
                                         size_t cap,
                                         size_t *count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPARKLE_H */
