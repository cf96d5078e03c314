#ifndef ULTRANORM_H
#define ULTRANORM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every fallible call.
 */
typedef enum UnStatus {
  UN_STATUS_OK = 0,
  UN_STATUS_NULL_POINTER = 1,
  UN_STATUS_INVALID_ARGUMENT = 2,
  UN_STATUS_CONFIG = 3,
  UN_STATUS_NUMERIC = 4,
  UN_STATUS_UNSUPPORTED = 5,
  UN_STATUS_IO = 6,
  UN_STATUS_PANIC = 7,
} UnStatus;

/**
 * A resolved experiment configuration with its numeric objects.
 */
typedef struct UnExperiment UnExperiment;

/**
 * A weight sequence `M_p`.
 */
typedef struct UnSequence UnSequence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *un_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *un_version(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void un_string_free(char *s);

/**
 * Gevrey sequence `p!^s`.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum UnStatus un_sequence_gevrey(double s, struct UnSequence **out);

/**
 * Sequence from `len` values `log M_0, log M_1, ...`.
 *
 * # Safety
 * `log_values` must point to `len` doubles; `out` must be valid for a write.
 */
enum UnStatus un_sequence_from_log_values(const double *log_values,
                                          size_t len,
                                          struct UnSequence **out);

/**
 * # Safety
 * `seq` must come from this library and not have been freed. NULL is ignored.
 */
void un_sequence_free(struct UnSequence *seq);

/**
 * `log M_p`.
 *
 * # Safety
 * `seq` must be a live handle; `out` must be valid for a write.
 */
enum UnStatus un_sequence_log_value(const struct UnSequence *seq, size_t p, double *out);

/**
 * Associated function `M(t)`.
 *
 * # Safety
 * `seq` must be a live handle; `out` must be valid for a write.
 */
enum UnStatus un_sequence_associated_function(const struct UnSequence *seq, double t, double *out);

/**
 * Builds an experiment from JSON configuration text. Relative table paths
 * resolve against `base_dir` (NULL for the working directory).
 *
 * # Safety
 * `json` and a non-NULL `base_dir` must be NUL-terminated; `out` must be
 * valid for a write.
 */
enum UnStatus un_experiment_from_json(const char *json,
                                      const char *base_dir,
                                      struct UnExperiment **out);

/**
 * # Safety
 * `exp` must come from this library and not have been freed. NULL is ignored.
 */
void un_experiment_free(struct UnExperiment *exp);

/**
 * Number of test functions in the experiment.
 *
 * # Safety
 * `exp` must be a live handle; `out` must be valid for a write.
 */
enum UnStatus un_experiment_family_len(const struct UnExperiment *exp, size_t *out);

/**
 * Runs a subcommand (`assoc`, `check-seq`, `regularize`, `weights`,
 * `seminorm`, `stft`, `verify`) and returns its JSON report in
 * `report_json` (free with [`un_string_free`]) and the CLI exit code in
 * `exit_code` (0 pass, 1 fail, 3 inconclusive).
 *
 * # Safety
 * `exp` must be a live handle, `command` NUL-terminated, and both outputs
 * valid for a write.
 */
enum UnStatus un_run_command(const struct UnExperiment *exp,
                             const char *command,
                             char **report_json,
                             int32_t *exit_code);

/**
 * `V_ψ f(x, ξ)` in one dimension for `f = e^{-a_f u²}` and
 * `ψ = e^{-a_ψ u²}`, written as `(re, im)`.
 *
 * # Safety
 * `re` and `im` must be valid for a write.
 */
enum UnStatus un_stft_gaussian_1d(double width_f,
                                  double width_psi,
                                  double x,
                                  double xi,
                                  double *re,
                                  double *im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ULTRANORM_H */
