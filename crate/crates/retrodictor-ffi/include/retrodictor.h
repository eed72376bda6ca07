#ifndef RETRODICTOR_H
#define RETRODICTOR_H

/* Generated by cbindgen from the retrodictor-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every binding.
 */
typedef enum RetroStatus {
  RETRO_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  RETRO_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  RETRO_STATUS_INVALID_UTF8 = 2,
  /**
   * The input could not be parsed as a scenario.
   */
  RETRO_STATUS_PARSE_ERROR = 3,
  /**
   * The input parsed but failed validation, or a query was malformed.
   */
  RETRO_STATUS_VALIDATION_ERROR = 4,
  /**
   * The requested conditional is undefined (conditioning probability
   * below 1e-14). Not an error; the out-value is left untouched.
   */
  RETRO_STATUS_UNDEFINED_RESULT = 5,
  /**
   * An oracle-check run reported at least one property violation.
   */
  RETRO_STATUS_PROPERTY_FAILURE = 6,
} RetroStatus;

/**
 * A parsed scenario. Opaque; create with [`retro_scenario_parse`] and
 * release with [`retro_scenario_free`].
 */
typedef struct RetroScenario RetroScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent non-`Ok` status on this thread, or null.
 * The pointer stays valid until the next binding call on the thread.
 */
const char *retro_last_error(void);

/**
 * Library version as a static string; never freed.
 */
const char *retro_version(void);

/**
 * Parses a JSON scenario. On success writes a new handle to `out`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RetroStatus retro_scenario_parse(const char *json, struct RetroScenario **out);

/**
 * Runs every query of a parsed scenario and writes the result records to
 * `out_json` as a JSON array.
 *
 * # Safety
 * `scenario_handle` must come from a successful [`retro_scenario_parse`]
 * and not have been freed; `out_json` must be a valid pointer.
 */
enum RetroStatus retro_scenario_run(const struct RetroScenario *scenario_handle, char **out_json);

/**
 * Releases a scenario handle. Null is ignored.
 *
 * # Safety
 * `scenario_handle` must come from [`retro_scenario_parse`] and must not
 * be used afterwards.
 */
void retro_scenario_free(struct RetroScenario *scenario_handle);

/**
 * Releases a string produced by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from a binding of this library and must not be used
 * afterwards.
 */
void retro_string_free(char *s);

/**
 * Renders a built-in demonstration ("margenau", "three-box", "rotated")
 * into `out_text`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out_text` a valid pointer.
 */
enum RetroStatus retro_demo(const char *name, char **out_text);

/**
 * Runs the randomized oracle cross-checks. Writes the number of failed
 * checks and the worst deviation observed; returns `PropertyFailure`
 * when any check failed.
 *
 * # Safety
 * `out_failures` and `out_worst_deviation` must be valid pointers.
 */
enum RetroStatus retro_oracle_check(uint64_t seed,
                                    uint32_t trials,
                                    size_t max_dim,
                                    uint64_t *out_failures,
                                    double *out_worst_deviation);

/**
 * Retrodiction under a complete observation of `basis`, toward the ket at
 * `target`. `rho` is `dim*dim` interleaved complex doubles (row-major),
 * `basis` is `dim` kets of `dim` interleaved complex doubles each, `q` is
 * one ket. Writes the probability to `out_value`.
 *
 * # Safety
 * The array arguments must point to buffers of the documented sizes.
 */
enum RetroStatus retro_abl_fine(size_t dim,
                                const double *rho,
                                const double *basis,
                                const double *q,
                                size_t target,
                                double *out_value);

/**
 * The deliberately flawed naive Bayes value for the same arguments as
 * [`retro_abl_fine`]. Returns `UndefinedResult` whenever the Born weight
 * of `q` vanishes, which is the formula's characteristic failure.
 *
 * # Safety
 * The array arguments must point to buffers of the documented sizes.
 */
enum RetroStatus retro_naive_bayes(size_t dim,
                                   const double *rho,
                                   const double *basis,
                                   const double *q,
                                   size_t target,
                                   double *out_value);

/**
 * The corrected Bayes value (conditioning event written out in full) for
 * the same arguments as [`retro_abl_fine`].
 *
 * # Safety
 * The array arguments must point to buffers of the documented sizes.
 */
enum RetroStatus retro_corrected_bayes(size_t dim,
                                       const double *rho,
                                       const double *basis,
                                       const double *q,
                                       size_t target,
                                       double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RETRODICTOR_H */
