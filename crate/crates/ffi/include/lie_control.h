#ifndef LIE_CONTROL_H
#define LIE_CONTROL_H

/* Generated by cbindgen from lie-control-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum LcStatus {
  LC_OK = 0,
  /**
   * Null pointers, invalid UTF-8 or out-of-range arguments.
   */
  LC_INVALID_ARGUMENT = 1,
  /**
   * Unparsable or inconsistent system descriptions.
   */
  LC_SPEC_ERROR = 2,
  /**
   * Numerical failures (singular differentials, guard trips, ...).
   */
  LC_NUMERICAL_ERROR = 3,
  /**
   * A panic was caught at the boundary.
   */
  LC_PANIC = 4,
} LcStatus;

/**
 * Opaque handle around a validated linear system.
 */
typedef struct LcSystem LcSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string (do not free).
 */
const char *lc_version(void);

/**
 * The last error message of this thread, or null. Caller frees the result
 * with [`lc_string_free`].
 */
char *lc_last_error_message(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `ptr` must be null or a pointer previously returned by this library.
 */
void lc_string_free(char *ptr);

/**
 * Parse a JSON system description and build a validated system handle.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be a valid
 * pointer.
 */
enum LcStatus lc_system_from_json(const char *json, struct LcSystem **out);

/**
 * Build a system from a built-in preset (`heisenberg-paper` or
 * `aff2-theorem39`).
 *
 * # Safety
 * As [`lc_system_from_json`].
 */
enum LcStatus lc_system_from_preset(const char *name, struct LcSystem **out);

/**
 * Release a system handle.
 *
 * # Safety
 * `sys` must be null or a pointer returned by a constructor of this
 * library, not released before.
 */
void lc_system_free(struct LcSystem *sys);

/**
 * Spectral decomposition report (`tol ≤ 0` selects the default).
 *
 * # Safety
 * `sys` must be a live handle; `out_report` must be valid.
 */
enum LcStatus lc_decompose(const struct LcSystem *sys, double tol, char **out_report);

/**
 * Controllability verdict report (`max_k = 0` selects the default
 * `2 · dim`).
 *
 * # Safety
 * As [`lc_decompose`].
 */
enum LcStatus lc_classify(const struct LcSystem *sys,
                          uint32_t max_k,
                          uint32_t samples,
                          uint64_t seed,
                          char **out_report);

/**
 * Forward/backward Γ-rank report (`depth = 0` selects the default).
 *
 * # Safety
 * As [`lc_decompose`].
 */
enum LcStatus lc_accessibility(const struct LcSystem *sys,
                               uint32_t depth,
                               uint32_t samples,
                               uint64_t seed,
                               char **out_report);

/**
 * Model self-checks; `out_pass` receives 1 when everything passed.
 *
 * # Safety
 * As [`lc_decompose`]; `out_pass` must be valid.
 */
enum LcStatus lc_verify(const struct LcSystem *sys,
                        uint64_t seed,
                        char **out_report,
                        int *out_pass);

/**
 * Reachable-cloud CSV (`header k,x1,...,xd`). `backward ≠ 0` expands the
 * reversed system; `prune_cell ≤ 0` and `max_points = 0` select defaults.
 *
 * # Safety
 * As [`lc_decompose`].
 */
enum LcStatus lc_simulate_csv(const struct LcSystem *sys,
                              uint32_t steps,
                              uint32_t lattice,
                              double prune_cell,
                              uint64_t max_points,
                              int backward,
                              uint64_t seed,
                              char **out_csv);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIE_CONTROL_H */
