#ifndef LAMBDA_FORGE_H
#define LAMBDA_FORGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LfStatus {
  LF_STATUS_OK = 0,
  LF_STATUS_NULL_POINTER = 1,
  LF_STATUS_INVALID_UTF8 = 2,
  LF_STATUS_INVALID_ARGUMENT = 3,
  LF_STATUS_CONFIG = 4,
  LF_STATUS_HYPOTHESIS_VIOLATION = 5,
  LF_STATUS_COVERAGE = 6,
  LF_STATUS_SCARCITY = 7,
  LF_STATUS_OVERFLOW = 8,
  LF_STATUS_RESOURCE_LIMIT = 9,
  LF_STATUS_PARSE = 10,
  LF_STATUS_MISSING_DATA = 11,
  LF_STATUS_NOT_MULTIPLE_OF_LEVEL = 12,
  LF_STATUS_UNFACTORABLE = 13,
  LF_STATUS_IO = 14,
  LF_STATUS_INTERNAL = 15,
  LF_STATUS_PANIC = 16,
} LfStatus;

typedef enum LfVerdict {
  LF_VERDICT_PI_MEMBER = 0,
  LF_VERDICT_OMEGA_MEMBER = 1,
  LF_VERDICT_NEITHER = 2,
} LfVerdict;

/**
 * Opaque handle to a newform context.
 */
typedef struct LfContext LfContext;

/**
 * Certified hypotheses about the newform, taken on trust.
 */
typedef struct LfInputs {
  uint64_t p;
  uint32_t lambda_g;
  bool mu_zero;
  bool surjective_mod_p;
  bool optimal_level_asserted;
} LfInputs;

typedef struct LfFrobeniusClass {
  uint64_t ell;
  uint64_t trace_mod_p;
  uint64_t det_mod_p;
  enum LfVerdict verdict;
} LfFrobeniusClass;

typedef struct LfRatio {
  uint64_t numer;
  uint64_t denom;
} LfRatio;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Loads a TOML run configuration and builds its context.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LfStatus lf_context_from_config_file(const char *path, struct LfContext **out);

/**
 * Builds a context from a Weierstrass model `[a1, a2, a3, a4, a6]` and its
 * conductor, with default tuning.
 *
 * # Safety
 * `coeffs` must point to five `int64_t` values and `out` must be valid.
 */
enum LfStatus lf_context_from_curve(const int64_t *coeffs,
                                    uint64_t conductor,
                                    struct LfInputs inputs,
                                    struct LfContext **out);

/**
 * # Safety
 * `ctx` must be NULL or a handle from this library not yet freed.
 */
void lf_context_free(struct LfContext *ctx);

/**
 * `a_ell` of the context's form at a prime `ell ∤ N_g p`.
 *
 * # Safety
 * `ctx` and `out` must be valid.
 */
enum LfStatus lf_a_ell(const struct LfContext *ctx, uint64_t ell, int64_t *out);

/**
 * # Safety
 * `ctx` and `out` must be valid.
 */
enum LfStatus lf_classify_prime(const struct LfContext *ctx,
                                uint64_t ell,
                                struct LfFrobeniusClass *out);

/**
 * # Safety
 * `out` must be valid.
 */
enum LfStatus lf_compute_s_ell(uint64_t p, uint64_t ell, uint32_t cap, uint64_t *out);

/**
 * The exact densities of the Pi and Omega prime sets for `p`, reduced.
 *
 * # Safety
 * `pi` and `omega` must be valid.
 */
enum LfStatus lf_exact_densities(uint64_t p, struct LfRatio *pi, struct LfRatio *omega);

/**
 * Plans a level set reaching `target_lambda` with `omega_count` Omega
 * primes, scanning primes up to `scan_bound`. Writes the level set as JSON.
 *
 * # Safety
 * `ctx` and `out` must be valid. Free the string with [`lf_string_free`].
 */
enum LfStatus lf_plan_json(const struct LfContext *ctx,
                           uint32_t target_lambda,
                           size_t omega_count,
                           uint64_t scan_bound,
                           char **out);

/**
 * Carayol admissibility of a proposed level, as JSON.
 *
 * # Safety
 * `ctx` and `out` must be valid. Free the string with [`lf_string_free`].
 */
enum LfStatus lf_carayol_json(const struct LfContext *ctx, uint64_t level, char **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library not yet freed.
 */
void lf_string_free(char *s);

/**
 * The last error message on this thread, or NULL after a successful call.
 * The pointer stays valid until the next library call on the same thread.
 */
const char *lf_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAMBDA_FORGE_H */
