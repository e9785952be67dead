#ifndef PIMSTAB_H
#define PIMSTAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum PimCheck {
  PIM_CHECK_REGULARITY = 0,
  PIM_CHECK_POSITIVE_DEFINITE,
  PIM_CHECK_HURWITZ,
  PIM_CHECK_SCHUR,
} PimCheck;

typedef enum PimError {
  PIM_ERROR_OK = 0,
  PIM_ERROR_NULL_POINTER,
  PIM_ERROR_INVALID_UTF8,
  /**
   * Malformed document, expression or interval.
   */
  PIM_ERROR_PARSE,
  PIM_ERROR_INVALID_ARGUMENT,
  PIM_ERROR_DIMENSION,
  PIM_ERROR_NOT_SYMMETRIC,
  PIM_ERROR_VERTEX_BUDGET_EXCEEDED,
  /**
   * Singular pivot, non-convergence or another numerical failure.
   */
  PIM_ERROR_NUMERICAL,
  PIM_ERROR_BUFFER_TOO_SMALL,
  PIM_ERROR_PANIC,
} PimError;

typedef enum PimMethod {
  PIM_METHOD_SUFFICIENT = 0,
  PIM_METHOD_VERTEX,
  /**
   * Sufficient condition first, vertex enumeration when inconclusive.
   */
  PIM_METHOD_AUTO,
} PimMethod;

typedef enum PimRadiusStatus {
  PIM_RADIUS_STATUS_BRACKETED = 0,
  PIM_RADIUS_STATUS_CAPPED,
  PIM_RADIUS_STATUS_MIDPOINT_UNSTABLE,
} PimRadiusStatus;

typedef enum PimStatus {
  PIM_STATUS_PROVEN = 0,
  PIM_STATUS_INCONCLUSIVE,
  PIM_STATUS_DISPROVEN,
} PimStatus;

/**
 * Opaque handle to a normalized family `A0 + sum_k Ak * eps_k`.
 */
typedef struct PimFamily PimFamily;

/**
 * Tuning knobs. Start from `pim_options_default()`.
 */
typedef struct PimOptions {
  double margin;
  size_t max_vertices;
  /**
   * Radius bisection width; `<= 0` selects the default.
   */
  double bisect_tol;
  double r_max;
} PimOptions;

/**
 * Verdict of a single check. Absent values are NaN.
 */
typedef struct PimVerdict {
  enum PimStatus status;
  /**
   * Spectral-radius condition value of sufficient checks.
   */
  double condition;
  /**
   * Smallest slack over all vertices of vertex checks.
   */
  double worst_slack;
  uint64_t vertices_checked;
  /**
   * 1 when a witness was found; its symbol values go to the caller's buffer.
   */
  int has_witness;
  double witness_eigenvalue;
  /**
   * Number of symbol values in the witness.
   */
  size_t witness_len;
} PimVerdict;

typedef struct PimRadius {
  enum PimRadiusStatus status;
  double s_lo;
  /**
   * Infinite when capped.
   */
  double s_hi;
  double estimate;
  double witness_eigenvalue;
  size_t evaluations;
} PimRadius;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

struct PimOptions pim_options_default(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pim_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into the library from the same thread.
 */
const char *pim_last_error_message(void);

/**
 * Builds a family from a JSON problem document (its `checks` and `options`
 * are ignored).
 *
 * # Safety
 * `document` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PimError pim_family_from_json(const char *document, struct PimFamily **out);

/**
 * Builds `A0 + sum_k Ak * eps_k` from row-major `n x n` matrices:
 * `center` holds `n*n` values and `coeffs` holds `k*n*n` (may be NULL when
 * `k == 0`).
 *
 * # Safety
 * The arrays must hold the stated number of doubles; `out` must be valid.
 */
enum PimError pim_family_from_coefficients(size_t n,
                                           size_t k,
                                           const double *center,
                                           const double *coeffs,
                                           struct PimFamily **out);

/**
 * # Safety
 * `family` must come from a constructor of this library (or be NULL) and
 * must not be used afterwards.
 */
void pim_family_free(struct PimFamily *family);

/**
 * Matrix dimension `n`, or 0 for a NULL handle.
 *
 * # Safety
 * `family` must be a live handle or NULL.
 */
size_t pim_family_dim(const struct PimFamily *family);

/**
 * Number of noise symbols `K`, or 0 for a NULL handle.
 *
 * # Safety
 * `family` must be a live handle or NULL.
 */
size_t pim_family_num_symbols(const struct PimFamily *family);

/**
 * Copies matrix `index` (0 for `A0`, `k` for `Ak`) row-major into `out`.
 *
 * # Safety
 * `family` must be live and `out` must hold `len` doubles.
 */
enum PimError pim_family_matrix(const struct PimFamily *family,
                                size_t index,
                                double *out,
                                size_t len);

/**
 * Runs one check. When a witness exists and `witness` is non-NULL, its
 * symbol values are copied there (`witness_cap` doubles available).
 *
 * # Safety
 * `family` must be live, `options` NULL or valid, `out` valid, and
 * `witness` NULL or holding `witness_cap` doubles.
 */
enum PimError pim_check(const struct PimFamily *family,
                        enum PimCheck check,
                        enum PimMethod method,
                        const struct PimOptions *options,
                        struct PimVerdict *out,
                        double *witness,
                        size_t witness_cap);

/**
 * Radius of stability of a symmetric family.
 *
 * # Safety
 * `family` must be live, `options` NULL or valid, `out` valid.
 */
enum PimError pim_stability_radius(const struct PimFamily *family,
                                   const struct PimOptions *options,
                                   struct PimRadius *out);

/**
 * Runs a whole problem document as the command-line tool would. On success
 * `*report` receives the JSON report (free it with `pim_string_free`) and
 * `*exit_code` the tool's exit code (0 proven, 1 disproven, 2 inconclusive,
 * 3 error).
 *
 * # Safety
 * `document` must be NUL-terminated; `report` and `exit_code` valid.
 */
enum PimError pim_run_document(const char *document, char **report, int *exit_code);

/**
 * # Safety
 * `s` must come from this library (or be NULL) and must not be reused.
 */
void pim_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PIMSTAB_H */
