#ifndef SEPHIER_H
#define SEPHIER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SephierStatus {
  SEPHIER_STATUS_OK = 0,
  SEPHIER_STATUS_NULL_POINTER = 1,
  SEPHIER_STATUS_INVALID_UTF8 = 2,
  SEPHIER_STATUS_PARSE = 3,
  SEPHIER_STATUS_INVALID_INPUT = 4,
  SEPHIER_STATUS_NUMERICAL = 5,
  SEPHIER_STATUS_IO = 6,
  SEPHIER_STATUS_PANIC = 7,
} SephierStatus;

/**
 * An SOS certificate `ν - f = σ + Σ χ g` produced by the hierarchy.
 */
typedef struct SephierCertificate SephierCertificate;

/**
 * A parsed problem together with its symmetric tensor.
 */
typedef struct SephierProblem SephierProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next `sephier_*` call on the same thread.
 */
const char *sephier_last_error(void);

/**
 * Static name of a status code.
 */
const char *sephier_status_name(enum SephierStatus status);

/**
 * Library version as a static string.
 */
const char *sephier_version(void);

/**
 * Parses a problem document (`complex_hermitian` or `real_polynomial`).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum SephierStatus sephier_problem_from_json(const char *json, struct SephierProblem **out);

/**
 * # Safety
 * `p` must come from `sephier_problem_from_json` and not be used afterwards.
 */
void sephier_problem_free(struct SephierProblem *p);

/**
 * Number of real variables of the objective; `2n` for an operator on `(C^n)^{⊗d}`.
 *
 * # Safety
 * `p` must be a live problem handle or null.
 */
size_t sephier_problem_num_vars(const struct SephierProblem *p);

/**
 * Degree `2d` of the objective form.
 *
 * # Safety
 * `p` must be a live problem handle or null.
 */
uint32_t sephier_problem_degree(const struct SephierProblem *p);

/**
 * Solves the level-`level` hierarchy. Writes the certified upper bound to
 * `out_bound`; when `out_cert` is non-null it receives the certificate.
 *
 * # Safety
 * `p` must be a live problem handle; `out_bound` must be writable;
 * `out_cert` may be null.
 */
enum SephierStatus sephier_hierarchy_bound(const struct SephierProblem *p,
                                           uint32_t level,
                                           bool kkt,
                                           double tol,
                                           double *out_bound,
                                           struct SephierCertificate **out_cert);

/**
 * Best value found by `restarts` seeded local ascents, a lower bound on
 * the maximum over the sphere.
 *
 * # Safety
 * `p` must be a live problem handle; `out_value` must be writable.
 */
enum SephierStatus sephier_oracle_value(const struct SephierProblem *p,
                                        uint32_t restarts,
                                        uint64_t seed,
                                        double *out_value);

/**
 * Level-`k` symmetric-extension bound on a `complex_hermitian` operator
 * over `n ⊗ n`, optionally with PPT constraints.
 *
 * # Safety
 * `p` must be a live problem handle; `out_value` must be writable.
 */
enum SephierStatus sephier_dps_value(const struct SephierProblem *p,
                                     uint32_t k,
                                     bool ppt,
                                     double tol,
                                     double *out_value);

/**
 * Parses a certificate document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum SephierStatus sephier_certificate_from_json(const char *json, struct SephierCertificate **out);

/**
 * Serializes the certificate. Release the string with `sephier_string_free`.
 *
 * # Safety
 * `c` must be a live certificate handle; `out` must be writable.
 */
enum SephierStatus sephier_certificate_to_json(const struct SephierCertificate *c, char **out);

/**
 * The bound `ν` the certificate claims; NaN for a null handle.
 *
 * # Safety
 * `c` must be a live certificate handle or null.
 */
double sephier_certificate_nu(const struct SephierCertificate *c);

/**
 * Checks the certificate identity against the problem. Writes the largest
 * coefficient mismatch and the smallest Gram eigenvalue. The caller
 * decides acceptance from those two numbers.
 *
 * # Safety
 * Handles must be live; both out-pointers must be writable.
 */
enum SephierStatus sephier_certificate_verify(const struct SephierProblem *p,
                                              const struct SephierCertificate *c,
                                              double *out_residual,
                                              double *out_min_eigenvalue);

/**
 * # Safety
 * `c` must come from this library and not be used afterwards.
 */
void sephier_certificate_free(struct SephierCertificate *c);

/**
 * # Safety
 * `s` must be a string returned by this library, or null.
 */
void sephier_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEPHIER_H */
