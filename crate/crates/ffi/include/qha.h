#ifndef QHA_H
#define QHA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QhaStatus {
  QHA_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  QHA_STATUS_NULL = 1,
  QHA_STATUS_INVALID_ARGUMENT = 2,
  QHA_STATUS_GRID_MISMATCH = 3,
  QHA_STATUS_GUARDRAIL = 4,
  /**
   * An internal panic was caught.
   */
  QHA_STATUS_PANIC = 5,
} QhaStatus;

typedef enum QhaVerdict {
  QHA_VERDICT_SCHWARTZ_CONSISTENT = 0,
  QHA_VERDICT_NOT_SCHWARTZ_CONSISTENT = 1,
} QhaVerdict;

/**
 * A finite-rank operator `sum f_n (x) g_n`.
 */
typedef struct QhaOperator QhaOperator;

/**
 * A function on the phase-space lattice, stored row-major over (x index, omega index).
 */
typedef struct QhaPsf QhaPsf;

/**
 * A sampled signal on a periodized grid.
 */
typedef struct QhaSignal QhaSignal;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *qha_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated, always
 * NUL-terminated when `cap > 0`). Returns the full message length without the terminator.
 *
 * # Safety
 * `buf` must be null or valid for `cap` bytes.
 */
size_t qha_last_error(char *buf, size_t cap);

/**
 * New signal on the grid `(n, l)` from `n` real and `n` imaginary parts.
 *
 * # Safety
 * `re` and `im` must be valid for `n` reads; `out` must be valid for one write.
 */
enum QhaStatus qha_signal_new(size_t n,
                              double l,
                              const double *re,
                              const double *im,
                              struct QhaSignal **out);

/**
 * The unit-norm Gaussian `2^(1/4) exp(-pi t^2)` sampled on `(n, l)`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum QhaStatus qha_signal_gaussian(size_t n, double l, struct QhaSignal **out);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `sig` must be null or a live handle.
 */
size_t qha_signal_len(const struct QhaSignal *sig);

/**
 * # Safety
 * `re` and `im` must be valid for `cap` writes.
 */
enum QhaStatus qha_signal_values(const struct QhaSignal *sig, double *re, double *im, size_t cap);

/**
 * # Safety
 * `sig` must be null or a handle not yet freed.
 */
void qha_signal_free(struct QhaSignal *sig);

/**
 * The rank-one operator `f (x) g`, i.e. `psi -> <psi, g> f`.
 *
 * # Safety
 * Handles must be live; `out` must be valid for one write.
 */
enum QhaStatus qha_operator_rank_one(const struct QhaSignal *f,
                                     const struct QhaSignal *g,
                                     struct QhaOperator **out);

/**
 * Seeded random positive state of the given rank with unit trace.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum QhaStatus qha_operator_random_state(size_t n,
                                         double l,
                                         size_t rank,
                                         uint64_t seed,
                                         struct QhaOperator **out);

/**
 * Appends the term `f (x) g`.
 *
 * # Safety
 * Handles must be live.
 */
enum QhaStatus qha_operator_push(struct QhaOperator *op,
                                 const struct QhaSignal *f,
                                 const struct QhaSignal *g);

/**
 * # Safety
 * `op` must be null or a live handle.
 */
size_t qha_operator_rank(const struct QhaOperator *op);

/**
 * Trace `sum <f_n, g_n>`.
 *
 * # Safety
 * `re` and `im` must be valid for one write each.
 */
enum QhaStatus qha_operator_trace(const struct QhaOperator *op, double *re, double *im);

/**
 * # Safety
 * `op` must be null or a handle not yet freed.
 */
void qha_operator_free(struct QhaOperator *op);

/**
 * `W_tau S` on the phase-space lattice.
 *
 * # Safety
 * `op` must be live; `out` must be valid for one write.
 */
enum QhaStatus qha_tau_wigner(const struct QhaOperator *op, double tau_value, struct QhaPsf **out);

/**
 * Cross distribution `W_tau(f, g)`.
 *
 * # Safety
 * Handles must be live; `out` must be valid for one write.
 */
enum QhaStatus qha_cross_tau_wigner(const struct QhaSignal *f,
                                    const struct QhaSignal *g,
                                    double tau_value,
                                    struct QhaPsf **out);

/**
 * Operator convolution `S * T`.
 *
 * # Safety
 * Handles must be live; `out` must be valid for one write.
 */
enum QhaStatus qha_conv_op_op(const struct QhaOperator *s,
                              const struct QhaOperator *t,
                              struct QhaPsf **out);

/**
 * `Op_tau(a)` as a finite-rank operator; singular values below `svd_tol` times the largest
 * are dropped.
 *
 * # Safety
 * `a` must be live; `out` must be valid for one write.
 */
enum QhaStatus qha_quantize(const struct QhaPsf *a,
                            double tau_value,
                            double svd_tol,
                            struct QhaOperator **out);

/**
 * New phase-space function on `(n, l)` from `n * n` real and imaginary parts.
 *
 * # Safety
 * `re` and `im` must be valid for `n * n` reads; `out` must be valid for one write.
 */
enum QhaStatus qha_psf_new(size_t n,
                           double l,
                           const double *re,
                           const double *im,
                           struct QhaPsf **out);

/**
 * Grid size `N` (the function has `N * N` values), or 0 for a null handle.
 *
 * # Safety
 * `f` must be null or a live handle.
 */
size_t qha_psf_n(const struct QhaPsf *f);

/**
 * # Safety
 * `re` and `im` must be valid for `cap` writes.
 */
enum QhaStatus qha_psf_values(const struct QhaPsf *f, double *re, double *im, size_t cap);

/**
 * # Safety
 * `f` must be null or a handle not yet freed.
 */
void qha_psf_free(struct QhaPsf *f);

/**
 * Weighted-norm score of `W_tau S` over `s_len` exponents. Writes the fitted slope, the
 * threshold used and the verdict. `slope_fraction <= 0` selects the default rule.
 *
 * # Safety
 * `s_list` must be valid for `s_len` reads; the output pointers for one write each.
 */
enum QhaStatus qha_schwartz_score(const struct QhaOperator *op,
                                  const double *s_list,
                                  size_t s_len,
                                  double tau_value,
                                  double slope_fraction,
                                  double *slope,
                                  double *threshold,
                                  enum QhaVerdict *verdict);

/**
 * Grid size of an operator, or 0 for a null handle.
 *
 * # Safety
 * `op` must be null or a live handle.
 */
size_t qha_operator_n(const struct QhaOperator *op);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QHA_H */
