#ifndef PERIODLAB_H
#define PERIODLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PlStatus {
  PlStatus_Ok = 0,
  PlStatus_NullPointer = 1,
  PlStatus_InvalidArgument = 2,
  PlStatus_InvariantViolation = 3,
  PlStatus_OutOfRange = 4,
  PlStatus_Panic = 5,
} PlStatus;

typedef struct PlClassGroup PlClassGroup;

typedef struct PlCurve PlCurve;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length, 0 if none.
 */
uintptr_t pl_last_error(char *buf, uintptr_t len);

void pl_string_free(char *s);

/**
 * Class group of `disc` (narrow when `narrow` is nonzero and `disc > 0`).
 */
enum PlStatus pl_classgroup_new(int64_t disc, bool narrow, struct PlClassGroup **out);

void pl_classgroup_free(struct PlClassGroup *h);

enum PlStatus pl_classgroup_order(const struct PlClassGroup *h, uint64_t *out);

enum PlStatus pl_classgroup_rank(const struct PlClassGroup *h, uintptr_t *out);

/**
 * The `i`-th invariant factor, `d_1 | d_2 | ...`.
 */
enum PlStatus pl_classgroup_invariant(const struct PlClassGroup *h, uintptr_t i, int64_t *out);

/**
 * `a` points to the five coefficients `a1, a2, a3, a4, a6`.
 */
enum PlStatus pl_curve_new(const int64_t *a, struct PlCurve **out);

void pl_curve_free(struct PlCurve *h);

/**
 * `a_p` at a prime of good reduction.
 */
enum PlStatus pl_curve_trace(const struct PlCurve *h, uint64_t p, int64_t *out);

/**
 * Number of good primes `p <= bound` with `a_p = 0`.
 */
enum PlStatus pl_curve_count_supersingular(const struct PlCurve *h,
                                           uint64_t bound,
                                           uintptr_t jobs,
                                           uintptr_t *out);

/**
 * JSON report of the Q(sqrt -257) example. The string is written even when a
 * check fails, in which case the status is `InvariantViolation`.
 */
enum PlStatus pl_example_257_json(char **out);

/**
 * JSON report of the order-`order` construction on the order-32 model.
 */
enum PlStatus pl_section5_json(int64_t order, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PERIODLAB_H */
