/* C interface for the patternsieve library.
 *
 * Every fallible function returns a patternsieve_status code; on failure,
 * patternsieve_last_error() returns a human-readable message for the most
 * recent call on the calling thread. Out-parameters marked optional may be
 * NULL and are then skipped.
 */

#ifndef PATTERNSIEVE_H
#define PATTERNSIEVE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum patternsieve_status {
  PATTERNSIEVE_OK = 0,
  /* Invalid arguments or parameters out of range. */
  PATTERNSIEVE_ERR_INVALID = 1,
  /* A search completed without finding the requested object. */
  PATTERNSIEVE_ERR_NOT_FOUND = 2,
  /* The request exceeds a built-in work budget. */
  PATTERNSIEVE_ERR_BUDGET = 3,
  /* The optimization problem or weight function is degenerate. */
  PATTERNSIEVE_ERR_DEGENERATE = 4,
  /* A required pointer argument was NULL. */
  PATTERNSIEVE_ERR_NULL = 5,
  /* An internal panic was caught at the boundary. */
  PATTERNSIEVE_ERR_PANIC = 6,
} patternsieve_status;

/* Opaque handle holding a validated tuple, its optimized weight function,
 * and the precomputed weight tables. Create with patternsieve_ctx_new and
 * release with patternsieve_ctx_free. Safe to share across threads for
 * read-only calls. */
typedef struct patternsieve_ctx patternsieve_ctx;

/* All window sums from one pass over [lo, hi). s1 = s1_minus + s1_plus
 * exactly. s1_star counts window members with at least r_k primes among
 * the shifted tuple; steps is the number of residue-class members seen. */
typedef struct patternsieve_sums {
  double s1;
  double s1_minus;
  double s1_plus;
  double s2;
  double s2_plus;
  uint64_t s1_star;
  uint64_t steps;
} patternsieve_sums;

/* Library version as a static NUL-terminated string. */
const char *patternsieve_version(void);

/* Message for the most recent failure on this thread; empty string after a
 * successful call. The pointer stays valid until the next library call on
 * the same thread. */
const char *patternsieve_last_error(void);

/* Check whether the k offsets form an admissible tuple. Writes 1 or 0 to
 * *admissible; when inadmissible, *witness_prime receives a prime covering
 * all residue classes, otherwise 0. Both out-pointers are optional. */
patternsieve_status patternsieve_check_admissible(const uint64_t *offsets,
                                                  size_t k,
                                                  int32_t *admissible,
                                                  uint64_t *witness_prime);

/* Maximize the sieve functional over the symmetric polynomial basis of the
 * given degree. theta = theta_num / theta_den is the level of distribution.
 * Writes the certified lower bound to *m_lower and the guaranteed number of
 * primes per tuple to *r_k; both out-pointers are optional. */
patternsieve_status patternsieve_optimize_mk(size_t k,
                                             uint32_t degree,
                                             int64_t theta_num,
                                             int64_t theta_den,
                                             double *m_lower,
                                             uint64_t *r_k);

/* Build a weight context for the given tuple. n0 anchors the sieve scale,
 * d0 bounds the presieved primes, and theta, epsilon, c1 are rationals given
 * as numerator/denominator pairs. The weight function is obtained by
 * optimizing at basis degree f_degree. On success, *out receives a handle
 * that must be released with patternsieve_ctx_free. */
patternsieve_status patternsieve_ctx_new(const uint64_t *offsets,
                                         size_t k,
                                         uint64_t n0,
                                         uint64_t d0,
                                         int64_t theta_num,
                                         int64_t theta_den,
                                         int64_t epsilon_num,
                                         int64_t epsilon_den,
                                         int64_t c1_num,
                                         int64_t c1_den,
                                         uint32_t f_degree,
                                         patternsieve_ctx **out);

/* Release a context handle. NULL is a no-op. */
void patternsieve_ctx_free(patternsieve_ctx *ctx);

/* Accessors. Each returns 0 (or 0.0) when ctx is NULL. */
uint64_t patternsieve_ctx_w(const patternsieve_ctx *ctx);
uint64_t patternsieve_ctx_nu0(const patternsieve_ctx *ctx);
double patternsieve_ctx_r(const patternsieve_ctx *ctx);
uint64_t patternsieve_ctx_rk(const patternsieve_ctx *ctx);

/* Sieve weight at n. Zero whenever n is outside the sieved residue class. */
patternsieve_status patternsieve_weight(const patternsieve_ctx *ctx,
                                        uint64_t n,
                                        double *out);

/* Accumulate all window sums over [lo, hi) in one pass. r_k >= 1 sets the
 * prime-count threshold for the s1_star counter; pass the value from
 * patternsieve_ctx_rk to use the optimized bound. */
patternsieve_status patternsieve_window_sums(const patternsieve_ctx *ctx,
                                             uint64_t lo,
                                             uint64_t hi,
                                             uint64_t r_k,
                                             patternsieve_sums *out);

/* Count residue-class members n <= x whose entire shifted tuple is free of
 * small prime factors (threshold n^c1). Writes the raw count and the
 * normalized density count * (log x)^k / x; both out-pointers optional.
 * Requires x >= 1000. */
patternsieve_status patternsieve_scan_rough(const patternsieve_ctx *ctx,
                                            uint64_t x,
                                            uint64_t *count,
                                            double *density);

/* Find every n in [lo, hi] with n + h prime for each of the m offsets.
 * When require_consecutive is nonzero, only hits whose tuple primes are
 * consecutive primes count. Hit positions fill buf (up to buf_len values,
 * in ascending order); *total receives the full hit count, which may exceed
 * buf_len. buf may be NULL when buf_len is 0; total is optional. */
patternsieve_status patternsieve_pattern_hits(const uint64_t *offsets,
                                              size_t m,
                                              uint64_t lo,
                                              uint64_t hi,
                                              int32_t require_consecutive,
                                              uint64_t *buf,
                                              size_t buf_len,
                                              uint64_t *total);

#ifdef __cplusplus
}
#endif

#endif /* PATTERNSIEVE_H */
