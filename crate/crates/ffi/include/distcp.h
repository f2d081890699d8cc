/* SPDX-License-Identifier: MIT OR Apache-2.0 */

#ifndef DISTCP_H
#define DISTCP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DistcpStatus {
  DISTCP_STATUS_OK = 0,
  DISTCP_STATUS_NULL_POINTER = 1,
  /**
   * Shape or dimension mismatch.
   */
  DISTCP_STATUS_DIMENSION = 2,
  /**
   * Invalid matrix or object values.
   */
  DISTCP_STATUS_INVALID = 3,
  /**
   * Parameter out of range.
   */
  DISTCP_STATUS_CONFIG = 4,
  /**
   * Index out of range.
   */
  DISTCP_STATUS_OUT_OF_RANGE = 5,
  DISTCP_STATUS_PANIC = 6,
} DistcpStatus;

typedef struct DistcpChangePoints DistcpChangePoints;

typedef struct DistcpMatrix DistcpMatrix;

typedef struct DistcpProfile DistcpProfile;

typedef struct DistcpResult DistcpResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *distcp_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *distcp_version(void);

/**
 * Distance matrix from `n * n` row-major entries.
 *
 * # Safety
 * `entries` must point to `n * n` readable doubles and `out` must be writable.
 */
enum DistcpStatus distcp_matrix_new(size_t n, const double *entries, struct DistcpMatrix **out);

/**
 * Euclidean distance matrix of `n` points of dimension `dim`, row-major.
 *
 * # Safety
 * `points` must point to `n * dim` readable doubles and `out` must be writable.
 */
enum DistcpStatus distcp_matrix_euclidean(const double *points,
                                          size_t n,
                                          size_t dim,
                                          struct DistcpMatrix **out);

/**
 * Number of observations, or 0 for a null handle.
 *
 * # Safety
 * `m` must be NULL or a live matrix handle.
 */
size_t distcp_matrix_len(const struct DistcpMatrix *m);

/**
 * # Safety
 * `m` must be NULL or a matrix handle not yet freed.
 */
void distcp_matrix_free(struct DistcpMatrix *m);

/**
 * Scan curve over splits with fractions in `[c, 1 - c]`.
 *
 * # Safety
 * `m` must be a live matrix handle and `out` writable.
 */
enum DistcpStatus distcp_scan(const struct DistcpMatrix *m, double c, struct DistcpProfile **out);

/**
 * # Safety
 * `p` must be NULL or a live profile handle.
 */
size_t distcp_profile_len(const struct DistcpProfile *p);

/**
 * Split index and statistic of entry `i`.
 *
 * # Safety
 * `p` must be a live profile handle; `split` and `value` must be writable.
 */
enum DistcpStatus distcp_profile_get(const struct DistcpProfile *p,
                                     size_t i,
                                     size_t *split,
                                     double *value);

/**
 * # Safety
 * `p` must be NULL or a profile handle not yet freed.
 */
void distcp_profile_free(struct DistcpProfile *p);

/**
 * Permutation test for a single change. `workers` of 0 uses the global pool.
 *
 * # Safety
 * `m` must be a live matrix handle and `out` writable.
 */
enum DistcpStatus distcp_detect(const struct DistcpMatrix *m,
                                double c,
                                size_t permutations,
                                uint64_t seed,
                                size_t workers,
                                struct DistcpResult **out);

/**
 * # Safety
 * `r` must be a live result handle.
 */
double distcp_result_statistic(const struct DistcpResult *r);

/**
 * # Safety
 * `r` must be a live result handle.
 */
size_t distcp_result_tau_index(const struct DistcpResult *r);

/**
 * Permutation p-value, NaN when absent.
 *
 * # Safety
 * `r` must be a live result handle.
 */
double distcp_result_p_value(const struct DistcpResult *r);

/**
 * # Safety
 * `r` must be NULL or a result handle not yet freed.
 */
void distcp_result_free(struct DistcpResult *r);

/**
 * Seeded binary segmentation with a threshold from `permutations` draws.
 *
 * # Safety
 * `m` must be a live matrix handle and `out` writable.
 */
enum DistcpStatus distcp_segment(const struct DistcpMatrix *m,
                                 double c,
                                 double gamma,
                                 size_t min_len,
                                 double q,
                                 size_t permutations,
                                 uint64_t seed,
                                 struct DistcpChangePoints **out);

/**
 * # Safety
 * `s` must be NULL or a live change-point handle.
 */
size_t distcp_changepoints_len(const struct DistcpChangePoints *s);

/**
 * # Safety
 * `s` must be a live change-point handle.
 */
double distcp_changepoints_threshold(const struct DistcpChangePoints *s);

/**
 * Index and statistic of the `i`-th point in increasing order.
 *
 * # Safety
 * `s` must be a live change-point handle; `index` and `statistic` writable.
 */
enum DistcpStatus distcp_changepoints_get(const struct DistcpChangePoints *s,
                                          size_t i,
                                          size_t *index,
                                          double *statistic);

/**
 * # Safety
 * `s` must be NULL or a change-point handle not yet freed.
 */
void distcp_changepoints_free(struct DistcpChangePoints *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DISTCP_H */
