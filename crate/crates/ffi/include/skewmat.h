#ifndef SKEWMAT_H
#define SKEWMAT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum SkmStatus {
  SKM_STATUS_OK = 0,
  SKM_STATUS_NULL_POINTER = 1,
  SKM_STATUS_DIMENSION_MISMATCH = 2,
  SKM_STATUS_NEGATIVE_VALUE = 3,
  SKM_STATUS_NON_FINITE = 4,
  SKM_STATUS_OUT_OF_RANGE = 5,
  SKM_STATUS_INVALID_PARAMETER = 6,
  SKM_STATUS_PARSE = 7,
  SKM_STATUS_IO = 8,
  /**
   * A Rust panic was caught at the boundary.
   */
  SKM_STATUS_INTERNAL = 9,
} SkmStatus;

/**
 * Convolution used for the group counters.
 */
typedef enum SkmConvolution {
  SKM_CONVOLUTION_NAIVE = 0,
  SKM_CONVOLUTION_FFT = 1,
  SKM_CONVOLUTION_AUTO = 2,
} SkmConvolution;

/**
 * Entries returned by the recovery routines.
 */
typedef struct SkmEntryList SkmEntryList;

/**
 * Dense real matrix.
 */
typedef struct SkmMatrix SkmMatrix;

/**
 * Summary of a nonnegative product.
 */
typedef struct SkmSummary SkmSummary;

typedef struct SkmGroupOptions {
  enum SkmConvolution convolution;
  bool parallel;
  double dead_zone;
  double zipf_constant;
} SkmGroupOptions;

/**
 * One recovered entry and the group that found it.
 */
typedef struct SkmEntry {
  size_t row;
  size_t col;
  double weight;
  size_t prime;
  size_t residue;
} SkmEntry;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *skm_last_error_message(void);

/**
 * Copies `rows * cols` row-major values into a new matrix.
 *
 * # Safety
 * `values` must point to `rows * cols` readable doubles (may be null when
 * that product is 0); `out` must be writable.
 */
enum SkmStatus skm_matrix_new(size_t rows,
                              size_t cols,
                              const double *values,
                              struct SkmMatrix **out);

/**
 * # Safety
 * `m` must come from this library and not be freed twice; null is ignored.
 */
void skm_matrix_free(struct SkmMatrix *m);

/**
 * # Safety
 * `m` must be a live matrix or null; `rows` and `cols` must be writable.
 */
enum SkmStatus skm_matrix_shape(const struct SkmMatrix *m, size_t *rows, size_t *cols);

/**
 * # Safety
 * `m` must be a live matrix or null; `out` must be writable.
 */
enum SkmStatus skm_matrix_get(const struct SkmMatrix *m, size_t i, size_t j, double *out);

/**
 * Exact product `a * b`.
 *
 * # Safety
 * `a` and `b` must be live matrices or null; `out` must be writable.
 */
enum SkmStatus skm_matrix_multiply(const struct SkmMatrix *a,
                                   const struct SkmMatrix *b,
                                   struct SkmMatrix **out);

/**
 * Entrywise `p`-norm after dropping the `k` largest magnitudes.
 *
 * # Safety
 * `m` must be a live matrix or null; `out` must be writable.
 */
enum SkmStatus skm_matrix_norm(const struct SkmMatrix *m, uint32_t p, size_t k, double *out);

/**
 * Summary of capacity `capacity` of the nonnegative product `a * b`.
 *
 * # Safety
 * `a` and `b` must be live matrices or null; `out` must be writable.
 */
enum SkmStatus skm_summary_compute(const struct SkmMatrix *a,
                                   const struct SkmMatrix *b,
                                   size_t capacity,
                                   struct SkmSummary **out);

/**
 * Estimate of entry `(i, j)`; 0 for entries the summary does not hold.
 *
 * # Safety
 * `s` must be a live summary or null; `out` must be writable.
 */
enum SkmStatus skm_summary_estimate(const struct SkmSummary *s, size_t i, size_t j, double *out);

/**
 * Number of stored entries; 0 for null.
 *
 * # Safety
 * `s` must be a live summary or null.
 */
size_t skm_summary_len(const struct SkmSummary *s);

/**
 * Stored entry `index` in position order.
 *
 * # Safety
 * `s` must be a live summary or null; the outputs must be writable.
 */
enum SkmStatus skm_summary_entry(const struct SkmSummary *s,
                                 size_t index,
                                 size_t *row,
                                 size_t *col,
                                 double *weight);

/**
 * # Safety
 * `s` must come from this library and not be freed twice; null is ignored.
 */
void skm_summary_free(struct SkmSummary *s);

struct SkmGroupOptions skm_group_options_default(void);

/**
 * At most `budget` verified entries of `a * b`, heaviest first.
 *
 * # Safety
 * `a` and `b` must be live matrices or null; `opts` may be null for the
 * defaults; `out` must be writable.
 */
enum SkmStatus skm_recover_heavy(const struct SkmMatrix *a,
                                 const struct SkmMatrix *b,
                                 size_t budget,
                                 const struct SkmGroupOptions *opts,
                                 struct SkmEntryList **out);

/**
 * The `k * s` heaviest entries of a Zipf(`z`)-skewed product, `k` per round.
 *
 * # Safety
 * As [`skm_recover_heavy`].
 */
enum SkmStatus skm_multi_pass_topk(const struct SkmMatrix *a,
                                   const struct SkmMatrix *b,
                                   size_t k,
                                   size_t s,
                                   double z,
                                   const struct SkmGroupOptions *opts,
                                   struct SkmEntryList **out);

/**
 * # Safety
 * `list` must be a live list or null.
 */
size_t skm_entry_list_len(const struct SkmEntryList *list);

/**
 * # Safety
 * `list` must be a live list or null; `out` must be writable.
 */
enum SkmStatus skm_entry_list_get(const struct SkmEntryList *list,
                                  size_t index,
                                  struct SkmEntry *out);

/**
 * # Safety
 * `list` must come from this library and not be freed twice; null is ignored.
 */
void skm_entry_list_free(struct SkmEntryList *list);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKEWMAT_H */
