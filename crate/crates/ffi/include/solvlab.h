#ifndef SOLVLAB_H
#define SOLVLAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define SOLVLAB_OK 0

#define SOLVLAB_NULL_POINTER -1

#define SOLVLAB_INVALID_UTF8 -2

#define SOLVLAB_PANIC -3

#define SOLVLAB_BUFFER_TOO_SMALL -4

#define SOLVLAB_FORMAT_JSON 0

#define SOLVLAB_FORMAT_CSV 1

/**
 * A finitely generated group with its word metric.
 */
typedef struct SolvlabGroup SolvlabGroup;

/**
 * Spectral data of an integer matrix.
 */
typedef struct SolvlabSplit SolvlabSplit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * failing call on the same thread.
 */
const char *solvlab_last_error(void);

/**
 * Parses a matrix such as `[[2,1],[1,1]]` and analyzes it.
 *
 * # Safety
 * `matrix` must be a valid C string and `out` a valid pointer.
 */
int32_t solvlab_split_new(const char *matrix, struct SolvlabSplit **out);

/**
 * # Safety
 * `split` must come from `solvlab_split_new` and not be used afterwards.
 */
void solvlab_split_free(struct SolvlabSplit *split);

/**
 * `|det M|`.
 *
 * # Safety
 * `split` and `out` must be valid pointers.
 */
int32_t solvlab_split_det(const struct SolvlabSplit *split, uint64_t *out);

/**
 * Copies the absolute Jordan diagonal into `buf`. `written` receives the
 * dimension; `SOLVLAB_BUFFER_TOO_SMALL` is returned when `len` is short.
 *
 * # Safety
 * `buf` must hold `len` doubles; `split` and `written` must be valid.
 */
int32_t solvlab_split_mbar(const struct SolvlabSplit *split,
                           double *buf,
                           size_t len,
                           size_t *written);

/**
 * Parses `bs:1,n`, `abc:[[..]]`, `ll:q` or `ll:q:dl`.
 *
 * # Safety
 * `spec` must be a valid C string and `out` a valid pointer.
 */
int32_t solvlab_group_new(const char *spec, struct SolvlabGroup **out);

/**
 * # Safety
 * `group` must come from `solvlab_group_new` and not be used afterwards.
 */
void solvlab_group_free(struct SolvlabGroup *group);

/**
 * Word length of a whitespace-separated word, searching up to `radius`.
 *
 * # Safety
 * `group`, `word` and `out` must be valid.
 */
int32_t solvlab_group_word_length(const struct SolvlabGroup *group,
                                  const char *word,
                                  uint32_t radius,
                                  uint32_t *out);

/**
 * m-adic distance between two `digits@val` literals.
 *
 * # Safety
 * `x`, `y` and `out` must be valid.
 */
int32_t solvlab_madic_dist(uint32_t m, const char *x, const char *y, double *out);

/**
 * Common base `m = r^i`, `p = r^j`. `found` is 0 when none exists.
 *
 * # Safety
 * All out pointers must be valid.
 */
int32_t solvlab_common_base(uint64_t m,
                            uint64_t p,
                            int32_t *found,
                            uint64_t *r,
                            uint32_t *i,
                            uint32_t *j);

/**
 * Iterate detector on rational literals. `violated_at` receives the first
 * violating iterate, or 0 when the pair is compatible.
 *
 * # Safety
 * The strings and `violated_at` must be valid.
 */
int32_t solvlab_iterate_check(const char *c1,
                              const char *c2,
                              const char *r,
                              uint64_t max_iter,
                              uint64_t *violated_at);

/**
 * Runs a suite with its default fixtures. `output` receives the rendered
 * report (free with `solvlab_string_free`), `passed` 1 or 0.
 *
 * # Safety
 * `suite`, `output` and `passed` must be valid.
 */
int32_t solvlab_run_suite(const char *suite,
                          uint64_t seed,
                          int32_t format,
                          char **output,
                          int32_t *passed);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void solvlab_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SOLVLAB_H */
