#ifndef BIWALK_H
#define BIWALK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a call.
 */
typedef enum BiwalkStatus {
  BIWALK_STATUS_OK = 0,
  BIWALK_STATUS_NULL_ARGUMENT = 1,
  BIWALK_STATUS_INVALID_UTF8 = 2,
  BIWALK_STATUS_IO = 3,
  BIWALK_STATUS_PARSE = 4,
  BIWALK_STATUS_CONFIG = 5,
  BIWALK_STATUS_VALIDATION = 6,
  BIWALK_STATUS_LOOKUP = 7,
  BIWALK_STATUS_NUMERIC = 8,
  BIWALK_STATUS_EVAL = 9,
  BIWALK_STATUS_OTHER = 10,
  BIWALK_STATUS_PANIC = 11,
} BiwalkStatus;

/**
 * A concept graph with its lexicon.
 */
typedef struct BiwalkKb BiwalkKb;

/**
 * Word vectors loaded from a text model file.
 */
typedef struct BiwalkVectors BiwalkVectors;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into the library on this thread.
 */
const char *biwalk_last_error(void);

/**
 * Library version as a static string.
 */
const char *biwalk_version(void);

/**
 * Load a graph (`a<TAB>b` edges) and a lexicon (`concept<TAB>lang<TAB>word`).
 * `langs` is a comma-separated list of one or two language codes.
 *
 * # Safety
 * String arguments must be valid NUL-terminated strings; `out` must be a
 * valid pointer.
 */
enum BiwalkStatus biwalk_kb_load(const char *graph_path,
                                 const char *lexicon_path,
                                 const char *langs,
                                 struct BiwalkKb **out);

/**
 * # Safety
 * `kb` must come from [`biwalk_kb_load`] and not be used afterwards.
 */
void biwalk_kb_free(struct BiwalkKb *kb);

/**
 * Number of concepts, or 0 for NULL.
 *
 * # Safety
 * `kb` must be NULL or a live handle.
 */
size_t biwalk_kb_concept_count(const struct BiwalkKb *kb);

/**
 * Number of edges, or 0 for NULL.
 *
 * # Safety
 * `kb` must be NULL or a live handle.
 */
size_t biwalk_kb_edge_count(const struct BiwalkKb *kb);

/**
 * Write `contexts` random-walk contexts to `out_path`, one per line.
 * `mode` is `"bi"` or `"mono:LANG"`. `trace_path` may be NULL; `tokens_out`
 * may be NULL and otherwise receives the token count.
 *
 * # Safety
 * `kb` must be a live handle; strings must be NUL-terminated or NULL where
 * allowed.
 */
enum BiwalkStatus biwalk_walk_to_file(const struct BiwalkKb *kb,
                                      double alpha,
                                      size_t contexts,
                                      const char *mode,
                                      uint64_t seed,
                                      const char *out_path,
                                      const char *trace_path,
                                      uint64_t *tokens_out);

/**
 * Load a text model file (`|V| D` header, one `word v1 .. vD` row per line).
 *
 * # Safety
 * `path` must be NUL-terminated; `out` must be a valid pointer.
 */
enum BiwalkStatus biwalk_vectors_load(const char *path, struct BiwalkVectors **out);

/**
 * # Safety
 * `v` must come from [`biwalk_vectors_load`] and not be used afterwards.
 */
void biwalk_vectors_free(struct BiwalkVectors *v);

/**
 * Vocabulary size, or 0 for NULL.
 *
 * # Safety
 * `v` must be NULL or a live handle.
 */
size_t biwalk_vectors_len(const struct BiwalkVectors *v);

/**
 * Dimensionality, or 0 for NULL.
 *
 * # Safety
 * `v` must be NULL or a live handle.
 */
size_t biwalk_vectors_dim(const struct BiwalkVectors *v);

/**
 * Cosine similarity of two words.
 *
 * # Safety
 * `v` must be a live handle, words NUL-terminated, `out` valid.
 */
enum BiwalkStatus biwalk_vectors_similarity(const struct BiwalkVectors *v,
                                            const char *word1,
                                            const char *word2,
                                            double *out);

/**
 * Spearman's rho of two length-`n` arrays, ties at average rank.
 *
 * # Safety
 * `x` and `y` must point to `n` readable doubles; `out` must be valid.
 */
enum BiwalkStatus biwalk_spearman(const double *x, const double *y, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BIWALK_H */
