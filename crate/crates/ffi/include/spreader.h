#ifndef SPREADER_H
#define SPREADER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpStatus {
  SP_STATUS_OK = 0,
  SP_STATUS_NULL_POINTER = 1,
  SP_STATUS_INVALID_UTF8 = 2,
  SP_STATUS_USAGE = 3,
  SP_STATUS_DATA = 4,
  SP_STATUS_MODEL = 5,
  SP_STATUS_IO = 6,
  SP_STATUS_PANIC = 7,
} SpStatus;

// Opaque labeled or unlabeled author corpus.
typedef struct SpCorpus SpCorpus;

// Opaque trained model (vocabularies plus classifier).
typedef struct SpModel SpModel;

// Confusion counts and derived metrics for one evaluation.
typedef struct SpMetrics {
  size_t true_positives;
  size_t true_negatives;
  size_t false_positives;
  size_t false_negatives;
  double precision;
  double recall;
  double f1;
  double accuracy;
} SpMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null. The pointer
// stays valid until the next `sp_*` call on the same thread.
const char *sp_last_error(void);

// Library version as a static NUL-terminated string.
const char *sp_version(void);

// Loads a PAN-layout directory. `language` is `"en"` or `"es"`.
//
// # Safety
// `dir` and `language` must be NUL-terminated strings; `out` must be writable.
enum SpStatus sp_corpus_load(const char *dir, const char *language, struct SpCorpus **out);

// Number of authors, or 0 for a null handle.
//
// # Safety
// `corpus` must be null or a live handle.
size_t sp_corpus_len(const struct SpCorpus *corpus);

// Stratified seeded split; `numerator / denominator` of each class goes to
// the training side.
//
// # Safety
// `corpus` must be a live handle; `train` and `test` must be writable.
enum SpStatus sp_corpus_split(const struct SpCorpus *corpus,
                              uint64_t numerator,
                              uint64_t denominator,
                              uint64_t seed,
                              struct SpCorpus **train,
                              struct SpCorpus **test);

// # Safety
// `corpus` must be null or a handle not yet freed.
void sp_corpus_free(struct SpCorpus *corpus);

// Trains on a labeled corpus. A null `pipeline` selects the default system
// for the corpus language; otherwise it uses the text form accepted by the
// CLI, e.g. `"svm:tfidf/char/1-3/3000/1"`.
//
// # Safety
// `corpus` must be a live handle; `pipeline` null or NUL-terminated; `out` writable.
enum SpStatus sp_model_train(const struct SpCorpus *corpus,
                             const char *pipeline,
                             struct SpModel **out);

// # Safety
// `path` must be NUL-terminated; `out` writable.
enum SpStatus sp_model_load(const char *path, struct SpModel **out);

// # Safety
// `model` must be a live handle; `path` NUL-terminated.
enum SpStatus sp_model_save(const struct SpModel *model, const char *path);

// Feature-space dimension, or 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle.
size_t sp_model_dimension(const struct SpModel *model);

// Classifies one author given their raw tweets. Writes the label
// (0 = true-news, 1 = fake-news) and the decision value; either output may
// be null.
//
// # Safety
// `model` must be a live handle; `tweets` must point to `count`
// NUL-terminated strings.
enum SpStatus sp_model_predict(const struct SpModel *model,
                               const char *const *tweets,
                               size_t count,
                               uint8_t *label,
                               double *decision);

// Scores a model on a labeled corpus with `positive` (0 or 1) as the
// positive class.
//
// # Safety
// `model` and `corpus` must be live handles; `out` writable.
enum SpStatus sp_model_evaluate(const struct SpModel *model,
                                const struct SpCorpus *corpus,
                                uint8_t positive,
                                struct SpMetrics *out);

// # Safety
// `model` must be null or a handle not yet freed.
void sp_model_free(struct SpModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPREADER_H */
