#ifndef LIFELONG_SENTIMENT_H
#define LIFELONG_SENTIMENT_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Sentiment class as seen from C.
typedef enum LsClass {
  LS_CLASS_POSITIVE = 0,
  LS_CLASS_NEGATIVE = 1,
} LsClass;

// Result code of every fallible call.
typedef enum LsStatus {
  LS_STATUS_OK = 0,
  // A required pointer argument was null.
  LS_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  LS_STATUS_INVALID_UTF8 = 2,
  // File system failure; the message names the path.
  LS_STATUS_IO = 3,
  // Malformed input file or text.
  LS_STATUS_PARSE = 4,
  // Contract violation such as a duplicate domain or too few domains.
  LS_STATUS_INVALID_ARGUMENT = 5,
  // Caller-provided buffer is too small; the required length was written.
  LS_STATUS_BUFFER_TOO_SMALL = 6,
  // The library panicked; the handle involved should be discarded.
  LS_STATUS_PANIC = 7,
} LsStatus;

// Opaque domain corpus.
typedef struct LsCorpus LsCorpus;

// Opaque lifelong learner: cumulative model plus knowledge base.
typedef struct LsEngine LsEngine;

// Opaque fitted naive Bayes model.
typedef struct LsModel LsModel;

// Engine settings. Obtain defaults from [`ls_engine_config_default`].
typedef struct LsEngineConfig {
  double lambda;
  double select_percent;
  double min_avg_freq;
  size_t min_initial_domains;
  bool restrict_to_kb;
  size_t self_study_passes;
  bool score_after_refit;
} LsEngineConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *ls_version(void);

// Copy of the calling thread's last error message, or NULL if none.
// Release with [`ls_string_free`].
char *ls_last_error_message(void);

// # Safety
// `s` must be NULL or a string returned by this library and not yet freed.
void ls_string_free(char *s);

// Parses a domain from text: `label TAB text` lines when `labeled`,
// otherwise one review per line.
//
// # Safety
// `name` and `text` must be NUL-terminated strings; `out` must be writable.
enum LsStatus ls_corpus_parse(const char *name,
                              const char *text,
                              bool labeled,
                              struct LsCorpus **out);

// Loads a domain file; see [`ls_corpus_parse`] for the format.
//
// # Safety
// `path` and `name` must be NUL-terminated strings; `out` must be writable.
enum LsStatus ls_corpus_load(const char *path,
                             const char *name,
                             bool labeled,
                             struct LsCorpus **out);

// Number of documents, or 0 for NULL.
//
// # Safety
// `corpus` must be NULL or a live handle.
size_t ls_corpus_len(const struct LsCorpus *corpus);

// # Safety
// `corpus` must be NULL or a handle from this library, not yet freed.
void ls_corpus_free(struct LsCorpus *corpus);

// Fits a model on a labeled corpus with smoothing `lambda` in (0, 1].
//
// # Safety
// `corpus` must be a live handle; `out` must be writable.
enum LsStatus ls_model_fit(const struct LsCorpus *corpus, double lambda, struct LsModel **out);

// Positive-class posterior of one whitespace-tokenized text.
//
// # Safety
// `model` must be a live handle, `text` NUL-terminated, `out_positive` writable.
enum LsStatus ls_model_posterior(const struct LsModel *model,
                                 const char *text,
                                 double *out_positive);

// Decision for one text; ties go to positive.
//
// # Safety
// `model` must be a live handle, `text` NUL-terminated, `out_class` writable.
enum LsStatus ls_model_decide(const struct LsModel *model,
                              const char *text,
                              enum LsClass *out_class);

// # Safety
// `model` must be NULL or a handle from this library, not yet freed.
void ls_model_free(struct LsModel *model);

struct LsEngineConfig ls_engine_config_default(void);

// Initial learning over `count` labeled corpora. A NULL `config` means defaults.
//
// # Safety
// `corpora` must point to `count` live corpus handles; `config` must be NULL
// or readable; `out` must be writable.
enum LsStatus ls_engine_initial(const struct LsCorpus *const *corpora,
                                size_t count,
                                const struct LsEngineConfig *config,
                                struct LsEngine **out);

// Self-study of one corpus (labels, if any, are ignored). Pseudo-labels are
// written to `labels`, which must hold `capacity` entries. `out_len`
// receives the document count; when it exceeds `capacity` nothing is
// learned and [`LsStatus::BufferTooSmall`] is returned.
//
// # Safety
// `engine` and `corpus` must be live handles; `labels` must be writable for
// `capacity` entries (may be NULL when `capacity` is 0); `out_len` writable.
enum LsStatus ls_engine_self_study(struct LsEngine *engine,
                                   const struct LsCorpus *corpus,
                                   enum LsClass *labels,
                                   size_t capacity,
                                   size_t *out_len);

// Decision for one text using the engine's cumulative model and gate.
//
// # Safety
// `engine` must be a live handle, `text` NUL-terminated, `out_class` writable.
enum LsStatus ls_engine_decide(const struct LsEngine *engine,
                               const char *text,
                               enum LsClass *out_class);

// Top `k` knowledge-base words of `class` as `word TAB score` lines.
// Release `out` with [`ls_string_free`].
//
// # Safety
// `engine` must be a live handle; `out` writable.
enum LsStatus ls_engine_kb_top(const struct LsEngine *engine,
                               enum LsClass class_,
                               size_t k,
                               char **out);

// Writes the knowledge base file to `path`.
//
// # Safety
// `engine` must be a live handle and `path` NUL-terminated.
enum LsStatus ls_engine_kb_save(const struct LsEngine *engine, const char *path);

// # Safety
// `engine` must be NULL or a handle from this library, not yet freed.
void ls_engine_free(struct LsEngine *engine);

// Unweighted mean of the two per-class F1 scores.
//
// # Safety
// `predictions` and `gold` must each hold `len` entries; `out` writable.
enum LsStatus ls_macro_f1(const enum LsClass *predictions,
                          const enum LsClass *gold,
                          size_t len,
                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIFELONG_SENTIMENT_H */
