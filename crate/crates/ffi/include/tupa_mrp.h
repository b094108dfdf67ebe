#ifndef TUPA_MRP_H
#define TUPA_MRP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a call.
 */
typedef enum TupaStatus {
  TUPA_STATUS_OK = 0,
  TUPA_STATUS_NULL_ARGUMENT = 1,
  TUPA_STATUS_INVALID_UTF8 = 2,
  TUPA_STATUS_IO = 3,
  /**
   * Malformed JSON or transition text.
   */
  TUPA_STATUS_FORMAT = 4,
  /**
   * A graph or companion file failed validation or conversion.
   */
  TUPA_STATUS_INVALID = 5,
  TUPA_STATUS_UNKNOWN_FRAMEWORK = 6,
  TUPA_STATUS_ORACLE = 7,
  TUPA_STATUS_MODEL = 8,
  TUPA_STATUS_EVALUATION = 9,
  /**
   * A Rust panic was caught at the boundary.
   */
  TUPA_STATUS_INTERNAL = 10,
} TupaStatus;

/**
 * A trained model.
 */
typedef struct TupaModel TupaModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *tupa_last_error(void);

/**
 * Library version, statically allocated.
 */
const char *tupa_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed yet.
 */
void tupa_string_free(char *s);

/**
 * Loads a model file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum TupaStatus tupa_model_load(const char *path, struct TupaModel **out);

/**
 * Trains a model on MRP graphs and their companion graphs, matched by id.
 * `framework` may be null to use the first graph's framework.
 *
 * # Safety
 * String arguments must be NUL-terminated or null where allowed; `out`
 * must be writable.
 */
enum TupaStatus tupa_model_train(const char *graphs_mrp,
                                 const char *companion_mrp,
                                 const char *framework,
                                 unsigned int epochs,
                                 uint64_t seed,
                                 struct TupaModel **out);

/**
 * Writes a model file.
 *
 * # Safety
 * `model` must be a live handle; `path` NUL-terminated.
 */
enum TupaStatus tupa_model_save(const struct TupaModel *model, const char *path);

/**
 * The model's framework tag, owned by the handle. Null for a null handle.
 *
 * # Safety
 * `model` must be a live handle or null.
 */
const char *tupa_model_framework(const struct TupaModel *model);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must come from this library and not have been freed yet.
 */
void tupa_model_free(struct TupaModel *model);

/**
 * Parses the sentences of `companion_mrp`; `*out` receives MRP graphs.
 *
 * # Safety
 * `model` must be a live handle, `companion_mrp` NUL-terminated and `out`
 * writable.
 */
enum TupaStatus tupa_parse(const struct TupaModel *model, const char *companion_mrp, char **out);

/**
 * Scores system graphs against gold graphs (matched by id). `*f1`
 * receives the overall F; if `report_json` is not null it receives the
 * full report.
 *
 * # Safety
 * Strings must be NUL-terminated; `f1` writable; `report_json` writable
 * or null.
 */
enum TupaStatus tupa_evaluate(const char *gold_mrp,
                              const char *system_mrp,
                              unsigned int restarts,
                              unsigned int iterations,
                              uint64_t seed,
                              double *f1,
                              char **report_json);

/**
 * Gold transition sequences, one block per graph: `# id`, one transition
 * per line, blank line.
 *
 * # Safety
 * Strings must be NUL-terminated (`framework` may be null); `out` writable.
 */
enum TupaStatus tupa_oracle(const char *graphs_mrp,
                            const char *companion_mrp,
                            const char *framework,
                            char **out);

/**
 * Cycle statistics of a corpus as JSON.
 *
 * # Safety
 * `graphs_mrp` must be NUL-terminated; `out` writable.
 */
enum TupaStatus tupa_corpus_stats(const char *graphs_mrp, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TUPA_MRP_H */
