#ifndef SIGNALKG_H
#define SIGNALKG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum SkgStatus {
  SKG_STATUS_OK = 0,
  SKG_STATUS_NULL_POINTER = 1,
  SKG_STATUS_INVALID_UTF8 = 2,
  SKG_STATUS_SYNTAX = 3,
  SKG_STATUS_INVALID_KB = 4,
  SKG_STATUS_UNKNOWN_ID = 5,
  SKG_STATUS_TOO_MANY_PARENTS = 6,
  SKG_STATUS_NETWORK_TOO_LARGE = 7,
  SKG_STATUS_ZERO_WEIGHT = 8,
  SKG_STATUS_ZERO_PROBABILITY = 9,
  SKG_STATUS_CONFLICTING_EVIDENCE = 10,
  SKG_STATUS_RECOMPILE_NEEDED = 11,
  SKG_STATUS_INVALID_NETWORK = 12,
  SKG_STATUS_INVALID_OBSERVATIONS = 13,
  SKG_STATUS_INVALID_ARGUMENT = 14,
  SKG_STATUS_IO = 15,
  SKG_STATUS_PANIC = 16,
} SkgStatus;

// A validated knowledge base and its compiled network.
typedef struct SkgKb SkgKb;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses, validates and compiles a knowledge base from Turtle text.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a writable pointer.
enum SkgStatus skg_kb_parse(const char *text, struct SkgKb **out);

// Like [`skg_kb_parse`], reading the Turtle from a file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable pointer.
enum SkgStatus skg_kb_load(const char *path, struct SkgKb **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `kb` must come from this library and not be used afterwards.
void skg_kb_free(struct SkgKb *kb);

// Warnings recorded while loading, one `SEVERITY code subject: message`
// line each.
//
// # Safety
// `kb` must be a live handle and `out` a writable pointer.
enum SkgStatus skg_kb_diagnostics(const struct SkgKb *kb, char **out);

// Number of nodes in the compiled network.
//
// # Safety
// `kb` must be a live handle or null (which yields 0).
uintptr_t skg_kb_node_count(const struct SkgKb *kb);

// The compiled network in its JSON interchange form.
//
// # Safety
// `kb` must be a live handle and `out` a writable pointer.
enum SkgStatus skg_kb_compile_json(const struct SkgKb *kb, char **out);

// Posterior JSON for the given observations (evidence JSON or JSON-LD;
// null means no evidence). `samples == 0` selects the default count;
// `workers == 0` means one.
//
// # Safety
// `kb` must be a live handle, `evidence` null or a NUL-terminated string,
// and `out` a writable pointer.
enum SkgStatus skg_kb_infer(const struct SkgKb *kb,
                            const char *evidence,
                            uintptr_t samples,
                            uint64_t seed,
                            bool exact,
                            uintptr_t workers,
                            char **out);

// Simulates one scenario. `forced` is null or a JSON object mapping node
// labels to booleans. The result holds the scenario and its observations.
//
// # Safety
// `kb` must be a live handle, `forced` null or a NUL-terminated string,
// and `out` a writable pointer.
enum SkgStatus skg_kb_simulate(const struct SkgKb *kb,
                               uint64_t seed,
                               const char *forced,
                               char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void skg_string_free(char *s);

// Message for the last failed call on this thread, empty after a success.
// Valid until the next call into the library on the same thread.
const char *skg_last_error_message(void);

// Stable machine-readable name of a status, e.g. `"zero-weight"`.
const char *skg_status_name(enum SkgStatus status);

// Library version string.
const char *skg_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIGNALKG_H */
