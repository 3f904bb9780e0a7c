#ifndef DRDM_H
#define DRDM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum DrdmStatus {
  DRDM_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  DRDM_STATUS_NULL_ARGUMENT = 1,
  DRDM_STATUS_INVALID_UTF8 = 2,
  /**
   * The config file could not be read or is invalid.
   */
  DRDM_STATUS_CONFIG = 3,
  /**
   * Bundled or configured resources failed to load.
   */
  DRDM_STATUS_RESOURCE = 4,
  DRDM_STATUS_UNKNOWN_SESSION = 5,
  /**
   * The turn was rejected, for example empty text or an ended session.
   */
  DRDM_STATUS_INPUT = 6,
  DRDM_STATUS_INTERNAL = 7,
  /**
   * A panic was caught at the boundary.
   */
  DRDM_STATUS_PANIC = 8,
} DrdmStatus;

/**
 * Opaque engine handle.
 */
typedef struct DrdmEngine DrdmEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates an engine. `config_path` may be null for the defaults (the
 * `ENGINE_CONFIG` and `ENGINE_DATA_DIR` variables still apply).
 *
 * # Safety
 * `config_path` must be null or a NUL-terminated string; `out` must be a
 * valid pointer to write the handle to.
 */
enum DrdmStatus drdm_engine_new(const char *config_path, struct DrdmEngine **out);

/**
 * Releases an engine and every session in it. Null is ignored.
 *
 * # Safety
 * `engine` must be null or a handle from `drdm_engine_new` not yet freed.
 */
void drdm_engine_free(struct DrdmEngine *engine);

/**
 * Starts a session. When `use_seed` is false the seed comes from the
 * config or the system. The new session id is written to `out_id`.
 *
 * # Safety
 * `engine` must be a live handle and `out_id` a valid pointer.
 */
enum DrdmStatus drdm_session_create(const struct DrdmEngine *engine,
                                    bool use_seed,
                                    uint64_t seed,
                                    char **out_id);

/**
 * Runs one turn and writes the response as JSON to `out_json`.
 *
 * # Safety
 * `engine` must be a live handle, `session_id` and `text` NUL-terminated
 * strings and `out_json` a valid pointer.
 */
enum DrdmStatus drdm_session_turn(const struct DrdmEngine *engine,
                                  const char *session_id,
                                  const char *text,
                                  char **out_json);

/**
 * Ends a session. When `out_json` is not null the session summary is
 * written there as JSON.
 *
 * # Safety
 * `engine` must be a live handle, `session_id` a NUL-terminated string and
 * `out_json` null or a valid pointer.
 */
enum DrdmStatus drdm_session_end(const struct DrdmEngine *engine,
                                 const char *session_id,
                                 char **out_json);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void drdm_string_free(char *s);

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into the library on the same thread.
 */
const char *drdm_last_error(void);

/**
 * Library version as a static string.
 */
const char *drdm_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DRDM_H */
