#ifndef ORIENT_H
#define ORIENT_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OrientOutput {
  ORIENT_OUTPUT_TEXT = 0,
  ORIENT_OUTPUT_MACHINE = 1,
} OrientOutput;

/**
 * Status codes. The first four match the exit status of the `orient` binary.
 */
typedef enum OrientStatus {
  ORIENT_STATUS_OK = 0,
  /**
   * The task ran but an expectation or axiom check failed.
   */
  ORIENT_STATUS_VERDICT_FAILED = 1,
  /**
   * Parse error, unknown name, malformed input.
   */
  ORIENT_STATUS_INVALID_INPUT = 2,
  /**
   * The truncation was too small for a sound answer.
   */
  ORIENT_STATUS_TRUNCATION = 3,
  ORIENT_STATUS_NULL_POINTER = 4,
  /**
   * Text was not valid UTF-8.
   */
  ORIENT_STATUS_ENCODING = 5,
  /**
   * Internal failure; a bug.
   */
  ORIENT_STATUS_PANIC = 6,
} OrientStatus;

/**
 * A finished run. Opaque to C.
 */
typedef struct OrientReport OrientReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Runs a task given as TOML text.
 *
 * `cap` and `max_cap` override the file's truncation settings; pass 0 to
 * keep them. On `ORIENT_STATUS_OK` and `ORIENT_STATUS_VERDICT_FAILED`,
 * `*out` receives a report to release with [`orient_report_free`];
 * otherwise it is set to NULL.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum OrientStatus orient_run_task(const char *toml,
                                  uint32_t cap,
                                  uint32_t max_cap,
                                  struct OrientReport **out);

/**
 * Whether every verdict in the report passed. NULL gives false.
 *
 * # Safety
 * `report` must be NULL or a live handle from [`orient_run_task`].
 */
bool orient_report_passed(const struct OrientReport *report);

/**
 * Renders the report. The string must be released with
 * [`orient_string_free`]. Returns NULL if `report` is NULL.
 *
 * # Safety
 * `report` must be NULL or a live handle from [`orient_run_task`].
 */
char *orient_report_render(const struct OrientReport *report, enum OrientOutput format);

/**
 * # Safety
 * `report` must be NULL or a handle from [`orient_run_task`] not yet freed.
 */
void orient_report_free(struct OrientReport *report);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library not yet freed.
 */
void orient_string_free(char *s);

/**
 * The message of the last failure on this thread, or NULL. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *orient_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ORIENT_H */
