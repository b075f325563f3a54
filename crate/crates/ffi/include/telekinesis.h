#ifndef TELEKINESIS_H
#define TELEKINESIS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum TkStatus {
  TK_STATUS_OK = 0,
  TK_STATUS_NULL_ARGUMENT = 1,
  TK_STATUS_INVALID_UTF8 = 2,
  TK_STATUS_PARSE = 3,
  TK_STATUS_VALIDATION = 4,
  TK_STATUS_CALIBRATION = 5,
  TK_STATUS_OUT_OF_ORDER = 6,
  TK_STATUS_UNBALANCED = 7,
  TK_STATUS_UNDEFINED_F = 8,
  TK_STATUS_EMPTY_TABLE = 9,
  TK_STATUS_IO = 10,
  TK_STATUS_PANIC = 11,
} TkStatus;

/**
 * Opaque engine handle.
 */
typedef struct TkEngine TkEngine;

/**
 * Sensitivity, direction-similarity threshold and movement threshold.
 */
typedef struct TkManipulationParams {
  double k;
  double sim_th;
  double m_th;
} TkManipulationParams;

typedef struct TkVec3 {
  double x;
  double y;
  double z;
} TkVec3;

/**
 * Per-object follow state. `prev_dir` is a unit vector or all zeros.
 */
typedef struct TkManipulationState {
  struct TkVec3 prev_hand;
  double prev_m;
  struct TkVec3 prev_dir;
  struct TkVec3 object_pos;
} TkManipulationState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failed call on this thread, or "" after a
 * success. The pointer stays valid until the next call on this thread.
 */
const char *tk_last_error_message(void);

/**
 * Library version, a static string.
 */
const char *tk_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void tk_string_free(char *s);

/**
 * Default follow-law parameters.
 */
struct TkManipulationParams tk_manipulation_params_default(void);

/**
 * Fresh follow state: no movement history, no direction.
 */
struct TkManipulationState tk_manipulation_state_new(struct TkVec3 hand, struct TkVec3 object_pos);

/**
 * Advances one object by one tick of hand input.
 *
 * # Safety
 * `state`, `params` and `out` must be valid pointers; `out` may alias `state`.
 */
enum TkStatus tk_manipulation_step(const struct TkManipulationState *state,
                                   struct TkVec3 hand,
                                   bool active,
                                   const struct TkManipulationParams *params,
                                   struct TkManipulationState *out);

/**
 * Creates an engine.
 *
 * `config_json` may be null for defaults. `condition` reads like
 * `"c=yes,s=no,e=yes"`. `calibration_json` may be null unless the condition
 * enables concentration or strain.
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `out` must be valid.
 */
enum TkStatus tk_engine_new(const char *config_json,
                            const char *condition,
                            const char *calibration_json,
                            struct TkEngine **out);

/**
 * Feeds one sensor frame (JSON) and returns the snapshot as canonical JSON
 * in `*out_snapshot_json`.
 *
 * # Safety
 * `engine` must come from `tk_engine_new`; `frame_json` must be
 * NUL-terminated; `out_snapshot_json` must be valid.
 */
enum TkStatus tk_engine_tick(struct TkEngine *engine,
                             const char *frame_json,
                             char **out_snapshot_json);

/**
 * Destroys an engine. Null is ignored.
 *
 * # Safety
 * `engine` must come from `tk_engine_new` and not be used afterwards.
 */
void tk_engine_free(struct TkEngine *engine);

/**
 * Upper-tail probability of the F distribution.
 *
 * # Safety
 * `out` must be valid.
 */
enum TkStatus tk_f_upper_tail(double f, double df1, double df2, double *out);

/**
 * Aligned-rank-transform ANOVA over CSV text with header
 * `participant,concentration,strain,energy,response`. The seven effect
 * rows are returned as a JSON array.
 *
 * # Safety
 * `csv_text` must be NUL-terminated; `out_json` must be valid.
 */
enum TkStatus tk_art_anova_csv(const char *csv_text, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TELEKINESIS_H */
