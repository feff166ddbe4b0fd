#ifndef RIPSCOVER_H
#define RIPSCOVER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RcStatus {
  RC_STATUS_OK = 0,
  RC_STATUS_NULL_POINTER = 1,
  RC_STATUS_INVALID_UTF8 = 2,
  RC_STATUS_INVALID_INPUT = 3,
  RC_STATUS_ASSUMPTION_FAILURE = 4,
  RC_STATUS_INTERNAL = 5,
  RC_STATUS_PANIC = 6,
} RcStatus;

/**
 * Built complex and persistence of one scenario.
 */
typedef struct RcEvaluation RcEvaluation;

/**
 * Perturbation handle.
 */
typedef struct RcPerturbation RcPerturbation;

/**
 * Scenario handle.
 */
typedef struct RcScenario RcScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length, 0 when none.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t rc_last_error(char *buf, size_t len);

/**
 * Library version, static storage.
 */
const char *rc_version(void);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void rc_string_free(char *s);

/**
 * # Safety
 * `json` must be a NUL-terminated string, `out` a valid pointer.
 */
enum RcStatus rc_scenario_from_json(const char *json, struct RcScenario **out);

/**
 * # Safety
 * `s` must come from [`rc_scenario_from_json`] or be null.
 */
void rc_scenario_free(struct RcScenario *s);

/**
 * Number of sensors, 0 for null.
 *
 * # Safety
 * `s` must be a live handle or null.
 */
size_t rc_scenario_len(const struct RcScenario *s);

/**
 * # Safety
 * `s` must be a live handle, `out` a valid pointer.
 */
enum RcStatus rc_perturbation_generate(const struct RcScenario *s,
                                       uint64_t seed,
                                       struct RcPerturbation **out);

/**
 * Parses `{"targets":[[x,y],...]}` and validates it against `s`.
 *
 * # Safety
 * `s` must be a live handle, `json` NUL-terminated, `out` valid.
 */
enum RcStatus rc_perturbation_from_json(const struct RcScenario *s,
                                        const char *json,
                                        struct RcPerturbation **out);

/**
 * # Safety
 * `p` must come from this library or be null.
 */
void rc_perturbation_free(struct RcPerturbation *p);

/**
 * Checks assumptions and builds the relative complex up to `r_w + ε`.
 *
 * # Safety
 * `s` must be a live handle, `out` a valid pointer.
 */
enum RcStatus rc_evaluate(const struct RcScenario *s, double grid_step, struct RcEvaluation **out);

/**
 * # Safety
 * `e` must come from [`rc_evaluate`] or be null.
 */
void rc_evaluation_free(struct RcEvaluation *e);

/**
 * # Safety
 * `e` must be a live handle, `holds` a valid pointer.
 */
enum RcStatus rc_evaluation_verdict(const struct RcEvaluation *e, bool stable, bool *holds);

/**
 * Verdict JSON; release with [`rc_string_free`].
 *
 * # Safety
 * `e` must be a live handle, `out` a valid pointer.
 */
enum RcStatus rc_evaluation_verdict_json(const struct RcEvaluation *e, bool stable, char **out);

/**
 * Grid-oracle coverage of the sensors, moved by `p` when non-null.
 *
 * # Safety
 * `s` must be a live handle, `p` live or null, `covered` valid.
 */
enum RcStatus rc_coverage_check(const struct RcScenario *s,
                                const struct RcPerturbation *p,
                                double grid_step,
                                bool *covered);

/**
 * Transports the stable witness through `p` and returns the minimal
 * coverage cycle as JSON. `*out` is set to null when the stable criterion
 * fails.
 *
 * # Safety
 * `e` and `p` must be live handles, `out` a valid pointer.
 */
enum RcStatus rc_optimize(const struct RcEvaluation *e, const struct RcPerturbation *p, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RIPSCOVER_H */
