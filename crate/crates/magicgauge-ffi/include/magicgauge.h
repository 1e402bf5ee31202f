#ifndef MAGICGAUGE_H
#define MAGICGAUGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MgBackend {
  MG_BACKEND_DENSE = 0,
  MG_BACKEND_SPARSE = 1,
} MgBackend;

typedef enum MgMode {
  MG_MODE_POST_SELECT = 0,
  MG_MODE_SAMPLE = 1,
} MgMode;

typedef enum MgOption {
  MG_OPTION_DISENTANGLE = 0,
  MG_OPTION_CONDENSE = 1,
} MgOption;

typedef enum MgStatus {
  MG_STATUS_OK = 0,
  MG_STATUS_NULL_ARGUMENT = 1,
  MG_STATUS_INVALID_ARGUMENT = 2,
  MG_STATUS_CONFIG = 3,
  MG_STATUS_PROTOCOL = 4,
  MG_STATUS_PANIC = 5,
} MgStatus;

/**
 * Pipeline configuration.
 */
typedef struct MgConfig MgConfig;

/**
 * Result of a pipeline run.
 */
typedef struct MgReport MgReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or NULL. The pointer is
 * valid until the next failing call on this thread.
 */
const char *mg_last_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library.
 */
void mg_string_free(char *s);

/**
 * Default configuration: 1x1 patch, sparse backend, post-selection,
 * condensed extraction.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MgStatus mg_config_new(struct MgConfig **out);

/**
 * Configuration from TOML text; unknown keys are rejected.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MgStatus mg_config_from_toml(const char *toml, struct MgConfig **out);

/**
 * # Safety
 * `cfg` must be NULL or a handle from `mg_config_new`/`mg_config_from_toml`.
 */
void mg_config_free(struct MgConfig *cfg);

/**
 * # Safety
 * `cfg` must be a valid config handle.
 */
enum MgStatus mg_config_set_patch(struct MgConfig *cfg, uint32_t width, uint32_t height);

/**
 * # Safety
 * `cfg` must be a valid config handle.
 */
enum MgStatus mg_config_set_mode(struct MgConfig *cfg, enum MgMode mode, uint64_t seed);

/**
 * # Safety
 * `cfg` must be a valid config handle.
 */
enum MgStatus mg_config_set_option(struct MgConfig *cfg, enum MgOption option, bool standardize);

/**
 * # Safety
 * `cfg` must be a valid config handle.
 */
enum MgStatus mg_config_set_backend(struct MgConfig *cfg, enum MgBackend backend);

/**
 * Runs the pipeline. Nothing is written to disk.
 *
 * # Safety
 * `cfg` must be a valid config handle and `out` a valid pointer.
 */
enum MgStatus mg_run(const struct MgConfig *cfg, struct MgReport **out);

/**
 * # Safety
 * `report` must be NULL or a handle from `mg_run`.
 */
void mg_report_free(struct MgReport *report);

/**
 * # Safety
 * `report` must be a valid report handle and `out` a valid pointer.
 */
enum MgStatus mg_report_passed(const struct MgReport *report, bool *out);

/**
 * Teleported-state fidelity (worst branch). NaN when the run has none.
 *
 * # Safety
 * `report` must be a valid report handle and `out` a valid pointer.
 */
enum MgStatus mg_report_final_fidelity(const struct MgReport *report, double *out);

/**
 * # Safety
 * `report` must be a valid report handle and `out` a valid pointer.
 */
enum MgStatus mg_report_cumulative_prob(const struct MgReport *report, double *out);

/**
 * The report as JSON.
 *
 * # Safety
 * `report` must be a valid report handle and `out` a valid pointer.
 */
enum MgStatus mg_report_json(const struct MgReport *report, char **out);

/**
 * Symbolic state after a `gauge:X,condense:Y` sequence, e.g. state `SX`.
 *
 * # Safety
 * `state` and `seq` must be NUL-terminated strings, `out` a valid pointer.
 */
enum MgStatus mg_oracle(const char *state, const char *seq, char **out);

/**
 * Condensability report for a named algebra or an expression in `Z(D4)`.
 *
 * # Safety
 * `algebra` must be a NUL-terminated string, `out` a valid pointer.
 */
enum MgStatus mg_check_algebra(const char *algebra, char **out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MAGICGAUGE_H */
