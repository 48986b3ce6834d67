#ifndef COVPLAN_H
#define COVPLAN_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a fallible call.
 */
typedef enum CovplanStatus {
  COVPLAN_STATUS_OK = 0,
  COVPLAN_STATUS_NULL_ARGUMENT = 1,
  COVPLAN_STATUS_INVALID_GEOMETRY = 2,
  COVPLAN_STATUS_INVALID_ARGUMENT = 3,
  COVPLAN_STATUS_INFEASIBLE = 4,
  COVPLAN_STATUS_LOAD_FAILED = 5,
  COVPLAN_STATUS_INPUT_ERROR = 6,
  COVPLAN_STATUS_IO_ERROR = 7,
  COVPLAN_STATUS_JSON_ERROR = 8,
  COVPLAN_STATUS_INVALID_UTF8 = 9,
  COVPLAN_STATUS_PANIC = 10,
} CovplanStatus;

/**
 * Which layers `covplan_plan_render_svg` draws.
 */
typedef enum CovplanLayer {
  COVPLAN_LAYER_FIELD = 0,
  COVPLAN_LAYER_PARTITION = 1,
  COVPLAN_LAYER_TRAILS = 2,
  COVPLAN_LAYER_ROUTES = 3,
  COVPLAN_LAYER_CAR = 4,
  COVPLAN_LAYER_ALL = 5,
} CovplanLayer;

/**
 * Planner configuration.
 */
typedef struct CovplanConfig CovplanConfig;

/**
 * A loaded field map.
 */
typedef struct CovplanMap CovplanMap;

/**
 * A finished mission plan.
 */
typedef struct CovplanPlan CovplanPlan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *covplan_version(void);

/**
 * Message of the last failed call on this thread, or NULL.
 * The pointer stays valid until the next library call on the thread.
 */
const char *covplan_last_error(void);

/**
 * Free a string returned by the library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void covplan_string_free(char *s);

/**
 * Parse a GeoJSON map from text.
 *
 * # Safety
 * `geojson` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CovplanStatus covplan_map_parse(const char *geojson, struct CovplanMap **out);

/**
 * Load a GeoJSON map from a file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CovplanStatus covplan_map_load(const char *path, struct CovplanMap **out);

/**
 * Farmland area net of obstacles, square meters. Zero for NULL.
 *
 * # Safety
 * `map` must be NULL or a live map handle.
 */
double covplan_map_area(const struct CovplanMap *map);

/**
 * # Safety
 * `map` must be NULL or a live map handle, not used afterwards.
 */
void covplan_map_free(struct CovplanMap *map);

/**
 * Default configuration. Never NULL.
 */
struct CovplanConfig *covplan_config_default(void);

/**
 * Configuration from TOML text, merged over the defaults.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CovplanStatus covplan_config_from_toml(const char *toml, struct CovplanConfig **out);

/**
 * # Safety
 * `cfg` must be NULL or a live config handle, not used afterwards.
 */
void covplan_config_free(struct CovplanConfig *cfg);

/**
 * Plan a mission over `map`.
 *
 * # Safety
 * `map` and `cfg` must be live handles and `out` a valid pointer.
 */
enum CovplanStatus covplan_plan_mission(const struct CovplanMap *map,
                                        const struct CovplanConfig *cfg,
                                        uint64_t seed,
                                        struct CovplanPlan **out);

/**
 * Read a plan from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CovplanStatus covplan_plan_from_json(const char *json, struct CovplanPlan **out);

/**
 * Plan as JSON; free the result with `covplan_string_free`.
 *
 * # Safety
 * `plan` must be a live handle and `out` a valid pointer.
 */
enum CovplanStatus covplan_plan_to_json(const struct CovplanPlan *plan,
                                        bool with_timings,
                                        char **out);

/**
 * Number of sub-areas in the plan. Zero for NULL.
 *
 * # Safety
 * `plan` must be NULL or a live handle.
 */
size_t covplan_plan_subarea_count(const struct CovplanPlan *plan);

/**
 * Longest UAV flight time of the plan, seconds. Zero for NULL.
 *
 * # Safety
 * `plan` must be NULL or a live handle.
 */
double covplan_plan_makespan(const struct CovplanPlan *plan);

/**
 * Validate a plan against its map and the config's fleet.
 * `passed` receives the verdict; `report`, when not NULL, receives the text
 * report to free with `covplan_string_free`.
 *
 * # Safety
 * Handles must be live; `passed` must be valid; `report` may be NULL.
 */
enum CovplanStatus covplan_plan_validate(const struct CovplanPlan *plan,
                                         const struct CovplanMap *map,
                                         const struct CovplanConfig *cfg,
                                         bool *passed,
                                         char **report);

/**
 * SVG drawing of the plan; free the result with `covplan_string_free`.
 *
 * # Safety
 * Handles must be live and `out` a valid pointer.
 */
enum CovplanStatus covplan_plan_render_svg(const struct CovplanPlan *plan,
                                           const struct CovplanMap *map,
                                           enum CovplanLayer layer,
                                           char **out);

/**
 * # Safety
 * `plan` must be NULL or a live handle, not used afterwards.
 */
void covplan_plan_free(struct CovplanPlan *plan);

/**
 * Open asymmetric TSP path over an `n`×`n` row-major cost matrix.
 * `start` fixes the first city when it is below `n`; pass any larger value
 * for a free start. `order` receives `n` city indices.
 *
 * # Safety
 * `cost` must hold `n*n` values, `order` room for `n`, `total` must be valid.
 */
enum CovplanStatus covplan_atsp_order(const double *cost,
                                      size_t n,
                                      size_t start,
                                      size_t *order,
                                      double *total);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COVPLAN_H */
