#ifndef YDDE_H
#define YDDE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum YddeStatus {
  YDDE_STATUS_OK = 0,
  YDDE_STATUS_NULL_POINTER = 1,
  /**
   * Invalid numerical input, or a driver that could not be generated.
   */
  YDDE_STATUS_DOMAIN = 2,
  YDDE_STATUS_CONFIG = 3,
  /**
   * Picard stalled, or the driver is too rough for the mesh.
   */
  YDDE_STATUS_CONVERGENCE = 4,
  /**
   * Malformed CSV or UTF-8, or JSON outside a scenario.
   */
  YDDE_STATUS_PARSE = 5,
  YDDE_STATUS_IO = 6,
  /**
   * A Rust panic was caught at the boundary.
   */
  YDDE_STATUS_PANIC = 7,
} YddeStatus;

/**
 * A scenario: coefficients, driver, initial segment and solver settings.
 */
typedef struct YddeScenario YddeScenario;

/**
 * A solved scenario.
 */
typedef struct YddeSolution YddeSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ydde_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ydde_version(void);

/**
 * Parses a scenario from JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum YddeStatus ydde_scenario_from_json(const char *json, struct YddeScenario **out);

/**
 * One of the built-in scenarios: zero, additive, linear, sin, logistic, decay.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a writable pointer.
 */
enum YddeStatus ydde_scenario_builtin(const char *name, struct YddeScenario **out);

/**
 * Replaces the driver seed.
 *
 * # Safety
 * `scenario` must come from a `ydde_scenario_*` constructor.
 */
enum YddeStatus ydde_scenario_set_seed(struct YddeScenario *scenario, uint64_t seed);

/**
 * # Safety
 * `scenario` must be null or come from a `ydde_scenario_*` constructor, and
 * must not be used afterwards.
 */
void ydde_scenario_free(struct YddeScenario *scenario);

/**
 * Generates the driver and runs the windowed Picard solver.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a writable pointer.
 */
enum YddeStatus ydde_solve(const struct YddeScenario *scenario, struct YddeSolution **out);

/**
 * # Safety
 * `solution` must be null or come from [`ydde_solve`], and must not be used
 * afterwards.
 */
void ydde_solution_free(struct YddeSolution *solution);

/**
 * Grid of the solution on `[−r, T]`: node count, dimension, first time and
 * mesh. Any output pointer may be null.
 *
 * # Safety
 * `solution` must be a live handle; non-null outputs must be writable.
 */
enum YddeStatus ydde_solution_grid(const struct YddeSolution *solution,
                                   size_t *nodes,
                                   size_t *dim,
                                   double *t0,
                                   double *mesh);

/**
 * Copies node values, row-major (`nodes × dim`), into `buf`. Fails with
 * `Domain` when `cap` is too small; `written` receives the required length
 * either way.
 *
 * # Safety
 * `buf` must hold `cap` doubles; `written` must be writable.
 */
enum YddeStatus ydde_solution_copy_values(const struct YddeSolution *solution,
                                          double *buf,
                                          size_t cap,
                                          size_t *written);

/**
 * Partition summary: number of windows and stopping times `N(T)` (the
 * clamped final window excluded).
 *
 * # Safety
 * `solution` must be a live handle; non-null outputs must be writable.
 */
enum YddeStatus ydde_solution_partition(const struct YddeSolution *solution,
                                        size_t *windows,
                                        size_t *stopping_times);

/**
 * Growth-bound outcome: whether it holds at every node, and the smallest
 * margin.
 *
 * # Safety
 * `solution` must be a live handle; `holds` and `min_margin` writable.
 */
enum YddeStatus ydde_solution_growth(const struct YddeSolution *solution,
                                     bool *holds,
                                     double *min_margin);

/**
 * `K(β, ν) = 1 / (1 − 2^{1−(β+ν)})`.
 *
 * # Safety
 * `out` must be writable.
 */
enum YddeStatus ydde_young_constant(double beta, double nu, double *out);

/**
 * Grid `β`-Hölder seminorm of a path with `nodes` rows of `dim` values,
 * over its whole time span.
 *
 * # Safety
 * `values` must hold `nodes * dim` doubles; `out` must be writable.
 */
enum YddeStatus ydde_holder_seminorm(const double *values,
                                     size_t nodes,
                                     size_t dim,
                                     double mesh,
                                     double beta,
                                     double *out);

/**
 * Partition sum for `x(t) = |t|^β` on the uniform `n`-partition of `[0, 1]`.
 *
 * # Safety
 * `out` must be writable.
 */
enum YddeStatus ydde_counterexample_growth(double beta, double p, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* YDDE_H */
