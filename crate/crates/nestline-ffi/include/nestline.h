#ifndef NESTLINE_H
#define NESTLINE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum {
  NESTLINE_STATUS_OK = 0,
  /**
   * A required pointer was null or an index was out of range.
   */
  NESTLINE_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The instance JSON could not be parsed or validated.
   */
  NESTLINE_STATUS_PARSE_ERROR = 2,
  /**
   * No start produced a feasible layout.
   */
  NESTLINE_STATUS_SOLVE_FAILED = 3,
  /**
   * An internal invariant failed; see `nestline_last_error`.
   */
  NESTLINE_STATUS_INTERNAL = 4,
} NestlineStatus;

/**
 * A parsed, validated instance.
 */
typedef struct NestlineInstance NestlineInstance;

/**
 * The best layout found by a solve, plus per-piece access.
 */
typedef struct NestlineSolution NestlineSolution;

/**
 * Multi-start and solver settings. Obtain defaults from
 * `nestline_options_default`, then override fields as needed.
 */
typedef struct {
  /**
   * Random starts to run.
   */
  uint64_t starts;
  /**
   * Bottom-left insertion orders tried per start.
   */
  uint64_t bl_iterations;
  /**
   * Base RNG seed; each start derives its own stream.
   */
  uint64_t rng_seed;
  /**
   * Wall-clock budget per start, in seconds.
   */
  double max_time_seconds;
  /**
   * Worker threads; 0 means 1.
   */
  uint64_t threads;
  /**
   * Constraint violation accepted as feasible.
   */
  double feasibility_tol;
  /**
   * Projected-gradient norm accepted as stationary.
   */
  double stationarity_tol;
  /**
   * Outer (multiplier update) iterations per start.
   */
  uint64_t max_outer_iterations;
} NestlineOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next nestline call on the same thread.
 */
const char *nestline_last_error(void);

/**
 * Fill `out` with default options (10 starts, 1000 orders, seed 42,
 * one hour per start, single thread, tolerances 1e-6).
 */
NestlineStatus nestline_options_default(NestlineOptions *out);

/**
 * Parse an instance from a UTF-8 JSON string into a new handle. On success
 * `*out` owns the instance; release it with `nestline_instance_free`.
 */
NestlineStatus nestline_instance_parse_json(const char *json, NestlineInstance **out);

/**
 * Release an instance handle. Null is a no-op.
 */
void nestline_instance_free(NestlineInstance *inst);

/**
 * Number of pieces after `count` expansion; 0 for a null handle.
 */
size_t nestline_instance_piece_count(const NestlineInstance *inst);

/**
 * Strip width of the instance; NaN for a null handle.
 */
double nestline_instance_strip_width(const NestlineInstance *inst);

/**
 * Solve an instance. `opts` may be null for defaults. On success `*out`
 * owns the solution; release it with `nestline_solution_free`.
 */
NestlineStatus nestline_solve(const NestlineInstance *inst,
                              const NestlineOptions *opts,
                              NestlineSolution **out);

/**
 * Release a solution handle. Null is a no-op.
 */
void nestline_solution_free(NestlineSolution *sol);

/**
 * Strip length of the best layout; NaN for a null handle.
 */
double nestline_solution_length(const NestlineSolution *sol);

/**
 * How many of the starts ended feasible; 0 for a null handle.
 */
size_t nestline_solution_feasible_starts(const NestlineSolution *sol);

/**
 * Number of placements in the layout; 0 for a null handle.
 */
size_t nestline_solution_piece_count(const NestlineSolution *sol);

/**
 * Copy placement `index` (translation and rotation in radians) into the
 * given pointers; any of them may be null to skip that field.
 */
NestlineStatus nestline_solution_placement(const NestlineSolution *sol,
                                           size_t index,
                                           double *tx,
                                           double *ty,
                                           double *theta);

/**
 * Piece id of placement `index`. The pointer is owned by the solution and
 * stays valid until `nestline_solution_free`; null if out of range.
 */
const char *nestline_solution_piece_id(const NestlineSolution *sol, size_t index);

/**
 * The best layout as a JSON document (same schema the CLI writes). The
 * pointer is owned by the solution and stays valid until
 * `nestline_solution_free`; null for a null handle.
 */
const char *nestline_solution_layout_json(const NestlineSolution *sol);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NESTLINE_H */
