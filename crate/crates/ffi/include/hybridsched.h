#ifndef HYBRIDSCHED_H
#define HYBRIDSCHED_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HsScheduler {
  HS_SCHEDULER_EXACT = 0,
  HS_SCHEDULER_WIRED_ONLY = 1,
  HS_SCHEDULER_LIST = 2,
  HS_SCHEDULER_RANDOM = 3,
  HS_SCHEDULER_SINGLE_RACK = 4,
} HsScheduler;

typedef enum HsSolveStatus {
  HS_SOLVE_STATUS_OPTIMAL = 0,
  // A limit was hit; the schedule is the best found.
  HS_SOLVE_STATUS_FEASIBLE = 1,
  HS_SOLVE_STATUS_INFEASIBLE = 2,
  HS_SOLVE_STATUS_UNKNOWN = 3,
} HsSolveStatus;

typedef enum HsStatus {
  HS_STATUS_OK = 0,
  HS_STATUS_NULL_POINTER = 1,
  HS_STATUS_INVALID_UTF8 = 2,
  // Malformed JSON, an invalid instance or schedule, or a bad argument.
  HS_STATUS_INVALID_INPUT = 3,
  // The requested object does not exist, such as the schedule of an
  // infeasible solution.
  HS_STATUS_NOT_AVAILABLE = 4,
  HS_STATUS_PANIC = 5,
} HsStatus;

typedef struct HsInstance HsInstance;

typedef struct HsSolution HsSolution;

// Search limits. Zero means no limit.
typedef struct HsLimits {
  uint64_t node_limit;
  uint64_t time_limit_ms;
  // Seeds the random baseline and tie-breaking in the exact search.
  uint64_t seed;
} HsLimits;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or an empty string. The
// pointer stays valid until the next call into this library on the same
// thread.
const char *hs_last_error(void);

// Library version as a static string.
const char *hs_version(void);

// Parses an instance from JSON.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum HsStatus hs_instance_from_json(const char *json, struct HsInstance **out);

// # Safety
// `inst` must come from [`hs_instance_from_json`] and not be freed yet, or be
// null.
void hs_instance_free(struct HsInstance *inst);

// Serialises the instance in its canonical JSON form.
//
// # Safety
// `inst` must be a live handle and `out` a valid pointer.
enum HsStatus hs_instance_to_json(const struct HsInstance *inst, char **out);

// # Safety
// `inst` must be a live handle and the out pointers valid.
enum HsStatus hs_instance_size(const struct HsInstance *inst, size_t *tasks, size_t *edges);

// Bounds that bracket the optimal makespan in ticks.
//
// # Safety
// `inst` must be a live handle and the out pointers valid.
enum HsStatus hs_bounds(const struct HsInstance *inst, uint64_t *lower, uint64_t *upper);

// Runs a scheduler. A null `limits` means no limits and seed 0.
//
// # Safety
// `inst` must be a live handle, `limits` null or valid, and `out` valid.
enum HsStatus hs_solve(const struct HsInstance *inst,
                       enum HsScheduler which,
                       const struct HsLimits *limits,
                       struct HsSolution **out);

// Decides whether a schedule with makespan at most `level` ticks exists.
// The solution is `Feasible` with a schedule, `Infeasible`, or `Unknown`
// when a limit stopped the search.
//
// # Safety
// `inst` must be a live handle, `limits` null or valid, and `out` valid.
enum HsStatus hs_solve_level(const struct HsInstance *inst,
                             uint64_t level,
                             const struct HsLimits *limits,
                             struct HsSolution **out);

// # Safety
// `sol` must come from [`hs_solve`] or [`hs_solve_level`] and not be freed
// yet, or be null.
void hs_solution_free(struct HsSolution *sol);

// # Safety
// `sol` must be a live handle and `status` valid.
enum HsStatus hs_solution_status(const struct HsSolution *sol, enum HsSolveStatus *status);

// Makespan in ticks. `NotAvailable` when there is no schedule.
//
// # Safety
// `sol` must be a live handle and `makespan` valid.
enum HsStatus hs_solution_makespan(const struct HsSolution *sol, uint64_t *makespan);

// Search nodes explored; zero for heuristics.
//
// # Safety
// `sol` must be a live handle and `nodes` valid.
enum HsStatus hs_solution_nodes(const struct HsSolution *sol, uint64_t *nodes);

// The schedule as JSON. `NotAvailable` when there is none.
//
// # Safety
// `sol` must be a live handle and `out` valid.
enum HsStatus hs_solution_schedule_json(const struct HsSolution *sol, char **out);

// Checks a JSON schedule against an instance. `violations` receives the
// number of broken rules; when `report` is not null it receives one line per
// violation.
//
// # Safety
// `inst` must be a live handle, `schedule_json` NUL-terminated, `violations`
// valid and `report` null or valid.
enum HsStatus hs_validate(const struct HsInstance *inst,
                          const char *schedule_json,
                          size_t *violations,
                          char **report);

// Writes the MILP model in LP format: the minimisation model when
// `has_level` is false, else the feasibility model at makespan cap `level`.
//
// # Safety
// `inst` must be a live handle and `out` valid.
enum HsStatus hs_export_lp(const struct HsInstance *inst,
                           bool has_level,
                           uint64_t level,
                           char **out);

// # Safety
// `s` must be a string returned by this library and not freed yet, or null.
void hs_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYBRIDSCHED_H */
