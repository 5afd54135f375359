#ifndef CROWDCOMP_H
#define CROWDCOMP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CcModel {
  CC_MODEL_LINEAR = 0,
  CC_MODEL_LOGISTIC = 1,
} CcModel;

typedef enum CcScheme {
  CC_SCHEME_INDIVIDUAL = 0,
  CC_SCHEME_DETOUR = 1,
  CC_SCHEME_DISTANCE = 2,
  CC_SCHEME_FLAT = 3,
} CcScheme;

typedef enum CcStatus {
  CC_STATUS_OK = 0,
  CC_STATUS_NULL_ARGUMENT = 1,
  CC_STATUS_INVALID_ARGUMENT = 2,
  CC_STATUS_IO = 3,
  CC_STATUS_SCHEMA = 4,
  CC_STATUS_INVALID_INSTANCE = 5,
  CC_STATUS_INVALID_PLAN = 6,
  CC_STATUS_SOLVER = 7,
  CC_STATUS_INFEASIBLE = 8,
  CC_STATUS_PANIC = 9,
} CcStatus;

// Opaque problem instance.
typedef struct CcInstance CcInstance;

// Opaque solution plan.
typedef struct CcPlan CcPlan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next call on the same thread.
const char *cc_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void cc_string_free(char *s);

// Loads an instance JSON file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum CcStatus cc_instance_load(const char *path, struct CcInstance **out);

// Parses an instance from JSON text.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum CcStatus cc_instance_from_json(const char *json, struct CcInstance **out);

// Generates a random instance. Logistic instances calibrate on
// `fit_points` simulated decisions.
//
// # Safety
// `out` must be a valid pointer.
enum CcStatus cc_instance_generate(size_t n_tasks,
                                   size_t n_drivers,
                                   double rho,
                                   double mu,
                                   uint64_t seed,
                                   enum CcModel model,
                                   size_t fit_points,
                                   struct CcInstance **out);

// # Safety
// `inst` must come from this library and not be freed twice. Null is ignored.
void cc_instance_free(struct CcInstance *inst);

// # Safety
// `inst` must be a live handle and `out` a valid pointer.
enum CcStatus cc_instance_size(const struct CcInstance *inst, size_t *n_tasks, size_t *n_drivers);

// Serializes an instance; release the string with [`cc_string_free`].
//
// # Safety
// `inst` must be a live handle and `out` a valid pointer.
enum CcStatus cc_instance_to_json(const struct CcInstance *inst, char **out);

// Optimal individual compensations and assignment.
//
// # Safety
// `inst` must be a live handle and `out` a valid pointer.
enum CcStatus cc_solve_two_phase(const struct CcInstance *inst,
                                 double epsilon_floor,
                                 struct CcPlan **out);

// Plan under a compensation scheme. Benchmark rates are tuned and written
// to `p_out` when it is not null; the individual scheme writes NaN.
//
// # Safety
// `inst` must be a live handle, `out` a valid pointer, `p_out` null or valid.
enum CcStatus cc_solve_scheme(const struct CcInstance *inst,
                              enum CcScheme scheme,
                              double epsilon_floor,
                              struct CcPlan **out,
                              double *p_out);

// Piecewise-linear model with side constraints given as a JSON array
// (null for none). Returns `Infeasible` when no plan satisfies them and
// `Solver` when the node limit is hit before any plan is found.
//
// # Safety
// `inst` must be a live handle, `constraints_json` null or a NUL-terminated
// string, and `out` a valid pointer.
enum CcStatus cc_solve_nonsep(const struct CcInstance *inst,
                              const char *constraints_json,
                              size_t breakpoints,
                              size_t node_limit,
                              double epsilon_floor,
                              struct CcPlan **out);

// # Safety
// `plan` must come from this library and not be freed twice. Null is ignored.
void cc_plan_free(struct CcPlan *plan);

// # Safety
// `plan` must be a live handle; out pointers must be valid.
enum CcStatus cc_plan_summary(const struct CcPlan *plan,
                              double *expected_cost,
                              double *expected_distance,
                              size_t *n_offers);

// Allocation of `task`: driver index and compensation, or driver -1 and
// compensation 0 for the company.
//
// # Safety
// `plan` must be a live handle; out pointers must be valid.
enum CcStatus cc_plan_allocation(const struct CcPlan *plan,
                                 size_t task,
                                 int64_t *driver,
                                 double *compensation);

// Serializes a plan; release the string with [`cc_string_free`].
//
// # Safety
// `plan` must be a live handle and `out` a valid pointer.
enum CcStatus cc_plan_to_json(const struct CcPlan *plan, char **out);

// Optimal compensation and weight of one pair under linear acceptance.
//
// # Safety
// Out pointers must be valid.
enum CcStatus cc_optimal_compensation_linear(double alpha,
                                             double beta,
                                             double c_prime,
                                             double cap,
                                             double epsilon_floor,
                                             double *c_star,
                                             double *w_star);

// Principal branch of the Lambert W function for `x >= 0`.
//
// # Safety
// `out` must be a valid pointer.
enum CcStatus cc_lambert_w0(double x, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CROWDCOMP_H */
