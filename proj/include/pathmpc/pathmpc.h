/* Copyright 2026 The pathmpc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to libpathmpc.
 *
 * All objects are opaque handles created by the library and released with
 * the matching *_free function (NULL is accepted). Every fallible call
 * returns a pathmpc_status; on failure a message is available from
 * pathmpc_last_error() on the calling thread until the next failing call.
 * Strings returned through char** are owned by the caller and released with
 * pathmpc_string_free().
 *
 * Handles are not synchronised: use one handle from one thread at a time.
 * Distinct handles may be used concurrently.
 */

#ifndef PATHMPC_PATHMPC_H_
#define PATHMPC_PATHMPC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(PATHMPC_BUILDING_LIBRARY)
#define PATHMPC_API __attribute__((visibility("default")))
#else
#define PATHMPC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pathmpc_status {
  PATHMPC_OK = 0,
  PATHMPC_ERR_INVALID_ARGUMENT = 1, /* NULL handle, bad index, invalid option */
  PATHMPC_ERR_PARSE = 2,            /* scenario syntax, unknown key, bad value */
  PATHMPC_ERR_IO = 3,               /* file could not be read or written */
  PATHMPC_ERR_NOT_FOUND = 4,        /* planner found no path */
  PATHMPC_ERR_INTERNAL = 5
} pathmpc_status;

typedef enum pathmpc_outcome {
  PATHMPC_OUTCOME_SUCCESS = 0,
  PATHMPC_OUTCOME_TIMEOUT = 1,
  PATHMPC_OUTCOME_FAULT = 2
} pathmpc_outcome;

typedef struct pathmpc_scenario pathmpc_scenario;
typedef struct pathmpc_run pathmpc_run;
typedef struct pathmpc_sweep pathmpc_sweep;
typedef struct pathmpc_plan pathmpc_plan;

typedef struct pathmpc_summary {
  pathmpc_outcome outcome;
  int steps;
  double path_length;
  double closed_loop_cost;
  double min_margin;
  double final_distance;
  double final_heading_error;
  double final_progress;
  int monitor_failures;
  int lower_bound_violations;
  int fallback_steps;
  double wall_time_s;
} pathmpc_summary;

/* One applied control step. Monitor fields are 1 (ok) on step 0. */
typedef struct pathmpc_step {
  int k;
  double x[3];
  double u[2];
  double value;
  double progress; /* NaN in baseline mode */
  double value_lower_bound;
  double clearance;
  int solver_converged;
  int outer_iterations;
  int inner_iterations;
  double solve_ms;
  int lyapunov_ok;
  double lyapunov_slack;
  int shift_ok;
  double shift_violation;
  int gap_trend_ok;
  double gap_change;
  double tracking_gap;
} pathmpc_step;

typedef struct pathmpc_verify_report {
  int clearance_ok;
  size_t clearance_violations;
  double path_min_margin;
  double lipschitz_gp;
  double exponent_slope;
  int exponent_samples; /* samples used in the fit */
  int exponent_ok;      /* slope within [1.7, 2.3] */
} pathmpc_verify_report;

typedef struct pathmpc_gradcheck_report {
  double objective;
  double eq_jacobian;
  double ineq_jacobian;
} pathmpc_gradcheck_report;

PATHMPC_API const char* pathmpc_version(void);
PATHMPC_API const char* pathmpc_last_error(void);
/* 1-based location of the last parse error; 0 when unknown. */
PATHMPC_API int pathmpc_last_error_line(void);
PATHMPC_API int pathmpc_last_error_column(void);
PATHMPC_API void pathmpc_string_free(char* s);

/* Scenarios. load and parse do not validate; simulate, sweep, verify, plan
 * and gradcheck validate before running. */
PATHMPC_API pathmpc_status pathmpc_scenario_load(const char* path, pathmpc_scenario** out);
PATHMPC_API pathmpc_status pathmpc_scenario_parse(const char* text, pathmpc_scenario** out);
PATHMPC_API pathmpc_status pathmpc_scenario_override(pathmpc_scenario* s, const char* assignment);
PATHMPC_API pathmpc_status pathmpc_scenario_validate(const pathmpc_scenario* s);
PATHMPC_API pathmpc_status pathmpc_scenario_effective_config(const pathmpc_scenario* s,
                                                             char** out);
PATHMPC_API pathmpc_status pathmpc_scenario_sweep_size(const pathmpc_scenario* s, size_t* out);
PATHMPC_API pathmpc_status pathmpc_scenario_sweep_entry(const pathmpc_scenario* s, size_t i,
                                                        int* horizon, double* step);
PATHMPC_API void pathmpc_scenario_free(pathmpc_scenario* s);

/* Closed loop. A controller fault is not an error: the run is returned with
 * outcome PATHMPC_OUTCOME_FAULT and the partial log. */
PATHMPC_API pathmpc_status pathmpc_simulate(const pathmpc_scenario* s, pathmpc_run** out);
PATHMPC_API pathmpc_status pathmpc_run_summary(const pathmpc_run* r, pathmpc_summary* out);
/* Fault message, or "" when the run did not fault. Valid while r lives. */
PATHMPC_API const char* pathmpc_run_fault(const pathmpc_run* r);
PATHMPC_API size_t pathmpc_run_num_steps(const pathmpc_run* r);
/* k in [0, num_steps]; index num_steps is the final state. */
PATHMPC_API pathmpc_status pathmpc_run_state(const pathmpc_run* r, size_t k, double out[3]);
PATHMPC_API pathmpc_status pathmpc_run_step(const pathmpc_run* r, size_t k, pathmpc_step* out);
PATHMPC_API pathmpc_status pathmpc_run_log_csv(const pathmpc_run* r, char** out);
PATHMPC_API pathmpc_status pathmpc_run_summary_text(const pathmpc_run* r, char** out);
/* Writes log.csv, timing.csv, summary.yaml and trajectory.svg; creates the
 * directory if needed. */
PATHMPC_API pathmpc_status pathmpc_run_write(const pathmpc_run* r, const char* out_dir);
PATHMPC_API void pathmpc_run_free(pathmpc_run* r);

/* Horizon sweep over `count` (N, h) pairs; count must be positive. threads
 * == 0 uses the hardware concurrency. Per-run faults are recorded in the
 * rows. */
PATHMPC_API pathmpc_status pathmpc_sweep_run(const pathmpc_scenario* s, const int* horizons,
                                             const double* steps, size_t count,
                                             unsigned threads, pathmpc_sweep** out);
PATHMPC_API size_t pathmpc_sweep_size(const pathmpc_sweep* w);
PATHMPC_API pathmpc_status pathmpc_sweep_row(const pathmpc_sweep* w, size_t i, int* horizon,
                                             double* step, pathmpc_summary* out);
PATHMPC_API pathmpc_status pathmpc_sweep_csv(const pathmpc_sweep* w, char** out);
/* Writes sweep.csv and sweep.svg. */
PATHMPC_API pathmpc_status pathmpc_sweep_write(const pathmpc_sweep* w, const char* out_dir);
PATHMPC_API void pathmpc_sweep_free(pathmpc_sweep* w);

/* Assumption checks. report_text (optional) receives a human-readable
 * report listing every violating s value. */
PATHMPC_API pathmpc_status pathmpc_verify(const pathmpc_scenario* s, pathmpc_verify_report* out,
                                          char** report_text);

/* RRT* between path.start and path.goal of the scenario, seeded by its
 * seed. Returns PATHMPC_ERR_NOT_FOUND (and still fills *out, so the tree
 * can be written) when no path was found. */
PATHMPC_API pathmpc_status pathmpc_plan_run(const pathmpc_scenario* s, pathmpc_plan** out);
PATHMPC_API size_t pathmpc_plan_size(const pathmpc_plan* p);
PATHMPC_API pathmpc_status pathmpc_plan_waypoint(const pathmpc_plan* p, size_t i, double out[2]);
/* 0 when p is NULL or no path was found. */
PATHMPC_API double pathmpc_plan_length(const pathmpc_plan* p);
/* Writes waypoints.csv, plan.svg and a path.waypoints override line in
 * plan.txt. */
PATHMPC_API pathmpc_status pathmpc_plan_write(const pathmpc_plan* p, const char* out_dir);
PATHMPC_API void pathmpc_plan_free(pathmpc_plan* p);

/* Finite-difference check of the transcription at the scenario start. */
PATHMPC_API pathmpc_status pathmpc_gradcheck(const pathmpc_scenario* s, int samples,
                                             uint64_t seed, pathmpc_gradcheck_report* out);

#ifdef __cplusplus
}
#endif

#endif /* PATHMPC_PATHMPC_H_ */
