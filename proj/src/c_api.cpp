// Copyright 2026 The pathmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pathmpc/pathmpc.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pathmpc/report.hpp"
#include "pathmpc/scenario.hpp"

struct pathmpc_scenario {
  pathmpc::Scenario scenario;
};

struct pathmpc_run {
  pathmpc::Scenario scenario;
  pathmpc::ClosedLoopLog log;
};

struct pathmpc_sweep {
  pathmpc::Scenario scenario;
  std::vector<pathmpc::SweepRow> rows;
};

struct pathmpc_plan {
  pathmpc::Scenario scenario;
  std::optional<pathmpc::Waypoints> waypoints;
  pathmpc::PlannerTree tree;
};

namespace {

struct LastError {
  std::string message;
  int line = 0;
  int column = 0;
};

thread_local LastError last_error;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

pathmpc_status fail(pathmpc_status code, const std::string& message, int line = 0,
                    int column = 0) {
  last_error = {message, line, column};
  return code;
}

template <typename F>
pathmpc_status guarded(F&& body) {
  try {
    body();
    return PATHMPC_OK;
  } catch (const pathmpc::ScenarioError& e) {
    return fail(PATHMPC_ERR_PARSE, e.what(), e.line(), e.column());
  } catch (const IoError& e) {
    return fail(PATHMPC_ERR_IO, e.what());
  } catch (const NotFound& e) {
    return fail(PATHMPC_ERR_NOT_FOUND, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(PATHMPC_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(PATHMPC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PATHMPC_ERR_INTERNAL, "unknown error");
  }
}

template <typename T>
void require(const T* p, const char* what) {
  if (!p) throw std::invalid_argument(std::string(what) + " is NULL");
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void validated(const pathmpc::Scenario& s) {
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw pathmpc::ScenarioError(s.name, 0, 0, e.what());
  }
}

std::filesystem::path prepare_dir(const char* dir) {
  require(dir, "out_dir");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(std::string("cannot create ") + dir + ": " + ec.message());
  return dir;
}

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  writer(out);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

pathmpc_summary to_c(const pathmpc::ClosedLoopSummary& s) {
  pathmpc_summary c{};
  switch (s.outcome) {
    case pathmpc::RunOutcome::kSuccess: c.outcome = PATHMPC_OUTCOME_SUCCESS; break;
    case pathmpc::RunOutcome::kTimeout: c.outcome = PATHMPC_OUTCOME_TIMEOUT; break;
    case pathmpc::RunOutcome::kFault: c.outcome = PATHMPC_OUTCOME_FAULT; break;
  }
  c.steps = s.steps;
  c.path_length = s.path_length;
  c.closed_loop_cost = s.closed_loop_cost;
  c.min_margin = s.min_margin;
  c.final_distance = s.final_distance;
  c.final_heading_error = s.final_heading_error;
  c.final_progress = s.final_progress;
  c.monitor_failures = s.monitor_failures;
  c.lower_bound_violations = s.lower_bound_violations;
  c.fallback_steps = s.fallback_steps;
  c.wall_time_s = s.wall_time_s;
  return c;
}

}  // namespace

extern "C" {

const char* pathmpc_version(void) { return "0.1.0"; }
const char* pathmpc_last_error(void) { return last_error.message.c_str(); }
int pathmpc_last_error_line(void) { return last_error.line; }
int pathmpc_last_error_column(void) { return last_error.column; }
void pathmpc_string_free(char* s) { std::free(s); }

pathmpc_status pathmpc_scenario_load(const char* path, pathmpc_scenario** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    std::ifstream in(path);
    if (!in) throw IoError(std::string("cannot open scenario file ") + path);
    std::stringstream buf;
    buf << in.rdbuf();
    *out = new pathmpc_scenario{pathmpc::parse_scenario(buf.str(), path)};
  });
}

pathmpc_status pathmpc_scenario_parse(const char* text, pathmpc_scenario** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = nullptr;
    *out = new pathmpc_scenario{pathmpc::parse_scenario(text)};
  });
}

pathmpc_status pathmpc_scenario_override(pathmpc_scenario* s, const char* assignment) {
  return guarded([&] {
    require(s, "scenario");
    require(assignment, "assignment");
    pathmpc::apply_override(s->scenario, assignment);
  });
}

pathmpc_status pathmpc_scenario_validate(const pathmpc_scenario* s) {
  return guarded([&] {
    require(s, "scenario");
    validated(s->scenario);
  });
}

pathmpc_status pathmpc_scenario_effective_config(const pathmpc_scenario* s, char** out) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    *out = duplicate(pathmpc::effective_config(s->scenario));
  });
}

pathmpc_status pathmpc_scenario_sweep_size(const pathmpc_scenario* s, size_t* out) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    *out = s->scenario.sweep.size();
  });
}

pathmpc_status pathmpc_scenario_sweep_entry(const pathmpc_scenario* s, size_t i, int* horizon,
                                            double* step) {
  return guarded([&] {
    require(s, "scenario");
    if (i >= s->scenario.sweep.size()) throw std::invalid_argument("sweep index out of range");
    if (horizon) *horizon = s->scenario.sweep[i].first;
    if (step) *step = s->scenario.sweep[i].second;
  });
}

void pathmpc_scenario_free(pathmpc_scenario* s) { delete s; }

pathmpc_status pathmpc_simulate(const pathmpc_scenario* s, pathmpc_run** out) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    *out = nullptr;
    validated(s->scenario);
    auto run = std::make_unique<pathmpc_run>();
    run->scenario = s->scenario;
    run->log = pathmpc::run_closed_loop(run->scenario);
    *out = run.release();
  });
}

pathmpc_status pathmpc_run_summary(const pathmpc_run* r, pathmpc_summary* out) {
  return guarded([&] {
    require(r, "run");
    require(out, "out");
    *out = to_c(r->log.summary);
  });
}

const char* pathmpc_run_fault(const pathmpc_run* r) {
  return r ? r->log.summary.fault.c_str() : "";
}

size_t pathmpc_run_num_steps(const pathmpc_run* r) { return r ? r->log.rows.size() : 0; }

pathmpc_status pathmpc_run_state(const pathmpc_run* r, size_t k, double out[3]) {
  return guarded([&] {
    require(r, "run");
    require(out, "out");
    if (k >= r->log.states.size()) throw std::invalid_argument("state index out of range");
    for (int i = 0; i < 3; ++i) out[i] = r->log.states[k][i];
  });
}

pathmpc_status pathmpc_run_step(const pathmpc_run* r, size_t k, pathmpc_step* out) {
  return guarded([&] {
    require(r, "run");
    require(out, "out");
    if (k >= r->log.rows.size()) throw std::invalid_argument("step index out of range");
    const pathmpc::LogRow& row = r->log.rows[k];
    const pathmpc::StepDiagnostics& d = row.diag;
    pathmpc_step c{};
    c.k = d.k;
    for (int i = 0; i < 3; ++i) c.x[i] = d.x[i];
    for (int i = 0; i < 2; ++i) c.u[i] = d.u[i];
    c.value = d.value;
    c.progress = d.progress;
    c.value_lower_bound = row.value_lower_bound;
    c.clearance = row.clearance;
    c.solver_converged = d.status == pathmpc::NlpStatus::kConverged;
    c.outer_iterations = d.outer_iterations;
    c.inner_iterations = d.inner_iterations;
    c.solve_ms = d.solve_ms;
    const pathmpc::MonitorVerdict m = row.monitors.value_or(pathmpc::MonitorVerdict{});
    c.lyapunov_ok = m.lyapunov_decrease_ok;
    c.lyapunov_slack = m.lyapunov_slack;
    c.shift_ok = m.shift_feasible_ok;
    c.shift_violation = m.shift_violation;
    c.gap_trend_ok = m.gap_trend_ok;
    c.gap_change = m.gap_change;
    c.tracking_gap = d.tracking_gap;
    *out = c;
  });
}

pathmpc_status pathmpc_run_log_csv(const pathmpc_run* r, char** out) {
  return guarded([&] {
    require(r, "run");
    require(out, "out");
    std::ostringstream s;
    pathmpc::write_log_csv(r->log, s);
    *out = duplicate(s.str());
  });
}

pathmpc_status pathmpc_run_summary_text(const pathmpc_run* r, char** out) {
  return guarded([&] {
    require(r, "run");
    require(out, "out");
    std::ostringstream s;
    pathmpc::write_summary(r->log, r->scenario, s);
    *out = duplicate(s.str());
  });
}

pathmpc_status pathmpc_run_write(const pathmpc_run* r, const char* out_dir) {
  return guarded([&] {
    require(r, "run");
    const auto dir = prepare_dir(out_dir);
    write_file(dir / "log.csv", [&](std::ostream& o) { pathmpc::write_log_csv(r->log, o); });
    write_file(dir / "timing.csv", [&](std::ostream& o) { pathmpc::write_timing_csv(r->log, o); });
    write_file(dir / "summary.yaml",
               [&](std::ostream& o) { pathmpc::write_summary(r->log, r->scenario, o); });
    write_file(dir / "trajectory.svg",
               [&](std::ostream& o) { pathmpc::write_trajectory_svg(r->log, r->scenario, o); });
  });
}

void pathmpc_run_free(pathmpc_run* r) { delete r; }

pathmpc_status pathmpc_sweep_run(const pathmpc_scenario* s, const int* horizons,
                                 const double* steps, size_t count, unsigned threads,
                                 pathmpc_sweep** out) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    *out = nullptr;
    if (count == 0) throw std::invalid_argument("sweep: empty horizon list");
    require(horizons, "horizons");
    require(steps, "steps");
    validated(s->scenario);
    std::vector<std::pair<int, double>> configs;
    for (size_t i = 0; i < count; ++i) configs.emplace_back(horizons[i], steps[i]);
    auto sweep = std::make_unique<pathmpc_sweep>();
    sweep->scenario = s->scenario;
    sweep->rows = pathmpc::horizon_sweep(sweep->scenario, configs, threads);
    *out = sweep.release();
  });
}

size_t pathmpc_sweep_size(const pathmpc_sweep* w) { return w ? w->rows.size() : 0; }

pathmpc_status pathmpc_sweep_row(const pathmpc_sweep* w, size_t i, int* horizon, double* step,
                                 pathmpc_summary* out) {
  return guarded([&] {
    require(w, "sweep");
    if (i >= w->rows.size()) throw std::invalid_argument("sweep row out of range");
    if (horizon) *horizon = w->rows[i].horizon;
    if (step) *step = w->rows[i].step;
    if (out) *out = to_c(w->rows[i].summary);
  });
}

pathmpc_status pathmpc_sweep_csv(const pathmpc_sweep* w, char** out) {
  return guarded([&] {
    require(w, "sweep");
    require(out, "out");
    std::ostringstream s;
    pathmpc::write_sweep_csv(w->rows, s);
    *out = duplicate(s.str());
  });
}

pathmpc_status pathmpc_sweep_write(const pathmpc_sweep* w, const char* out_dir) {
  return guarded([&] {
    require(w, "sweep");
    const auto dir = prepare_dir(out_dir);
    write_file(dir / "sweep.csv", [&](std::ostream& o) { pathmpc::write_sweep_csv(w->rows, o); });
    write_file(dir / "sweep.svg",
               [&](std::ostream& o) { pathmpc::write_sweep_svg(w->rows, w->scenario, o); });
  });
}

void pathmpc_sweep_free(pathmpc_sweep* w) { delete w; }

pathmpc_status pathmpc_verify(const pathmpc_scenario* s, pathmpc_verify_report* out,
                              char** report_text) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    const pathmpc::Scenario& sc = s->scenario;
    validated(sc);
    const pathmpc::PathPtr path = sc.build_path();
    const pathmpc::OcpSpec spec = sc.ocp_spec(path);
    const pathmpc::ClearanceReport clearance = pathmpc::check_path_clearance(
        *path, *spec.model, spec.input_bounds(), spec.step, spec.obstacles, spec.delta_sep, 1000);
    const double lgp = pathmpc::estimate_lipschitz_gp(*path, *spec.model, 1000);
    const pathmpc::ExponentReport exponent = pathmpc::verify_controllability_exponent(
        *spec.model, spec.input_bounds(), pathmpc::default_exponent_epsilons(), sc.weights,
        spec.step);

    pathmpc_verify_report r{};
    r.clearance_ok = clearance.ok();
    r.clearance_violations = clearance.violations.size();
    r.path_min_margin = clearance.min_margin;
    r.lipschitz_gp = lgp;
    r.exponent_slope = exponent.slope;
    r.exponent_samples = exponent.fitted;
    r.exponent_ok = exponent.slope >= 1.7 && exponent.slope <= 2.3;
    *out = r;

    if (report_text) {
      std::ostringstream t;
      t << "path clearance: " << (r.clearance_ok ? "pass" : "FAIL")
        << " (min margin " << pathmpc::format_number(clearance.min_margin) << ", delta_sep "
        << pathmpc::format_number(spec.delta_sep) << ")\n";
      for (const auto& v : clearance.violations)
        t << "  violation s=" << pathmpc::format_number(v.s) << " " << v.kind << " "
          << pathmpc::format_number(v.value) << "\n";
      t << "lipschitz L_gp: " << pathmpc::format_number(lgp) << "\n";
      t << "controllability exponent: " << (r.exponent_ok ? "pass" : "FAIL") << " (slope "
        << pathmpc::format_number(exponent.slope) << ", expected 2 within [1.7, 2.3], "
        << exponent.fitted << " samples)\n";
      for (const auto& e : exponent.samples)
        t << "  eps=" << pathmpc::format_number(e.epsilon)
          << " cost=" << pathmpc::format_number(e.cost)
          << " displacement=" << pathmpc::format_number(e.displacement)
          << (e.clipped ? " clipped" : "") << "\n";
      *report_text = duplicate(t.str());
    }
  });
}

pathmpc_status pathmpc_plan_run(const pathmpc_scenario* s, pathmpc_plan** out) {
  const pathmpc_status status = guarded([&] {
    require(s, "scenario");
    require(out, "out");
    *out = nullptr;
    validated(s->scenario);
    auto plan = std::make_unique<pathmpc_plan>();
    plan->scenario = s->scenario;
    pathmpc::PlannerConfig cfg = plan->scenario.path.planner;
    cfg.rng_seed = plan->scenario.rng_seed;
    plan->waypoints = pathmpc::rrt_star(plan->scenario.path.start, plan->scenario.path.goal,
                                        plan->scenario.inflated_obstacles(), cfg, &plan->tree);
    *out = plan.release();
  });
  if (status == PATHMPC_OK && !(*out)->waypoints)
    return fail(PATHMPC_ERR_NOT_FOUND, "planner found no path to the goal");
  return status;
}

size_t pathmpc_plan_size(const pathmpc_plan* p) {
  return p && p->waypoints ? p->waypoints->size() : 0;
}

pathmpc_status pathmpc_plan_waypoint(const pathmpc_plan* p, size_t i, double out[2]) {
  return guarded([&] {
    require(p, "plan");
    require(out, "out");
    if (!p->waypoints || i >= p->waypoints->size())
      throw std::invalid_argument("waypoint index out of range");
    out[0] = (*p->waypoints)[i].x();
    out[1] = (*p->waypoints)[i].y();
  });
}

double pathmpc_plan_length(const pathmpc_plan* p) {
  return p && p->waypoints ? pathmpc::path_length(*p->waypoints) : 0.0;
}

pathmpc_status pathmpc_plan_write(const pathmpc_plan* p, const char* out_dir) {
  return guarded([&] {
    require(p, "plan");
    const auto dir = prepare_dir(out_dir);
    write_file(dir / "plan.svg", [&](std::ostream& o) {
      pathmpc::write_plan_svg(p->waypoints ? &*p->waypoints : nullptr, p->tree, p->scenario, o);
    });
    if (!p->waypoints) return;
    write_file(dir / "waypoints.csv",
               [&](std::ostream& o) { pathmpc::write_waypoints_csv(*p->waypoints, o); });
    write_file(dir / "plan.txt", [&](std::ostream& o) {
      o << "path.waypoints=[";
      for (size_t i = 0; i < p->waypoints->size(); ++i)
        o << (i ? ", [" : "[") << pathmpc::format_number((*p->waypoints)[i].x()) << ", "
          << pathmpc::format_number((*p->waypoints)[i].y()) << "]";
      o << "]\n";
    });
  });
}

void pathmpc_plan_free(pathmpc_plan* p) { delete p; }

pathmpc_status pathmpc_gradcheck(const pathmpc_scenario* s, int samples, uint64_t seed,
                                 pathmpc_gradcheck_report* out) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    validated(s->scenario);
    const pathmpc::PathPtr path = s->scenario.build_path();
    const pathmpc::OcpSpec spec = s->scenario.ocp_spec(path);
    const pathmpc::GradientCheckReport r = pathmpc::random_gradient_check(
        spec, s->scenario.start_state(*path), samples, seed);
    *out = {r.objective, r.eq_jacobian, r.ineq_jacobian};
  });
}

}  // extern "C"
