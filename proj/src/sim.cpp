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

#include "pathmpc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

namespace pathmpc {

const char* to_string(ControllerMode mode) {
  return mode == ControllerMode::kProposed ? "proposed" : "baseline";
}

const char* to_string(PathConfig::Kind kind) {
  switch (kind) {
    case PathConfig::Kind::kSinusoid: return "sinusoid";
    case PathConfig::Kind::kPolyline: return "polyline";
    case PathConfig::Kind::kConstant: return "constant";
    case PathConfig::Kind::kPlanned: return "planned";
  }
  return "unknown";
}

const char* to_string(RunOutcome outcome) {
  switch (outcome) {
    case RunOutcome::kSuccess: return "success";
    case RunOutcome::kTimeout: return "timeout";
    case RunOutcome::kFault: return "fault";
  }
  return "unknown";
}

void Scenario::validate() const {
  const auto fail = [](const std::string& what) {
    throw std::invalid_argument("scenario: " + what);
  };
  if (model != "diff_drive") fail("unknown model '" + model + "'");
  if (horizon < 1) fail("horizon must be >= 1");
  if (!(step > 0.0)) fail("step must be positive");
  if (!(robot_radius >= 0.0)) fail("robot_radius must be >= 0");
  if (!(delta_sep >= 0.0)) fail("delta_sep must be >= 0");
  if (termination.max_steps < 1) fail("termination.max_steps must be >= 1");
  if (!(termination.target_tolerance > 0.0) || !(termination.heading_tolerance > 0.0))
    fail("termination tolerances must be positive");
  if (input_lower.size() != 2 || input_upper.size() != 2)
    fail("input bounds must have two entries (v, omega)");
  (void)InputBounds(input_lower, input_upper);
  if (!(weights.w_pos > 0.0 && weights.w_theta > 0.0 && weights.w_v > 0.0 &&
        weights.w_omega > 0.0))
    fail("cost weights must be positive");
  if (!(offset_weight > 0.0)) fail("offset weight must be positive");
  if (initial_state.size() != 0 && (initial_state.size() != 3 || !initial_state.allFinite()))
    fail("initial_state must have three finite entries");
  switch (path.kind) {
    case PathConfig::Kind::kSinusoid:
      if (!(path.length > 0.0)) fail("path.length must be positive");
      break;
    case PathConfig::Kind::kPolyline:
      if (path.waypoints.size() < 2) fail("polyline path needs at least two waypoints");
      break;
    case PathConfig::Kind::kConstant:
      if (path.constant.size() != 3) fail("constant path needs a pose (x, y, theta)");
      break;
    case PathConfig::Kind::kPlanned:
      path.planner.validate();
      break;
  }
  for (const auto& [n, h] : sweep) {
    if (n < 1 || !(h > 0.0)) fail("sweep entries need N >= 1 and h > 0");
  }
}

std::vector<ConvexPolytope> Scenario::inflated_obstacles() const {
  std::vector<ConvexPolytope> out;
  out.reserve(obstacles.size());
  for (const auto& o : obstacles) out.push_back(inflate(o, robot_radius));
  return out;
}

PathPtr Scenario::build_path() const {
  switch (path.kind) {
    case PathConfig::Kind::kSinusoid:
      return std::make_shared<SinusoidPath>(path.length, path.amplitude);
    case PathConfig::Kind::kPolyline:
      return polyline_path(path.waypoints, path.corner_radius);
    case PathConfig::Kind::kConstant:
      return std::make_shared<ConstantPath>(path.constant);
    case PathConfig::Kind::kPlanned: {
      PlannerConfig cfg = path.planner;
      cfg.rng_seed = rng_seed;
      auto waypoints = rrt_star(path.start, path.goal, inflated_obstacles(), cfg);
      if (!waypoints) throw std::runtime_error("scenario: planner found no path to the goal");
      return polyline_path(*waypoints, path.corner_radius);
    }
  }
  throw std::logic_error("unhandled path kind");
}

OcpSpec Scenario::ocp_spec(PathPtr p) const {
  OcpSpec spec;
  spec.horizon = horizon;
  spec.step = step;
  spec.model = std::make_shared<DiffDriveModel>();
  spec.path = std::move(p);
  spec.obstacles = inflated_obstacles();
  spec.input_lower = input_lower;
  spec.input_upper = input_upper;
  spec.weights = weights;
  spec.offset_weight = offset_weight;
  spec.delta_sep = delta_sep;
  spec.mode =
      mode == ControllerMode::kProposed ? OcpMode::kPathAnchored : OcpMode::kTargetTracking;
  return spec;
}

Vector Scenario::start_state(const ReferencePath& p) const {
  if (initial_state.size() > 0) return initial_state;
  return lift(p, DiffDriveModel(), 0.0).first;
}

namespace {

constexpr int kClearanceSamples = 1000;

double angle_error(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * M_PI)); }

double clearance_of(const std::vector<ConvexPolytope>& obstacles, const Vector& x) {
  if (obstacles.empty()) return std::numeric_limits<double>::infinity();
  return min_clearance(obstacles, x.head<2>());
}

}  // namespace

ClosedLoopSummary summarize(const ClosedLoopLog& log, const Scenario& scenario) {
  ClosedLoopSummary s = log.summary;
  const auto obstacles = scenario.inflated_obstacles();
  const DiffDriveModel model;
  s.steps = static_cast<int>(log.rows.size());
  s.path_length = 0.0;
  s.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < log.states.size(); ++i) {
    if (i > 0) s.path_length += (log.states[i].head<2>() - log.states[i - 1].head<2>()).norm();
    s.min_margin = std::min(s.min_margin, clearance_of(obstacles, log.states[i]));
  }
  const Vector u_target =
      log.target.size() > 0 ? model.steady_state(log.target).second : Vector::Zero(2);
  s.closed_loop_cost = 0.0;
  s.monitor_failures = 0;
  s.lower_bound_violations = 0;
  s.fallback_steps = 0;
  for (const LogRow& row : log.rows) {
    if (log.target.size() > 0)
      s.closed_loop_cost +=
          stage_cost(row.diag.x, row.diag.u, log.target, u_target, scenario.weights);
    if (row.monitors && !row.monitors->ok()) ++s.monitor_failures;
    if (row.diag.value < row.value_lower_bound) ++s.lower_bound_violations;
    if (row.diag.source == StepSource::kFallback) ++s.fallback_steps;
  }
  if (!log.states.empty() && log.target.size() > 0) {
    const Vector& x = log.states.back();
    s.final_distance = (x.head<2>() - log.target.head<2>()).norm();
    s.final_heading_error = angle_error(x[2], log.target[2]);
  }
  s.final_progress = log.rows.empty() ? std::numeric_limits<double>::quiet_NaN()
                                      : log.rows.back().diag.progress;
  return s;
}

ClosedLoopLog run_closed_loop(const Scenario& scenario) {
  scenario.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ClosedLoopLog log;
  log.path = scenario.build_path();
  const OcpSpec spec = scenario.ocp_spec(log.path);
  const DynamicsModel& model = *spec.model;
  if (scenario.mode == ControllerMode::kProposed) {
    const ClearanceReport report =
        check_path_clearance(*log.path, model, spec.input_bounds(), spec.step, spec.obstacles,
                             spec.delta_sep, kClearanceSamples);
    if (!report.ok()) {
      const ClearanceViolation& v = report.violations.front();
      throw std::invalid_argument("scenario: reference path fails the clearance check (" +
                                  v.kind + " at s = " + std::to_string(v.s) + ")");
    }
  }
  log.target = lift(*log.path, model, 1.0).first;

  const auto reached = [&](const Vector& x) {
    return (x.head<2>() - log.target.head<2>()).norm() <= scenario.termination.target_tolerance &&
           angle_error(x[2], log.target[2]) <= scenario.termination.heading_tolerance;
  };

  Vector x = scenario.start_state(*log.path);
  log.states.push_back(x);
  log.summary.outcome = RunOutcome::kTimeout;
  try {
    MpcController controller(spec, scenario.controller);
    for (int k = 0;; ++k) {
      if (reached(x)) {
        log.summary.outcome = RunOutcome::kSuccess;
        break;
      }
      if (k >= scenario.termination.max_steps) break;
      MpcController::Step st = scenario.mode == ControllerMode::kProposed
                                   ? mpc_step(controller, x)
                                   : baseline_tracking_step(controller, x);
      LogRow row;
      row.value_lower_bound = controller.value_lower_bound(x);
      row.clearance = clearance_of(spec.obstacles, x);
      row.diag = std::move(st.diagnostics);
      row.monitors = st.monitors;
      log.rows.push_back(std::move(row));
      x = rk4_step(model, x, st.u, spec.step);
      log.states.push_back(x);
    }
  } catch (const ControllerFault& e) {
    log.summary.outcome = RunOutcome::kFault;
    log.summary.fault = e.what();
  } catch (const NlpError& e) {
    log.summary.outcome = RunOutcome::kFault;
    log.summary.fault = std::string("solver error: ") + e.what();
  } catch (const IntegrationError& e) {
    log.summary.outcome = RunOutcome::kFault;
    log.summary.fault = std::string("integration error: ") + e.what();
  }
  log.summary = summarize(log, scenario);
  log.summary.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return log;
}

std::vector<SweepRow> horizon_sweep(const Scenario& scenario,
                                    const std::vector<std::pair<int, double>>& horizons,
                                    unsigned threads) {
  if (horizons.empty()) throw std::invalid_argument("horizon_sweep: empty horizon list");
  for (const auto& [n, h] : horizons) {
    Scenario s = scenario;
    s.horizon = n;
    s.step = h;
    s.validate();
  }
  std::vector<SweepRow> rows(horizons.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < horizons.size(); i = next++) {
      Scenario s = scenario;
      s.horizon = horizons[i].first;
      s.step = horizons[i].second;
      SweepRow& row = rows[i];
      row.horizon = s.horizon;
      row.step = s.step;
      try {
        ClosedLoopLog log = run_closed_loop(s);
        row.summary = log.summary;
        row.states = std::move(log.states);
      } catch (const std::exception& e) {
        row.summary.outcome = RunOutcome::kFault;
        row.summary.fault = e.what();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(horizons.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

std::vector<double> default_exponent_epsilons() { return {0.02, 0.01, 0.005, 0.002, 0.001}; }

ExponentReport verify_controllability_exponent(const DynamicsModel& model,
                                               const InputBounds& bounds,
                                               const std::vector<double>& epsilons,
                                               const CostWeights& weights, double step) {
  if (model.input_dim() != 2)
    throw std::invalid_argument("controllability exponent: maneuver needs two inputs");
  if (!(step > 0.0)) throw std::invalid_argument("controllability exponent: step must be positive");
  // Symmetric magnitude available in each input direction.
  const Vector limit = bounds.upper().cwiseMin(-bounds.lower());
  if (!(limit.array() > 0.0).all())
    throw std::invalid_argument("controllability exponent: bounds must contain zero strictly");
  // kappa_v kappa_w h^2 = 1 makes the net lateral displacement about eps.
  const double scale = 1.0 / (step * std::sqrt(limit[0] * limit[1]));
  const Vector kappa = scale * limit;

  ExponentReport report;
  std::vector<double> lx, ly;
  for (double eps : epsilons) {
    if (!(eps >= 0.0) || !std::isfinite(eps))
      throw std::invalid_argument("controllability exponent: epsilon must be finite and >= 0");
    ExponentSample sample;
    sample.epsilon = eps;
    Vector a = kappa * std::sqrt(eps);
    sample.clipped = (a.array() > limit.array()).any();
    a = a.cwiseMin(limit);
    const std::vector<Eigen::Vector2d> seq = {
        {0.0, a[1]}, {a[0], 0.0}, {0.0, -a[1]}, {-a[0], 0.0}};
    std::vector<Vector> xs{Vector::Zero(model.state_dim())};
    for (const auto& u : seq) xs.push_back(rk4_step(model, xs.back(), u, step));
    const Vector& x_end = xs.back();
    const Vector u_end = model.steady_state(model.configuration(x_end)).second;
    for (std::size_t i = 0; i < seq.size(); ++i)
      sample.cost += stage_cost(xs[i], seq[i], x_end, u_end, weights);
    sample.displacement = (x_end - xs.front()).norm();
    if (eps > 0.0 && !sample.clipped && sample.cost > 0.0) {
      lx.push_back(std::log(eps));
      ly.push_back(std::log(sample.cost));
    }
    report.samples.push_back(sample);
  }
  report.fitted = static_cast<int>(lx.size());
  if (lx.size() < 2)
    throw std::invalid_argument(
        "controllability exponent: fewer than two unclipped nonzero epsilons");
  Eigen::MatrixX2d design(lx.size(), 2);
  Eigen::VectorXd rhs(ly.size());
  for (std::size_t i = 0; i < lx.size(); ++i) {
    design(static_cast<Eigen::Index>(i), 0) = lx[i];
    design(static_cast<Eigen::Index>(i), 1) = 1.0;
    rhs[static_cast<Eigen::Index>(i)] = ly[i];
  }
  report.slope = design.colPivHouseholderQr().solve(rhs)[0];
  return report;
}

GradientCheckReport random_gradient_check(const OcpSpec& spec, const Vector& x0, int samples,
                                          std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("random_gradient_check: samples must be >= 1");
  const OcpTranscription tr = assemble_nlp(spec, x0);
  const DecisionLayout& lay = tr.layout;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  GradientCheckReport worst;
  for (int k = 0; k < samples; ++k) {
    Vector z = Vector::Zero(lay.num_vars());
    for (int l = 0; l <= lay.horizon(); ++l) {
      for (Eigen::Index j = 0; j < lay.input_dim(); ++j)
        z[lay.input(l) + j] = uniform(spec.input_lower[j], spec.input_upper[j]);
      z[lay.state(l)] = x0[0] + uniform(-3.0, 3.0);
      z[lay.state(l) + 1] = x0[1] + uniform(-3.0, 3.0);
      z[lay.state(l) + 2] = x0[2] + uniform(-M_PI, M_PI);
    }
    if (lay.has_progress()) z[lay.progress()] = unit(rng);
    for (Eigen::Index j = 0; j < lay.mu_block_size(); ++j)
      z[lay.num_vars() - lay.mu_block_size() + j] = unit(rng);
    const GradientCheckReport r = check_gradients(tr.problem, z);
    worst.objective = std::max(worst.objective, r.objective);
    worst.eq_jacobian = std::max(worst.eq_jacobian, r.eq_jacobian);
    worst.ineq_jacobian = std::max(worst.ineq_jacobian, r.ineq_jacobian);
  }
  return worst;
}

}  // namespace pathmpc
