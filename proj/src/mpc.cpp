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

#include "pathmpc/mpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace pathmpc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::Vector2d position_of(const OcpSpec& spec, const Vector& x) {
  return spec.model->configuration(x).head<2>();
}

// Unit certificate on the face with the largest margin (no threshold).
Vector best_face(const ConvexPolytope& poly, const Eigen::Vector2d& p) {
  return *certificate_exists(poly, p, -std::numeric_limits<double>::infinity());
}

// Multipliers follow the same shift as the primal blocks. Rows whose
// constraint is new at the end of the horizon start from zero.
Multipliers shift_multipliers(const Multipliers& prev, const OcpTranscription& tr) {
  const ResidualLayout& r = tr.residuals;
  const DecisionLayout& L = tr.layout;
  const Eigen::Index n = L.state_dim();
  const int N = L.horizon();
  const auto no = static_cast<Eigen::Index>(L.num_obstacles());
  Multipliers out;
  if (prev.lambda_eq.size() != r.num_eq || prev.nu_ineq.size() != r.num_ineq) return out;
  out.lambda_eq = prev.lambda_eq;
  out.nu_ineq = prev.nu_ineq;
  out.lambda_eq.segment(r.initial, n) = prev.lambda_eq.segment(r.dynamics, n);
  for (int l = 0; l + 1 < N; ++l)
    out.lambda_eq.segment(r.dynamics + l * n, n) =
        prev.lambda_eq.segment(r.dynamics + (l + 1) * n, n);
  out.lambda_eq.segment(r.dynamics + (N - 1) * n, n).setZero();
  for (int l = 0; l + 1 < N; ++l) {
    out.lambda_eq.segment(r.normalization + l * no, no) =
        prev.lambda_eq.segment(r.normalization + (l + 1) * no, no);
    out.nu_ineq.segment(l * no, no) = prev.nu_ineq.segment((l + 1) * no, no);
  }
  return out;
}

}  // namespace

const char* to_string(StepSource source) {
  switch (source) {
    case StepSource::kColdSolve: return "cold";
    case StepSource::kSolver: return "solver";
    case StepSource::kCandidate: return "candidate";
    case StepSource::kFallback: return "fallback";
  }
  return "unknown";
}

MonitorVerdict evaluate_monitors(const StepDiagnostics& prev, const StepDiagnostics& curr,
                                 double tol_rel, double shift_tol) {
  MonitorVerdict v;
  const double tol = tol_rel * (1.0 + prev.value);
  v.lyapunov_slack = prev.value - curr.value - prev.first_stage;
  v.lyapunov_decrease_ok = v.lyapunov_slack >= -tol;

  v.shift_violation = curr.candidate_violation;
  v.shift_feasible_ok = !(curr.candidate_violation > shift_tol);

  v.gap_change = (curr.value - curr.offset) - (prev.value - prev.offset);
  v.gap_trend_ok = !(curr.tracking_gap < prev.tracking_gap) || v.gap_change <= tol;

  v.s_change = curr.progress - prev.progress;
  v.tracking_gap = curr.tracking_gap;
  v.offset_bound_ok = curr.value >= curr.offset - tol;
  return v;
}

Vector shift_warm_start(const Vector& prev, const OcpSpec& spec) {
  const DecisionLayout L(spec);
  if (prev.size() != L.num_vars())
    throw std::invalid_argument("shift_warm_start: decision vector does not match layout");
  const Eigen::Index n = L.state_dim();
  const Eigen::Index m = L.input_dim();
  const int N = L.horizon();
  Vector z = prev;
  for (int l = 0; l < N; ++l) {
    z.segment(L.input(l), m) = prev.segment(L.input(l + 1), m);
    z.segment(L.state(l), n) = prev.segment(L.state(l + 1), n);
  }
  for (std::size_t i = 0; i < L.num_obstacles(); ++i) {
    const Eigen::Index f = L.faces(i);
    for (int l = 1; l < N; ++l) z.segment(L.mu(l, i), f) = prev.segment(L.mu(l + 1, i), f);
    const Vector xN = prev.segment(L.state(N), n);
    if (auto mu = certificate_exists(spec.obstacles[i], position_of(spec, xN), spec.delta_sep))
      z.segment(L.mu(N, i), f) = *mu;
  }
  return z;
}

Vector cold_start(const OcpSpec& spec, const Vector& x0, int grid, int relax_iterations) {
  spec.validate();
  if (x0.size() != spec.model->state_dim() || !x0.allFinite())
    throw std::invalid_argument("cold_start: initial state has wrong size or is not finite");
  if (grid < 2) throw std::invalid_argument("cold_start: grid needs at least two points");
  const Eigen::Vector2d p0 = position_of(spec, x0);
  for (std::size_t i = 0; i < spec.obstacles.size(); ++i) {
    if (!certificate_exists(spec.obstacles[i], p0, spec.delta_sep))
      throw ControllerFault("initial-infeasibility: start position is not separated from obstacle " +
                            std::to_string(i));
  }

  OcpTranscription tr = assemble_nlp(spec, x0);
  const DecisionLayout& L = tr.layout;
  const NlpProblem& problem = tr.problem;
  Vector z = Vector::Zero(L.num_vars());
  for (int l = 0; l <= L.horizon(); ++l) z.segment(L.state(l), L.state_dim()) = x0;
  if (L.has_progress()) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid; ++i) {
      const double s = static_cast<double>(i) / (grid - 1);
      const double d = (x0 - lift(*spec.path, *spec.model, s).first).norm();
      if (d < best) {
        best = d;
        z[L.progress()] = s;
      }
    }
  }
  const auto set_certificates = [&] {
    for (int l = 1; l <= L.horizon(); ++l) {
      const Eigen::Vector2d p = position_of(spec, z.segment(L.state(l), L.state_dim()));
      for (std::size_t i = 0; i < L.num_obstacles(); ++i)
        z.segment(L.mu(l, i), L.faces(i)) = best_face(spec.obstacles[i], p);
    }
  };
  set_certificates();
  z = problem.project(z);

  // Gauss-Newton relaxation of everything but the certificate normalization.
  const Eigen::Index rows = tr.residuals.normalization;
  if (relax_iterations > 0 && rows > 0) {
    BoxObjective fun;
    fun.value = [&](const Vector& y) { return 0.5 * problem.eq(y).head(rows).squaredNorm(); };
    fun.gradient = [&](const Vector& y) -> Vector {
      return problem.eq_jacobian(y).topRows(rows).transpose() * problem.eq(y).head(rows);
    };
    fun.known_curvature = [&](const Vector& y) -> Matrix {
      const Matrix j = problem.eq_jacobian(y).topRows(rows);
      return j.transpose() * j;
    };
    BoxOptions opt;
    opt.max_iterations = relax_iterations;
    opt.tol = 1e-12;
    z = minimize_bound_constrained(fun, z, problem.lower, problem.upper, opt).x;
    set_certificates();
  }
  return z;
}

MpcController::MpcController(OcpSpec spec, MpcOptions options)
    : spec_(std::move(spec)), options_(options) {
  spec_.validate();
  if (spec_.mode == OcpMode::kPathAnchored) {
    lipschitz_ = estimate_lipschitz_gp(*spec_.path, *spec_.model, 1000);
    target_state_ = lift(*spec_.path, *spec_.model, 1.0).first;
  } else {
    target_state_ = spec_.model->steady_state(spec_.target()).first;
  }
}

void MpcController::reset() {
  state_ = MpcState{};
  last_.reset();
}

double MpcController::value_lower_bound(const Vector& x) const {
  if (spec_.mode != OcpMode::kPathAnchored) return 0.0;
  const double r = (x - target_state_).norm();
  const double c = std::min(spec_.weights.w_pos, spec_.weights.w_theta) / 3.0;
  const double quartic = c * std::pow(r, 4);
  const double offset =
      lipschitz_ > 0.0 ? spec_.offset_weight * std::pow(r / lipschitz_, 2)
                       : std::numeric_limits<double>::infinity();
  return 0.5 * std::min(quartic, offset);
}

MpcController::Step MpcController::step(const Vector& x) {
  if (x.size() != spec_.model->state_dim() || !x.allFinite())
    throw std::invalid_argument("mpc step: state has wrong size or is not finite");
  const OcpTranscription tr = assemble_nlp(spec_, x);
  NlpOptions opts = options_.solver;

  Vector z0;
  Vector candidate;
  double cand_violation = kNaN;
  double cand_cost = kNaN;
  Multipliers warm;
  if (!state_.initialized) {
    z0 = cold_start(spec_, x, options_.cold_start_grid, options_.cold_start_iterations);
  } else {
    candidate = shift_warm_start(state_.solution, spec_);
    cand_violation = max_violation(tr.problem, candidate);
    cand_cost = tr.problem.objective(candidate);
    z0 = candidate;
    warm = shift_multipliers(state_.multipliers, tr);
    opts.penalty_init = std::max(opts.penalty_init, state_.penalty);
    opts.inner_tol_init =
        std::min(opts.inner_tol_init, std::max(options_.warm_inner_tol, opts.tol_stat));
  }

  const auto t0 = std::chrono::steady_clock::now();
  const NlpSolution sol =
      solve(tr.problem, z0, opts, warm.lambda_eq.size() > 0 ? &warm : nullptr);
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  const double sol_violation = max_violation(tr.problem, sol.z);
  const bool converged = sol.status == NlpStatus::kConverged;

  if (!state_.initialized) {
    if (converged || sol_violation <= options_.shift_tol)
      return finish(x, sol.z, tr, &sol, StepSource::kColdSolve, cand_violation, cand_cost, ms);
    throw ControllerFault(std::string("initial-infeasibility: first solve ended with status ") +
                          to_string(sol.status) + ", violation " +
                          std::to_string(sol_violation));
  }

  const bool cand_ok = cand_violation <= options_.shift_tol;
  if (converged) {
    if (cand_ok && cand_cost < sol.objective)
      return finish(x, candidate, tr, &sol, StepSource::kCandidate, cand_violation, cand_cost,
                    ms);
    return finish(x, sol.z, tr, &sol, StepSource::kSolver, cand_violation, cand_cost, ms);
  }
  // A non-converged but feasible iterate that beats the candidate is still a
  // valid decrease certificate.
  if (sol_violation <= options_.shift_tol && (!cand_ok || sol.objective <= cand_cost))
    return finish(x, sol.z, tr, &sol, StepSource::kSolver, cand_violation, cand_cost, ms);
  if (cand_ok)
    return finish(x, candidate, tr, &sol, StepSource::kFallback, cand_violation, cand_cost, ms);
  throw ControllerFault(std::string("solver ended with status ") + to_string(sol.status) +
                        " and the shifted candidate violates constraints by " +
                        std::to_string(cand_violation));
}

MpcController::Step MpcController::finish(const Vector& x, const Vector& z,
                                          const OcpTranscription& tr, const NlpSolution* sol,
                                          StepSource source, double candidate_violation,
                                          double candidate_cost, double solve_ms) {
  const DecisionLayout& L = tr.layout;
  const Eigen::Index n = L.state_dim();
  const Eigen::Index m = L.input_dim();
  const int N = L.horizon();

  StepDiagnostics d;
  d.k = state_.k;
  d.x = x;
  d.u = z.segment(L.input(0), m);
  d.solution = z;
  d.value = tr.problem.objective(z);
  d.steady_state = z.segment(L.state(N), n);
  d.steady_input = z.segment(L.input(N), m);
  d.first_stage =
      stage_cost(z.segment(L.state(0), n), d.u, d.steady_state, d.steady_input, spec_.weights);
  d.tracking_gap = (x - d.steady_state).norm();
  if (L.has_progress()) {
    d.progress = z[L.progress()];
    d.offset = offset_cost(d.progress, spec_.offset_weight);
  } else {
    d.progress = kNaN;
    d.offset = spec_.offset_weight *
               (spec_.model->configuration(d.steady_state) - spec_.target()).squaredNorm();
  }
  d.source = source;
  d.candidate_violation = candidate_violation;
  d.candidate_cost = candidate_cost;
  d.solve_ms = solve_ms;
  if (sol != nullptr) {
    d.status = sol->status;
    d.outer_iterations = sol->outer_iterations;
    d.inner_iterations = sol->inner_iterations;
    d.kkt_stationarity = sol->kkt.stationarity;
    d.kkt_feasibility = sol->kkt.feasibility();
    state_.multipliers = {sol->lambda_eq, sol->nu_ineq};
    state_.penalty = sol->penalty;
  }

  Step out;
  out.u = d.u;
  if (last_) out.monitors = evaluate_monitors(*last_, d, options_.monitor_tol, options_.shift_tol);

  state_.solution = z;
  state_.value = d.value;
  state_.progress = d.progress;
  state_.initialized = true;
  ++state_.k;
  last_ = d;
  out.diagnostics = std::move(d);
  return out;
}

MpcController::Step mpc_step(MpcController& controller, const Vector& x) {
  if (controller.spec().mode != OcpMode::kPathAnchored)
    throw std::invalid_argument("mpc_step: controller is not path-anchored");
  return controller.step(x);
}

MpcController::Step baseline_tracking_step(MpcController& controller, const Vector& x) {
  if (controller.spec().mode != OcpMode::kTargetTracking)
    throw std::invalid_argument("baseline_tracking_step: controller is not in tracking mode");
  return controller.step(x);
}

}  // namespace pathmpc
