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

// Smooth constrained optimization:
//
//     min f(z)  s.t.  c_E(z) = 0,  c_I(z) >= 0,  lower <= z <= upper.
//
// The solver is an augmented-Lagrangian method. Inequalities receive slack
// variables t >= 0 so every general constraint becomes an equality, and each
// outer iteration minimizes
//
//     L_A(z, t) = f(z) + lambda^T c(z, t) + rho/2 |c(z, t)|^2
//
// over the box with a projected limited-memory quasi-Newton method. The
// penalty block rho J^T J of the merit Hessian is known exactly from the
// constraint Jacobians; only the remaining curvature (objective plus
// multiplier-weighted constraint curvature) is approximated from the last
// `memory` secant pairs. Multipliers use the first-order update
// lambda += rho c; the penalty grows by a constant factor whenever the
// constraint violation fails to shrink by 4x.

#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pathmpc/dynamics.hpp"

namespace pathmpc {

using Sparsity = std::vector<std::pair<int, int>>;

struct NlpProblem {
  Eigen::Index num_vars = 0;
  Eigen::Index num_eq = 0;
  Eigen::Index num_ineq = 0;

  std::function<double(const Vector&)> objective;
  std::function<Vector(const Vector&)> gradient;
  std::function<Vector(const Vector&)> eq;  // empty when num_eq == 0
  std::function<Matrix(const Vector&)> eq_jacobian;
  std::function<Vector(const Vector&)> ineq;  // ">= 0" convention
  std::function<Matrix(const Vector&)> ineq_jacobian;

  Vector lower;  // may hold -inf / +inf
  Vector upper;

  /// Structural nonzeros (row, col); empty means "dense".
  Sparsity eq_sparsity;
  Sparsity ineq_sparsity;

  Vector eval_eq(const Vector& z) const;
  Vector eval_ineq(const Vector& z) const;
  Matrix eval_eq_jacobian(const Vector& z) const;
  Matrix eval_ineq_jacobian(const Vector& z) const;
  Vector project(const Vector& z) const;
};

struct NlpOptions {
  double tol_stat = 1e-6;
  double tol_feas = 1e-6;
  double tol_comp = 1e-6;
  int max_outer = 50;
  int max_inner = 500;
  int memory = 10;
  /// <= 0 selects 10 max(1, |f(z0)|) / max(1, |c(z0)|^2 / 2), clamped to
  /// [1e-8, 1e8].
  double penalty_init = 10.0;
  double penalty_factor = 10.0;
  double penalty_max = 1e10;
  /// Inner stationarity tolerance of the first outer iteration; tightened
  /// tenfold per outer iteration down to tol_stat.
  double inner_tol_init = 1e-2;
  double armijo_c = 1e-4;
  int max_backtracks = 40;
  bool record_trace = false;
};

enum class NlpStatus { kConverged, kMaxIterations, kInfeasible };

const char* to_string(NlpStatus status);

struct KktResiduals {
  double stationarity = 0.0;
  double feas_eq = 0.0;
  double feas_ineq = 0.0;  // includes variable-bound violation
  double complementarity = 0.0;

  double feasibility() const { return std::max(feas_eq, feas_ineq); }
};

struct NlpSolution {
  Vector z;
  Vector lambda_eq;  // stationarity: grad f + J_E^T lambda - J_I^T nu
  Vector nu_ineq;    // >= 0
  double objective = 0.0;
  KktResiduals kkt;
  NlpStatus status = NlpStatus::kMaxIterations;
  int outer_iterations = 0;
  int inner_iterations = 0;
  double penalty = 0.0;
  /// Merit value after every accepted inner step (only with record_trace).
  std::vector<double> merit_trace;
  /// Index into merit_trace where each outer iteration begins.
  std::vector<std::size_t> merit_trace_starts;
};

class NlpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// KKT residuals at (z, lambda, nu). Variable bounds enter through the
/// projected gradient |z - P(z - grad_z L)|_inf, which equals the stationarity
/// residual under the best nonnegative bound multipliers.
KktResiduals kkt_residuals(const NlpProblem& problem, const Vector& z,
                           const Vector& lambda_eq, const Vector& nu_ineq);

/// Optional multiplier warm start for solve().
struct Multipliers {
  Vector lambda_eq;
  Vector nu_ineq;
};

NlpSolution solve(const NlpProblem& problem, const Vector& z0,
                  const NlpOptions& options = {},
                  const Multipliers* warm = nullptr);

// Bound-constrained inner solver, exposed for initialization heuristics.

struct BoxObjective {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  /// Optional known positive semidefinite part of the Hessian. When set, the
  /// quasi-Newton pairs model only the remainder and steps solve the combined
  /// model on the free variables; otherwise the two-loop recursion is used.
  std::function<Matrix(const Vector&)> known_curvature;
};

struct BoxOptions {
  int max_iterations = 500;
  double tol = 1e-6;  // on |x - P(x - g)|_inf
  int memory = 10;
  double armijo_c = 1e-4;
  int max_backtracks = 40;
};

struct BoxResult {
  Vector x;
  double value = 0.0;
  double projected_gradient = 0.0;
  int iterations = 0;
  bool converged = false;
};

BoxResult minimize_bound_constrained(const BoxObjective& fun, const Vector& x0,
                                     const Vector& lower, const Vector& upper,
                                     const BoxOptions& options,
                                     std::vector<double>* trace = nullptr);

}  // namespace pathmpc
