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

#include "pathmpc/nlp.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <limits>

namespace pathmpc {

const char* to_string(NlpStatus status) {
  switch (status) {
    case NlpStatus::kConverged: return "converged";
    case NlpStatus::kMaxIterations: return "max-iter";
    case NlpStatus::kInfeasible: return "infeasible-detected";
  }
  return "unknown";
}

Vector NlpProblem::eval_eq(const Vector& z) const {
  return num_eq > 0 ? eq(z) : Vector(0);
}

Vector NlpProblem::eval_ineq(const Vector& z) const {
  return num_ineq > 0 ? ineq(z) : Vector(0);
}

Matrix NlpProblem::eval_eq_jacobian(const Vector& z) const {
  return num_eq > 0 ? eq_jacobian(z) : Matrix(0, num_vars);
}

Matrix NlpProblem::eval_ineq_jacobian(const Vector& z) const {
  return num_ineq > 0 ? ineq_jacobian(z) : Matrix(0, num_vars);
}

Vector NlpProblem::project(const Vector& z) const {
  return z.cwiseMax(lower).cwiseMin(upper);
}

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NlpError(std::string("non-finite ") + what);
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw NlpError(std::string("non-finite ") + what);
}

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double projected_gradient_norm(const Vector& x, const Vector& g, const Vector& lo,
                               const Vector& hi) {
  return inf_norm(x - (x - g).cwiseMax(lo).cwiseMin(hi));
}

}  // namespace

KktResiduals kkt_residuals(const NlpProblem& problem, const Vector& z,
                           const Vector& lambda_eq, const Vector& nu_ineq) {
  if (z.size() != problem.num_vars || lambda_eq.size() != problem.num_eq ||
      nu_ineq.size() != problem.num_ineq)
    throw std::invalid_argument("kkt_residuals: dimension mismatch");
  KktResiduals r;
  Vector g = problem.gradient(z);
  const Vector ce = problem.eval_eq(z);
  const Vector ci = problem.eval_ineq(z);
  if (problem.num_eq > 0) g += problem.eq_jacobian(z).transpose() * lambda_eq;
  if (problem.num_ineq > 0) g -= problem.ineq_jacobian(z).transpose() * nu_ineq;
  r.stationarity = projected_gradient_norm(z, g, problem.lower, problem.upper);
  r.feas_eq = inf_norm(ce);
  double bound_violation = 0.0;
  if (z.size()) {
    bound_violation = std::max((problem.lower - z).maxCoeff(), (z - problem.upper).maxCoeff());
    bound_violation = std::max(bound_violation, 0.0);
  }
  r.feas_ineq = std::max(ci.size() ? (-ci).cwiseMax(0.0).maxCoeff() : 0.0, bound_violation);
  double comp = 0.0;
  for (Eigen::Index i = 0; i < ci.size(); ++i) {
    comp = std::max(comp, std::abs(nu_ineq[i] * ci[i]));
    comp = std::max(comp, -nu_ineq[i]);
  }
  r.complementarity = comp;
  return r;
}

namespace {

// Limited-memory secant history. Pairs are stored already damped so that the
// dense BFGS model rebuilt from them stays positive definite.
class SecantMemory {
 public:
  explicit SecantMemory(int capacity) : capacity_(capacity) {}

  bool empty() const { return s_.empty(); }
  void clear() {
    s_.clear();
    y_.clear();
  }

  void push(Vector s, Vector y) {
    s_.push_back(std::move(s));
    y_.push_back(std::move(y));
    if (static_cast<int>(s_.size()) > capacity_) {
      s_.pop_front();
      y_.pop_front();
    }
  }

  // Two-loop recursion: approximately H^{-1} q with scalar initial scaling.
  Vector apply_inverse(Vector q) const {
    std::vector<double> alpha(s_.size()), rho(s_.size());
    for (int i = static_cast<int>(s_.size()) - 1; i >= 0; --i) {
      rho[i] = 1.0 / s_[i].dot(y_[i]);
      alpha[i] = rho[i] * s_[i].dot(q);
      q -= alpha[i] * y_[i];
    }
    q *= s_.back().dot(y_.back()) / y_.back().squaredNorm();
    for (std::size_t i = 0; i < s_.size(); ++i) {
      const double beta = rho[i] * y_[i].dot(q);
      q += (alpha[i] - beta) * s_[i];
    }
    return q;
  }

  // Dense BFGS matrix built from delta * I and the stored pairs.
  Matrix dense_model(Eigen::Index n, double delta) const {
    Matrix b = delta * Matrix::Identity(n, n);
    for (std::size_t i = 0; i < s_.size(); ++i) {
      const Vector bs = b * s_[i];
      const double sbs = s_[i].dot(bs);
      const double sy = s_[i].dot(y_[i]);
      if (sbs <= 0.0 || sy <= 0.0) continue;
      b += y_[i] * y_[i].transpose() / sy - bs * bs.transpose() / sbs;
    }
    return b;
  }

  double scaling() const {
    if (s_.empty()) return 1.0;
    const double sy = s_.back().dot(y_.back());
    return std::clamp(y_.back().squaredNorm() / sy, 1e-8, 1e8);
  }

 private:
  int capacity_;
  std::deque<Vector> s_;
  std::deque<Vector> y_;
};

}  // namespace

BoxResult minimize_bound_constrained(const BoxObjective& fun, const Vector& x0,
                                     const Vector& lower, const Vector& upper,
                                     const BoxOptions& options,
                                     std::vector<double>* trace) {
  const auto project = [&](const Vector& v) { return v.cwiseMax(lower).cwiseMin(upper); };
  const bool structured = static_cast<bool>(fun.known_curvature);
  BoxResult res;
  Vector x = project(x0);
  double f = fun.value(x);
  require_finite(f, "objective value");
  Vector g = fun.gradient(x);
  require_finite(g, "gradient");
  Matrix known;
  if (structured) known = fun.known_curvature(x);

  SecantMemory memory(options.memory);
  const Eigen::Index n = x.size();

  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    res.projected_gradient = projected_gradient_norm(x, g, lower, upper);
    if (res.projected_gradient <= options.tol) {
      res.converged = true;
      break;
    }

    // Variables pinned at a bound with the gradient pushing outward stay fixed.
    std::vector<Eigen::Index> free_idx;
    Vector mask = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if ((x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0)) continue;
      mask[i] = 1.0;
      free_idx.push_back(i);
    }
    const Vector g_free = g.cwiseProduct(mask);

    const auto gradient_step = [&](Vector& d, double& step0) {
      d = -g_free;
      step0 = std::min(1.0, 1.0 / std::max(inf_norm(g_free), 1e-300));
    };

    Vector d;
    double step0 = 1.0;
    bool model_step = false;
    if (structured) {
      // Newton-like step on the free variables with model B + known.
      const auto nf = static_cast<Eigen::Index>(free_idx.size());
      const Matrix full = memory.dense_model(n, memory.scaling()) + known;
      Matrix h(nf, nf);
      Vector rhs(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        rhs[a] = -g[free_idx[a]];
        for (Eigen::Index b = 0; b < nf; ++b) h(a, b) = full(free_idx[a], free_idx[b]);
      }
      double shift = 0.0;
      for (int attempt = 0; attempt < 12; ++attempt) {
        Eigen::LLT<Matrix> llt(h + shift * Matrix::Identity(nf, nf));
        if (llt.info() == Eigen::Success) {
          const Vector df = llt.solve(rhs);
          if (df.allFinite()) {
            d = Vector::Zero(n);
            for (Eigen::Index a = 0; a < nf; ++a) d[free_idx[a]] = df[a];
            model_step = g.dot(d) < 0.0;
          }
          break;
        }
        shift = shift == 0.0 ? 1e-8 * (1.0 + h.diagonal().cwiseAbs().maxCoeff()) : 10.0 * shift;
      }
    } else if (!memory.empty()) {
      d = -memory.apply_inverse(g_free).cwiseProduct(mask);
      model_step = g.dot(d) < 0.0;
    }
    if (!model_step) gradient_step(d, step0);

    Vector x_new;
    double f_new = 0.0;
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double step = step0;
      for (int t = 0; t < options.max_backtracks; ++t) {
        x_new = project(x + step * d);
        f_new = fun.value(x_new);
        require_finite(f_new, "objective value");
        if (f_new <= f + options.armijo_c * g.dot(x_new - x)) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted && model_step) {
        // Drop curvature memory and retry along the projected gradient.
        memory.clear();
        model_step = false;
        gradient_step(d, step0);
      } else if (!accepted) {
        break;
      }
    }
    if (!accepted) break;  // no decrease possible at working precision
    assert(f_new <= f);

    Vector g_new = fun.gradient(x_new);
    require_finite(g_new, "gradient");
    Vector s = x_new - x;
    Vector y = g_new - g;
    if (structured) {
      known = fun.known_curvature(x_new);
      y -= known * s;
      // Powell damping against the current model of the remainder.
      const Matrix b = memory.dense_model(n, memory.scaling());
      const double sbs = s.dot(b * s);
      const double sy = s.dot(y);
      if (sbs > 0.0 && sy < 0.2 * sbs) {
        const double theta = 0.8 * sbs / (sbs - sy);
        y = theta * y + (1.0 - theta) * (b * s);
      }
    }
    const double sy = s.dot(y);
    if (sy > 1e-12 * y.squaredNorm() && sy > 0.0) memory.push(std::move(s), std::move(y));

    const double decrease = f - f_new;
    x = std::move(x_new);
    g = std::move(g_new);
    f = f_new;
    if (trace) trace->push_back(f);
    if (decrease <= 1e-16 * std::max({std::abs(f), 1.0}) &&
        (x - project(x - g)).norm() <= 1e-14 * (1.0 + x.norm())) {
      break;
    }
  }
  res.projected_gradient = projected_gradient_norm(x, g, lower, upper);
  if (res.projected_gradient <= options.tol) res.converged = true;
  res.x = std::move(x);
  res.value = f;
  return res;
}

NlpSolution solve(const NlpProblem& problem, const Vector& z0, const NlpOptions& options,
                  const Multipliers* warm) {
  const Eigen::Index nz = problem.num_vars;
  const Eigen::Index ne = problem.num_eq;
  const Eigen::Index ni = problem.num_ineq;
  if (z0.size() != nz || problem.lower.size() != nz || problem.upper.size() != nz)
    throw std::invalid_argument("solve: dimension mismatch");
  if ((problem.lower.array() > problem.upper.array()).any())
    throw std::invalid_argument("solve: lower bound above upper bound");
  if (!problem.objective || !problem.gradient)
    throw std::invalid_argument("solve: objective and gradient are required");

  const Vector z_start = problem.project(z0);
  require_finite(z_start, "initial point");

  // Extended variables y = (z, t), t >= 0 slack of the inequalities.
  Vector lower(nz + ni), upper(nz + ni);
  lower << problem.lower, Vector::Zero(ni);
  upper << problem.upper,
      Vector::Constant(ni, std::numeric_limits<double>::infinity());

  Vector lambda = Vector::Zero(ne + ni);  // lambda_I = -nu
  if (warm != nullptr) {
    if (warm->lambda_eq.size() == ne) lambda.head(ne) = warm->lambda_eq;
    if (warm->nu_ineq.size() == ni) lambda.tail(ni) = -warm->nu_ineq;
  }

  double rho = options.penalty_init;

  const auto residual = [&](const Vector& y) {
    const Vector z = y.head(nz);
    Vector c(ne + ni);
    if (ne > 0) c.head(ne) = problem.eq(z);
    if (ni > 0) c.tail(ni) = problem.ineq(z) - y.tail(ni);
    return c;
  };

  BoxObjective merit;
  merit.value = [&](const Vector& y) {
    const Vector c = residual(y);
    return problem.objective(y.head(nz)) + lambda.dot(c) + 0.5 * rho * c.squaredNorm();
  };
  // Jacobian of c(z, t) w.r.t. (z, t), cached for the last point.
  Vector jac_at;
  Matrix jac;
  const auto jacobian = [&](const Vector& y) -> const Matrix& {
    if (jac_at.size() == y.size() && jac_at == y) return jac;
    const Vector z = y.head(nz);
    jac = Matrix::Zero(ne + ni, nz + ni);
    if (ne > 0) jac.topLeftCorner(ne, nz) = problem.eq_jacobian(z);
    if (ni > 0) {
      jac.bottomLeftCorner(ni, nz) = problem.ineq_jacobian(z);
      jac.bottomRightCorner(ni, ni) = -Matrix::Identity(ni, ni);
    }
    jac_at = y;
    return jac;
  };
  merit.gradient = [&](const Vector& y) {
    const Vector c = residual(y);
    Vector grad = Vector::Zero(nz + ni);
    grad.head(nz) = problem.gradient(y.head(nz));
    if (ne + ni > 0) grad += jacobian(y).transpose() * (lambda + rho * c);
    return grad;
  };
  merit.known_curvature = [&](const Vector& y) -> Matrix {
    if (ne + ni == 0) return Matrix::Zero(nz + ni, nz + ni);
    const Matrix& j = jacobian(y);
    return rho * (j.transpose() * j);
  };

  Vector y(nz + ni);
  y.head(nz) = z_start;
  if (ni > 0) y.tail(ni) = problem.ineq(z_start).cwiseMax(0.0);

  if (!(rho > 0.0)) {
    // Objective-scaled start: the penalty term should be comparable to the
    // objective so the first subproblem does not trade feasibility for cost.
    const double f0 = std::abs(problem.objective(z_start));
    const double c0 = 0.5 * residual(y).squaredNorm();
    rho = std::clamp(10.0 * std::max(1.0, f0) / std::max(1.0, c0), 1e-8, 1e8);
  }

  NlpSolution sol;
  // The first outer iteration has no reference; a warm start that is already
  // nearly feasible must not trigger a penalty increase.
  double prev_violation = std::numeric_limits<double>::infinity();
  double inner_tol = std::max(options.inner_tol_init, options.tol_stat);
  int stalled = 0;

  const auto finish = [&](NlpStatus status) {
    sol.z = y.head(nz);
    sol.lambda_eq = lambda.head(ne);
    sol.nu_ineq = -lambda.tail(ni);
    sol.objective = problem.objective(sol.z);
    sol.kkt = kkt_residuals(problem, sol.z, sol.lambda_eq, sol.nu_ineq);
    sol.status = status;
    sol.penalty = rho;
    return sol;
  };

  // Already optimal with the supplied multipliers: nothing to do.
  {
    const KktResiduals r0 =
        kkt_residuals(problem, z_start, lambda.head(ne), -lambda.tail(ni));
    if (r0.stationarity <= options.tol_stat && r0.feasibility() <= options.tol_feas &&
        r0.complementarity <= options.tol_comp)
      return finish(NlpStatus::kConverged);
  }

  for (sol.outer_iterations = 1; sol.outer_iterations <= options.max_outer;
       ++sol.outer_iterations) {
    BoxOptions box;
    box.max_iterations = options.max_inner;
    box.tol = inner_tol;
    box.memory = options.memory;
    box.armijo_c = options.armijo_c;
    box.max_backtracks = options.max_backtracks;
    if (options.record_trace) sol.merit_trace_starts.push_back(sol.merit_trace.size());
    const BoxResult inner = minimize_bound_constrained(
        merit, y, lower, upper, box, options.record_trace ? &sol.merit_trace : nullptr);
    sol.inner_iterations += inner.iterations;
    y = inner.x;

    const Vector c = residual(y);
    const double violation = inf_norm(c);
    lambda += rho * c;

    const KktResiduals r =
        kkt_residuals(problem, y.head(nz), lambda.head(ne), -lambda.tail(ni));
    if (r.stationarity <= options.tol_stat && r.feasibility() <= options.tol_feas &&
        r.complementarity <= options.tol_comp)
      return finish(NlpStatus::kConverged);

    if (violation > options.tol_feas && violation > 0.25 * prev_violation) {
      if (rho >= options.penalty_max) {
        if (++stalled >= 3) return finish(NlpStatus::kInfeasible);
      }
      rho = std::min(rho * options.penalty_factor, options.penalty_max);
    } else {
      stalled = 0;
    }
    prev_violation = violation;
    inner_tol = std::max(options.tol_stat, 0.1 * inner_tol);
  }
  sol.outer_iterations = options.max_outer;
  return finish(NlpStatus::kMaxIterations);
}

}  // namespace pathmpc
