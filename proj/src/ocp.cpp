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

#include "pathmpc/ocp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pathmpc {

void OcpSpec::validate() const {
  if (horizon < 1) throw std::invalid_argument("ocp: horizon must be >= 1");
  if (!(step > 0.0)) throw std::invalid_argument("ocp: step must be positive");
  if (!model) throw std::invalid_argument("ocp: missing dynamics model");
  if (mode == OcpMode::kPathAnchored && !path)
    throw std::invalid_argument("ocp: path-anchored mode needs a path");
  if (input_lower.size() != model->input_dim() || input_upper.size() != model->input_dim())
    throw std::invalid_argument("ocp: input bounds do not match the model");
  (void)input_bounds();
  if (!(offset_weight > 0.0)) throw std::invalid_argument("ocp: offset weight must be positive");
  if (!(weights.w_pos > 0.0 && weights.w_theta > 0.0 && weights.w_v > 0.0 &&
        weights.w_omega > 0.0))
    throw std::invalid_argument("ocp: stage weights must be positive");
  if (model->state_dim() != 3 || model->input_dim() != 2)
    throw std::invalid_argument("ocp: stage weights expect a planar pose model");
  if (!(delta_sep >= 0.0)) throw std::invalid_argument("ocp: delta_sep must be >= 0");
  if (path && path->eval(0.0).size() != model->config_dim())
    throw std::invalid_argument("ocp: path and model configuration dimensions differ");
  if (mode == OcpMode::kTargetTracking && !path && target_config.size() == 0)
    throw std::invalid_argument("ocp: tracking mode needs a target");
}

Vector OcpSpec::target() const {
  if (target_config.size() > 0) return target_config;
  return path->eval(1.0);
}

double stage_cost(const Vector& x, const Vector& u, const Vector& xs, const Vector& us,
                  const CostWeights& weights) {
  const Vector dx = x - xs;
  const Vector du = u - us;
  return weights.state_weights().dot(dx.array().pow(4).matrix()) +
         weights.input_weights().dot(du.array().pow(4).matrix());
}

double offset_cost(double s, double offset_weight) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::out_of_range("offset_cost: s outside [0, 1]");
  return offset_weight * (1.0 - s) * (1.0 - s);
}

DecisionLayout::DecisionLayout(const OcpSpec& spec)
    : horizon_(spec.horizon),
      n_(spec.model->state_dim()),
      m_(spec.model->input_dim()),
      has_s_(spec.mode == OcpMode::kPathAnchored) {
  mu_base_ = (horizon_ + 1) * (m_ + n_) + (has_s_ ? 1 : 0);
  for (const auto& o : spec.obstacles) {
    face_offset_.push_back(faces_total_);
    faces_.push_back(o.num_faces());
    faces_total_ += o.num_faces();
  }
  num_vars_ = mu_base_ + horizon_ * faces_total_;
}

namespace {

ResidualLayout make_residual_layout(const OcpSpec& spec) {
  const Eigen::Index n = spec.model->state_dim();
  const Eigen::Index np = spec.model->config_dim();
  ResidualLayout r;
  r.initial = 0;
  r.dynamics = n;
  r.steady = n + spec.horizon * n;
  r.anchoring = r.steady + n;
  r.normalization = r.anchoring + (spec.mode == OcpMode::kPathAnchored ? np : 0);
  r.num_eq = r.normalization +
             spec.horizon * static_cast<Eigen::Index>(spec.obstacles.size());
  r.num_ineq = spec.horizon * static_cast<Eigen::Index>(spec.obstacles.size());
  return r;
}

// Owns everything the NLP callbacks need; shared between the closures.
class OcpEvaluator {
 public:
  OcpEvaluator(OcpSpec spec, Vector x_current)
      : spec_(std::move(spec)),
        x0_(std::move(x_current)),
        layout_(spec_),
        rows_(make_residual_layout(spec_)),
        qw_(spec_.weights.state_weights()),
        rw_(spec_.weights.input_weights()),
        target_(spec_.mode == OcpMode::kTargetTracking ? spec_.target() : Vector()) {}

  const DecisionLayout& layout() const { return layout_; }
  const ResidualLayout& rows() const { return rows_; }

  double objective(const Vector& z) const {
    const auto n = layout_.state_dim();
    const auto m = layout_.input_dim();
    const auto xN = z.segment(layout_.state(spec_.horizon), n);
    const auto uN = z.segment(layout_.input(spec_.horizon), m);
    double j = 0.0;
    for (int l = 0; l < spec_.horizon; ++l) {
      const Vector dx = z.segment(layout_.state(l), n) - xN;
      const Vector du = z.segment(layout_.input(l), m) - uN;
      j += qw_.dot(dx.array().pow(4).matrix()) + rw_.dot(du.array().pow(4).matrix());
    }
    return j + terminal_cost(z);
  }

  Vector gradient(const Vector& z) const {
    const auto n = layout_.state_dim();
    const auto m = layout_.input_dim();
    Vector g = Vector::Zero(z.size());
    const Eigen::Index ixN = layout_.state(spec_.horizon);
    const Eigen::Index iuN = layout_.input(spec_.horizon);
    for (int l = 0; l < spec_.horizon; ++l) {
      const Vector dx = z.segment(layout_.state(l), n) - z.segment(ixN, n);
      const Vector du = z.segment(layout_.input(l), m) - z.segment(iuN, m);
      const Vector gx = 4.0 * qw_.cwiseProduct(dx.array().cube().matrix());
      const Vector gu = 4.0 * rw_.cwiseProduct(du.array().cube().matrix());
      g.segment(layout_.state(l), n) += gx;
      g.segment(ixN, n) -= gx;
      g.segment(layout_.input(l), m) += gu;
      g.segment(iuN, m) -= gu;
    }
    if (layout_.has_progress()) {
      const double s = z[layout_.progress()];
      g[layout_.progress()] += -2.0 * spec_.offset_weight * (1.0 - s);
    } else {
      const Vector xN = z.segment(ixN, n);
      const Vector e = spec_.model->configuration(xN) - target_;
      g.segment(ixN, n) +=
          2.0 * spec_.offset_weight * spec_.model->configuration_jacobian(xN).transpose() * e;
    }
    return g;
  }

  Vector eq(const Vector& z) const {
    const auto n = layout_.state_dim();
    const auto m = layout_.input_dim();
    const int N = spec_.horizon;
    Vector c(rows_.num_eq);
    c.segment(rows_.initial, n) = z.segment(layout_.state(0), n) - x0_;
    for (int l = 0; l < N; ++l) {
      c.segment(rows_.dynamics + l * n, n) =
          z.segment(layout_.state(l + 1), n) -
          rk4_step(*spec_.model, z.segment(layout_.state(l), n),
                   z.segment(layout_.input(l), m), spec_.step);
    }
    const Vector xN = z.segment(layout_.state(N), n);
    c.segment(rows_.steady, n) =
        xN - rk4_step(*spec_.model, xN, z.segment(layout_.input(N), m), spec_.step);
    if (layout_.has_progress()) {
      const auto np = spec_.model->config_dim();
      c.segment(rows_.anchoring, np) =
          spec_.model->configuration(xN) - spec_.path->eval(z[layout_.progress()]);
    }
    Eigen::Index row = rows_.normalization;
    for (int l = 1; l <= N; ++l) {
      for (std::size_t i = 0; i < spec_.obstacles.size(); ++i)
        c[row++] = z.segment(layout_.mu(l, i), layout_.faces(i)).sum() - 1.0;
    }
    return c;
  }

  Matrix eq_jacobian(const Vector& z) const {
    const auto n = layout_.state_dim();
    const auto m = layout_.input_dim();
    const int N = spec_.horizon;
    Matrix jac = Matrix::Zero(rows_.num_eq, z.size());
    jac.block(rows_.initial, layout_.state(0), n, n).setIdentity();
    for (int l = 0; l < N; ++l) {
      const StepJacobians sj = rk4_jacobians(*spec_.model, z.segment(layout_.state(l), n),
                                             z.segment(layout_.input(l), m), spec_.step);
      const Eigen::Index r = rows_.dynamics + l * n;
      jac.block(r, layout_.state(l + 1), n, n).setIdentity();
      jac.block(r, layout_.state(l), n, n) = -sj.dx;
      jac.block(r, layout_.input(l), n, m) = -sj.du;
    }
    const Vector xN = z.segment(layout_.state(N), n);
    const StepJacobians sj =
        rk4_jacobians(*spec_.model, xN, z.segment(layout_.input(N), m), spec_.step);
    jac.block(rows_.steady, layout_.state(N), n, n) = Matrix::Identity(n, n) - sj.dx;
    jac.block(rows_.steady, layout_.input(N), n, m) = -sj.du;
    if (layout_.has_progress()) {
      const auto np = spec_.model->config_dim();
      jac.block(rows_.anchoring, layout_.state(N), np, n) =
          spec_.model->configuration_jacobian(xN);
      jac.block(rows_.anchoring, layout_.progress(), np, 1) =
          -spec_.path->derivative(z[layout_.progress()]);
    }
    Eigen::Index row = rows_.normalization;
    for (int l = 1; l <= N; ++l) {
      for (std::size_t i = 0; i < spec_.obstacles.size(); ++i)
        jac.block(row++, layout_.mu(l, i), 1, layout_.faces(i)).setOnes();
    }
    return jac;
  }

  Vector ineq(const Vector& z) const {
    Vector c(rows_.num_ineq);
    Eigen::Index row = 0;
    for (int l = 1; l <= spec_.horizon; ++l) {
      const Eigen::Vector2d p = position(z, l);
      for (std::size_t i = 0; i < spec_.obstacles.size(); ++i) {
        const auto& o = spec_.obstacles[i];
        c[row++] = o.face_margins(p).dot(z.segment(layout_.mu(l, i), o.num_faces())) -
                   spec_.delta_sep;
      }
    }
    return c;
  }

  Matrix ineq_jacobian(const Vector& z) const {
    const auto n = layout_.state_dim();
    Matrix jac = Matrix::Zero(rows_.num_ineq, z.size());
    Eigen::Index row = 0;
    for (int l = 1; l <= spec_.horizon; ++l) {
      const Vector xl = z.segment(layout_.state(l), n);
      const Eigen::Vector2d p = position(z, l);
      const Matrix gj = spec_.model->configuration_jacobian(xl).topRows(2);
      for (std::size_t i = 0; i < spec_.obstacles.size(); ++i) {
        const auto& o = spec_.obstacles[i];
        const Vector mu = z.segment(layout_.mu(l, i), o.num_faces());
        jac.block(row, layout_.state(l), 1, n) = (o.normals().transpose() * mu).transpose() * gj;
        jac.block(row, layout_.mu(l, i), 1, o.num_faces()) = o.face_margins(p).transpose();
        ++row;
      }
    }
    return jac;
  }

  Sparsity eq_sparsity() const {
    const auto n = layout_.state_dim();
    const auto m = layout_.input_dim();
    const int N = spec_.horizon;
    Sparsity sp;
    const auto dense = [&](Eigen::Index r0, Eigen::Index rows, Eigen::Index c0,
                           Eigen::Index cols) {
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
          sp.emplace_back(static_cast<int>(r0 + r), static_cast<int>(c0 + c));
    };
    for (Eigen::Index i = 0; i < n; ++i)
      sp.emplace_back(static_cast<int>(rows_.initial + i), static_cast<int>(layout_.state(0) + i));
    for (int l = 0; l < N; ++l) {
      const Eigen::Index r = rows_.dynamics + l * n;
      dense(r, n, layout_.state(l), n);
      dense(r, n, layout_.input(l), m);
      for (Eigen::Index i = 0; i < n; ++i)
        sp.emplace_back(static_cast<int>(r + i), static_cast<int>(layout_.state(l + 1) + i));
    }
    dense(rows_.steady, n, layout_.state(N), n);
    dense(rows_.steady, n, layout_.input(N), m);
    if (layout_.has_progress()) {
      const auto np = spec_.model->config_dim();
      dense(rows_.anchoring, np, layout_.state(N), n);
      dense(rows_.anchoring, np, layout_.progress(), 1);
    }
    Eigen::Index row = rows_.normalization;
    for (int l = 1; l <= N; ++l)
      for (std::size_t i = 0; i < spec_.obstacles.size(); ++i)
        dense(row++, 1, layout_.mu(l, i), layout_.faces(i));
    return sp;
  }

  Sparsity ineq_sparsity() const {
    Sparsity sp;
    Eigen::Index row = 0;
    for (int l = 1; l <= spec_.horizon; ++l) {
      for (std::size_t i = 0; i < spec_.obstacles.size(); ++i) {
        for (Eigen::Index c = 0; c < layout_.state_dim(); ++c)
          sp.emplace_back(static_cast<int>(row), static_cast<int>(layout_.state(l) + c));
        for (Eigen::Index c = 0; c < layout_.faces(i); ++c)
          sp.emplace_back(static_cast<int>(row), static_cast<int>(layout_.mu(l, i) + c));
        ++row;
      }
    }
    return sp;
  }

  void bounds(Vector& lower, Vector& upper) const {
    const double inf = std::numeric_limits<double>::infinity();
    lower = Vector::Constant(layout_.num_vars(), -inf);
    upper = Vector::Constant(layout_.num_vars(), inf);
    for (int l = 0; l <= spec_.horizon; ++l) {
      lower.segment(layout_.input(l), layout_.input_dim()) = spec_.input_lower;
      upper.segment(layout_.input(l), layout_.input_dim()) = spec_.input_upper;
    }
    if (layout_.has_progress()) {
      lower[layout_.progress()] = 0.0;
      upper[layout_.progress()] = 1.0;
    }
    if (layout_.mu_block_size() > 0) {
      const Eigen::Index base = layout_.mu(1, 0);
      lower.segment(base, layout_.mu_block_size()).setZero();
    }
  }

 private:
  Eigen::Vector2d position(const Vector& z, int l) const {
    const Vector cfg =
        spec_.model->configuration(z.segment(layout_.state(l), layout_.state_dim()));
    return cfg.head<2>();
  }

  double terminal_cost(const Vector& z) const {
    if (layout_.has_progress()) return offset_cost(z[layout_.progress()], spec_.offset_weight);
    const Vector xN = z.segment(layout_.state(spec_.horizon), layout_.state_dim());
    return spec_.offset_weight * (spec_.model->configuration(xN) - target_).squaredNorm();
  }

  OcpSpec spec_;
  Vector x0_;
  DecisionLayout layout_;
  ResidualLayout rows_;
  Vector qw_;
  Vector rw_;
  Vector target_;
};

}  // namespace

double total_cost(const Vector& z, const OcpSpec& spec) {
  const OcpEvaluator ev(spec, Vector::Zero(spec.model->state_dim()));
  if (z.size() != ev.layout().num_vars())
    throw std::invalid_argument("total_cost: decision vector does not match layout");
  return ev.objective(z);
}

OcpTranscription assemble_nlp(const OcpSpec& spec, const Vector& x_current) {
  spec.validate();
  if (x_current.size() != spec.model->state_dim() || !x_current.allFinite())
    throw std::invalid_argument("assemble_nlp: current state has wrong size or is not finite");
  auto ev = std::make_shared<const OcpEvaluator>(spec, x_current);
  NlpProblem p;
  p.num_vars = ev->layout().num_vars();
  p.num_eq = ev->rows().num_eq;
  p.num_ineq = ev->rows().num_ineq;
  p.objective = [ev](const Vector& z) { return ev->objective(z); };
  p.gradient = [ev](const Vector& z) { return ev->gradient(z); };
  p.eq = [ev](const Vector& z) { return ev->eq(z); };
  p.eq_jacobian = [ev](const Vector& z) { return ev->eq_jacobian(z); };
  p.ineq = [ev](const Vector& z) { return ev->ineq(z); };
  p.ineq_jacobian = [ev](const Vector& z) { return ev->ineq_jacobian(z); };
  ev->bounds(p.lower, p.upper);
  p.eq_sparsity = ev->eq_sparsity();
  p.ineq_sparsity = ev->ineq_sparsity();
  return {std::move(p), ev->layout(), ev->rows()};
}

namespace {

// d/dz_i of fn by finite differences, staying inside [lo, hi].
template <class Fn>
Vector fd_column(const Fn& fn, Vector z, Eigen::Index i, double h, double lo, double hi) {
  const double zi = z[i];
  if (zi - h >= lo && zi + h <= hi) {
    z[i] = zi + h;
    const Vector fp = fn(z);
    z[i] = zi - h;
    const Vector fm = fn(z);
    return (fp - fm) / (2.0 * h);
  }
  const double sgn = zi + h > hi ? -1.0 : 1.0;
  const Vector f0 = fn(z);
  z[i] = zi + sgn * h;
  const Vector f1 = fn(z);
  z[i] = zi + sgn * 2.0 * h;
  const Vector f2 = fn(z);
  return sgn * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
}

}  // namespace

GradientCheckReport check_gradients(const NlpProblem& problem, const Vector& z, double step) {
  if (!z.allFinite()) throw std::invalid_argument("check_gradients: z must be finite");
  GradientCheckReport rep;
  const Vector g = problem.gradient(z);
  const Matrix je = problem.eval_eq_jacobian(z);
  const Matrix ji = problem.eval_ineq_jacobian(z);
  const auto obj = [&](const Vector& v) -> Vector { return Vector::Constant(1, problem.objective(v)); };
  const auto eqf = [&](const Vector& v) { return problem.eval_eq(v); };
  const auto inf = [&](const Vector& v) { return problem.eval_ineq(v); };
  for (Eigen::Index i = 0; i < problem.num_vars; ++i) {
    const double lo = problem.lower[i], hi = problem.upper[i];
    const Vector dg = fd_column(obj, z, i, step, lo, hi);
    rep.objective = std::max(rep.objective, std::abs(dg[0] - g[i]));
    if (problem.num_eq > 0) {
      const Vector col = fd_column(eqf, z, i, step, lo, hi);
      rep.eq_jacobian = std::max(rep.eq_jacobian, (col - je.col(i)).cwiseAbs().maxCoeff());
    }
    if (problem.num_ineq > 0) {
      const Vector col = fd_column(inf, z, i, step, lo, hi);
      rep.ineq_jacobian = std::max(rep.ineq_jacobian, (col - ji.col(i)).cwiseAbs().maxCoeff());
    }
  }
  return rep;
}

double max_violation(const NlpProblem& problem, const Vector& z) {
  double v = 0.0;
  const Vector ce = problem.eval_eq(z);
  const Vector ci = problem.eval_ineq(z);
  if (ce.size()) v = std::max(v, ce.cwiseAbs().maxCoeff());
  if (ci.size()) v = std::max(v, (-ci).maxCoeff());
  if (z.size()) {
    v = std::max(v, (problem.lower - z).maxCoeff());
    v = std::max(v, (z - problem.upper).maxCoeff());
  }
  return v;
}

}  // namespace pathmpc
