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

#pragma once

#include <memory>
#include <vector>

#include "pathmpc/dynamics.hpp"
#include "pathmpc/geometry.hpp"
#include "pathmpc/nlp.hpp"
#include "pathmpc/path.hpp"

namespace pathmpc {

/// Quartic stage-cost weights.
struct CostWeights {
  double w_pos = 1.0;
  double w_theta = 0.1;
  double w_v = 1.0;
  double w_omega = 1.0;

  Vector state_weights() const { return Eigen::Vector3d(w_pos, w_pos, w_theta); }
  Vector input_weights() const { return Eigen::Vector2d(w_v, w_omega); }
};

enum class OcpMode {
  /// Artificial steady state anchored to the reference path at progress s.
  kPathAnchored,
  /// Artificial steady state pulled toward a fixed target configuration; no s.
  kTargetTracking,
};

struct OcpSpec {
  int horizon = 10;
  double step = 0.2;
  std::shared_ptr<const DynamicsModel> model;
  PathPtr path;
  /// Already inflated by the robot radius.
  std::vector<ConvexPolytope> obstacles;
  Vector input_lower;
  Vector input_upper;
  CostWeights weights;
  double offset_weight = 1000.0;
  double delta_sep = 1e-3;
  OcpMode mode = OcpMode::kPathAnchored;
  /// Target configuration for kTargetTracking; defaults to path(1) when empty.
  Vector target_config;

  /// Throws std::invalid_argument on inconsistent dimensions or parameters.
  void validate() const;
  InputBounds input_bounds() const { return {input_lower, input_upper}; }
  Vector target() const;
};

/// w . (dx^4) + r . (du^4), elementwise powers.
double stage_cost(const Vector& x, const Vector& u, const Vector& xs, const Vector& us,
                  const CostWeights& weights);

double offset_cost(double s, double offset_weight);

/// Flat decision vector layout:
///
///   [ u_0 .. u_N | x_0 .. x_N | s | mu_{1,1} .. mu_{N,No} ]
///
/// s is present only in path-anchored mode. mu_{l,i} has one entry per face of
/// obstacle i and is stored step-major.
class DecisionLayout {
 public:
  DecisionLayout(const OcpSpec& spec);

  Eigen::Index num_vars() const { return num_vars_; }
  Eigen::Index state_dim() const { return n_; }
  Eigen::Index input_dim() const { return m_; }
  int horizon() const { return horizon_; }
  bool has_progress() const { return has_s_; }
  std::size_t num_obstacles() const { return face_offset_.size(); }

  Eigen::Index input(int l) const { return l * m_; }
  Eigen::Index state(int l) const { return (horizon_ + 1) * m_ + l * n_; }
  Eigen::Index progress() const { return (horizon_ + 1) * (m_ + n_); }
  /// Offset of mu_{l,i}; l in [1, N].
  Eigen::Index mu(int l, std::size_t i) const {
    return mu_base_ + (l - 1) * faces_total_ + face_offset_[i];
  }
  Eigen::Index faces(std::size_t i) const { return faces_[i]; }
  Eigen::Index mu_block_size() const { return horizon_ * faces_total_; }

 private:
  int horizon_;
  Eigen::Index n_, m_;
  bool has_s_;
  Eigen::Index mu_base_ = 0;
  Eigen::Index faces_total_ = 0;
  std::vector<Eigen::Index> faces_;
  std::vector<Eigen::Index> face_offset_;
  Eigen::Index num_vars_ = 0;
};

/// Residual row offsets.
///
/// Equalities: initial condition (n), dynamics (N n), steady state (n),
/// path anchoring (n_p, path mode only), mu normalization (N No).
/// Inequalities: Farkas margins minus delta_sep, (N No), step-major.
struct ResidualLayout {
  Eigen::Index initial = 0;
  Eigen::Index dynamics = 0;
  Eigen::Index steady = 0;
  Eigen::Index anchoring = 0;
  Eigen::Index normalization = 0;
  Eigen::Index num_eq = 0;
  Eigen::Index num_ineq = 0;
};

double total_cost(const Vector& z, const OcpSpec& spec);

struct OcpTranscription {
  NlpProblem problem;
  DecisionLayout layout;
  ResidualLayout residuals;
};

OcpTranscription assemble_nlp(const OcpSpec& spec, const Vector& x_current);

struct GradientCheckReport {
  double objective = 0.0;
  double eq_jacobian = 0.0;
  double ineq_jacobian = 0.0;
  double max() const { return std::max({objective, eq_jacobian, ineq_jacobian}); }
};

/// Central finite differences (step 1e-6) against the analytic derivatives.
/// Coordinates within one step of a variable bound use a one-sided
/// second-order stencil.
GradientCheckReport check_gradients(const NlpProblem& problem, const Vector& z,
                                    double step = 1e-6);

/// Worst constraint violation of z: max(|c_E|_inf, max(-c_I), bound violation).
double max_violation(const NlpProblem& problem, const Vector& z);

}  // namespace pathmpc
