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

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pathmpc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Pose of a planar robot. The heading is kept unwrapped.
struct RobotState {
  double px = 0.0;
  double py = 0.0;
  double theta = 0.0;

  Vector to_vector() const { return Eigen::Vector3d(px, py, theta); }
  static RobotState from_vector(const Vector& x);
  bool is_finite() const;
};

/// Velocity command of a differential-drive robot.
struct RobotInput {
  double v = 0.0;
  double omega = 0.0;

  Vector to_vector() const { return Eigen::Vector2d(v, omega); }
  static RobotInput from_vector(const Vector& u);
  bool is_finite() const;
};

/// Compact box on the input space.
class InputBounds {
 public:
  InputBounds(Vector lower, Vector upper);

  /// Symmetric box [-limit, limit].
  static InputBounds symmetric(const Vector& limit) { return {-limit, limit}; }

  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  Eigen::Index dim() const { return lower_.size(); }

  bool contains(const Vector& u, double tol = 0.0) const;
  /// True when u lies in the interior, at least `margin` away from every face.
  bool strictly_contains(const Vector& u, double margin) const;
  Vector clip(const Vector& u) const;

 private:
  Vector lower_;
  Vector upper_;
};

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Continuous-time vector field xdot = F(x, u) with its partial derivatives.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  virtual Eigen::Index state_dim() const = 0;
  virtual Eigen::Index input_dim() const = 0;
  /// Dimension of the configuration g(x).
  virtual Eigen::Index config_dim() const = 0;

  virtual Vector ode(const Vector& x, const Vector& u) const = 0;
  virtual Matrix ode_dx(const Vector& x, const Vector& u) const = 0;
  virtual Matrix ode_du(const Vector& x, const Vector& u) const = 0;

  /// Configuration map g and its Jacobian.
  virtual Vector configuration(const Vector& x) const = 0;
  virtual Matrix configuration_jacobian(const Vector& x) const = 0;

  /// Steady pair (x_s, u_s) with g(x_s) = config, i.e. the lift g_p composed
  /// with a path.
  virtual std::pair<Vector, Vector> steady_state(const Vector& config) const = 0;
};

/// Kinematic unicycle: (v cos th, v sin th, omega). Configuration equals state.
class DiffDriveModel final : public DynamicsModel {
 public:
  Eigen::Index state_dim() const override { return 3; }
  Eigen::Index input_dim() const override { return 2; }
  Eigen::Index config_dim() const override { return 3; }

  Vector ode(const Vector& x, const Vector& u) const override;
  Matrix ode_dx(const Vector& x, const Vector& u) const override;
  Matrix ode_du(const Vector& x, const Vector& u) const override;

  Vector configuration(const Vector& x) const override { return x; }
  Matrix configuration_jacobian(const Vector& x) const override {
    return Matrix::Identity(x.size(), x.size());
  }
  std::pair<Vector, Vector> steady_state(const Vector& config) const override {
    return {config, Vector::Zero(2)};
  }
};

Eigen::Vector3d diff_drive_ode(const RobotState& state, const RobotInput& input);

/// One classical Runge-Kutta step with the input held over [0, h].
Vector rk4_step(const DynamicsModel& model, const Vector& x, const Vector& u,
                double h);

struct StepJacobians {
  Matrix dx;  // n x n
  Matrix du;  // n x m
};

/// Exact derivatives of rk4_step, propagated through the four stages.
StepJacobians rk4_jacobians(const DynamicsModel& model, const Vector& x,
                            const Vector& u, double h);

}  // namespace pathmpc
