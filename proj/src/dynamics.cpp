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

#include "pathmpc/dynamics.hpp"

#include <cmath>

namespace pathmpc {

RobotState RobotState::from_vector(const Vector& x) {
  if (x.size() != 3) throw std::invalid_argument("RobotState needs 3 entries");
  return {x[0], x[1], x[2]};
}

bool RobotState::is_finite() const {
  return std::isfinite(px) && std::isfinite(py) && std::isfinite(theta);
}

RobotInput RobotInput::from_vector(const Vector& u) {
  if (u.size() != 2) throw std::invalid_argument("RobotInput needs 2 entries");
  return {u[0], u[1]};
}

bool RobotInput::is_finite() const {
  return std::isfinite(v) && std::isfinite(omega);
}

InputBounds::InputBounds(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.size() == 0)
    throw std::invalid_argument("input bounds: dimension mismatch");
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]))
      throw std::invalid_argument("input bounds must be finite");
    if (lower_[i] > upper_[i])
      throw std::invalid_argument("input bounds: lower > upper");
  }
}

bool InputBounds::contains(const Vector& u, double tol) const {
  return u.size() == dim() && (u.array() >= lower_.array() - tol).all() &&
         (u.array() <= upper_.array() + tol).all();
}

bool InputBounds::strictly_contains(const Vector& u, double margin) const {
  return u.size() == dim() && (u.array() > lower_.array() + margin).all() &&
         (u.array() < upper_.array() - margin).all();
}

Vector InputBounds::clip(const Vector& u) const {
  return u.cwiseMax(lower_).cwiseMin(upper_);
}

Vector DiffDriveModel::ode(const Vector& x, const Vector& u) const {
  return Eigen::Vector3d(u[0] * std::cos(x[2]), u[0] * std::sin(x[2]), u[1]);
}

Matrix DiffDriveModel::ode_dx(const Vector& x, const Vector& u) const {
  Matrix j = Matrix::Zero(3, 3);
  j(0, 2) = -u[0] * std::sin(x[2]);
  j(1, 2) = u[0] * std::cos(x[2]);
  return j;
}

Matrix DiffDriveModel::ode_du(const Vector& x, const Vector& /*u*/) const {
  Matrix j = Matrix::Zero(3, 2);
  j(0, 0) = std::cos(x[2]);
  j(1, 0) = std::sin(x[2]);
  j(2, 1) = 1.0;
  return j;
}

Eigen::Vector3d diff_drive_ode(const RobotState& state, const RobotInput& input) {
  return {input.v * std::cos(state.theta), input.v * std::sin(state.theta),
          input.omega};
}

namespace {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite())
    throw IntegrationError(std::string("rk4: non-finite value in ") + what);
}

}  // namespace

Vector rk4_step(const DynamicsModel& model, const Vector& x, const Vector& u,
                double h) {
  if (!(h > 0.0)) throw std::invalid_argument("rk4: step size must be positive");
  const Vector k1 = model.ode(x, u);
  require_finite(k1, "stage 1");
  const Vector k2 = model.ode(x + 0.5 * h * k1, u);
  require_finite(k2, "stage 2");
  const Vector k3 = model.ode(x + 0.5 * h * k2, u);
  require_finite(k3, "stage 3");
  const Vector k4 = model.ode(x + h * k3, u);
  require_finite(k4, "stage 4");
  Vector next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  require_finite(next, "result");
  return next;
}

StepJacobians rk4_jacobians(const DynamicsModel& model, const Vector& x,
                            const Vector& u, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("rk4: step size must be positive");
  const Eigen::Index n = x.size();
  const Matrix eye = Matrix::Identity(n, n);

  // Stage points and their sensitivities dX_i/dx, dX_i/du.
  const Vector& x1 = x;
  const Vector k1 = model.ode(x1, u);
  const Matrix a1 = model.ode_dx(x1, u);
  const Matrix k1x = a1;
  const Matrix k1u = model.ode_du(x1, u);

  const Vector x2 = x + 0.5 * h * k1;
  const Vector k2 = model.ode(x2, u);
  const Matrix a2 = model.ode_dx(x2, u);
  const Matrix k2x = a2 * (eye + 0.5 * h * k1x);
  const Matrix k2u = a2 * (0.5 * h * k1u) + model.ode_du(x2, u);

  const Vector x3 = x + 0.5 * h * k2;
  const Matrix a3 = model.ode_dx(x3, u);
  const Matrix k3x = a3 * (eye + 0.5 * h * k2x);
  const Matrix k3u = a3 * (0.5 * h * k2u) + model.ode_du(x3, u);
  const Vector k3 = model.ode(x3, u);

  const Vector x4 = x + h * k3;
  const Matrix a4 = model.ode_dx(x4, u);
  const Matrix k4x = a4 * (eye + h * k3x);
  const Matrix k4u = a4 * (h * k3u) + model.ode_du(x4, u);

  StepJacobians out;
  out.dx = eye + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  out.du = (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
  return out;
}

}  // namespace pathmpc
