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
#include <string>
#include <utility>
#include <vector>

#include "pathmpc/dynamics.hpp"
#include "pathmpc/geometry.hpp"

namespace pathmpc {

/// Continuous map s in [0, 1] -> configuration (px, py, theta).
///
/// s = 0 is the start configuration and s = 1 the target. Headings are
/// tangent directions and are continuous (never wrapped). Evaluating outside
/// [0, 1] throws std::out_of_range.
class ReferencePath {
 public:
  virtual ~ReferencePath() = default;
  virtual Vector eval(double s) const = 0;
  /// d eval / ds; one-sided at kinks of the heading rate.
  virtual Vector derivative(double s) const = 0;
  virtual std::string describe() const = 0;
};

using PathPtr = std::shared_ptr<const ReferencePath>;

/// (L s, A sin(pi s), atan(A pi cos(pi s) / L)).
class SinusoidPath final : public ReferencePath {
 public:
  SinusoidPath(double length = 2.5, double amplitude = 1.1);
  Vector eval(double s) const override;
  Vector derivative(double s) const override;
  std::string describe() const override;

  double length() const { return length_; }
  double amplitude() const { return amplitude_; }

 private:
  double length_;
  double amplitude_;
};

/// Degenerate path that stays at one configuration.
class ConstantPath final : public ReferencePath {
 public:
  explicit ConstantPath(Vector config) : config_(std::move(config)) {}
  Vector eval(double s) const override;
  Vector derivative(double s) const override;
  std::string describe() const override { return "constant"; }

 private:
  Vector config_;
};

/// Waypoint polyline with circular-arc corner blends, parametrized
/// proportionally to arc length.
class PolylinePath final : public ReferencePath {
 public:
  PolylinePath(std::vector<Eigen::Vector2d> waypoints, double corner_radius);
  Vector eval(double s) const override;
  Vector derivative(double s) const override;
  std::string describe() const override;

  double total_length() const { return total_length_; }
  double corner_radius() const { return corner_radius_; }
  const std::vector<Eigen::Vector2d>& waypoints() const { return waypoints_; }

 private:
  struct Piece {
    Eigen::Vector2d start;
    double heading = 0.0;    // at piece start, unwrapped
    double curvature = 0.0;  // 0 for straight pieces
    double length = 0.0;
    double offset = 0.0;  // arc length at piece start
  };
  std::pair<const Piece*, double> locate(double s) const;

  std::vector<Eigen::Vector2d> waypoints_;
  double corner_radius_;
  std::vector<Piece> pieces_;
  double total_length_ = 0.0;
};

/// The sinusoid reference with its default parameters.
Vector sinusoid_path(double s);

std::shared_ptr<PolylinePath> polyline_path(std::vector<Eigen::Vector2d> waypoints,
                                            double corner_radius);

/// Steady pair on the path at progress s for the given model.
std::pair<Vector, Vector> lift(const ReferencePath& path, const DynamicsModel& model,
                               double s);

/// Grid estimate of the Lipschitz constant of the steady-state lift, with a
/// 1.2 safety factor.
double estimate_lipschitz_gp(const ReferencePath& path, const DynamicsModel& model,
                             int grid);

struct ClearanceViolation {
  double s = 0.0;
  std::string kind;  // "not-steady" | "input-bounds" | "collision"
  double value = 0.0;
};

struct ClearanceReport {
  std::vector<ClearanceViolation> violations;
  double min_margin = 0.0;
  bool ok() const { return violations.empty(); }
};

ClearanceReport check_path_clearance(const ReferencePath& path,
                                     const DynamicsModel& model,
                                     const InputBounds& bounds, double step,
                                     const std::vector<ConvexPolytope>& obstacles,
                                     double delta_sep, int samples);

}  // namespace pathmpc
