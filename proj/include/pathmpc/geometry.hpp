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

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace pathmpc {

/// Bounded, non-empty convex obstacle {p in R^2 : A p <= b}.
///
/// Construction validates the halfspace description: at least three rows, no
/// zero normals, a non-empty interior and a trivial recession cone. The vertex
/// list (counter-clockwise) is computed once and kept for drawing and for
/// containment checks.
class ConvexPolytope {
 public:
  ConvexPolytope(Eigen::MatrixX2d normals, Eigen::VectorXd offsets);

  /// Axis-aligned box [xmin, xmax] x [ymin, ymax]; rows ordered
  /// (+x, -x, +y, -y).
  static ConvexPolytope box(double xmin, double ymin, double xmax, double ymax);

  const Eigen::MatrixX2d& normals() const { return a_; }
  const Eigen::VectorXd& offsets() const { return b_; }
  Eigen::Index num_faces() const { return a_.rows(); }
  const std::vector<Eigen::Vector2d>& vertices() const { return vertices_; }

  /// A p - b; the point is outside iff some entry is positive.
  Eigen::VectorXd face_margins(const Eigen::Vector2d& point) const;
  double max_face_margin(const Eigen::Vector2d& point) const;
  bool contains(const Eigen::Vector2d& point, double tol = 0.0) const;

 private:
  Eigen::MatrixX2d a_;
  Eigen::VectorXd b_;
  std::vector<Eigen::Vector2d> vertices_;
};

/// Bilinear separation value (A p - b)^T mu.
double farkas_margin(const ConvexPolytope& poly, const Eigen::Vector2d& point,
                     const Eigen::VectorXd& mu);

/// Simplex-normalized certificate with margin >= delta, if one exists. With
/// sum(mu) = 1 the best certificate is always a face indicator, so this is a
/// face enumeration.
std::optional<Eigen::VectorXd> certificate_exists(const ConvexPolytope& poly,
                                                  const Eigen::Vector2d& point,
                                                  double delta);

/// Outer halfspace form of the Minkowski sum with a disc of the given radius.
ConvexPolytope inflate(const ConvexPolytope& poly, double radius);

/// Smallest max-face margin of `point` over all obstacles; +inf if none.
double min_clearance(const std::vector<ConvexPolytope>& obstacles,
                     const Eigen::Vector2d& point);

}  // namespace pathmpc
