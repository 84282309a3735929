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

#include "pathmpc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pathmpc {

namespace {

constexpr double kVertexTol = 1e-9;

std::vector<Eigen::Vector2d> enumerate_vertices(const Eigen::MatrixX2d& a,
                                                const Eigen::VectorXd& b) {
  std::vector<Eigen::Vector2d> verts;
  const Eigen::Index r = a.rows();
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = i + 1; j < r; ++j) {
      Eigen::Matrix2d m;
      m.row(0) = a.row(i);
      m.row(1) = a.row(j);
      const double det = m.determinant();
      if (std::abs(det) < 1e-12) continue;
      const Eigen::Vector2d p = m.inverse() * Eigen::Vector2d(b[i], b[j]);
      if (((a * p - b).array() <= kVertexTol * (1.0 + b.cwiseAbs().array())).all()) {
        const bool dup = std::any_of(verts.begin(), verts.end(), [&](const auto& q) {
          return (q - p).norm() < 1e-9;
        });
        if (!dup) verts.push_back(p);
      }
    }
  }
  if (verts.empty()) return verts;
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& v : verts) c += v;
  c /= static_cast<double>(verts.size());
  std::sort(verts.begin(), verts.end(), [&](const auto& p, const auto& q) {
    return std::atan2(p.y() - c.y(), p.x() - c.x()) <
           std::atan2(q.y() - c.y(), q.x() - c.x());
  });
  return verts;
}

}  // namespace

ConvexPolytope::ConvexPolytope(Eigen::MatrixX2d normals, Eigen::VectorXd offsets)
    : a_(std::move(normals)), b_(std::move(offsets)) {
  if (a_.rows() != b_.size())
    throw std::invalid_argument("polytope: A and b row counts differ");
  if (a_.rows() < 3)
    throw std::invalid_argument("polytope: at least 3 halfspaces required");
  if (!a_.allFinite() || !b_.allFinite())
    throw std::invalid_argument("polytope: non-finite coefficients");
  for (Eigen::Index i = 0; i < a_.rows(); ++i) {
    if (a_.row(i).norm() == 0.0)
      throw std::invalid_argument("polytope: zero normal in row " + std::to_string(i));
  }
  // Bounded iff no nonzero d with A d <= 0. An extreme ray of that cone lies
  // on some face direction, so checking the face tangents is sufficient.
  for (Eigen::Index i = 0; i < a_.rows(); ++i) {
    const Eigen::Vector2d t(-a_(i, 1), a_(i, 0));
    for (const double sign : {1.0, -1.0}) {
      if (((a_ * (sign * t)).array() <= 1e-12 * t.norm()).all())
        throw std::invalid_argument("polytope: set is unbounded");
    }
  }
  vertices_ = enumerate_vertices(a_, b_);
  if (vertices_.size() < 3)
    throw std::invalid_argument("polytope: set is empty or degenerate");
}

ConvexPolytope ConvexPolytope::box(double xmin, double ymin, double xmax, double ymax) {
  if (!(xmin < xmax) || !(ymin < ymax))
    throw std::invalid_argument("box: min corner must be below max corner");
  Eigen::MatrixX2d a(4, 2);
  a << 1, 0, -1, 0, 0, 1, 0, -1;
  Eigen::VectorXd b(4);
  b << xmax, -xmin, ymax, -ymin;
  return {a, b};
}

Eigen::VectorXd ConvexPolytope::face_margins(const Eigen::Vector2d& point) const {
  return a_ * point - b_;
}

double ConvexPolytope::max_face_margin(const Eigen::Vector2d& point) const {
  return face_margins(point).maxCoeff();
}

bool ConvexPolytope::contains(const Eigen::Vector2d& point, double tol) const {
  return max_face_margin(point) <= tol;
}

double farkas_margin(const ConvexPolytope& poly, const Eigen::Vector2d& point,
                     const Eigen::VectorXd& mu) {
  if (mu.size() != poly.num_faces())
    throw std::invalid_argument("farkas_margin: mu has wrong dimension");
  if ((mu.array() < 0.0).any())
    throw std::invalid_argument("farkas_margin: mu must be nonnegative");
  return poly.face_margins(point).dot(mu);
}

std::optional<Eigen::VectorXd> certificate_exists(const ConvexPolytope& poly,
                                                  const Eigen::Vector2d& point,
                                                  double delta) {
  const Eigen::VectorXd m = poly.face_margins(point);
  Eigen::Index best = 0;
  const double value = m.maxCoeff(&best);
  if (value < delta) return std::nullopt;
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(poly.num_faces());
  mu[best] = 1.0;
  return mu;
}

ConvexPolytope inflate(const ConvexPolytope& poly, double radius) {
  if (radius < 0.0) throw std::invalid_argument("inflate: negative radius");
  Eigen::VectorXd b = poly.offsets();
  for (Eigen::Index i = 0; i < b.size(); ++i)
    b[i] += radius * poly.normals().row(i).norm();
  return {poly.normals(), b};
}

double min_clearance(const std::vector<ConvexPolytope>& obstacles,
                     const Eigen::Vector2d& point) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& o : obstacles) best = std::min(best, o.max_face_margin(point));
  return best;
}

}  // namespace pathmpc
