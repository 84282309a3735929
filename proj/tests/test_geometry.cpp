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

#include <doctest.h>

#include <cmath>
#include <random>

#include "pathmpc/geometry.hpp"

using namespace pathmpc;

namespace {

const ConvexPolytope kBox = ConvexPolytope::box(1.0, -1.0, 1.5, 1.0);

// Sign test straight from the halfspace rows: inside iff every A_i p <= b_i.
bool inside_by_rows(const Eigen::MatrixX2d& a, const Eigen::VectorXd& b,
                    const Eigen::Vector2d& p) {
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    if (a(i, 0) * p.x() + a(i, 1) * p.y() > b[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("box rows") {
  Eigen::MatrixX2d a(4, 2);
  a << 1, 0, -1, 0, 0, 1, 0, -1;
  CHECK((kBox.normals() - a).norm() == 0.0);
  CHECK((kBox.offsets() - Eigen::Vector4d(1.5, -1, 1, 1)).norm() == 0.0);
  CHECK(kBox.vertices().size() == 4);
}

TEST_CASE("farkas margin examples") {
  Eigen::VectorXd e2 = Eigen::VectorXd::Zero(4);
  e2[1] = 1.0;
  CHECK(farkas_margin(kBox, Eigen::Vector2d(0, 0), e2) == doctest::Approx(1.0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd mu(4);
    for (int j = 0; j < 4; ++j) mu[j] = u(rng);
    mu /= mu.sum();
    CHECK(farkas_margin(kBox, Eigen::Vector2d(1.25, 0), mu) < 0.0);
  }
  CHECK(farkas_margin(kBox, Eigen::Vector2d(7, 3), Eigen::VectorXd::Zero(4)) == 0.0);
  CHECK_THROWS_AS(farkas_margin(kBox, Eigen::Vector2d(0, 0), Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);
}

TEST_CASE("farkas margin is linear in mu and affine in the point") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1), p(-3, 3);
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd m1(4), m2(4);
    for (int j = 0; j < 4; ++j) {
      m1[j] = u(rng);
      m2[j] = u(rng);
    }
    const Eigen::Vector2d x(p(rng), p(rng)), y(p(rng), p(rng));
    const double t = u(rng);
    CHECK(farkas_margin(kBox, x, t * m1 + (1 - t) * m2) ==
          doctest::Approx(t * farkas_margin(kBox, x, m1) + (1 - t) * farkas_margin(kBox, x, m2)));
    // Affine in the point for a normalized mu.
    const Eigen::VectorXd mn = m1 / m1.sum();
    CHECK(farkas_margin(kBox, t * x + (1 - t) * y, mn) ==
          doctest::Approx(t * farkas_margin(kBox, x, mn) + (1 - t) * farkas_margin(kBox, y, mn)));
  }
}

TEST_CASE("certificate examples") {
  const auto c = certificate_exists(kBox, Eigen::Vector2d(0, 0), 0.5);
  REQUIRE(c);
  CHECK(c->sum() == doctest::Approx(1.0));
  CHECK(c->minCoeff() >= 0.0);
  CHECK(farkas_margin(kBox, Eigen::Vector2d(0, 0), *c) >= 0.5);
  CHECK_FALSE(certificate_exists(kBox, Eigen::Vector2d(1.25, 0), 0.0));
  const auto edge = certificate_exists(kBox, Eigen::Vector2d(1.0, 0), 0.0);
  REQUIRE(edge);
  CHECK(farkas_margin(kBox, Eigen::Vector2d(1.0, 0), *edge) == 0.0);
  CHECK((*edge)[1] == 1.0);
}

TEST_CASE("farkas soundness on a 200x200 grid") {
  // Scenario bounding box of the obstacle map, padded.
  const std::vector<ConvexPolytope> polys = {
      kBox, ConvexPolytope::box(0.8, -0.6, 1.2, 1.5),
      ConvexPolytope((Eigen::MatrixX2d(3, 2) << -1, -1, 1, -1, 0, 1).finished(),
                     Eigen::Vector3d(0.013, 0.017, 1.03))};
  // No grid point lies exactly on a face of these sets, so the closed-set
  // boundary case (certificate with margin 0) does not arise.
  int disagreements = 0;
  for (const auto& poly : polys) {
    for (int i = 0; i < 200; ++i) {
      for (int j = 0; j < 200; ++j) {
        const Eigen::Vector2d p(-1.0 + 4.5 * i / 199.0, -2.0 + 4.0 * j / 199.0);
        const bool outside = !inside_by_rows(poly.normals(), poly.offsets(), p);
        const bool certified = certificate_exists(poly, p, 0.0).has_value();
        if (outside != certified) ++disagreements;
      }
    }
  }
  CHECK(disagreements == 0);
}

TEST_CASE("inflation") {
  const ConvexPolytope same = inflate(kBox, 0.0);
  CHECK((same.offsets() - kBox.offsets()).norm() == 0.0);
  const ConvexPolytope unit = ConvexPolytope::box(0, 0, 1, 1);
  CHECK((inflate(unit, 0.5).offsets() - (unit.offsets().array() + 0.5).matrix()).norm() <
        1e-15);
  Eigen::MatrixX2d a(4, 2);
  a << 2, 0, -1, 0, 0, 1, 0, -1;
  const ConvexPolytope scaled(a, Eigen::Vector4d(2, 0, 1, 0));
  CHECK(inflate(scaled, 0.5).offsets()[0] == doctest::Approx(3.0));
  for (double r : {0.0, 0.1, 0.7}) {
    const ConvexPolytope big = inflate(kBox, r);
    for (const auto& v : kBox.vertices()) CHECK(big.contains(v, 1e-12));
  }
  CHECK_THROWS_AS(inflate(kBox, -0.1), std::invalid_argument);
}

TEST_CASE("polytope validation") {
  Eigen::MatrixX2d two(2, 2);
  two << 1, 0, -1, 0;
  CHECK_THROWS_AS(ConvexPolytope(two, Eigen::Vector2d(1, 1)), std::invalid_argument);
  Eigen::MatrixX2d open(3, 2);
  open << 1, 0, -1, 0, 0, 1;
  CHECK_THROWS_AS(ConvexPolytope(open, Eigen::Vector3d(1, 1, 1)), std::invalid_argument);
  Eigen::MatrixX2d empty(4, 2);
  empty << 1, 0, -1, 0, 0, 1, 0, -1;
  CHECK_THROWS_AS(ConvexPolytope(empty, Eigen::Vector4d(-1, -1, 1, 1)), std::invalid_argument);
  Eigen::MatrixX2d zero(3, 2);
  zero << 0, 0, 1, 0, -1, 1;
  CHECK_THROWS_AS(ConvexPolytope(zero, Eigen::Vector3d(1, 1, 1)), std::invalid_argument);
}

TEST_CASE("min clearance") {
  CHECK(min_clearance({kBox}, Eigen::Vector2d(0, 0)) == doctest::Approx(1.0));
  CHECK(min_clearance({kBox}, Eigen::Vector2d(1.25, 0)) == doctest::Approx(-0.25));
  CHECK(std::isinf(min_clearance({}, Eigen::Vector2d(0, 0))));
}
