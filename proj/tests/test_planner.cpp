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

#include "pathmpc/planner.hpp"

using namespace pathmpc;

namespace {

const ConvexPolytope kBox = ConvexPolytope::box(1.0, -1.0, 1.5, 1.0);

void check_tree(const PlannerTree& t) {
  REQUIRE(t.nodes.size() == t.parent.size());
  REQUIRE(t.nodes.size() == t.cost.size());
  CHECK(t.parent[0] == -1);
  CHECK(t.cost[0] == 0.0);
  const int n = static_cast<int>(t.nodes.size());
  for (int i = 1; i < n; ++i) {
    const int p = t.parent[i];
    REQUIRE(p >= 0);
    REQUIRE(p < n);
    CHECK(t.cost[i] >= t.cost[p]);
    CHECK(t.cost[i] == doctest::Approx(t.cost[p] + (t.nodes[i] - t.nodes[p]).norm()).epsilon(1e-9));
    // Walking up reaches the root within n hops: no cycles.
    int hops = 0, j = i;
    while (j != 0 && hops <= n) {
      j = t.parent[j];
      ++hops;
    }
    CHECK(j == 0);
  }
}

}  // namespace

TEST_CASE("path length examples") {
  CHECK(path_length({{0, 0}, {3, 4}}) == 5.0);
  CHECK(path_length({{1, 1}}) == 0.0);
  CHECK(path_length({{0, 0}, {1, 0}, {1, 1}}) == 2.0);
  CHECK_THROWS_AS(path_length({}), std::invalid_argument);
}

TEST_CASE("empty map gives a near-straight path") {
  PlannerConfig cfg;
  cfg.max_iterations = 1000;
  PlannerTree tree;
  const auto w = rrt_star({0, 0}, {1, 0}, {}, cfg, &tree);
  REQUIRE(w);
  CHECK(w->front() == Eigen::Vector2d(0, 0));
  CHECK(w->back() == Eigen::Vector2d(1, 0));
  CHECK(path_length(*w) <= 1.2);
  check_tree(tree);
}

TEST_CASE("fixed seed gives identical tree and path") {
  PlannerConfig cfg;
  cfg.rng_seed = 42;
  PlannerTree ta, tb;
  const auto a = rrt_star({0, 0}, {2.5, 0}, {kBox}, cfg, &ta);
  const auto b = rrt_star({0, 0}, {2.5, 0}, {kBox}, cfg, &tb);
  REQUIRE(a);
  REQUIRE(b);
  REQUIRE(a->size() == b->size());
  for (std::size_t i = 0; i < a->size(); ++i) CHECK((*a)[i] == (*b)[i]);
  CHECK(ta.nodes.size() == tb.nodes.size());
  CHECK(ta.parent == tb.parent);
  CHECK(ta.cost == tb.cost);
  cfg.rng_seed = 43;
  PlannerTree tc;
  (void)rrt_star({0, 0}, {2.5, 0}, {kBox}, cfg, &tc);
  CHECK(tc.nodes != ta.nodes);
}

TEST_CASE("box map: path goes around and every edge is collision free") {
  PlannerConfig cfg;
  PlannerTree tree;
  const auto w = rrt_star({0, 0}, {2.5, 0}, {kBox}, cfg, &tree);
  REQUIRE(w);
  CHECK(w->size() >= 3);
  for (std::size_t i = 0; i + 1 < w->size(); ++i) {
    const Eigen::Vector2d a = (*w)[i], b = (*w)[i + 1];
    // Independent dense sampling of each edge against the box rows.
    for (int k = 0; k <= 2000; ++k) {
      const Eigen::Vector2d p = a + (b - a) * (k / 2000.0);
      const bool inside = p.x() >= 1.0 && p.x() <= 1.5 && p.y() >= -1.0 && p.y() <= 1.0;
      CHECK_FALSE(inside);
    }
  }
  check_tree(tree);
  // Straight line is blocked, so the detour is longer than 2.5.
  CHECK(path_length(*w) > 2.5);
}

TEST_CASE("degenerate and unreachable goals") {
  const PlannerConfig cfg;
  const auto same = rrt_star({0.5, 0.5}, {0.5, 0.5}, {}, cfg);
  REQUIRE(same);
  CHECK(same->size() == 1);

  // Wall across the whole workspace height.
  const ConvexPolytope wall = ConvexPolytope::box(1.0, -3.0, 1.2, 3.0);
  PlannerTree tree;
  CHECK_FALSE(rrt_star({0, 0}, {2.5, 0}, {wall}, cfg, &tree).has_value());
  for (const auto& p : tree.nodes) CHECK(p.x() < 1.0);
}

TEST_CASE("segment collision checks") {
  CHECK(segment_collision_free({0, 0}, {0.5, 0}, {kBox}, 1e-3));
  CHECK_FALSE(segment_collision_free({0, 0}, {2.5, 0}, {kBox}, 1e-3));
  CHECK_FALSE(segment_collision_free({0, 0}, {0.9995, 0}, {kBox}, 1e-3));
  CHECK(segment_collision_free({0, 0}, {2.5, 0}, {}, 1e-3));
}

TEST_CASE("planner input errors") {
  PlannerConfig cfg;
  CHECK_THROWS_AS(rrt_star({-5, 0}, {1, 0}, {}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(rrt_star({1.25, 0}, {2.5, 0}, {kBox}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(rrt_star({0, 0}, {1.25, 0}, {kBox}, cfg), std::invalid_argument);
  cfg.steer_step = 0.0;
  CHECK_THROWS_AS(rrt_star({0, 0}, {1, 0}, {}, cfg), std::invalid_argument);
  PlannerConfig bad;
  bad.goal_bias = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = PlannerConfig{};
  bad.bounds_max = bad.bounds_min;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
