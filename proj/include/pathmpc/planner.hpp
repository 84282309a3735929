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

// Sampling-based global planner (RRT*) in the position plane. Its output is
// deliberately raw: a polyline with many corners that the path-anchored MPC
// smooths on its own.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pathmpc/geometry.hpp"

namespace pathmpc {

using Waypoints = std::vector<Eigen::Vector2d>;

struct PlannerConfig {
  Eigen::Vector2d bounds_min{-1.0, -2.0};
  Eigen::Vector2d bounds_max{3.5, 2.0};
  int max_iterations = 1000;
  double steer_step = 0.25;
  double goal_bias = 0.05;
  double rewire_radius = 0.6;
  std::uint64_t rng_seed = 1;
  /// Minimum face margin along accepted edges.
  double clearance = 1e-3;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct PlannerTree {
  std::vector<Eigen::Vector2d> nodes;
  std::vector<int> parent;  // -1 for the root
  std::vector<double> cost;
};

/// Samples the segment at clearance / 2 spacing.
bool segment_collision_free(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                            const std::vector<ConvexPolytope>& obstacles, double clearance);

/// Lowest-cost start-to-goal waypoint list, or nullopt when the tree never
/// got within steer_step of the goal with a free connecting edge. Throws
/// std::invalid_argument when start or goal is in collision or out of bounds.
std::optional<Waypoints> rrt_star(const Eigen::Vector2d& start, const Eigen::Vector2d& goal,
                                  const std::vector<ConvexPolytope>& obstacles,
                                  const PlannerConfig& config, PlannerTree* tree = nullptr);

/// Sum of segment lengths. Throws std::invalid_argument on an empty list.
double path_length(const Waypoints& waypoints);

}  // namespace pathmpc
