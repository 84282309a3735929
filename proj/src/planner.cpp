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

#include "pathmpc/planner.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace pathmpc {

void PlannerConfig::validate() const {
  if (!(bounds_min.array() < bounds_max.array()).all())
    throw std::invalid_argument("planner: empty workspace bounds");
  if (max_iterations < 0) throw std::invalid_argument("planner: negative iteration count");
  if (!(steer_step > 0.0)) throw std::invalid_argument("planner: steer_step must be positive");
  if (!(rewire_radius > 0.0))
    throw std::invalid_argument("planner: rewire_radius must be positive");
  if (!(goal_bias >= 0.0 && goal_bias <= 1.0))
    throw std::invalid_argument("planner: goal_bias must lie in [0, 1]");
  if (!(clearance > 0.0)) throw std::invalid_argument("planner: clearance must be positive");
}

namespace {

bool point_free(const Eigen::Vector2d& p, const std::vector<ConvexPolytope>& obstacles,
                double clearance) {
  return obstacles.empty() || min_clearance(obstacles, p) >= clearance;
}

class Tree {
 public:
  explicit Tree(const Eigen::Vector2d& root) { add(root, -1, 0.0); }

  int add(const Eigen::Vector2d& p, int parent, double cost) {
    data_.nodes.push_back(p);
    data_.parent.push_back(parent);
    data_.cost.push_back(cost);
    children_.emplace_back();
    if (parent >= 0) children_[parent].push_back(size() - 1);
    return size() - 1;
  }

  int size() const { return static_cast<int>(data_.nodes.size()); }
  const Eigen::Vector2d& node(int i) const { return data_.nodes[i]; }
  double cost(int i) const { return data_.cost[i]; }
  int parent(int i) const { return data_.parent[i]; }

  int nearest(const Eigen::Vector2d& p) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < size(); ++i) {
      const double d = (data_.nodes[i] - p).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  }

  std::vector<int> near(const Eigen::Vector2d& p, double radius) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
      if ((data_.nodes[i] - p).norm() <= radius) out.push_back(i);
    return out;
  }

  // Re-parent `child` and push the cost change down its subtree.
  void rewire(int child, int new_parent, double new_cost) {
    assert(new_cost <= data_.cost[child]);
    auto& siblings = children_[data_.parent[child]];
    siblings.erase(std::find(siblings.begin(), siblings.end(), child));
    data_.parent[child] = new_parent;
    children_[new_parent].push_back(child);
    const double delta = new_cost - data_.cost[child];
    std::vector<int> stack{child};
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      data_.cost[i] += delta;
      stack.insert(stack.end(), children_[i].begin(), children_[i].end());
    }
  }

  Waypoints branch(int leaf) const {
    Waypoints out;
    for (int i = leaf; i >= 0; i = data_.parent[i]) out.push_back(data_.nodes[i]);
    std::reverse(out.begin(), out.end());
    return out;
  }

  PlannerTree release() { return std::move(data_); }

 private:
  PlannerTree data_;
  std::vector<std::vector<int>> children_;
};

}  // namespace

bool segment_collision_free(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                            const std::vector<ConvexPolytope>& obstacles, double clearance) {
  if (obstacles.empty()) return true;
  const double resolution = 0.5 * clearance;
  const int samples = std::max(1, static_cast<int>(std::ceil((b - a).norm() / resolution)));
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    if (!point_free(a + t * (b - a), obstacles, clearance)) return false;
  }
  return true;
}

std::optional<Waypoints> rrt_star(const Eigen::Vector2d& start, const Eigen::Vector2d& goal,
                                  const std::vector<ConvexPolytope>& obstacles,
                                  const PlannerConfig& config, PlannerTree* tree_out) {
  config.validate();
  const auto inside = [&](const Eigen::Vector2d& p) {
    return (p.array() >= config.bounds_min.array()).all() &&
           (p.array() <= config.bounds_max.array()).all();
  };
  if (!start.allFinite() || !goal.allFinite() || !inside(start) || !inside(goal))
    throw std::invalid_argument("rrt_star: start or goal outside the workspace");
  if (!point_free(start, obstacles, config.clearance))
    throw std::invalid_argument("rrt_star: start is in collision");
  if (!point_free(goal, obstacles, config.clearance))
    throw std::invalid_argument("rrt_star: goal is in collision");

  Tree tree(start);
  if ((goal - start).norm() == 0.0) {
    if (tree_out) *tree_out = tree.release();
    return Waypoints{start};
  }

  std::mt19937_64 rng(config.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto free_edge = [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return segment_collision_free(a, b, obstacles, config.clearance);
  };

  for (int it = 0; it < config.max_iterations; ++it) {
    Eigen::Vector2d sample;
    if (unit(rng) < config.goal_bias) {
      sample = goal;
    } else {
      const Eigen::Vector2d r(unit(rng), unit(rng));
      sample = config.bounds_min + r.cwiseProduct(config.bounds_max - config.bounds_min);
    }
    const int nearest = tree.nearest(sample);
    Eigen::Vector2d step = sample - tree.node(nearest);
    const double dist = step.norm();
    if (dist == 0.0) continue;
    if (dist > config.steer_step) step *= config.steer_step / dist;
    const Eigen::Vector2d p = tree.node(nearest) + step;
    if (!free_edge(tree.node(nearest), p)) continue;

    // Cheapest collision-free parent among the neighbours.
    const std::vector<int> near = tree.near(p, config.rewire_radius);
    int parent = nearest;
    double cost = tree.cost(nearest) + step.norm();
    for (int j : near) {
      const double c = tree.cost(j) + (tree.node(j) - p).norm();
      if (c < cost && free_edge(tree.node(j), p)) {
        parent = j;
        cost = c;
      }
    }
    const int id = tree.add(p, parent, cost);

    for (int j : near) {
      if (j == parent) continue;
      const double c = cost + (tree.node(j) - p).norm();
      if (c < tree.cost(j) && free_edge(p, tree.node(j))) tree.rewire(j, id, c);
    }
  }

  int best = -1;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int i = 0; i < tree.size(); ++i) {
    const double d = (tree.node(i) - goal).norm();
    if (d > config.steer_step) continue;
    const double c = tree.cost(i) + d;
    if (c < best_cost && free_edge(tree.node(i), goal)) {
      best = i;
      best_cost = c;
    }
  }
  std::optional<Waypoints> result;
  if (best >= 0) {
    Waypoints w = tree.branch(best);
    if ((w.back() - goal).norm() > 0.0) w.push_back(goal);
    result = std::move(w);
  }
  if (tree_out) *tree_out = tree.release();
  return result;
}

double path_length(const Waypoints& waypoints) {
  if (waypoints.empty()) throw std::invalid_argument("path_length: no waypoints");
  double total = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i)
    total += (waypoints[i] - waypoints[i - 1]).norm();
  return total;
}

}  // namespace pathmpc
