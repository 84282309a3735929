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

// Closed-loop simulation, horizon sweeps and the controllability-exponent
// experiment. The plant is the same RK4 model the controller predicts with.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pathmpc/mpc.hpp"
#include "pathmpc/planner.hpp"

namespace pathmpc {

enum class ControllerMode { kProposed, kBaseline };

const char* to_string(ControllerMode mode);

struct PathConfig {
  enum class Kind { kSinusoid, kPolyline, kConstant, kPlanned };
  Kind kind = Kind::kSinusoid;
  double length = 2.5;  // sinusoid
  double amplitude = 1.1;
  Waypoints waypoints;  // polyline
  double corner_radius = 0.1;
  Vector constant;  // constant path configuration
  /// Planned paths: RRT* from start to goal, then a rounded polyline.
  Eigen::Vector2d start{0.0, 0.0};
  Eigen::Vector2d goal{2.5, 0.0};
  PlannerConfig planner;
};

const char* to_string(PathConfig::Kind kind);

struct Termination {
  int max_steps = 300;
  double target_tolerance = 0.05;   // position [m]
  double heading_tolerance = 0.1;   // [rad]
};

struct Scenario {
  std::string name = "scenario";
  ControllerMode mode = ControllerMode::kProposed;
  std::string model = "diff_drive";
  int horizon = 10;
  double step = 0.2;
  double robot_radius = 0.0;
  double delta_sep = 1e-3;
  std::uint64_t rng_seed = 1;
  /// Defaults to the path start when empty.
  Vector initial_state;
  Vector input_lower = Eigen::Vector2d(-0.31, -1.9);
  Vector input_upper = Eigen::Vector2d(0.31, 1.9);
  CostWeights weights;
  double offset_weight = 1000.0;
  PathConfig path;
  /// Raw obstacles; inflated by robot_radius when the OCP is built.
  std::vector<ConvexPolytope> obstacles;
  Termination termination;
  MpcOptions controller;
  /// (N, h) pairs for sweeps.
  std::vector<std::pair<int, double>> sweep;

  /// Throws std::invalid_argument.
  void validate() const;
  std::vector<ConvexPolytope> inflated_obstacles() const;
  /// Builds the reference path; planned paths run the planner (seeded).
  PathPtr build_path() const;
  OcpSpec ocp_spec(PathPtr path) const;
  Vector start_state(const ReferencePath& path) const;
};

enum class RunOutcome { kSuccess, kTimeout, kFault };

const char* to_string(RunOutcome outcome);

struct LogRow {
  StepDiagnostics diag;
  std::optional<MonitorVerdict> monitors;
  double value_lower_bound = 0.0;
  double clearance = 0.0;  // of x_k against the inflated obstacles
};

struct ClosedLoopSummary {
  RunOutcome outcome = RunOutcome::kTimeout;
  int steps = 0;
  double path_length = 0.0;
  /// Sum of l(x_k - x_T, u_k) over applied steps.
  double closed_loop_cost = 0.0;
  double min_margin = 0.0;
  double final_distance = 0.0;
  double final_heading_error = 0.0;
  double final_progress = 0.0;
  int monitor_failures = 0;
  int lower_bound_violations = 0;
  int fallback_steps = 0;
  double wall_time_s = 0.0;
  std::string fault;
};

struct ClosedLoopLog {
  std::vector<LogRow> rows;
  /// x_0 .. x_K, one more than rows unless the run faulted mid-step.
  std::vector<Vector> states;
  Vector target;
  PathPtr path;
  ClosedLoopSummary summary;
};

/// Runs until the target tolerance, max_steps, or a controller fault.
/// Faults are reported through the summary with the partial log.
ClosedLoopLog run_closed_loop(const Scenario& scenario);

/// Recomputes the summary from rows and states.
ClosedLoopSummary summarize(const ClosedLoopLog& log, const Scenario& scenario);

struct SweepRow {
  int horizon = 0;
  double step = 0.0;
  ClosedLoopSummary summary;
  std::vector<Vector> states;
};

/// One closed loop per (N, h), run on up to `threads` workers; rows keep
/// the input order. threads == 0 picks the hardware concurrency.
std::vector<SweepRow> horizon_sweep(const Scenario& scenario,
                                    const std::vector<std::pair<int, double>>& horizons,
                                    unsigned threads = 0);

struct ExponentSample {
  double epsilon = 0.0;
  double cost = 0.0;
  double displacement = 0.0;
  bool clipped = false;
};

struct ExponentReport {
  std::vector<ExponentSample> samples;
  double slope = 0.0;
  int fitted = 0;
};

/// Lie-bracket maneuver (0,1), (1,0), (0,-1), (-1,0) with input magnitudes
/// kappa sqrt(eps), kappa_v kappa_w h^2 = 1 and kappa proportional to the
/// bounds. Cost is the summed stage cost relative to the final steady pose;
/// the slope is a least-squares fit of log cost against log eps over the
/// unclipped, nonzero samples. Throws if fewer than two remain.
ExponentReport verify_controllability_exponent(const DynamicsModel& model,
                                               const InputBounds& bounds,
                                               const std::vector<double>& epsilons,
                                               const CostWeights& weights = {},
                                               double step = 0.2);

std::vector<double> default_exponent_epsilons();

/// Worst derivative mismatch of the OCP transcription over `samples` random
/// decision vectors: inputs inside their bounds, positions within 3 m of x0,
/// headings within pi, s and mu in [0, 1].
GradientCheckReport random_gradient_check(const OcpSpec& spec, const Vector& x0, int samples,
                                          std::uint64_t seed);

}  // namespace pathmpc
