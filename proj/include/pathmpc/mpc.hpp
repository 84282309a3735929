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

// Receding-horizon controller around the OCP transcription.
//
// Every step solves the OCP from the time-shifted previous solution and then
// keeps whichever of {solver output, shifted candidate} has the lower cost.
// The shifted candidate is feasible by construction and costs exactly
// V_N(x_{k-1}) - l_0, so this choice keeps the value function non-increasing
// even when the local solver lands in a worse minimum.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "pathmpc/nlp.hpp"
#include "pathmpc/ocp.hpp"

namespace pathmpc {

struct MpcOptions {
  MpcOptions() {
    solver.tol_feas = 1e-7;
    solver.penalty_init = 0.0;
  }

  /// Defaults differ from NlpOptions: tighter feasibility so the shifted
  /// candidate stays within shift_tol, and an objective-scaled first penalty.
  NlpOptions solver;
  /// Monitor tolerance is monitor_tol * (1 + V_N).
  double monitor_tol = 1e-4;
  /// Maximum constraint violation accepted for the shifted candidate.
  double shift_tol = 1e-6;
  int cold_start_grid = 200;
  int cold_start_iterations = 20;
  /// Inner tolerance of the first outer iteration on warm-started steps.
  double warm_inner_tol = 1e-4;
};

/// Which vector supplied the applied input.
enum class StepSource {
  kColdSolve,  // first step, solver output
  kSolver,     // solver output, no worse than the shifted candidate
  kCandidate,  // converged solve, but the shifted candidate was cheaper
  kFallback,   // solver failed; shifted candidate applied
};

const char* to_string(StepSource source);

struct StepDiagnostics {
  int k = 0;
  Vector x;  // x_k
  Vector u;  // applied input
  /// V_N(x_k): cost of the decision vector that produced u.
  double value = 0.0;
  /// s* in path-anchored mode, NaN otherwise.
  double progress = 0.0;
  double offset = 0.0;       // terminal part of the cost
  double first_stage = 0.0;  // l(x_{0|k} - x_s, u_{0|k} - u_s)
  double tracking_gap = 0.0; // |x_k - x_s*|
  Vector steady_state;
  Vector steady_input;
  Vector solution;

  NlpStatus status = NlpStatus::kConverged;
  StepSource source = StepSource::kSolver;
  int outer_iterations = 0;
  int inner_iterations = 0;
  double kkt_stationarity = 0.0;
  double kkt_feasibility = 0.0;
  double solve_ms = 0.0;

  /// Violation and cost of the shifted candidate at x_k; NaN on step 0.
  double candidate_violation = 0.0;
  double candidate_cost = 0.0;
};

struct MonitorVerdict {
  bool lyapunov_decrease_ok = true;
  /// V_N(x_{k-1}) - V_N(x_k) - l_{k-1}; ok iff >= -tol.
  double lyapunov_slack = 0.0;
  bool shift_feasible_ok = true;
  double shift_violation = 0.0;
  /// Change of V_N - V_o(1 - s*) between the two steps.
  double gap_change = 0.0;
  bool gap_trend_ok = true;
  double s_change = 0.0;
  double tracking_gap = 0.0;
  bool offset_bound_ok = true;  // V_N >= V_o(1 - s*)

  bool ok() const {
    return lyapunov_decrease_ok && shift_feasible_ok && gap_trend_ok && offset_bound_ok;
  }
};

/// Compares two consecutive steps. `tol_rel` scales with 1 + V_N(prev).
MonitorVerdict evaluate_monitors(const StepDiagnostics& prev, const StepDiagnostics& curr,
                                 double tol_rel = 1e-4, double shift_tol = 1e-6);

struct MpcState {
  Vector solution;
  Multipliers multipliers;
  double penalty = 0.0;
  double value = 0.0;
  double progress = 0.0;
  int k = 0;
  bool initialized = false;
};

/// Raised when the controller cannot produce an admissible input.
class ControllerFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shift by one step and append the steady pair (x_N, u_N). The last
/// certificate block is recomputed at x_N when one exists.
Vector shift_warm_start(const Vector& prev, const OcpSpec& spec);

/// Initial guess for the first solve. Throws ControllerFault when x0 has no
/// separating certificate against some obstacle.
Vector cold_start(const OcpSpec& spec, const Vector& x0, int grid = 200,
                  int relax_iterations = 20);

class MpcController {
 public:
  explicit MpcController(OcpSpec spec, MpcOptions options = {});

  struct Step {
    Vector u;
    StepDiagnostics diagnostics;
    /// Empty on the first step.
    std::optional<MonitorVerdict> monitors;
  };

  /// Solve at x_k and return the input to apply.
  Step step(const Vector& x);

  const OcpSpec& spec() const { return spec_; }
  const MpcOptions& options() const { return options_; }
  /// Takes effect from the next step; the warm-start state is kept.
  void set_options(const MpcOptions& options) { options_ = options; }
  const MpcState& state() const { return state_; }
  void reset();

  /// 1/2 alpha(|x - x_T|) with alpha(r) = min(c r^4, w_o (r / L_gp)^2) and
  /// c = min(w_pos, w_theta) / 3. Zero outside path-anchored mode.
  double value_lower_bound(const Vector& x) const;

 private:
  Step finish(const Vector& x, const Vector& z, const OcpTranscription& tr,
              const NlpSolution* sol, StepSource source, double candidate_violation,
              double candidate_cost, double solve_ms);

  OcpSpec spec_;
  MpcOptions options_;
  MpcState state_;
  std::optional<StepDiagnostics> last_;
  double lipschitz_ = 0.0;
  Vector target_state_;
};

/// Path-anchored step. Throws std::invalid_argument for a tracking controller.
MpcController::Step mpc_step(MpcController& controller, const Vector& x);

/// Target-tracking step. Throws std::invalid_argument for a path-anchored
/// controller.
MpcController::Step baseline_tracking_step(MpcController& controller, const Vector& x);

}  // namespace pathmpc
