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

#include "pathmpc/mpc.hpp"

using namespace pathmpc;

namespace {

OcpSpec box_spec(int horizon = 10, OcpMode mode = OcpMode::kPathAnchored) {
  OcpSpec spec;
  spec.horizon = horizon;
  spec.model = std::make_shared<DiffDriveModel>();
  spec.path = std::make_shared<SinusoidPath>();
  spec.obstacles = {ConvexPolytope::box(1.0, -1.0, 1.5, 1.0)};
  spec.input_lower = Eigen::Vector2d(-0.31, -1.9);
  spec.input_upper = Eigen::Vector2d(0.31, 1.9);
  spec.mode = mode;
  return spec;
}

Vector on_path(const OcpSpec& spec, double s) { return lift(*spec.path, *spec.model, s).first; }

Vector steady_on_path(const OcpSpec& spec, double s) {
  const DecisionLayout L(spec);
  Vector z = Vector::Zero(L.num_vars());
  for (int l = 0; l <= spec.horizon; ++l) z.segment(L.state(l), 3) = on_path(spec, s);
  z[L.progress()] = s;
  const auto mu =
      certificate_exists(spec.obstacles[0], on_path(spec, s).head<2>(), spec.delta_sep);
  for (int l = 1; l <= spec.horizon; ++l) z.segment(L.mu(l, 0), 4) = *mu;
  return z;
}

StepDiagnostics steady_diag(double value) {
  StepDiagnostics d;
  d.value = value;
  d.offset = value;
  d.first_stage = 0.0;
  d.progress = 1.0;
  d.tracking_gap = 0.0;
  d.candidate_violation = 0.0;
  return d;
}

}  // namespace

TEST_CASE("steady at the target: zero input and zero value") {
  const OcpSpec spec = box_spec();
  MpcController c(spec);
  const Vector xt = on_path(spec, 1.0);
  const auto s0 = mpc_step(c, xt);
  CHECK(s0.u.cwiseAbs().maxCoeff() < 1e-6);
  CHECK(s0.diagnostics.value < 1e-8);
  CHECK(s0.diagnostics.progress == doctest::Approx(1.0));
  const auto s1 = mpc_step(c, rk4_step(*spec.model, xt, s0.u, spec.step));
  REQUIRE(s1.monitors);
  CHECK(s1.monitors->ok());
  CHECK(c.value_lower_bound(xt) == 0.0);
}

TEST_CASE("first step of the box scenario is a feasible solve") {
  const OcpSpec spec = box_spec();
  MpcController c(spec);
  const Vector x0 = on_path(spec, 0.0);
  const auto st = mpc_step(c, x0);
  const auto& d = st.diagnostics;
  CHECK(d.source == StepSource::kColdSolve);
  CHECK(d.status == NlpStatus::kConverged);
  CHECK(d.progress > 0.0);
  CHECK(d.progress <= 1.0);
  CHECK(spec.input_bounds().contains(st.u, 1e-12));
  const OcpTranscription tr = assemble_nlp(spec, x0);
  CHECK(max_violation(tr.problem, d.solution) <= 1e-6);
  CHECK(d.value >= d.offset);
  CHECK(d.value >= c.value_lower_bound(x0));
  CHECK_FALSE(st.monitors.has_value());
}

TEST_CASE("on the path the value is at most the offset of staying put") {
  const OcpSpec spec = box_spec();
  for (double s : {0.2, 0.6}) {
    MpcController c(spec);
    const auto st = mpc_step(c, on_path(spec, s));
    CHECK(st.diagnostics.value <= offset_cost(s, spec.offset_weight) + 1e-6);
  }
}

TEST_CASE("shifted converged solution is feasible at the next state") {
  const OcpSpec spec = box_spec();
  MpcOptions opt;
  opt.solver.tol_feas = 1e-10;
  MpcController c(spec, opt);
  Vector x = on_path(spec, 0.0);
  for (int k = 0; k < 3; ++k) {
    const auto st = mpc_step(c, x);
    REQUIRE(st.diagnostics.status == NlpStatus::kConverged);
    x = rk4_step(*spec.model, x, st.u, spec.step);
    const Vector shifted = shift_warm_start(st.diagnostics.solution, spec);
    const OcpTranscription tr = assemble_nlp(spec, x);
    CHECK(tr.problem.eval_eq(shifted).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(tr.problem.eval_ineq(shifted).minCoeff() >= -1e-8);
    CHECK(max_violation(tr.problem, shifted) <= 1e-8);
  }
}

TEST_CASE("shift of a steady trajectory is a fixed point") {
  const OcpSpec spec = box_spec();
  const Vector z = steady_on_path(spec, 0.4);
  CHECK((shift_warm_start(z, spec) - z).norm() == 0.0);
  CHECK_THROWS_AS(shift_warm_start(Vector::Zero(3), spec), std::invalid_argument);
}

TEST_CASE("single-step horizon shift appends the steady pair") {
  OcpSpec spec = box_spec(1);
  spec.obstacles.clear();
  const DecisionLayout L(spec);
  Vector z = Vector::Zero(L.num_vars());
  z.segment(L.state(0), 3) = Eigen::Vector3d(0.1, 0.2, 0.3);
  z.segment(L.input(0), 2) = Eigen::Vector2d(0.2, -1);
  z.segment(L.state(1), 3) = Eigen::Vector3d(1, 2, 3);
  z.segment(L.input(1), 2) = Eigen::Vector2d(0, 0);
  z[L.progress()] = 0.7;
  const Vector s = shift_warm_start(z, spec);
  CHECK((s.segment(L.state(0), 3) - Eigen::Vector3d(1, 2, 3)).norm() == 0.0);
  CHECK((s.segment(L.state(1), 3) - Eigen::Vector3d(1, 2, 3)).norm() == 0.0);
  CHECK(s.segment(L.input(0), 2).norm() == 0.0);
  CHECK(s[L.progress()] == 0.7);
}

TEST_CASE("cold start on the path is immediately feasible") {
  const OcpSpec spec = box_spec();
  const Vector x0 = on_path(spec, 0.0);
  const Vector z = cold_start(spec, x0);
  const DecisionLayout L(spec);
  CHECK(z[L.progress()] == 0.0);
  CHECK(max_violation(assemble_nlp(spec, x0).problem, z) <= 1e-12);
}

TEST_CASE("cold start picks the nearest grid sample") {
  const OcpSpec spec = box_spec();
  const Vector x0 = on_path(spec, 0.31) + Eigen::Vector3d(0.03, -0.02, 0.05);
  // Grid argmin computed here from the lifted states.
  double best = 1e300, s_best = -1;
  for (int i = 0; i < 200; ++i) {
    const double s = i / 199.0;
    const double d = (x0 - on_path(spec, s)).norm();
    if (d < best) {
      best = d;
      s_best = s;
    }
  }
  const Vector z = cold_start(spec, x0, 200, 0);
  CHECK(z[DecisionLayout(spec).progress()] == s_best);
}

TEST_CASE("cold start inside an obstacle faults") {
  const OcpSpec spec = box_spec();
  CHECK_THROWS_AS(cold_start(spec, Eigen::Vector3d(1.25, 0, 0)), ControllerFault);
  MpcController c(spec);
  CHECK_THROWS_AS(mpc_step(c, Eigen::Vector3d(1.25, 0, 0)), ControllerFault);
  CHECK_THROWS_AS(cold_start(spec, Eigen::Vector3d(0, 0, 0), 1), std::invalid_argument);
}

TEST_CASE("first solve stopped early from an off-path start faults") {
  const OcpSpec spec = box_spec();
  MpcOptions opt;
  opt.solver.max_outer = 1;
  opt.solver.max_inner = 1;
  opt.cold_start_iterations = 0;
  MpcController c(spec, opt);
  CHECK_THROWS_AS(mpc_step(c, Eigen::Vector3d(0.3, -0.4, 0.0)), ControllerFault);
}

TEST_CASE("solver failure falls back to the shifted candidate") {
  const OcpSpec spec = box_spec();
  MpcController c(spec);
  const Vector x0 = on_path(spec, 0.0);
  const auto s0 = mpc_step(c, x0);
  REQUIRE(s0.diagnostics.status == NlpStatus::kConverged);

  MpcOptions starved = c.options();
  starved.solver.max_outer = 1;
  starved.solver.max_inner = 1;
  starved.solver.tol_stat = 1e-14;
  c.set_options(starved);
  const auto s1 = mpc_step(c, rk4_step(*spec.model, x0, s0.u, spec.step));
  const DecisionLayout L(spec);
  CHECK(s1.diagnostics.status == NlpStatus::kMaxIterations);
  CHECK(s1.diagnostics.source == StepSource::kFallback);
  CHECK((s1.u - s0.diagnostics.solution.segment(L.input(1), 2)).norm() == 0.0);
  REQUIRE(s1.monitors);
  CHECK(s1.monitors->shift_feasible_ok);
}

TEST_CASE("monitors: steady pass, injected increase fails") {
  const StepDiagnostics a = steady_diag(0.0), b = steady_diag(0.0);
  const MonitorVerdict ok = evaluate_monitors(a, b);
  CHECK(ok.ok());
  CHECK(ok.lyapunov_slack == 0.0);

  StepDiagnostics bumped = steady_diag(1.0);
  bumped.offset = 0.0;
  const MonitorVerdict bad = evaluate_monitors(a, bumped);
  CHECK_FALSE(bad.lyapunov_decrease_ok);
  CHECK(bad.lyapunov_slack == doctest::Approx(-1.0));

  StepDiagnostics infeasible = steady_diag(0.0);
  infeasible.candidate_violation = 1e-3;
  CHECK_FALSE(evaluate_monitors(a, infeasible).shift_feasible_ok);

  // Gap grows while the tracking gap shrinks.
  StepDiagnostics p = steady_diag(10.0), q = steady_diag(9.0);
  p.offset = 8.0;
  p.tracking_gap = 1.0;
  q.offset = 5.0;
  q.tracking_gap = 0.5;
  const MonitorVerdict trend = evaluate_monitors(p, q);
  CHECK(trend.lyapunov_decrease_ok);
  CHECK_FALSE(trend.gap_trend_ok);
  CHECK(trend.gap_change == doctest::Approx(2.0));

  StepDiagnostics low = steady_diag(1.0);
  low.offset = 2.0;
  CHECK_FALSE(evaluate_monitors(a, low).offset_bound_ok);
}

TEST_CASE("value lower bound") {
  const OcpSpec spec = box_spec();
  MpcController c(spec);
  const Vector xt = on_path(spec, 1.0);
  CHECK(c.value_lower_bound(xt) == 0.0);
  const double near = c.value_lower_bound(xt + Eigen::Vector3d(0.01, 0, 0));
  const double far = c.value_lower_bound(xt + Eigen::Vector3d(1, 0, 0));
  CHECK(near > 0.0);
  CHECK(far > near);
  // Quartic branch near the target: 1/2 * (0.1 / 3) * r^4.
  CHECK(near == doctest::Approx(0.5 * 0.1 / 3 * 1e-8).epsilon(1e-12));
  MpcController base(box_spec(10, OcpMode::kTargetTracking));
  CHECK(base.value_lower_bound(Eigen::Vector3d::Zero()) == 0.0);
}

TEST_CASE("baseline reaches a directly reachable target") {
  OcpSpec spec = box_spec(10, OcpMode::kTargetTracking);
  spec.obstacles.clear();
  spec.target_config = Eigen::Vector3d(0.6, 0.2, 0.0);
  MpcController c(spec);
  Vector x = Eigen::Vector3d::Zero();
  int k = 0;
  for (; k < 150 && (x.head<2>() - spec.target_config.head<2>()).norm() > 0.05; ++k) {
    const auto st = baseline_tracking_step(c, x);
    CHECK(spec.input_bounds().contains(st.u, 1e-12));
    x = rk4_step(*spec.model, x, st.u, spec.step);
  }
  CHECK((x.head<2>() - spec.target_config.head<2>()).norm() <= 0.05);

  MpcController at(spec);
  const auto st = baseline_tracking_step(at, spec.target_config);
  CHECK(st.u.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("step functions check the controller mode") {
  MpcController proposed(box_spec());
  MpcController base(box_spec(10, OcpMode::kTargetTracking));
  CHECK_THROWS_AS(baseline_tracking_step(proposed, Eigen::Vector3d::Zero()),
                  std::invalid_argument);
  CHECK_THROWS_AS(mpc_step(base, Eigen::Vector3d::Zero()), std::invalid_argument);
  CHECK_THROWS_AS(proposed.step(Eigen::Vector2d::Zero()), std::invalid_argument);
}
