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

// pathmpc-cli: scenario runner.
//
// Exit codes
//   0  success (goal reached, checks passed, path found)
//   1  usage, parse, validation or I/O error
//   2  timeout (simulate, sweep) or no path found (plan)
//   3  controller fault (simulate, sweep)
//   4  assumption or derivative check failed (verify, gradcheck)

#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pathmpc/pathmpc.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitTimeout = 2;
constexpr int kExitFault = 3;
constexpr int kExitCheckFailed = 4;

struct ScenarioDeleter {
  void operator()(pathmpc_scenario* s) const { pathmpc_scenario_free(s); }
};
struct RunDeleter {
  void operator()(pathmpc_run* r) const { pathmpc_run_free(r); }
};
struct SweepDeleter {
  void operator()(pathmpc_sweep* w) const { pathmpc_sweep_free(w); }
};
struct PlanDeleter {
  void operator()(pathmpc_plan* p) const { pathmpc_plan_free(p); }
};
struct StringDeleter {
  void operator()(char* s) const { pathmpc_string_free(s); }
};
using ScenarioPtr = std::unique_ptr<pathmpc_scenario, ScenarioDeleter>;
using OwnedString = std::unique_ptr<char, StringDeleter>;

int report_error(const char* context) {
  std::fprintf(stderr, "pathmpc-cli: %s: %s\n", context, pathmpc_last_error());
  return kExitError;
}

struct Common {
  std::string scenario;
  std::vector<std::string> overrides;
  std::string out_dir = "out";
};

// Loads, applies overrides and validates. Null on failure (already reported).
ScenarioPtr load(const Common& c) {
  pathmpc_scenario* raw = nullptr;
  if (pathmpc_scenario_load(c.scenario.c_str(), &raw) != PATHMPC_OK) {
    report_error("scenario");
    return nullptr;
  }
  ScenarioPtr s(raw);
  for (const auto& o : c.overrides) {
    if (pathmpc_scenario_override(s.get(), o.c_str()) != PATHMPC_OK) {
      report_error("override");
      return nullptr;
    }
  }
  if (pathmpc_scenario_validate(s.get()) != PATHMPC_OK) {
    report_error("scenario");
    return nullptr;
  }
  return s;
}

int outcome_exit(pathmpc_outcome o) {
  switch (o) {
    case PATHMPC_OUTCOME_SUCCESS: return kExitOk;
    case PATHMPC_OUTCOME_TIMEOUT: return kExitTimeout;
    case PATHMPC_OUTCOME_FAULT: return kExitFault;
  }
  return kExitError;
}

const char* outcome_name(pathmpc_outcome o) {
  switch (o) {
    case PATHMPC_OUTCOME_SUCCESS: return "success";
    case PATHMPC_OUTCOME_TIMEOUT: return "timeout";
    case PATHMPC_OUTCOME_FAULT: return "fault";
  }
  return "unknown";
}

int simulate(const Common& c) {
  ScenarioPtr s = load(c);
  if (!s) return kExitError;
  pathmpc_run* raw = nullptr;
  if (pathmpc_simulate(s.get(), &raw) != PATHMPC_OK) return report_error("simulate");
  std::unique_ptr<pathmpc_run, RunDeleter> run(raw);
  if (pathmpc_run_write(run.get(), c.out_dir.c_str()) != PATHMPC_OK) return report_error("write");
  pathmpc_summary sum{};
  pathmpc_run_summary(run.get(), &sum);
  std::printf("outcome %s  steps %d  final distance %.4g  path length %.4g  min margin %.3g\n",
              outcome_name(sum.outcome), sum.steps, sum.final_distance, sum.path_length,
              sum.min_margin);
  std::printf("monitor failures %d  fallback steps %d  wall time %.1f s\n", sum.monitor_failures,
              sum.fallback_steps, sum.wall_time_s);
  if (sum.outcome == PATHMPC_OUTCOME_FAULT)
    std::fprintf(stderr, "pathmpc-cli: fault: %s\n", pathmpc_run_fault(run.get()));
  std::printf("artifacts in %s\n", c.out_dir.c_str());
  return outcome_exit(sum.outcome);
}

// "5:0.2,10:0.2" -> pairs. Throws on malformed entries.
std::vector<std::pair<int, double>> parse_horizons(const std::string& text) {
  std::vector<std::pair<int, double>> out;
  std::stringstream list(text);
  for (std::string item; std::getline(list, item, ',');) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("expected N:h, got '" + item + "'");
    std::size_t used = 0;
    const int n = std::stoi(item.substr(0, colon), &used);
    const std::string h_text = item.substr(colon + 1);
    const double h = std::stod(h_text, &used);
    if (used != h_text.size()) throw std::invalid_argument("bad step in '" + item + "'");
    out.emplace_back(n, h);
  }
  return out;
}

int sweep(const Common& c, const std::string& horizons, bool horizons_given, unsigned threads) {
  ScenarioPtr s = load(c);
  if (!s) return kExitError;
  std::vector<int> ns;
  std::vector<double> hs;
  if (horizons_given) {
    try {
      for (const auto& [n, h] : parse_horizons(horizons)) {
        ns.push_back(n);
        hs.push_back(h);
      }
    } catch (const std::exception& e) {
      std::fprintf(stderr, "pathmpc-cli: --horizons: %s\n", e.what());
      return kExitError;
    }
  } else {
    std::size_t count = 0;
    pathmpc_scenario_sweep_size(s.get(), &count);
    for (std::size_t i = 0; i < count; ++i) {
      int n = 0;
      double h = 0.0;
      pathmpc_scenario_sweep_entry(s.get(), i, &n, &h);
      ns.push_back(n);
      hs.push_back(h);
    }
  }
  pathmpc_sweep* raw = nullptr;
  if (pathmpc_sweep_run(s.get(), ns.data(), hs.data(), ns.size(), threads, &raw) != PATHMPC_OK)
    return report_error("sweep");
  std::unique_ptr<pathmpc_sweep, SweepDeleter> w(raw);
  if (pathmpc_sweep_write(w.get(), c.out_dir.c_str()) != PATHMPC_OK) return report_error("write");
  int worst = kExitOk;
  std::printf("%6s %6s %8s %6s %12s %14s\n", "N", "h", "outcome", "steps", "path_length",
              "cost");
  for (std::size_t i = 0; i < pathmpc_sweep_size(w.get()); ++i) {
    int n = 0;
    double h = 0.0;
    pathmpc_summary sum{};
    pathmpc_sweep_row(w.get(), i, &n, &h, &sum);
    std::printf("%6d %6g %8s %6d %12.6g %14.6g\n", n, h, outcome_name(sum.outcome), sum.steps,
                sum.path_length, sum.closed_loop_cost);
    worst = std::max(worst, outcome_exit(sum.outcome));
  }
  std::printf("artifacts in %s\n", c.out_dir.c_str());
  return worst;
}

int verify(const Common& c) {
  ScenarioPtr s = load(c);
  if (!s) return kExitError;
  pathmpc_verify_report r{};
  char* text = nullptr;
  if (pathmpc_verify(s.get(), &r, &text) != PATHMPC_OK) return report_error("verify");
  OwnedString owned(text);
  std::fputs(text, stdout);
  const bool ok = r.clearance_ok && r.exponent_ok;
  std::printf("verify: %s\n", ok ? "pass" : "FAIL");
  return ok ? kExitOk : kExitCheckFailed;
}

int plan(const Common& c) {
  ScenarioPtr s = load(c);
  if (!s) return kExitError;
  pathmpc_plan* raw = nullptr;
  const pathmpc_status st = pathmpc_plan_run(s.get(), &raw);
  std::unique_ptr<pathmpc_plan, PlanDeleter> p(raw);
  if (st != PATHMPC_OK && st != PATHMPC_ERR_NOT_FOUND) return report_error("plan");
  if (pathmpc_plan_write(p.get(), c.out_dir.c_str()) != PATHMPC_OK) return report_error("write");
  if (st == PATHMPC_ERR_NOT_FOUND) {
    std::fprintf(stderr, "pathmpc-cli: plan: %s\n", pathmpc_last_error());
    return kExitTimeout;
  }
  std::printf("waypoints %zu  length %.6g\n", pathmpc_plan_size(p.get()),
              pathmpc_plan_length(p.get()));
  std::printf("artifacts in %s\n", c.out_dir.c_str());
  return kExitOk;
}

int gradcheck(const Common& c, int samples, std::uint64_t seed, double tol) {
  ScenarioPtr s = load(c);
  if (!s) return kExitError;
  pathmpc_gradcheck_report r{};
  if (pathmpc_gradcheck(s.get(), samples, seed, &r) != PATHMPC_OK)
    return report_error("gradcheck");
  const double worst = std::max({r.objective, r.eq_jacobian, r.ineq_jacobian});
  std::printf("max |fd - analytic|: objective %.3e  equality %.3e  inequality %.3e\n",
              r.objective, r.eq_jacobian, r.ineq_jacobian);
  const bool ok = worst <= tol;
  std::printf("gradcheck: %s (tolerance %.1e, %d samples)\n", ok ? "pass" : "FAIL", tol, samples);
  return ok ? kExitOk : kExitCheckFailed;
}

void add_common(CLI::App* cmd, Common& c, bool with_out) {
  cmd->add_option("scenario", c.scenario, "Scenario YAML file")->required();
  cmd->add_option("--set", c.overrides, "Override a setting, key=value (repeatable)");
  if (with_out) cmd->add_option("-o,--out", c.out_dir, "Output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path-anchored MPC scenario runner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pathmpc_version());

  Common common;
  auto* sim = app.add_subcommand("simulate", "Closed-loop run; writes log.csv, summary.yaml, SVG");
  add_common(sim, common, true);

  auto* sw = app.add_subcommand("sweep", "Closed loops over several (N, h) pairs");
  add_common(sw, common, true);
  std::string horizons;
  unsigned threads = 0;
  auto* horizons_opt =
      sw->add_option("--horizons", horizons, "Comma-separated N:h pairs, e.g. 5:0.2,10:0.2");
  sw->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");

  auto* ver = app.add_subcommand("verify", "Check path clearance and the cost-controllability exponent");
  add_common(ver, common, false);

  auto* pl = app.add_subcommand("plan", "RRT* between path.start and path.goal");
  add_common(pl, common, true);

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the OCP derivatives");
  add_common(gc, common, false);
  int samples = 20;
  std::uint64_t seed = 1;
  double tol = 1e-5;
  gc->add_option("--samples", samples, "Random decision vectors")->capture_default_str();
  gc->add_option("--seed", seed, "Sampling seed")->capture_default_str();
  gc->add_option("--tol", tol, "Maximum absolute mismatch")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  if (*sim) return simulate(common);
  if (*sw) return sweep(common, horizons, horizons_opt->count() > 0, threads);
  if (*ver) return verify(common);
  if (*pl) return plan(common);
  if (*gc) return gradcheck(common, samples, seed, tol);
  return kExitError;
}
