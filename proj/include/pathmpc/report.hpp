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

// Artifact writers. CSV outputs contain no timing so that repeated runs are
// byte-identical; wall times go to the summary and to timing.csv.

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "pathmpc/sim.hpp"

namespace pathmpc {

/// Column order of write_log_csv.
const std::vector<std::string>& log_csv_columns();

void write_log_csv(const ClosedLoopLog& log, std::ostream& out);
/// k, solve_ms per step.
void write_timing_csv(const ClosedLoopLog& log, std::ostream& out);
/// YAML: summary table, timing table, then the effective config.
void write_summary(const ClosedLoopLog& log, const Scenario& scenario, std::ostream& out);
void write_trajectory_svg(const ClosedLoopLog& log, const Scenario& scenario, std::ostream& out);

const std::vector<std::string>& sweep_csv_columns();
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);
void write_sweep_svg(const std::vector<SweepRow>& rows, const Scenario& scenario,
                     std::ostream& out);

/// x, y per waypoint.
void write_waypoints_csv(const Waypoints& waypoints, std::ostream& out);
void write_plan_svg(const Waypoints* waypoints, const PlannerTree& tree, const Scenario& scenario,
                    std::ostream& out);

}  // namespace pathmpc
