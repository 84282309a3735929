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

// YAML scenario files.
//
// Every setting has a dotted key (`cost.w_pos`, `solver.tol_feas`, ...).
// Files may nest tables or spell keys dotted at any level, so the flat
// listing produced by effective_config() is itself a loadable scenario.
// Command-line overrides use the same keys with a YAML value:
//
//   horizon.N=20   path.waypoints=[[0,0],[2,0],[2,2]]   mode=baseline

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pathmpc/sim.hpp"

namespace pathmpc {

/// Parse or validation failure. line and column are 1-based; 0 when the
/// problem has no location (missing file, cross-field validation).
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& source, int line, int column, const std::string& message);

  const std::string& source() const { return source_; }
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string source_;
  int line_;
  int column_;
  std::string detail_;
};

/// Parses scenario text without validating it.
Scenario parse_scenario(const std::string& text, const std::string& source = "<string>");

/// Reads `path`, applies `overrides` ("key=value") in order, then validates.
Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides = {});

/// Applies one "key=value" assignment.
void apply_override(Scenario& scenario, const std::string& assignment);

/// Every key with its current value, one "key: value" line each.
std::string effective_config(const Scenario& scenario);

/// All recognised keys in canonical order.
std::vector<std::string> scenario_keys();

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

}  // namespace pathmpc
