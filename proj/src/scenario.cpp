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

#include "pathmpc/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace pathmpc {

ScenarioError::ScenarioError(const std::string& source, int line, int column,
                             const std::string& message)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ":" +
                                        std::to_string(column) + ": " + message
                                  : source + ": " + message),
      source_(source),
      line_(line),
      column_(column),
      detail_(message) {}

std::string format_number(double value) {
  if (std::isnan(value)) return ".nan";
  if (std::isinf(value)) return value > 0 ? ".inf" : "-.inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  std::string out(buf, res.ptr);
  // Keep doubles recognisable as floats when read back by other YAML tools.
  if (out.find_first_of(".eE") == std::string::npos) out += ".0";
  return out;
}

namespace {

// Thrown by setters; carries the offending node for its location.
struct ValueError {
  YAML::Mark mark;
  std::string message;
};

[[noreturn]] void bad(const YAML::Node& node, const std::string& message) {
  throw ValueError{node.Mark(), message};
}

double as_double(const YAML::Node& n) {
  if (!n.IsScalar()) bad(n, "expected a number");
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    bad(n, "expected a number, got '" + n.Scalar() + "'");
  }
}

int as_int(const YAML::Node& n) {
  if (!n.IsScalar()) bad(n, "expected an integer");
  try {
    return n.as<int>();
  } catch (const YAML::Exception&) {
    bad(n, "expected an integer, got '" + n.Scalar() + "'");
  }
}

std::string as_string(const YAML::Node& n) {
  if (!n.IsScalar()) bad(n, "expected a string");
  return n.Scalar();
}

Vector as_vector(const YAML::Node& n, Eigen::Index size) {
  if (!n.IsSequence()) bad(n, "expected a list of " + std::to_string(size) + " numbers");
  if (size >= 0 && static_cast<Eigen::Index>(n.size()) != size)
    bad(n, "expected " + std::to_string(size) + " numbers, got " + std::to_string(n.size()));
  Vector v(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) v[static_cast<Eigen::Index>(i)] = as_double(n[i]);
  return v;
}

Eigen::Vector2d as_point(const YAML::Node& n) { return as_vector(n, 2); }

Waypoints as_waypoints(const YAML::Node& n) {
  if (!n.IsSequence()) bad(n, "expected a list of [x, y] points");
  Waypoints w;
  for (const auto& p : n) w.push_back(as_point(p));
  return w;
}

ConvexPolytope as_obstacle(const YAML::Node& n) {
  if (!n.IsMap()) bad(n, "obstacle must be {box: [xmin, ymin, xmax, ymax]} or {A: ..., b: ...}");
  if (n["box"]) {
    if (n.size() != 1) bad(n, "box obstacle takes no other fields");
    const Vector b = as_vector(n["box"], 4);
    if (!(b[0] < b[2] && b[1] < b[3])) bad(n["box"], "box needs xmin < xmax and ymin < ymax");
    return ConvexPolytope::box(b[0], b[1], b[2], b[3]);
  }
  if (!n["A"] || !n["b"] || n.size() != 2) bad(n, "halfspace obstacle needs exactly A and b");
  const YAML::Node a = n["A"];
  if (!a.IsSequence() || a.size() == 0) bad(a, "A must be a non-empty list of [ax, ay] rows");
  const Vector b = as_vector(n["b"], static_cast<Eigen::Index>(a.size()));
  Eigen::MatrixX2d normals(a.size(), 2);
  for (std::size_t i = 0; i < a.size(); ++i)
    normals.row(static_cast<Eigen::Index>(i)) = as_point(a[i]).transpose();
  try {
    return ConvexPolytope(normals, b);
  } catch (const std::invalid_argument& e) {
    bad(n, e.what());
  }
}

std::string fmt(const Vector& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_number(v[i]);
  return out + "]";
}

std::string fmt(const Waypoints& w) {
  std::string out = "[";
  for (std::size_t i = 0; i < w.size(); ++i) out += (i ? ", " : "") + fmt(Vector(w[i]));
  return out + "]";
}

std::string fmt(const std::vector<ConvexPolytope>& obstacles) {
  std::string out = "[";
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const auto& o = obstacles[i];
    Waypoints rows;
    for (Eigen::Index r = 0; r < o.num_faces(); ++r) rows.push_back(o.normals().row(r));
    out += (i ? ", " : "") + std::string("{A: ") + fmt(rows) + ", b: " + fmt(o.offsets()) + "}";
  }
  return out + "]";
}

std::string quote(const std::string& s) {
  YAML::Emitter e;
  e << YAML::DoubleQuoted << s;
  return e.c_str();
}

struct Key {
  std::string name;
  std::function<void(Scenario&, const YAML::Node&)> set;
  std::function<std::string(const Scenario&)> get;
};

template <typename Field>
Key number_key(std::string name, Field field) {
  return {std::move(name), [field](Scenario& s, const YAML::Node& n) { field(s) = as_double(n); },
          [field](const Scenario& s) { return format_number(field(const_cast<Scenario&>(s))); }};
}

template <typename Field>
Key int_key(std::string name, Field field) {
  return {std::move(name), [field](Scenario& s, const YAML::Node& n) { field(s) = as_int(n); },
          [field](const Scenario& s) { return std::to_string(field(const_cast<Scenario&>(s))); }};
}

template <typename Field>
Key vector_key(std::string name, Field field, Eigen::Index size) {
  return {std::move(name),
          [field, size](Scenario& s, const YAML::Node& n) { field(s) = as_vector(n, size); },
          [field](const Scenario& s) { return fmt(Vector(field(const_cast<Scenario&>(s)))); }};
}

const std::vector<Key>& registry() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    k.push_back({"name", [](Scenario& s, const YAML::Node& n) { s.name = as_string(n); },
                 [](const Scenario& s) { return quote(s.name); }});
    k.push_back({"mode",
                 [](Scenario& s, const YAML::Node& n) {
                   const std::string v = as_string(n);
                   if (v == "proposed") s.mode = ControllerMode::kProposed;
                   else if (v == "baseline") s.mode = ControllerMode::kBaseline;
                   else bad(n, "mode must be 'proposed' or 'baseline'");
                 },
                 [](const Scenario& s) { return std::string(to_string(s.mode)); }});
    k.push_back({"seed",
                 [](Scenario& s, const YAML::Node& n) {
                   try {
                     s.rng_seed = n.as<std::uint64_t>();
                   } catch (const YAML::Exception&) {
                     bad(n, "seed must be a non-negative integer");
                   }
                 },
                 [](const Scenario& s) { return std::to_string(s.rng_seed); }});
    k.push_back({"model.type",
                 [](Scenario& s, const YAML::Node& n) {
                   s.model = as_string(n);
                   if (s.model != "diff_drive") bad(n, "only model.type diff_drive is supported");
                 },
                 [](const Scenario& s) { return s.model; }});
    k.push_back(number_key("model.robot_radius", [](Scenario& s) -> double& { return s.robot_radius; }));
    k.push_back(vector_key("model.input_lower", [](Scenario& s) -> Vector& { return s.input_lower; }, 2));
    k.push_back(vector_key("model.input_upper", [](Scenario& s) -> Vector& { return s.input_upper; }, 2));
    k.push_back({"initial_state",
                 [](Scenario& s, const YAML::Node& n) {
                   s.initial_state = n.IsNull() ? Vector() : as_vector(n, 3);
                 },
                 [](const Scenario& s) {
                   return s.initial_state.size() == 0 ? std::string("null") : fmt(s.initial_state);
                 }});
    k.push_back(int_key("horizon.N", [](Scenario& s) -> int& { return s.horizon; }));
    k.push_back(number_key("horizon.h", [](Scenario& s) -> double& { return s.step; }));
    k.push_back({"path.type",
                 [](Scenario& s, const YAML::Node& n) {
                   const std::string v = as_string(n);
                   using K = PathConfig::Kind;
                   if (v == "sinusoid") s.path.kind = K::kSinusoid;
                   else if (v == "polyline") s.path.kind = K::kPolyline;
                   else if (v == "constant") s.path.kind = K::kConstant;
                   else if (v == "planned") s.path.kind = K::kPlanned;
                   else bad(n, "path.type must be sinusoid, polyline, constant or planned");
                 },
                 [](const Scenario& s) { return std::string(to_string(s.path.kind)); }});
    k.push_back(number_key("path.length", [](Scenario& s) -> double& { return s.path.length; }));
    k.push_back(number_key("path.amplitude", [](Scenario& s) -> double& { return s.path.amplitude; }));
    k.push_back({"path.waypoints",
                 [](Scenario& s, const YAML::Node& n) { s.path.waypoints = as_waypoints(n); },
                 [](const Scenario& s) { return fmt(s.path.waypoints); }});
    k.push_back(number_key("path.corner_radius", [](Scenario& s) -> double& { return s.path.corner_radius; }));
    k.push_back({"path.pose",
                 [](Scenario& s, const YAML::Node& n) {
                   s.path.constant = n.IsNull() ? Vector() : as_vector(n, 3);
                 },
                 [](const Scenario& s) {
                   return s.path.constant.size() == 0 ? std::string("null") : fmt(s.path.constant);
                 }});
    k.push_back({"path.start",
                 [](Scenario& s, const YAML::Node& n) { s.path.start = as_point(n); },
                 [](const Scenario& s) { return fmt(Vector(s.path.start)); }});
    k.push_back({"path.goal",
                 [](Scenario& s, const YAML::Node& n) { s.path.goal = as_point(n); },
                 [](const Scenario& s) { return fmt(Vector(s.path.goal)); }});
    k.push_back({"path.planner.bounds_min",
                 [](Scenario& s, const YAML::Node& n) { s.path.planner.bounds_min = as_point(n); },
                 [](const Scenario& s) { return fmt(Vector(s.path.planner.bounds_min)); }});
    k.push_back({"path.planner.bounds_max",
                 [](Scenario& s, const YAML::Node& n) { s.path.planner.bounds_max = as_point(n); },
                 [](const Scenario& s) { return fmt(Vector(s.path.planner.bounds_max)); }});
    k.push_back(int_key("path.planner.iterations", [](Scenario& s) -> int& { return s.path.planner.max_iterations; }));
    k.push_back(number_key("path.planner.steer_step", [](Scenario& s) -> double& { return s.path.planner.steer_step; }));
    k.push_back(number_key("path.planner.goal_bias", [](Scenario& s) -> double& { return s.path.planner.goal_bias; }));
    k.push_back(number_key("path.planner.rewire_radius", [](Scenario& s) -> double& { return s.path.planner.rewire_radius; }));
    k.push_back(number_key("path.planner.clearance", [](Scenario& s) -> double& { return s.path.planner.clearance; }));
    k.push_back({"obstacles",
                 [](Scenario& s, const YAML::Node& n) {
                   s.obstacles.clear();
                   if (n.IsNull()) return;
                   if (!n.IsSequence()) bad(n, "obstacles must be a list");
                   for (const auto& o : n) s.obstacles.push_back(as_obstacle(o));
                 },
                 [](const Scenario& s) { return fmt(s.obstacles); }});
    k.push_back(number_key("cost.w_pos", [](Scenario& s) -> double& { return s.weights.w_pos; }));
    k.push_back(number_key("cost.w_theta", [](Scenario& s) -> double& { return s.weights.w_theta; }));
    k.push_back(number_key("cost.w_v", [](Scenario& s) -> double& { return s.weights.w_v; }));
    k.push_back(number_key("cost.w_omega", [](Scenario& s) -> double& { return s.weights.w_omega; }));
    k.push_back(number_key("cost.offset_weight", [](Scenario& s) -> double& { return s.offset_weight; }));
    k.push_back(number_key("cost.delta_sep", [](Scenario& s) -> double& { return s.delta_sep; }));
    k.push_back(number_key("solver.tol_stat", [](Scenario& s) -> double& { return s.controller.solver.tol_stat; }));
    k.push_back(number_key("solver.tol_feas", [](Scenario& s) -> double& { return s.controller.solver.tol_feas; }));
    k.push_back(number_key("solver.tol_comp", [](Scenario& s) -> double& { return s.controller.solver.tol_comp; }));
    k.push_back(int_key("solver.max_outer", [](Scenario& s) -> int& { return s.controller.solver.max_outer; }));
    k.push_back(int_key("solver.max_inner", [](Scenario& s) -> int& { return s.controller.solver.max_inner; }));
    k.push_back(int_key("solver.memory", [](Scenario& s) -> int& { return s.controller.solver.memory; }));
    k.push_back(number_key("solver.penalty_init", [](Scenario& s) -> double& { return s.controller.solver.penalty_init; }));
    k.push_back(number_key("solver.penalty_factor", [](Scenario& s) -> double& { return s.controller.solver.penalty_factor; }));
    k.push_back(number_key("solver.penalty_max", [](Scenario& s) -> double& { return s.controller.solver.penalty_max; }));
    k.push_back(number_key("solver.inner_tol_init", [](Scenario& s) -> double& { return s.controller.solver.inner_tol_init; }));
    k.push_back(number_key("controller.monitor_tol", [](Scenario& s) -> double& { return s.controller.monitor_tol; }));
    k.push_back(number_key("controller.shift_tol", [](Scenario& s) -> double& { return s.controller.shift_tol; }));
    k.push_back(number_key("controller.warm_inner_tol", [](Scenario& s) -> double& { return s.controller.warm_inner_tol; }));
    k.push_back(int_key("controller.cold_start_grid", [](Scenario& s) -> int& { return s.controller.cold_start_grid; }));
    k.push_back(int_key("controller.cold_start_iterations", [](Scenario& s) -> int& { return s.controller.cold_start_iterations; }));
    k.push_back(int_key("termination.max_steps", [](Scenario& s) -> int& { return s.termination.max_steps; }));
    k.push_back(number_key("termination.target_tolerance", [](Scenario& s) -> double& { return s.termination.target_tolerance; }));
    k.push_back(number_key("termination.heading_tolerance", [](Scenario& s) -> double& { return s.termination.heading_tolerance; }));
    k.push_back({"sweep",
                 [](Scenario& s, const YAML::Node& n) {
                   s.sweep.clear();
                   if (n.IsNull()) return;
                   if (!n.IsSequence()) bad(n, "sweep must be a list of [N, h] pairs");
                   for (const auto& e : n) {
                     if (!e.IsSequence() || e.size() != 2) bad(e, "sweep entry must be [N, h]");
                     s.sweep.emplace_back(as_int(e[0]), as_double(e[1]));
                   }
                 },
                 [](const Scenario& s) {
                   std::string out = "[";
                   for (std::size_t i = 0; i < s.sweep.size(); ++i)
                     out += (i ? ", [" : "[") + std::to_string(s.sweep[i].first) + ", " +
                            format_number(s.sweep[i].second) + "]";
                   return out + "]";
                 }});
    return k;
  }();
  return keys;
}

const Key* find_key(const std::string& name) {
  for (const Key& k : registry())
    if (k.name == name) return &k;
  return nullptr;
}

void apply_map(Scenario& s, const YAML::Node& map, const std::string& prefix) {
  for (const auto& entry : map) {
    const YAML::Node& key_node = entry.first;
    if (!key_node.IsScalar()) bad(key_node, "table keys must be plain names");
    const std::string key = prefix.empty() ? key_node.Scalar() : prefix + "." + key_node.Scalar();
    if (const Key* k = find_key(key)) {
      k->set(s, entry.second);
    } else if (entry.second.IsMap()) {
      apply_map(s, entry.second, key);
    } else {
      bad(key_node, "unknown key '" + key + "'");
    }
  }
}

ScenarioError located(const std::string& source, const YAML::Mark& mark, const std::string& msg) {
  if (mark.is_null()) return ScenarioError(source, 0, 0, msg);
  return ScenarioError(source, mark.line + 1, mark.column + 1, msg);
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& source) {
  Scenario s;
  try {
    const YAML::Node root = YAML::Load(text);
    if (root.IsNull()) return s;
    if (!root.IsMap()) bad(root, "scenario must be a table");
    apply_map(s, root, "");
  } catch (const ValueError& e) {
    throw located(source, e.mark, e.message);
  } catch (const YAML::Exception& e) {
    throw located(source, e.mark, e.msg);
  }
  return s;
}

void apply_override(Scenario& scenario, const std::string& assignment) {
  const std::string source = "override '" + assignment + "'";
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ScenarioError(source, 0, 0, "expected key=value");
  const std::string key = assignment.substr(0, eq);
  const Key* k = find_key(key);
  if (!k) throw ScenarioError(source, 0, 0, "unknown key '" + key + "'");
  try {
    k->set(scenario, YAML::Load(assignment.substr(eq + 1)));
  } catch (const ValueError& e) {
    // Columns are reported relative to the full assignment.
    throw ScenarioError(source, 1, static_cast<int>(eq) + 2 + (e.mark.is_null() ? 0 : e.mark.column),
                        e.message);
  } catch (const YAML::Exception& e) {
    throw ScenarioError(source, 1, static_cast<int>(eq) + 2 + (e.mark.is_null() ? 0 : e.mark.column),
                        e.msg);
  }
}

Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path, 0, 0, "cannot open scenario file");
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario s = parse_scenario(buf.str(), path);
  for (const auto& o : overrides) apply_override(s, o);
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(path, 0, 0, e.what());
  }
  return s;
}

std::string effective_config(const Scenario& scenario) {
  std::string out;
  for (const Key& k : registry()) out += k.name + ": " + k.get(scenario) + "\n";
  return out;
}

std::vector<std::string> scenario_keys() {
  std::vector<std::string> names;
  for (const Key& k : registry()) names.push_back(k.name);
  return names;
}

}  // namespace pathmpc
