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

#include "pathmpc/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "pathmpc/scenario.hpp"

namespace pathmpc {
namespace {

std::string num(double v) { return format_number(v); }

// CSV cells: missing values stay empty, infinities use the spelling most
// CSV readers accept.
std::string cell(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_number(v);
}

std::string quoted(const std::string& text) {
  std::string q = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') q += '\\';
    q += c == '\n' ? ' ' : c;
  }
  return q + "\"";
}

std::string flag(bool b) { return b ? "1" : "0"; }

// Bounding box of everything drawn, padded.
struct Frame {
  double xmin = std::numeric_limits<double>::infinity();
  double ymin = std::numeric_limits<double>::infinity();
  double xmax = -std::numeric_limits<double>::infinity();
  double ymax = -std::numeric_limits<double>::infinity();

  void add(const Eigen::Vector2d& p) {
    if (!p.allFinite()) return;
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
};

class Svg {
 public:
  Svg(Frame f, std::ostream& out) : out_(out) {
    if (!(f.xmin <= f.xmax)) f = Frame{-1.0, -1.0, 1.0, 1.0};
    const double pad = 0.05 * std::max({f.xmax - f.xmin, f.ymax - f.ymin, 1e-3});
    x0_ = f.xmin - pad;
    y1_ = f.ymax + pad;
    const double w = f.xmax - f.xmin + 2 * pad;
    const double h = f.ymax - f.ymin + 2 * pad;
    scale_ = 800.0 / std::max(w, h);
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << std::lround(w * scale_)
         << "\" height=\"" << std::lround(h * scale_) << "\">\n"
         << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }
  ~Svg() { out_ << "</svg>\n"; }

  std::string pt(const Eigen::Vector2d& p) const {
    std::ostringstream s;
    s.precision(6);
    s << (p.x() - x0_) * scale_ << "," << (y1_ - p.y()) * scale_;
    return s.str();
  }

  void polyline(const std::vector<Eigen::Vector2d>& pts, const std::string& style) {
    if (pts.empty()) return;
    out_ << "<polyline fill=\"none\" " << style << " points=\"";
    for (const auto& p : pts) out_ << pt(p) << " ";
    out_ << "\"/>\n";
  }

  void polygon(const std::vector<Eigen::Vector2d>& pts, const std::string& style) {
    out_ << "<polygon " << style << " points=\"";
    for (const auto& p : pts) out_ << pt(p) << " ";
    out_ << "\"/>\n";
  }

  void dot(const Eigen::Vector2d& p, const std::string& color, double r = 4.0) {
    const std::string xy = pt(p);
    const auto comma = xy.find(',');
    out_ << "<circle cx=\"" << xy.substr(0, comma) << "\" cy=\"" << xy.substr(comma + 1)
         << "\" r=\"" << r << "\" fill=\"" << color << "\"/>\n";
  }

  void text(const Eigen::Vector2d& p, const std::string& s) {
    const std::string xy = pt(p);
    const auto comma = xy.find(',');
    out_ << "<text x=\"" << xy.substr(0, comma) << "\" y=\"" << xy.substr(comma + 1)
         << "\" font-family=\"sans-serif\" font-size=\"14\">" << s << "</text>\n";
  }

 private:
  std::ostream& out_;
  double x0_ = 0.0;
  double y1_ = 0.0;
  double scale_ = 1.0;
};

std::vector<Eigen::Vector2d> sample_path(const ReferencePath& path, int n = 400) {
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i <= n; ++i) pts.push_back(path.eval(static_cast<double>(i) / n).head<2>());
  return pts;
}

std::vector<Eigen::Vector2d> positions(const std::vector<Vector>& states) {
  std::vector<Eigen::Vector2d> pts;
  for (const auto& x : states) pts.push_back(x.head<2>());
  return pts;
}

void draw_obstacles(Svg& svg, const Scenario& scenario) {
  for (const auto& o : scenario.inflated_obstacles())
    svg.polygon(o.vertices(), "fill=\"none\" stroke=\"#999\" stroke-dasharray=\"4 3\"");
  for (const auto& o : scenario.obstacles)
    svg.polygon(o.vertices(), "fill=\"#bbb\" stroke=\"#555\"");
}

void frame_obstacles(Frame& f, const Scenario& scenario) {
  for (const auto& o : scenario.inflated_obstacles())
    for (const auto& v : o.vertices()) f.add(v);
}

}  // namespace

const std::vector<std::string>& log_csv_columns() {
  static const std::vector<std::string> cols = {
      "k", "x", "y", "theta", "v", "omega", "value", "progress", "offset", "first_stage",
      "tracking_gap", "value_lower_bound", "clearance", "status", "source", "outer_iterations",
      "inner_iterations", "kkt_stationarity", "kkt_feasibility", "candidate_violation",
      "candidate_cost", "lyapunov_slack", "lyapunov_ok", "shift_violation", "shift_ok",
      "gap_change", "gap_trend_ok", "s_change", "offset_bound_ok"};
  return cols;
}

void write_log_csv(const ClosedLoopLog& log, std::ostream& out) {
  const auto& cols = log_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const LogRow& row : log.rows) {
    const StepDiagnostics& d = row.diag;
    out << d.k << "," << cell(d.x[0]) << "," << cell(d.x[1]) << "," << cell(d.x[2]) << ","
        << cell(d.u[0]) << "," << cell(d.u[1]) << "," << cell(d.value) << "," << cell(d.progress)
        << "," << cell(d.offset) << "," << cell(d.first_stage) << "," << cell(d.tracking_gap) << ","
        << cell(row.value_lower_bound) << "," << cell(row.clearance) << "," << to_string(d.status)
        << "," << to_string(d.source) << "," << d.outer_iterations << "," << d.inner_iterations
        << "," << cell(d.kkt_stationarity) << "," << cell(d.kkt_feasibility) << ","
        << cell(d.candidate_violation) << "," << cell(d.candidate_cost);
    if (row.monitors) {
      const MonitorVerdict& m = *row.monitors;
      out << "," << cell(m.lyapunov_slack) << "," << flag(m.lyapunov_decrease_ok) << ","
          << cell(m.shift_violation) << "," << flag(m.shift_feasible_ok) << ","
          << cell(m.gap_change) << "," << flag(m.gap_trend_ok) << "," << cell(m.s_change) << ","
          << flag(m.offset_bound_ok);
    } else {
      out << ",,,,,,,,";
    }
    out << "\n";
  }
}

void write_timing_csv(const ClosedLoopLog& log, std::ostream& out) {
  out << "k,solve_ms\n";
  for (const LogRow& row : log.rows) out << row.diag.k << "," << cell(row.diag.solve_ms) << "\n";
}

void write_summary(const ClosedLoopLog& log, const Scenario& scenario, std::ostream& out) {
  const ClosedLoopSummary& s = log.summary;
  out << "summary:\n"
      << "  scenario: " << quoted(scenario.name) << "\n"
      << "  mode: " << to_string(scenario.mode) << "\n"
      << "  outcome: " << to_string(s.outcome) << "\n"
      << "  steps: " << s.steps << "\n"
      << "  path_length: " << num(s.path_length) << "\n"
      << "  closed_loop_cost: " << num(s.closed_loop_cost) << "\n"
      << "  min_margin: " << num(s.min_margin) << "\n"
      << "  final_distance: " << num(s.final_distance) << "\n"
      << "  final_heading_error: " << num(s.final_heading_error) << "\n"
      << "  final_progress: " << num(s.final_progress) << "\n"
      << "  monitor_failures: " << s.monitor_failures << "\n"
      << "  lower_bound_violations: " << s.lower_bound_violations << "\n"
      << "  fallback_steps: " << s.fallback_steps << "\n";
  if (!s.fault.empty()) out << "  fault: " << quoted(s.fault) << "\n";
  double total_ms = 0.0, max_ms = 0.0;
  for (const LogRow& row : log.rows) {
    total_ms += row.diag.solve_ms;
    max_ms = std::max(max_ms, row.diag.solve_ms);
  }
  out << "timing:\n"
      << "  wall_time_s: " << num(s.wall_time_s) << "\n"
      << "  solve_ms_total: " << num(total_ms) << "\n"
      << "  solve_ms_max: " << num(max_ms) << "\n"
      << "  solve_ms_mean: " << num(log.rows.empty() ? 0.0 : total_ms / log.rows.size()) << "\n"
      << "config:\n";
  std::istringstream cfg(effective_config(scenario));
  for (std::string line; std::getline(cfg, line);) out << "  " << line << "\n";
}

void write_trajectory_svg(const ClosedLoopLog& log, const Scenario& scenario, std::ostream& out) {
  Frame f;
  frame_obstacles(f, scenario);
  const auto path = log.path ? sample_path(*log.path) : std::vector<Eigen::Vector2d>{};
  const auto traj = positions(log.states);
  for (const auto& p : path) f.add(p);
  for (const auto& p : traj) f.add(p);
  Svg svg(f, out);
  draw_obstacles(svg, scenario);
  svg.polyline(path, "stroke=\"#2a7\" stroke-width=\"2\" stroke-dasharray=\"6 4\"");
  svg.polyline(traj, "stroke=\"#c33\" stroke-width=\"2\"");
  if (!traj.empty()) svg.dot(traj.front(), "#333");
  if (log.target.size() >= 2) svg.dot(log.target.head<2>(), "#2a7", 5.0);
}

const std::vector<std::string>& sweep_csv_columns() {
  static const std::vector<std::string> cols = {
      "N", "h", "outcome", "steps", "path_length", "closed_loop_cost", "min_margin",
      "final_distance", "monitor_failures", "fallback_steps", "fault"};
  return cols;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  const auto& cols = sweep_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const SweepRow& r : rows) {
    const ClosedLoopSummary& s = r.summary;
    std::string fault = s.fault;
    std::replace(fault.begin(), fault.end(), '"', '\'');
    out << r.horizon << "," << cell(r.step) << "," << to_string(s.outcome) << "," << s.steps
        << "," << cell(s.path_length) << "," << cell(s.closed_loop_cost) << ","
        << cell(s.min_margin) << "," << cell(s.final_distance) << "," << s.monitor_failures << ","
        << s.fallback_steps << ",\"" << fault << "\"\n";
  }
}

void write_sweep_svg(const std::vector<SweepRow>& rows, const Scenario& scenario,
                     std::ostream& out) {
  static const std::array<const char*, 6> colors = {"#c33", "#36c", "#e90", "#8a3", "#939",
                                                    "#0aa"};
  Frame f;
  frame_obstacles(f, scenario);
  std::vector<Eigen::Vector2d> path;
  try {
    path = sample_path(*scenario.build_path());
  } catch (const std::exception&) {
    // Planned paths without a solution simply draw no reference.
  }
  for (const auto& p : path) f.add(p);
  for (const auto& r : rows)
    for (const auto& x : r.states) f.add(x.head<2>());
  Svg svg(f, out);
  draw_obstacles(svg, scenario);
  svg.polyline(path, "stroke=\"#777\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string c = colors[i % colors.size()];
    svg.polyline(positions(rows[i].states),
                 "stroke=\"" + c + "\" stroke-width=\"2\"");
    if (!rows[i].states.empty()) {
      Eigen::Vector2d label(f.xmin, f.ymax - 0.08 * (f.ymax - f.ymin) * static_cast<double>(i));
      svg.text(label, "<tspan fill=\"" + c + "\">N=" + std::to_string(rows[i].horizon) +
                          " h=" + num(rows[i].step) + "</tspan>");
    }
  }
}

void write_waypoints_csv(const Waypoints& waypoints, std::ostream& out) {
  out << "x,y\n";
  for (const auto& p : waypoints) out << num(p.x()) << "," << num(p.y()) << "\n";
}

void write_plan_svg(const Waypoints* waypoints, const PlannerTree& tree, const Scenario& scenario,
                    std::ostream& out) {
  Frame f;
  f.add(scenario.path.planner.bounds_min);
  f.add(scenario.path.planner.bounds_max);
  Svg svg(f, out);
  draw_obstacles(svg, scenario);
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (tree.parent[i] < 0) continue;
    svg.polyline({tree.nodes[static_cast<std::size_t>(tree.parent[i])], tree.nodes[i]},
                 "stroke=\"#9bd\" stroke-width=\"0.7\"");
  }
  if (waypoints) svg.polyline(*waypoints, "stroke=\"#c33\" stroke-width=\"2.5\"");
  svg.dot(scenario.path.start, "#333");
  svg.dot(scenario.path.goal, "#2a7", 5.0);
}

}  // namespace pathmpc
