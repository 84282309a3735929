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

#include "pathmpc/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pathmpc {

namespace {

void check_progress(double s) {
  if (!(s >= 0.0 && s <= 1.0))
    throw std::out_of_range("path progress outside [0, 1]: " + std::to_string(s));
}

double wrap_to_pi(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a < 0.0) a += two_pi;
  return a - std::numbers::pi;
}

}  // namespace

SinusoidPath::SinusoidPath(double length, double amplitude)
    : length_(length), amplitude_(amplitude) {
  if (!(length > 0.0) || !std::isfinite(amplitude))
    throw std::invalid_argument("sinusoid path: length must be positive");
}

Vector SinusoidPath::eval(double s) const {
  check_progress(s);
  constexpr double pi = std::numbers::pi;
  return Eigen::Vector3d(length_ * s, amplitude_ * std::sin(pi * s),
                         std::atan(amplitude_ * pi * std::cos(pi * s) / length_));
}

Vector SinusoidPath::derivative(double s) const {
  check_progress(s);
  constexpr double pi = std::numbers::pi;
  const double q = amplitude_ * pi * std::cos(pi * s) / length_;
  const double dq = -amplitude_ * pi * pi * std::sin(pi * s) / length_;
  return Eigen::Vector3d(length_, amplitude_ * pi * std::cos(pi * s),
                         dq / (1.0 + q * q));
}

std::string SinusoidPath::describe() const {
  std::ostringstream os;
  os << "sinusoid(length=" << length_ << ", amplitude=" << amplitude_ << ")";
  return os.str();
}

Vector ConstantPath::eval(double s) const {
  check_progress(s);
  return config_;
}

Vector ConstantPath::derivative(double s) const {
  check_progress(s);
  return Vector::Zero(config_.size());
}

PolylinePath::PolylinePath(std::vector<Eigen::Vector2d> waypoints, double corner_radius)
    : corner_radius_(corner_radius) {
  if (!(corner_radius >= 0.0))
    throw std::invalid_argument("polyline: corner radius must be nonnegative");
  for (const auto& w : waypoints) {
    if (!w.allFinite()) throw std::invalid_argument("polyline: non-finite waypoint");
    if (waypoints_.empty() || (waypoints_.back() - w).norm() > 1e-12)
      waypoints_.push_back(w);
  }
  if (waypoints_.size() < 2)
    throw std::invalid_argument("polyline: at least two distinct waypoints required");

  const std::size_t nseg = waypoints_.size() - 1;
  std::vector<double> heading(nseg), seg_len(nseg);
  for (std::size_t j = 0; j < nseg; ++j) {
    const Eigen::Vector2d d = waypoints_[j + 1] - waypoints_[j];
    seg_len[j] = d.norm();
    const double raw = std::atan2(d.y(), d.x());
    heading[j] = j == 0 ? raw : heading[j - 1] + wrap_to_pi(raw - heading[j - 1]);
  }

  // trim[j]: distance cut from both segments meeting at waypoint j.
  std::vector<double> turn(nseg + 1, 0.0), trim(nseg + 1, 0.0);
  for (std::size_t j = 1; j < nseg; ++j) {
    turn[j] = heading[j] - heading[j - 1];
    if (std::abs(turn[j]) > std::numbers::pi - 1e-9)
      throw std::invalid_argument("polyline: path reverses at waypoint " +
                                  std::to_string(j));
    trim[j] = corner_radius_ * std::tan(0.5 * std::abs(turn[j]));
  }
  for (std::size_t j = 0; j < nseg; ++j) {
    if (trim[j] + trim[j + 1] > seg_len[j] + 1e-12)
      throw std::invalid_argument("polyline: corner radius too large for segment " +
                                  std::to_string(j));
  }

  double offset = 0.0;
  for (std::size_t j = 0; j < nseg; ++j) {
    const Eigen::Vector2d dir(std::cos(heading[j]), std::sin(heading[j]));
    const double len = seg_len[j] - trim[j] - trim[j + 1];
    if (len > 0.0) {
      pieces_.push_back({waypoints_[j] + trim[j] * dir, heading[j], 0.0, len, offset});
      offset += len;
    }
    if (j + 1 < nseg && turn[j + 1] != 0.0 && corner_radius_ > 0.0) {
      const double arc = corner_radius_ * std::abs(turn[j + 1]);
      const double kappa = (turn[j + 1] > 0.0 ? 1.0 : -1.0) / corner_radius_;
      pieces_.push_back(
          {waypoints_[j + 1] - trim[j + 1] * dir, heading[j], kappa, arc, offset});
      offset += arc;
    }
  }
  total_length_ = offset;
  if (pieces_.empty() || !(total_length_ > 0.0))
    throw std::invalid_argument("polyline: path has zero length");
}

std::pair<const PolylinePath::Piece*, double> PolylinePath::locate(double s) const {
  check_progress(s);
  const double sigma = s * total_length_;
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), sigma,
                             [](double v, const Piece& p) { return v < p.offset; });
  const Piece* piece = it == pieces_.begin() ? &pieces_.front() : &*(it - 1);
  return {piece, std::clamp(sigma - piece->offset, 0.0, piece->length)};
}

Vector PolylinePath::eval(double s) const {
  const auto [p, t] = locate(s);
  const double th = p->heading + p->curvature * t;
  Eigen::Vector2d pos;
  if (p->curvature == 0.0) {
    pos = p->start + t * Eigen::Vector2d(std::cos(th), std::sin(th));
  } else {
    const double k = p->curvature;
    pos = p->start + Eigen::Vector2d((std::sin(th) - std::sin(p->heading)) / k,
                                     (std::cos(p->heading) - std::cos(th)) / k);
  }
  return Eigen::Vector3d(pos.x(), pos.y(), th);
}

Vector PolylinePath::derivative(double s) const {
  const auto [p, t] = locate(s);
  const double th = p->heading + p->curvature * t;
  return total_length_ * Eigen::Vector3d(std::cos(th), std::sin(th), p->curvature);
}

std::string PolylinePath::describe() const {
  std::ostringstream os;
  os << "polyline(" << waypoints_.size() << " waypoints, corner_radius="
     << corner_radius_ << ", length=" << total_length_ << ")";
  return os.str();
}

Vector sinusoid_path(double s) {
  static const SinusoidPath path;
  return path.eval(s);
}

std::shared_ptr<PolylinePath> polyline_path(std::vector<Eigen::Vector2d> waypoints,
                                            double corner_radius) {
  return std::make_shared<PolylinePath>(std::move(waypoints), corner_radius);
}

std::pair<Vector, Vector> lift(const ReferencePath& path, const DynamicsModel& model,
                               double s) {
  return model.steady_state(path.eval(s));
}

double estimate_lipschitz_gp(const ReferencePath& path, const DynamicsModel& model,
                             int grid) {
  if (grid < 100) throw std::invalid_argument("lipschitz estimate: grid must be >= 100");
  double best = 0.0;
  Vector prev = lift(path, model, 0.0).first;
  for (int i = 1; i <= grid; ++i) {
    const double s = static_cast<double>(i) / grid;
    Vector cur = lift(path, model, s).first;
    best = std::max(best, (cur - prev).norm() * grid);
    prev = std::move(cur);
  }
  return 1.2 * best;
}

ClearanceReport check_path_clearance(const ReferencePath& path,
                                     const DynamicsModel& model,
                                     const InputBounds& bounds, double step,
                                     const std::vector<ConvexPolytope>& obstacles,
                                     double delta_sep, int samples) {
  if (samples < 100) throw std::invalid_argument("clearance check: samples must be >= 100");
  ClearanceReport report;
  report.min_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) {
    const double s = static_cast<double>(i) / samples;
    const auto [xs, us] = lift(path, model, s);
    const double drift = (rk4_step(model, xs, us, step) - xs).norm();
    if (drift > 1e-12) report.violations.push_back({s, "not-steady", drift});
    if (!bounds.strictly_contains(us, 0.0))
      report.violations.push_back({s, "input-bounds", us.norm()});
    const Vector config = model.configuration(xs);
    const double margin = min_clearance(obstacles, config.head<2>());
    report.min_margin = std::min(report.min_margin, margin);
    if (margin < delta_sep) report.violations.push_back({s, "collision", margin});
  }
  return report;
}

}  // namespace pathmpc
