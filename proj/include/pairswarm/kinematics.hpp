// Copyright 2026 The pairswarm Authors
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

// Unicycle model, its Jacobian, and the differential-drive motor model of
// the two robot kinds (PWM <-> velocity, feasibility polygon, calibration).

#ifndef PAIRSWARM_KINEMATICS_HPP_
#define PAIRSWARM_KINEMATICS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "pairswarm/geometry.hpp"

namespace pairswarm {

struct ControlInput {
  double v = 0.0;      // m/s
  double omega = 0.0;  // rad/s

  friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

inline ControlInput operator+(ControlInput a, ControlInput b) { return {a.v + b.v, a.omega + b.omega}; }
inline ControlInput operator*(double k, ControlInput a) { return {k * a.v, k * a.omega}; }

/// Motor model and feasibility region of one robot kind.
struct CalibrationParams {
  double k_v = 0.0006;      // (m/s) per PWM unit
  double k_omega = 0.0142;  // (rad/s) per PWM unit
  double m_min = 30.0;
  double m_max = 255.0;
  double mu_v = 1.0;
  double mu_omega = 0.1;
  Vec2 polygon_a{0.037, -2.19};  // (v, omega) corner below the omega = 0 axis
  double polygon_b = 0.11;       // maximum forward speed at omega = 0

  static CalibrationParams pilot() {
    CalibrationParams p;
    p.k_v = 0.0024;
    p.k_omega = 0.0033;
    p.polygon_a = {0.34, -0.561};
    p.polygon_b = 0.47;
    return p;
  }
  static CalibrationParams non_pilot() { return {}; }

  /// Empty string when valid, otherwise a description of the first problem.
  std::string validation_error() const {
    if (!(m_min >= 0.0 && m_min < m_max && m_max <= 255.0))
      return "PWM limits must satisfy 0 <= m_min < m_max <= 255";
    if (!(k_v > 0.0 && k_omega > 0.0)) return "k_v and k_omega must be positive";
    if (!(mu_v > 0.0 && mu_omega > 0.0)) return "mu_v and mu_omega must be positive";
    if (!(polygon_a.x() > 0.0 && polygon_a.x() < polygon_b))
      return "polygon corners must satisfy 0 < a_x < b_x";
    if (!(polygon_a.y() < 0.0)) return "polygon corner a_y must be negative";
    return {};
  }
  void validate() const {
    if (auto e = validation_error(); !e.empty()) throw std::invalid_argument(e);
  }

  friend bool operator==(const CalibrationParams&, const CalibrationParams&) = default;
};

enum class RobotKindTag { Pilot, NonPilot };

struct RobotKind {
  RobotKindTag kind = RobotKindTag::NonPilot;
  CalibrationParams params = CalibrationParams::non_pilot();

  static RobotKind pilot() { return {RobotKindTag::Pilot, CalibrationParams::pilot()}; }
  static RobotKind non_pilot() { return {RobotKindTag::NonPilot, CalibrationParams::non_pilot()}; }
  bool is_pilot() const { return kind == RobotKindTag::Pilot; }
};

inline std::string_view to_string(RobotKindTag k) {
  return k == RobotKindTag::Pilot ? "pilot" : "non_pilot";
}

// ---------------------------------------------------------------------------
// Unicycle

/// Exact integration of the unicycle for a constant input over dt.
inline Pose2D step_unicycle(const Pose2D& pose, const ControlInput& u, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_unicycle: dt must be positive");
  const double th = pose.theta();
  if (std::abs(u.omega) < 1e-9) {
    return {pose.x() + u.v * dt * std::cos(th), pose.y() + u.v * dt * std::sin(th),
            th + u.omega * dt};
  }
  const double th1 = th + u.omega * dt;
  const double r = u.v / u.omega;
  return {pose.x() + r * (std::sin(th1) - std::sin(th)),
          pose.y() + r * (std::cos(th) - std::cos(th1)), th1};
}

using Jacobian = Eigen::Matrix<double, 3, 2>;
using JacobianPinv = Eigen::Matrix<double, 2, 3>;

inline Jacobian jacobian(double theta) {
  Jacobian j;
  j << std::cos(theta), 0.0, std::sin(theta), 0.0, 0.0, 1.0;
  return j;
}

/// Moore-Penrose inverse of a unicycle Jacobian. Its columns are orthonormal,
/// so the pseudo-inverse is the transpose.
inline JacobianPinv pseudo_inverse(const Jacobian& j) { return j.transpose(); }

/// J+(theta) applied to a 3-vector (dx, dy, dtheta).
inline ControlInput apply_pseudo_inverse(double theta, double dx, double dy, double dtheta) {
  return {std::cos(theta) * dx + std::sin(theta) * dy, dtheta};
}

// ---------------------------------------------------------------------------
// Motor model

inline ControlInput pwm_to_velocity(double m_r, double m_l, const CalibrationParams& p) {
  if (std::abs(m_r) > p.m_max || std::abs(m_l) > p.m_max)
    throw std::out_of_range("pwm_to_velocity: PWM magnitude exceeds m_max");
  return {p.k_v * (m_r + m_l) / 2.0, p.k_omega * (m_r - m_l)};
}

struct PwmCommand {
  double m_r = 0.0;
  double m_l = 0.0;
  friend bool operator==(const PwmCommand&, const PwmCommand&) = default;
};

struct PwmAllocationOptions {
  // Emit (0, 0) when both motors of the unconstrained solution are below
  // m_min / 2. Near a goal this suppresses start/stop chatter; it is not the
  // weighted least-squares minimizer in that band.
  bool deadband = true;
};

/// Weighted tracking error of a motor pair against a target velocity.
inline double pwm_objective(double m_r, double m_l, const ControlInput& target,
                            const CalibrationParams& p) {
  const double ev = p.k_v * (m_r + m_l) / 2.0 - target.v;
  const double ew = p.k_omega * (m_r - m_l) - target.omega;
  return p.mu_v * ev * ev + p.mu_omega * ew * ew;
}

inline bool pwm_feasible(double m, const CalibrationParams& p) {
  const double a = std::abs(m);
  return a == 0.0 || (a >= p.m_min && a <= p.m_max);
}

namespace detail {

// Minimizes the (convex) pwm objective over a box [lo, hi]^2 exactly: the
// interior stationary point if inside, else the best 1-D minimizer on the
// four edges.
inline PwmCommand minimize_on_box(const ControlInput& t, const CalibrationParams& p,
                                  std::array<double, 2> r_lim, std::array<double, 2> l_lim) {
  // f = mu_v (a (r + l) - v)^2 + mu_w (b (r - l) - w)^2, a = k_v / 2, b = k_w
  const double a = p.k_v / 2.0, b = p.k_omega;
  const double s0 = t.v / a, d0 = t.omega / b;
  const double r0 = (s0 + d0) / 2.0, l0 = (s0 - d0) / 2.0;
  if (r0 >= r_lim[0] && r0 <= r_lim[1] && l0 >= l_lim[0] && l0 <= l_lim[1]) return {r0, l0};

  const double wa = p.mu_v * a * a, wb = p.mu_omega * b * b;
  // d/dl with r fixed: wa (r + l - s0) - wb (r - l - d0) = 0
  auto best_l = [&](double r) {
    double l = (wa * (s0 - r) + wb * (r - d0)) / (wa + wb);
    return std::clamp(l, l_lim[0], l_lim[1]);
  };
  auto best_r = [&](double l) {
    double r = (wa * (s0 - l) + wb * (l + d0)) / (wa + wb);
    return std::clamp(r, r_lim[0], r_lim[1]);
  };
  PwmCommand best{};
  double best_f = std::numeric_limits<double>::infinity();
  auto consider = [&](double r, double l) {
    const double f = pwm_objective(r, l, t, p);
    if (f < best_f) {
      best_f = f;
      best = {r, l};
    }
  };
  for (double r : r_lim) consider(r, best_l(r));
  for (double l : l_lim) consider(best_r(l), l);
  return best;
}

}  // namespace detail

/// PWM pair minimizing the weighted velocity tracking error subject to each
/// motor being either stopped or within [m_min, m_max] in magnitude.
inline PwmCommand allocate_pwm(const ControlInput& target, const CalibrationParams& p,
                               PwmAllocationOptions opts = {}) {
  if (!std::isfinite(target.v) || !std::isfinite(target.omega))
    throw std::invalid_argument("allocate_pwm: non-finite target");
  if (opts.deadband) {
    const double s0 = 2.0 * target.v / p.k_v, d0 = target.omega / p.k_omega;
    const double r0 = (s0 + d0) / 2.0, l0 = (s0 - d0) / 2.0;
    if (std::abs(r0) < p.m_min / 2.0 && std::abs(l0) < p.m_min / 2.0) return {0.0, 0.0};
  }
  const std::array<std::array<double, 2>, 3> regions{{
      {0.0, 0.0}, {p.m_min, p.m_max}, {-p.m_max, -p.m_min}}};
  PwmCommand best{};
  double best_f = std::numeric_limits<double>::infinity();
  for (const auto& rr : regions) {
    for (const auto& lr : regions) {
      const PwmCommand c = detail::minimize_on_box(target, p, rr, lr);
      const double f = pwm_objective(c.m_r, c.m_l, target, p);
      if (f < best_f) {
        best_f = f;
        best = c;
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Feasibility polygon

/// Half-plane a_v * v + a_omega * omega <= b.
struct HalfPlane {
  double a_v = 0.0;
  double a_omega = 0.0;
  double b = 0.0;

  double residual(const ControlInput& u) const { return a_v * u.v + a_omega * u.omega - b; }
};

/// Vertices of the forward lobe in counter-clockwise order: O, A, B, A'.
inline std::array<Vec2, 4> polygon_vertices(const CalibrationParams& p) {
  return {Vec2{0.0, 0.0}, p.polygon_a, Vec2{p.polygon_b, 0.0},
          Vec2{p.polygon_a.x(), -p.polygon_a.y()}};
}

/// Half-planes of the forward (v_sign = +1) or backward (v_sign = -1) lobe of
/// the achievable (v, omega) region. Each lobe is the quadrilateral O, A, B, A'
/// anchored at the origin; the backward lobe mirrors v.
inline std::vector<HalfPlane> polygon_constraints(const CalibrationParams& p, int v_sign) {
  if (v_sign != 1 && v_sign != -1) throw std::invalid_argument("v_sign must be +1 or -1");
  const auto vs = polygon_vertices(p);
  std::vector<HalfPlane> rows;
  rows.reserve(4);
  for (std::size_t k = 0; k < vs.size(); ++k) {
    const Vec2& a = vs[k];
    const Vec2& c = vs[(k + 1) % vs.size()];
    const Vec2 d = c - a;
    const Vec2 n{d.y(), -d.x()};  // outward for a counter-clockwise ring
    const double norm = n.norm();
    HalfPlane h{v_sign * n.x() / norm, n.y() / norm, n.dot(a) / norm};
    rows.push_back(h);
  }
  return rows;
}

inline bool within_polygon(const ControlInput& u, const CalibrationParams& p, double tol = 1e-12) {
  const int sign = u.v >= 0.0 ? 1 : -1;
  for (const auto& h : polygon_constraints(p, sign))
    if (h.residual(u) > tol) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Calibration

struct CalibrationSample {
  double m_r = 0.0;
  double m_l = 0.0;
  double v = 0.0;      // averaged over the run
  double omega = 0.0;  // averaged over the run
};

/// Least-squares fit of k_v against the PWM mean and k_omega against the PWM
/// difference (lines through the origin). Other fields are copied from base.
inline CalibrationParams fit_calibration(std::span<const CalibrationSample> trace,
                                         CalibrationParams base = {}) {
  std::set<double> means, diffs;
  double sxx_v = 0.0, sxy_v = 0.0, sxx_w = 0.0, sxy_w = 0.0;
  for (const auto& s : trace) {
    const double mean = (s.m_r + s.m_l) / 2.0;
    const double diff = s.m_r - s.m_l;
    means.insert(mean);
    diffs.insert(diff);
    sxx_v += mean * mean;
    sxy_v += mean * s.v;
    sxx_w += diff * diff;
    sxy_w += diff * s.omega;
  }
  if (means.size() < 2 || diffs.size() < 2 || sxx_v == 0.0 || sxx_w == 0.0)
    throw std::invalid_argument(
        "fit_calibration: trace needs at least two distinct PWM means and differences");
  base.k_v = sxy_v / sxx_v;
  base.k_omega = sxy_w / sxx_w;
  return base;
}

}  // namespace pairswarm

#endif  // PAIRSWARM_KINEMATICS_HPP_
