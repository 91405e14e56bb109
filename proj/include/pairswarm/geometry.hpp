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

// Planar poses, the robot body with its eight connection points, and the
// world-frame position of a connection point.

#ifndef PAIRSWARM_GEOMETRY_HPP_
#define PAIRSWARM_GEOMETRY_HPP_

#include <array>
#include <cmath>
#include <compare>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>

#include <Eigen/Core>

namespace pairswarm {

using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  if (!std::isfinite(a)) throw std::domain_error("wrap_angle: non-finite angle");
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

/// Wraps an angle into (-pi/2, pi/2], i.e. modulo pi. A robot may reach a
/// target heading either forward or reversed.
inline double wrap_half(double a) {
  if (!std::isfinite(a)) throw std::domain_error("wrap_half: non-finite angle");
  double r = std::remainder(a, kPi);
  if (r <= -kPi / 2.0) r += kPi;
  return r;
}

/// Robot pose on the plane. The heading is kept in (-pi, pi].
class Pose2D {
 public:
  Pose2D() = default;
  Pose2D(double x, double y, double theta) : x_(x), y_(y), theta_(wrap_angle(theta)) {}

  double x() const { return x_; }
  double y() const { return y_; }
  double theta() const { return theta_; }
  Vec2 position() const { return {x_, y_}; }
  Vec2 heading() const { return {std::cos(theta_), std::sin(theta_)}; }

  /// Rigid motion applied on the left: returns g * this.
  Pose2D transformed_by(const Pose2D& g) const {
    const double c = std::cos(g.theta_), s = std::sin(g.theta_);
    return {g.x_ + c * x_ - s * y_, g.y_ + s * x_ + c * y_, g.theta_ + theta_};
  }

  friend bool operator==(const Pose2D&, const Pose2D&) = default;

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double theta_ = 0.0;
};

enum class Side : int { Front = 0, Back = 1, Left = 2, Right = 3 };

/// One of the eight coupling sites: two slots on each side of the body.
struct ConnectionPointId {
  Side side = Side::Front;
  int slot = 0;

  static constexpr int kCount = 8;

  constexpr int index() const { return static_cast<int>(side) * 2 + slot; }
  static constexpr ConnectionPointId from_index(int i) {
    return {static_cast<Side>(i / 2), i % 2};
  }
  /// The id that occupies this point's location after a half turn of the body.
  constexpr ConnectionPointId rotated_half_turn() const {
    constexpr Side opposite[] = {Side::Back, Side::Front, Side::Right, Side::Left};
    return {opposite[static_cast<int>(side)], slot};
  }
  constexpr bool is_lateral() const { return side == Side::Left || side == Side::Right; }

  friend constexpr bool operator==(ConnectionPointId a, ConnectionPointId b) {
    return a.index() == b.index();
  }
  friend constexpr auto operator<=>(ConnectionPointId a, ConnectionPointId b) {
    return a.index() <=> b.index();
  }
};

inline std::string to_string(ConnectionPointId id) {
  static constexpr std::string_view names[] = {"front", "back", "left", "right"};
  return std::string(names[static_cast<int>(id.side)]) + std::to_string(id.slot);
}

inline ConnectionPointId connection_point_from_string(std::string_view s) {
  for (int i = 0; i < ConnectionPointId::kCount; ++i) {
    auto id = ConnectionPointId::from_index(i);
    if (to_string(id) == s) return id;
  }
  throw std::invalid_argument("unknown connection point '" + std::string(s) + "'");
}

/// Outward unit normal of the side carrying the point, body frame.
inline Vec2 side_normal(ConnectionPointId id) {
  switch (id.side) {
    case Side::Front: return {1.0, 0.0};
    case Side::Back: return {-1.0, 0.0};
    case Side::Left: return {0.0, 1.0};
    case Side::Right: return {0.0, -1.0};
  }
  return {0.0, 0.0};
}

/// Body size and the body-frame offsets (d_xc, d_yc) of the connection points.
///
/// Lateral points sit on the side faces at +-L/4 along the side. Front and
/// back points sit at the knob tips, sqrt(7)/4 L ahead of / behind the
/// center, so that robots of neighbouring staggered rows couple at a center
/// distance of sqrt(2) L.
struct BodyGeometry {
  double body_length = 0.05;
  std::array<Vec2, ConnectionPointId::kCount> offsets{};

  static double default_front_reach(double body_length) {
    return std::sqrt(7.0) / 4.0 * body_length;
  }

  static BodyGeometry standard(double body_length = 0.05) {
    if (!(body_length > 0.0)) throw std::invalid_argument("body_length must be positive");
    const double l = body_length;
    const double f = default_front_reach(l);
    BodyGeometry g;
    g.body_length = l;
    g.offsets[0] = {f, l / 4};    // front0
    g.offsets[1] = {f, -l / 4};   // front1
    g.offsets[2] = {-f, -l / 4};  // back0
    g.offsets[3] = {-f, l / 4};   // back1
    g.offsets[4] = {l / 4, l / 2};    // left0
    g.offsets[5] = {-l / 4, l / 2};   // left1
    g.offsets[6] = {-l / 4, -l / 2};  // right0
    g.offsets[7] = {l / 4, -l / 2};   // right1
    return g;
  }

  const Vec2& offset(ConnectionPointId id) const { return offsets[id.index()]; }
};

/// Translation part of g_wo * g_oc for the given connection point.
inline Vec2 connection_point_world(const Pose2D& pose, const BodyGeometry& geom,
                                   ConnectionPointId cp) {
  const Vec2& d = geom.offset(cp);
  const double c = std::cos(pose.theta()), s = std::sin(pose.theta());
  return {pose.x() + d.x() * c - d.y() * s, pose.y() + d.x() * s + d.y() * c};
}

inline Vec2 rotate(const Vec2& v, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

/// Two aligned connection points on two robots. Stored with robot_i < robot_j.
struct ConnectionPair {
  int robot_i = 0;
  ConnectionPointId point_i{};
  int robot_j = 1;
  ConnectionPointId point_j{};

  static ConnectionPair make(int a, ConnectionPointId pa, int b, ConnectionPointId pb) {
    if (a == b) throw std::invalid_argument("connection pair needs two distinct robots");
    if (a < b) return {a, pa, b, pb};
    return {b, pb, a, pa};
  }

  bool involves(int robot) const { return robot == robot_i || robot == robot_j; }
  bool same_robots(const ConnectionPair& o) const {
    return robot_i == o.robot_i && robot_j == o.robot_j;
  }
  int partner_of(int robot) const { return robot == robot_i ? robot_j : robot_i; }
  ConnectionPointId point_of(int robot) const { return robot == robot_i ? point_i : point_j; }
  bool couples_sides() const { return point_i.is_lateral() && point_j.is_lateral(); }

  friend bool operator==(const ConnectionPair&, const ConnectionPair&) = default;
  friend auto operator<=>(const ConnectionPair& a, const ConnectionPair& b) {
    return std::tie(a.robot_i, a.robot_j, a.point_i, a.point_j) <=>
           std::tie(b.robot_i, b.robot_j, b.point_i, b.point_j);
  }
};

inline double pair_separation(const ConnectionPair& p, const Pose2D& pose_i,
                              const Pose2D& pose_j, const BodyGeometry& geom) {
  return (connection_point_world(pose_i, geom, p.point_i) -
          connection_point_world(pose_j, geom, p.point_j))
      .norm();
}

}  // namespace pairswarm

#endif  // PAIRSWARM_GEOMETRY_HPP_
