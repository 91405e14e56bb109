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

#ifndef PAIRSWARM_ALIGNMENT_HPP_
#define PAIRSWARM_ALIGNMENT_HPP_

#include <cmath>
#include <stdexcept>

#include "pairswarm/geometry.hpp"
#include "pairswarm/kinematics.hpp"

namespace pairswarm {

struct AlignmentGains {
  double position = 0.8;  // 1/s, scales v
  double angle = 1.5;     // 1/s, scales omega
};

/// What one robot steers toward: its own point must meet the partner's.
struct AlignmentTarget {
  ConnectionPointId own_point{};
  Vec2 partner_point_world = Vec2::Zero();
  double theta_bias = 0.0;  // rad, within [-pi/4, pi/4]
  AlignmentGains gains{};
};

/// Proportional pseudo-inverse controller driving the robot's connection point
/// onto the partner's:
///
///   u = diag(gains) J+(theta) [dcx, dcy, wrap_half(atan2(dcy, dcx) - theta + bias)]
///
/// Returns zero once the points are closer than position_epsilon.
inline ControlInput align_pair_control(const Pose2D& pose, const BodyGeometry& geom,
                                       const AlignmentTarget& target,
                                       double position_epsilon) {
  if (std::abs(target.theta_bias) > kPi / 4.0 + 1e-12)
    throw std::invalid_argument("theta_bias must lie in [-pi/4, pi/4]");
  const Vec2 own = connection_point_world(pose, geom, target.own_point);
  const Vec2 d = target.partner_point_world - own;
  if (d.norm() < position_epsilon) return {};
  const double dtheta =
      wrap_half(std::atan2(d.y(), d.x()) - pose.theta() + target.theta_bias);
  const ControlInput raw = apply_pseudo_inverse(pose.theta(), d.x(), d.y(), dtheta);
  return {target.gains.position * raw.v, target.gains.angle * raw.omega};
}

/// Conservative screen: false when either robot's selected point faces away
/// from the partner's point (its outward side normal points away from it).
inline bool is_feasible_start(const Pose2D& pose_i, const Pose2D& pose_j, const ConnectionPair& pair,
                              const BodyGeometry& geom) {
  const Vec2 ci = connection_point_world(pose_i, geom, pair.point_i);
  const Vec2 cj = connection_point_world(pose_j, geom, pair.point_j);
  const Vec2 ni = rotate(side_normal(pair.point_i), pose_i.theta());
  const Vec2 nj = rotate(side_normal(pair.point_j), pose_j.theta());
  return ni.dot(cj - ci) >= 0.0 && nj.dot(ci - cj) >= 0.0;
}

}  // namespace pairswarm

#endif  // PAIRSWARM_ALIGNMENT_HPP_
