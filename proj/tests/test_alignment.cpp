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

#include <random>

#include <Eigen/Dense>
#include <catch_amalgamated.hpp>

#include "pairswarm/alignment.hpp"
#include "pairswarm/kinematics.hpp"

using namespace pairswarm;
using Catch::Matchers::WithinAbs;

namespace {

BodyGeometry point_robot() {
  BodyGeometry g;
  g.offsets.fill(Vec2::Zero());
  return g;
}

// Reference: diag(gains) * pinv(J) computed by SVD.
ControlInput reference_control(const Pose2D& pose, const Vec2& d, double bias, AlignmentGains k) {
  const Eigen::MatrixXd j = jacobian(pose.theta());
  const Eigen::MatrixXd pinv = j.completeOrthogonalDecomposition().pseudoInverse();
  const double dth = wrap_half(std::atan2(d.y(), d.x()) - pose.theta() + bias);
  const Eigen::Vector2d u = pinv * Eigen::Vector3d(d.x(), d.y(), dth);
  return {k.position * u(0), k.angle * u(1)};
}

}  // namespace

TEST_CASE("align_pair_control examples", "[alignment]") {
  const auto g = point_robot();
  const AlignmentGains k{};
  const ConnectionPointId cp{Side::Left, 0};

  CHECK(align_pair_control({0, 0, 0}, g, {cp, Vec2(0.0, 0.0), 0.0, k}, 0.002) == ControlInput{});

  const auto a = align_pair_control({0, 0, 0}, g, {cp, Vec2(1.0, 0.0), 0.0, k}, 0.002);
  CHECK_THAT(a.v, WithinAbs(0.8, 1e-15));
  CHECK_THAT(a.omega, WithinAbs(0.0, 1e-15));

  const auto b = align_pair_control({0, 0, 0}, g, {cp, Vec2(0.0, 1.0), 0.0, k}, 0.002);
  const auto ref = reference_control({0, 0, 0}, {0.0, 1.0}, 0.0, k);
  CHECK_THAT(b.v, WithinAbs(0.0, 1e-15));
  CHECK_THAT(b.omega, WithinAbs(1.5 * kPi / 2.0, 1e-15));
  CHECK_THAT(b.v, WithinAbs(ref.v, 1e-12));
  CHECK_THAT(b.omega, WithinAbs(ref.omega, 1e-12));

  CHECK_THROWS_AS(align_pair_control({0, 0, 0}, g, {cp, Vec2(1, 0), 1.0, k}, 0.002),
                  std::invalid_argument);
}

TEST_CASE("align_pair_control matches the SVD pseudo-inverse", "[alignment][property]") {
  const auto geom = BodyGeometry::standard();
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 0; n < 300; ++n) {
    const Pose2D pose(u(rng), u(rng), kPi * u(rng));
    const auto cp = ConnectionPointId::from_index(n % 8);
    const Vec2 target{u(rng), u(rng)};
    const double bias = kPi / 4.0 * u(rng);
    const AlignmentGains k{0.5 + std::abs(u(rng)), 0.5 + std::abs(u(rng))};
    const auto got = align_pair_control(pose, geom, {cp, target, bias, k}, 1e-6);
    const auto ref =
        reference_control(pose, target - connection_point_world(pose, geom, cp), bias, k);
    REQUIRE_THAT(got.v, WithinAbs(ref.v, 1e-12));
    REQUIRE_THAT(got.omega, WithinAbs(ref.omega, 1e-12));
  }
}

TEST_CASE("align_pair_control is invariant under rigid motions", "[alignment][property]") {
  const auto geom = BodyGeometry::standard();
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 0; n < 300; ++n) {
    const Pose2D pose(0.2 * u(rng), 0.2 * u(rng), kPi * u(rng));
    const Vec2 target{0.2 * u(rng), 0.2 * u(rng)};
    const auto cp = ConnectionPointId::from_index(n % 8);
    const Pose2D g(u(rng), u(rng), kPi * u(rng));
    const Vec2 moved_target = rotate(target, g.theta()) + g.position();
    const auto a = align_pair_control(pose, geom, {cp, target, 0.1, {}}, 0.002);
    const auto b = align_pair_control(pose.transformed_by(g), geom, {cp, moved_target, 0.1, {}}, 0.002);
    REQUIRE_THAT(a.v, WithinAbs(b.v, 1e-9));
    // The heading error is invariant up to the pi-periodic wrap boundary.
    REQUIRE((std::abs(a.omega - b.omega) < 1e-9 ||
             std::abs(std::abs(a.omega - b.omega) - 1.5 * kPi) < 1e-9));
  }
}

TEST_CASE("control vanishes exactly inside the position epsilon", "[alignment][property]") {
  const auto geom = BodyGeometry::standard();
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double eps = 0.002;
  for (int n = 0; n < 1000; ++n) {
    const Pose2D pose(u(rng), u(rng), kPi * u(rng));
    const auto cp = ConnectionPointId::from_index(n % 8);
    const Vec2 own = connection_point_world(pose, geom, cp);
    const Vec2 target = own + Vec2(u(rng), u(rng)) * 0.003;
    const auto c = align_pair_control(pose, geom, {cp, target, 0.0, {}}, eps);
    const bool zero = c == ControlInput{};
    REQUIRE(zero == ((target - own).norm() < eps));
  }
}

TEST_CASE("is_feasible_start screens facing points", "[alignment]") {
  const auto geom = BodyGeometry::standard(0.05);
  // Two robots facing each other; front points selected.
  const auto front = ConnectionPair::make(0, {Side::Front, 0}, 1, {Side::Front, 1});
  CHECK(is_feasible_start({0, 0, 0}, {0.3, 0, kPi}, front, geom));

  // The left robot offers its left side while its partner is on its right.
  const auto wrong = ConnectionPair::make(0, {Side::Left, 0}, 1, {Side::Right, 1});
  CHECK_FALSE(is_feasible_start({0, 0.06, 0}, {0, 0, 0}, wrong, geom));

  // Side by side, adjacent faces.
  const auto side = ConnectionPair::make(0, {Side::Left, 0}, 1, {Side::Right, 1});
  const Pose2D a{0, 0, 0}, b{0.02, 0.06, 0.05};
  REQUIRE(is_feasible_start(a, b, side, geom));

  // Rollout oracle: both robots steer symmetrically and the points meet.
  Pose2D pa = a, pb = b;
  const double eps = 0.004;
  for (int k = 0; k < 3000 && pair_separation(side, pa, pb, geom) >= eps; ++k) {
    const Vec2 ca = connection_point_world(pa, geom, side.point_i);
    const Vec2 cb = connection_point_world(pb, geom, side.point_j);
    const auto ua = align_pair_control(pa, geom, {side.point_i, cb, 0.0, {}}, eps / 2);
    const auto ub = align_pair_control(pb, geom, {side.point_j, ca, 0.0, {}}, eps / 2);
    pa = step_unicycle(pa, ua, 0.02);
    pb = step_unicycle(pb, ub, 0.02);
  }
  CHECK(pair_separation(side, pa, pb, geom) < eps);
}

TEST_CASE("closed-loop contraction from feasible starts", "[alignment][property]") {
  const auto geom = BodyGeometry::standard(0.05);
  const auto pair = ConnectionPair::make(0, {Side::Left, 0}, 1, {Side::Right, 1});
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double dt = 0.02, eps = 0.004;
  int starts = 0, contracting = 0;
  while (starts < 60) {
    const Pose2D a(0.0, 0.0, 0.1 * u(rng));
    const Pose2D b(0.08 * u(rng), 0.05 + 0.005 + 0.01 * std::abs(u(rng)), 0.1 * u(rng));
    if (!is_feasible_start(a, b, pair, geom)) continue;
    ++starts;
    Pose2D pa = a, pb = b;
    bool monotone = true;
    double prev = pair_separation(pair, pa, pb, geom);
    for (int k = 1; k <= 1000; ++k) {
      const Vec2 ca = connection_point_world(pa, geom, pair.point_i);
      const Vec2 cb = connection_point_world(pb, geom, pair.point_j);
      pa = step_unicycle(pa, align_pair_control(pa, geom, {pair.point_i, cb, 0.0, {}}, eps / 2), dt);
      pb = step_unicycle(pb, align_pair_control(pb, geom, {pair.point_j, ca, 0.0, {}}, eps / 2), dt);
      const double sep = pair_separation(pair, pa, pb, geom);
      if (k * dt > 2.0 && sep > prev + 1e-12 && prev >= eps / 2) monotone = false;
      prev = sep;
    }
    if (monotone) ++contracting;
  }
  INFO(contracting << " of " << starts << " starts contract");
  CHECK(contracting >= 0.95 * starts);
}
