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

#include <catch_amalgamated.hpp>

#include "pairswarm/oracles.hpp"

using namespace pairswarm;

// The reference implementations must reject seeded bugs, or the suites
// prove nothing.

TEST_CASE("oracle references agree with small hand cases", "[oracles]") {
  Eigen::MatrixXd c(3, 3);
  c << 4, 1, 3, 2, 0, 5, 3, 2, 2;
  CHECK(oracle::brute_force_assignment(c) == 5.0);

  // Unit square: MST weight 3.
  CHECK(oracle::enumerate_mst_weight({{0, 0}, {1, 0}, {1, 1}, {0, 1}}) == 3.0);

  Eigen::MatrixXd a(1, 2);
  a << 1, 0;
  const double g = oracle::grid_search_projection(Eigen::Vector2d(1.0, 0.5), a,
                                                  Eigen::VectorXd::Zero(1), Eigen::Vector2d(-2, -2),
                                                  Eigen::Vector2d(2, 2));
  CHECK(g == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("suites pass on the production code", "[oracles]") {
  const oracle::Hooks h;
  CHECK(oracle::hungarian_suite(h, 1, 40).passed());
  CHECK(oracle::mst_suite(h, 2, 40).passed());
  CHECK(oracle::qp_grid_suite(h, 3, 5).passed());
  CHECK(oracle::linearization_suite(h, 4, 200).passed());
  CHECK(oracle::pwm_suite(h, 5, 20).passed());
  CHECK(oracle::suite_names() ==
        std::vector<std::string>{"hungarian", "mst", "qp_grid", "linearization", "pwm"});
}

TEST_CASE("suites catch seeded bugs", "[oracles]") {
  oracle::Hooks bad;
  bad.hungarian = oracle::mutated_hungarian;
  CHECK_FALSE(oracle::hungarian_suite(bad, 1, 40).passed());

  bad = {};
  bad.mst = [](const std::vector<Vec2>& pts) {
    auto t = minimum_spanning_tree(pts);
    if (!t.empty()) t.pop_back();
    return t;
  };
  CHECK_FALSE(oracle::mst_suite(bad, 2, 40).passed());

  bad = {};
  bad.qp = [](const Eigen::VectorXd& u, const LinearConstraintSet& c) {
    auto r = solve_min_deviation(u, c.without(RowKind::Polygon));
    return r;
  };
  CHECK_FALSE(oracle::qp_grid_suite(bad, 3, 5).passed());

  bad = {};
  bad.linearize = [](const Pose2D& pose, const Vec2& offset) {
    auto lp = linearize_point(pose, offset);
    lp.coeff(0, 1) *= 1.1;
    return lp;
  };
  CHECK_FALSE(oracle::linearization_suite(bad, 4, 200).passed());

  bad = {};
  bad.pwm = [](const ControlInput& t, const CalibrationParams& p) {
    auto m = allocate_pwm(t, p, {.deadband = false});
    m.m_r = std::round(m.m_r / 10.0) * 10.0;
    return m;
  };
  CHECK_FALSE(oracle::pwm_suite(bad, 5, 20).passed());
}
