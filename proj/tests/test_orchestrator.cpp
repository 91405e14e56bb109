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

#include <algorithm>

#include <catch_amalgamated.hpp>

#include "pairswarm/orchestrator.hpp"
#include "pairswarm/simulator.hpp"

using namespace pairswarm;
using Catch::Matchers::WithinAbs;

namespace {

const ConnectionPointId kLeft0{Side::Left, 0};
const ConnectionPointId kRight1{Side::Right, 1};

GoalPair side_pair(int i, int j) { return {ConnectionPair::make(i, kLeft0, j, kRight1), 0.05}; }

ScenarioSpec generated(GoalSpec goal, std::uint64_t seed, std::vector<int> pilots = {0}) {
  ScenarioSpec s;
  s.seed = seed;
  s.goal = std::move(goal);
  StartGenerator g;
  g.pilots = std::move(pilots);
  s.start = g;
  return s;
}

}  // namespace

TEST_CASE("connection_bias examples", "[orchestrator]") {
  const std::vector<Pose2D> poses{{0, 0, 0}, {0.05, 0, 0}, {0.05, 0, 0}};
  for (const auto& b : connection_bias(poses, {})) CHECK(b == ControlInput{});

  const auto one = connection_bias(poses, {side_pair(0, 1).pair});
  CHECK_THAT(one[0].v, WithinAbs(0.05, 1e-15));
  CHECK(one[0].omega == 0.0);
  CHECK_THAT(one[1].v, WithinAbs(-0.05, 1e-15));
  CHECK(one[2] == ControlInput{});

  const auto coincident = connection_bias(poses, {side_pair(1, 2).pair});
  CHECK(coincident[1] == ControlInput{});
  CHECK(coincident[2] == ControlInput{});

  // Heading differences are wrapped before entering J+.
  const auto wrapped = connection_bias({{0, 0, 3.0}, {0, 0, -3.0}}, {side_pair(0, 1).pair});
  CHECK_THAT(wrapped[0].omega, WithinAbs(2.0 * kPi - 6.0, 1e-12));
}

TEST_CASE("pilot_gate", "[orchestrator]") {
  const std::vector<RobotKind> kinds{RobotKind::pilot(), RobotKind::non_pilot(), RobotKind::pilot(),
                                     RobotKind::non_pilot()};
  auto state = ExecutionState::initial({side_pair(0, 1), side_pair(2, 3)}, 4);
  state.connected.push_back(side_pair(2, 3).pair);
  state.executing.push_back({side_pair(0, 1)});
  const std::vector<ControlInput> u{{0.1, 0.2}, {0.1, 0.2}, {0.1, 0.2}, {0.0, 0.3}};
  const auto gated = pilot_gate(u, kinds, state);
  CHECK(gated[0] == ControlInput{});  // uncoupled pilot, passive in its executing pair
  CHECK(gated[1] == u[1]);
  CHECK(gated[2] == u[2]);            // coupled pilot
  CHECK(gated[3] == u[3]);
}

TEST_CASE("is_goal_reached", "[orchestrator]") {
  auto state = ExecutionState::initial({side_pair(0, 1), side_pair(1, 2)}, 3);
  CHECK_FALSE(is_goal_reached(state));
  state.connected.push_back(side_pair(0, 1).pair);
  state.executing.push_back({side_pair(1, 2)});
  CHECK_FALSE(is_goal_reached(state));
  state.executing.clear();
  state.connected.push_back(side_pair(1, 2).pair);
  CHECK(is_goal_reached(state));
  CHECK(is_goal_reached(ExecutionState::initial({}, 1)));
}

TEST_CASE("a finished state yields zero controls and stays put", "[orchestrator]") {
  const std::vector<Pose2D> poses{{0, 0, 0}, {0, 0.05, 0}};
  const std::vector<RobotKind> kinds(2, RobotKind::non_pilot());
  auto state = ExecutionState::initial({side_pair(0, 1)}, 2);
  state.connected.push_back(side_pair(0, 1).pair);
  const OrchestratorConfig cfg;
  for (int k = 0; k < 3; ++k) {
    const auto step = configuration_control_step(poses, kinds, state, cfg, 0.02 * k);
    for (const auto& c : step.controls) CHECK(c == ControlInput{});
    CHECK(step.state.connected == state.connected);
    CHECK(step.state.executing.empty());
    CHECK(step.state.busy == state.busy);
    state = step.state;
  }
}

TEST_CASE("first step activates the pair and runs the alignment law", "[orchestrator]") {
  const auto geom = BodyGeometry::standard(0.05);
  const std::vector<Pose2D> poses{{0, 0, 0}, {0.05, 0.052, 0}};
  const std::vector<RobotKind> kinds(2, RobotKind::non_pilot());
  const auto gp = side_pair(0, 1);
  const OrchestratorConfig cfg;
  const auto step =
      configuration_control_step(poses, kinds, ExecutionState::initial({gp}, 2), cfg, 0.0);

  CHECK(step.state.busy == std::vector<bool>{true, true});
  REQUIRE(step.state.executing.size() == 1u);
  CHECK(step.state.executing[0].goal.pair == gp.pair);
  CHECK(step.state.connected.empty());

  // Hand trace: each robot steers its own point onto its partner's.
  const Vec2 c0 = connection_point_world(poses[0], geom, kLeft0);
  const Vec2 c1 = connection_point_world(poses[1], geom, kRight1);
  const Vec2 d = c1 - c0;
  const ControlInput u0{0.8 * d.x(), 1.5 * std::atan2(d.y(), d.x())};
  const ControlInput u1{-0.8 * d.x(), 1.5 * wrap_half(std::atan2(-d.y(), -d.x()))};
  REQUIRE(within_polygon(u0, kinds[0].params));
  REQUIRE(within_polygon(u1, kinds[1].params));
  CHECK_THAT(step.controls[0].v, WithinAbs(u0.v, 1e-15));
  CHECK_THAT(step.controls[0].omega, WithinAbs(u0.omega, 1e-15));
  CHECK_THAT(step.controls[1].v, WithinAbs(u1.v, 1e-15));
  CHECK_THAT(step.controls[1].omega, WithinAbs(u1.omega, 1e-15));
}

TEST_CASE("a pair inside eps completes and its robots stop", "[orchestrator]") {
  const std::vector<Pose2D> poses{{0, 0, 0}, {0.001, 0.0505, 0}};
  const std::vector<RobotKind> kinds(2, RobotKind::non_pilot());
  const auto gp = side_pair(0, 1);
  auto state = ExecutionState::initial({gp}, 2);
  state.executing.push_back({gp, 0.0, 1.0, 0.0});
  state.busy = {true, true};
  OrchestratorConfig cfg;
  REQUIRE(pair_separation(gp.pair, poses[0], poses[1], cfg.geom) < cfg.eps / 2.0 + 1e-4);
  const auto step = configuration_control_step(poses, kinds, state, cfg, 1.0);
  CHECK(step.state.executing.empty());
  REQUIRE(step.state.connected.size() == 1u);
  CHECK(step.state.connected[0].same_robots(gp.pair));
  CHECK(step.state.busy == std::vector<bool>{false, false});
  CHECK(step.controls[0] == ControlInput{});
  CHECK(step.controls[1] == ControlInput{});
  REQUIRE(step.completed.size() == 1u);
  REQUIRE(step.state.events.size() == 1u);
  CHECK(step.state.events[0].connected_at == 1.0);
}

TEST_CASE("a pair does not start before all shorter pairs are connected", "[orchestrator]") {
  const std::vector<Pose2D> poses{{0, 0, 0}, {0, 0.2, 0}, {0.3, 0, 0}, {0.3, 0.3, 0}};
  const std::vector<RobotKind> kinds(4, RobotKind::non_pilot());
  GoalPair near = side_pair(0, 1);
  GoalPair far{ConnectionPair::make(2, {Side::Front, 0}, 3, {Side::Back, 0}), 0.0707};
  const auto step = configuration_control_step(
      poses, kinds, ExecutionState::initial({near, far}, 4), OrchestratorConfig{}, 0.0);
  CHECK(step.state.busy == std::vector<bool>{true, true, false, false});
  REQUIRE(step.state.executing.size() == 1u);
}

TEST_CASE("the stall watchdog reports a local minimum", "[orchestrator]") {
  // Opposite sides offered: the controller cannot bring the points together.
  const std::vector<Pose2D> poses{{0, 0, 0}, {0, 0.08, kPi}};
  const std::vector<RobotKind> kinds(2, RobotKind::non_pilot());
  const auto gp = side_pair(0, 1);
  auto state = ExecutionState::initial({gp}, 2);
  OrchestratorConfig cfg;
  std::vector<Pose2D> p = poses;
  for (int k = 0; k < 4000 && !state.stalled; ++k) {
    auto step = configuration_control_step(p, kinds, state, cfg, k * cfg.dt);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = step_unicycle(p[i], step.controls[i], cfg.dt);
    state = step.state;
  }
  CHECK(state.stalled);
  CHECK(state.diagnostic == "local-minimum");
}

TEST_CASE("bookkeeping invariants hold through whole runs", "[orchestrator][property]") {
  std::vector<ScenarioSpec> specs;
  for (std::uint64_t seed : {2u, 3u, 4u}) {
    GoalSpec mesh;
    mesh.kind = GoalSpec::Kind::Mesh;
    specs.push_back(generated(mesh, seed));
    GoalSpec line;
    line.n = 5;
    specs.push_back(generated(line, seed, {}));
  }
  for (const auto& spec : specs) {
    const auto goal = resolve_goal(spec);
    const auto robots = resolve_robots(spec, goal);
    const auto geom = BodyGeometry::standard(spec.body_length);
    WorldState world = WorldState::create(robots, spec.seed);
    const auto asg = assign_connection_pairs(goal, world.poses(), geom);
    ExecutionState state = ExecutionState::initial(asg.pairs, robots.size());
    std::size_t last_conn = 0;
    int k = 0;
    while (!is_goal_reached(state) && !state.stalled && k < 6000) {
      auto tr = tick(std::move(world), spec, std::move(state), k++);
      world = std::move(tr.world);
      state = std::move(tr.state);
      REQUIRE(state.connected.size() >= last_conn);
      last_conn = state.connected.size();
      for (std::size_t i = 0; i < robots.size(); ++i) {
        const bool in_exec = std::any_of(state.executing.begin(), state.executing.end(),
                                         [&](const ExecutingPair& e) { return e.goal.pair.involves(int(i)); });
        REQUIRE(state.busy[i] == in_exec);
      }
      for (const auto& e : state.executing) REQUIRE_FALSE(state.is_connected(e.goal.pair));
    }
    REQUIRE(is_goal_reached(state));

    // Converse ordering: a pair connects only after every shorter pair sharing a robot.
    for (const auto& a : state.events)
      for (const auto& b : state.events) {
        const bool share = a.goal.pair.involves(b.goal.pair.robot_i) || a.goal.pair.involves(b.goal.pair.robot_j);
        if (share && tie_key(a.goal.goal_distance) < tie_key(b.goal.goal_distance))
          REQUIRE(a.connected_at <= b.activated_at);
      }

    // Fixpoint: further steps return zeros and an unchanged state.
    const auto step = configuration_control_step(world.poses(), world.kinds(), state,
                                                 orchestrator_config(spec), world.time);
    for (const auto& c : step.controls) REQUIRE(c == ControlInput{});
    REQUIRE(step.state.connected == state.connected);
  }
}
