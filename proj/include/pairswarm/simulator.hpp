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

// Deterministic discrete-time world. Coupling is kinematic: a pair whose
// points come within eps is latched into the world's assemblies and kept
// together by the maintenance QP from then on.

#ifndef PAIRSWARM_SIMULATOR_HPP_
#define PAIRSWARM_SIMULATOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pairswarm/assembly_qp.hpp"
#include "pairswarm/geometry.hpp"
#include "pairswarm/kinematics.hpp"
#include "pairswarm/orchestrator.hpp"
#include "pairswarm/planner.hpp"

namespace pairswarm {

struct RobotSpec {
  RobotKind kind;
  Pose2D pose;
};

struct GoalSpec {
  enum class Kind { Line, Mesh, Poses };
  Kind kind = Kind::Line;
  int n = 2;     // line
  int rows = 2;  // mesh
  int cols = 2;
  std::vector<Pose2D> poses;  // explicit
};

/// Random unaligned starts around a goal. Robot k is placed near goal slot k
/// and starts are resampled until every assigned goal pair passes the
/// feasible-start screen.
struct StartGenerator {
  double rotation = 0.15;          // rad, bound on the global rotation
  double translation = 0.05;       // m, bound on the global shift per axis
  double axial_spread = 2.5;       // body lengths, pushed outward along the heading
  double axial_jitter = 1.5;       // body lengths
  double lateral_gap_min = 0.005;  // fraction of the lateral offset added
  double lateral_gap_max = 0.03;
  double heading_noise = 0.08;     // rad
  std::vector<int> pilots;         // robot ids that are pilots
  int max_attempts = 2000;
};

struct ScenarioSpec {
  static constexpr int kSchemaVersion = 1;

  std::string name;
  double dt = 0.02;
  double eps = 0.004;
  double body_length = 0.05;
  double max_time = 120.0;
  std::uint64_t seed = 0;
  double pose_noise = 0.0;  // m, per-tick standard deviation on x and y
  AlignmentGains gains{};
  double k_bias = 0.3;
  double theta_bias = 0.0;
  BiasSign bias_sign = BiasSign::Same;
  MimicMode mimic = MimicMode::Rigid;
  bool refine_lobes = true;
  double stall_window = 5.0;
  double stall_progress = 1e-4;
  CalibrationParams pilot_params = CalibrationParams::pilot();
  CalibrationParams non_pilot_params = CalibrationParams::non_pilot();
  std::vector<RobotSpec> robots;           // explicit starts
  std::optional<StartGenerator> start;     // used when robots is empty
  GoalSpec goal;
};

struct FieldError {
  std::string path;
  std::string message;
};

inline std::vector<FieldError> validate(const ScenarioSpec& s) {
  std::vector<FieldError> errs;
  auto need = [&](bool ok, std::string path, std::string msg) {
    if (!ok) errs.push_back({std::move(path), std::move(msg)});
  };
  need(s.dt > 0.0 && s.dt <= 0.1, "dt", "must lie in (0, 0.1]");
  need(s.eps > 0.0, "eps", "must be positive");
  need(s.body_length > 0.0, "body_length", "must be positive");
  need(s.max_time > 0.0, "max_time", "must be positive");
  need(s.pose_noise >= 0.0, "pose_noise", "must be non-negative");
  need(s.gains.position > 0.0, "gains.position", "must be positive");
  need(s.gains.angle > 0.0, "gains.angle", "must be positive");
  need(s.k_bias >= 0.0 && s.k_bias < 1.0, "k_bias", "must lie in [0, 1)");
  need(std::abs(s.theta_bias) <= kPi / 4.0, "theta_bias", "must lie in [-pi/4, pi/4]");
  need(s.stall_window > 0.0, "stall_window", "must be positive");
  need(s.stall_progress >= 0.0, "stall_progress", "must be non-negative");
  if (auto e = s.pilot_params.validation_error(); !e.empty()) errs.push_back({"pilot_params", e});
  if (auto e = s.non_pilot_params.validation_error(); !e.empty())
    errs.push_back({"non_pilot_params", e});

  std::size_t goal_size = 0;
  switch (s.goal.kind) {
    case GoalSpec::Kind::Line:
      need(s.goal.n >= 2, "goal.n", "a line needs at least 2 robots");
      goal_size = s.goal.n >= 0 ? static_cast<std::size_t>(s.goal.n) : 0;
      break;
    case GoalSpec::Kind::Mesh:
      need(s.goal.rows >= 1, "goal.rows", "must be at least 1");
      need(s.goal.cols >= 1, "goal.cols", "must be at least 1");
      need(s.goal.rows * s.goal.cols >= 2, "goal", "a mesh needs at least 2 robots");
      goal_size = s.goal.rows >= 1 && s.goal.cols >= 1
                      ? static_cast<std::size_t>(s.goal.rows * s.goal.cols)
                      : 0;
      break;
    case GoalSpec::Kind::Poses:
      need(!s.goal.poses.empty(), "goal.poses", "must not be empty");
      goal_size = s.goal.poses.size();
      break;
  }
  if (s.robots.empty()) {
    need(s.start.has_value(), "robots", "give explicit robots or a start generator");
    if (s.start) {
      for (std::size_t k = 0; k < s.start->pilots.size(); ++k) {
        const int id = s.start->pilots[k];
        need(id >= 0 && static_cast<std::size_t>(id) < goal_size,
             "start.pilots[" + std::to_string(k) + "]", "robot id out of range");
      }
      need(s.start->max_attempts > 0, "start.max_attempts", "must be positive");
      need(s.start->lateral_gap_min <= s.start->lateral_gap_max, "start.lateral_gap_min",
           "must not exceed lateral_gap_max");
    }
  } else {
    need(s.robots.size() == goal_size, "robots",
         "count " + std::to_string(s.robots.size()) + " does not match goal size " +
             std::to_string(goal_size));
  }
  return errs;
}

inline GoalConfiguration resolve_goal(const ScenarioSpec& s) {
  const auto geom = BodyGeometry::standard(s.body_length);
  switch (s.goal.kind) {
    case GoalSpec::Kind::Line:
      return make_line(s.goal.n, geom);
    case GoalSpec::Kind::Mesh:
      return make_mesh(s.goal.rows, s.goal.cols, geom);
    case GoalSpec::Kind::Poses:
      return {s.goal.poses};
  }
  throw std::logic_error("unknown goal kind");
}

inline OrchestratorConfig orchestrator_config(const ScenarioSpec& s) {
  OrchestratorConfig c;
  c.geom = BodyGeometry::standard(s.body_length);
  c.eps = s.eps;
  c.dt = s.dt;
  c.gains = s.gains;
  c.theta_bias = s.theta_bias;
  c.bias_sign = s.bias_sign;
  c.mimic = s.mimic;
  c.refine_lobes = s.refine_lobes;
  c.k_bias = s.k_bias;
  c.stall_window = s.stall_window;
  c.stall_progress = s.stall_progress;
  return c;
}

/// True when the mover's connection point lies on the side of its axle that
/// faces the travel direction toward the partner's point. A lone mover
/// (its partner a parked pilot) only converges in that case.
inline bool point_leads_approach(const Pose2D& mover, const Pose2D& partner,
                                 const ConnectionPair& pair, int mover_id,
                                 const BodyGeometry& geom) {
  const ConnectionPointId own = pair.point_of(mover_id);
  const ConnectionPointId other = pair.point_of(pair.partner_of(mover_id));
  const Vec2 d = rotate(connection_point_world(partner, geom, other) -
                            connection_point_world(mover, geom, own),
                        -mover.theta());
  return d.x() * geom.offset(own).x() > 0.0;
}

inline std::vector<Pose2D> generate_start(const GoalConfiguration& goal, const BodyGeometry& geom,
                                          const StartGenerator& opts, std::mt19937_64& rng) {
  const std::size_t n = goal.size();
  const Vec2 center = mean_position(goal.poses);
  const double l = geom.body_length;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> gap(opts.lateral_gap_min, opts.lateral_gap_max);
  constexpr int kHeadingTries = 64;

  auto is_pilot = [&](int id) {
    return std::find(opts.pilots.begin(), opts.pilots.end(), id) != opts.pilots.end();
  };
  auto pair_ok = [&](const std::vector<Pose2D>& poses, const ConnectionPair& p) {
    if (!is_feasible_start(poses[p.robot_i], poses[p.robot_j], p, geom)) return false;
    if (is_pilot(p.robot_i) == is_pilot(p.robot_j)) return true;
    const int mover = is_pilot(p.robot_i) ? p.robot_j : p.robot_i;
    return point_leads_approach(poses[mover], poses[p.partner_of(mover)], p, mover, geom);
  };

  std::vector<ConnectionPair> slot_pairs;
  if (n >= 2)
    for (const auto& gp : sort_pairs(find_exist_pairs(goal.poses, geom), goal.poses))
      slot_pairs.push_back(gp.pair);

  for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
    const double rot = opts.rotation * unit(rng);
    const Vec2 shift{opts.translation * unit(rng), opts.translation * unit(rng)};
    const double spread = 1.0 + gap(rng);
    std::vector<Pose2D> poses(n);
    bool ok = true;
    for (std::size_t k = 0; k < n && ok; ++k) {
      const Pose2D& g = goal.poses[k];
      const Vec2 h{std::cos(g.theta()), std::sin(g.theta())};
      const Vec2 side{-h.y(), h.x()};
      const Vec2 rel = g.position() - center;
      const double axial = rel.dot(h);
      const double outward = std::abs(axial) > 1e-9 ? std::copysign(opts.axial_spread, axial) : 0.0;
      const double new_axial = axial + l * (outward + opts.axial_jitter * unit(rng));
      const Vec2 p = center + new_axial * h + spread * rel.dot(side) * side;
      const Vec2 q = center + rotate(p - center, rot) + shift;
      // Resample this robot's heading until its pairs with placed robots pass.
      ok = false;
      for (int t = 0; t < kHeadingTries && !ok; ++t) {
        poses[k] = Pose2D(q.x(), q.y(), g.theta() + rot + opts.heading_noise * unit(rng));
        ok = std::all_of(slot_pairs.begin(), slot_pairs.end(), [&](const ConnectionPair& sp) {
          const auto hi = static_cast<std::size_t>(std::max(sp.robot_i, sp.robot_j));
          return hi != k || pair_ok(poses, sp);
        });
      }
    }
    if (!ok) continue;
    const PairAssignment asg = assign_connection_pairs(goal, poses, geom);
    ok = std::all_of(asg.pairs.begin(), asg.pairs.end(),
                     [&](const GoalPair& gp) { return pair_ok(poses, gp.pair); });
    if (ok) return poses;
  }
  throw std::runtime_error("generate_start: no feasible start found");
}

inline std::vector<RobotSpec> resolve_robots(const ScenarioSpec& s, const GoalConfiguration& goal) {
  if (!s.robots.empty()) {
    std::vector<RobotSpec> out = s.robots;
    for (auto& r : out) r.kind.params = r.kind.is_pilot() ? s.pilot_params : s.non_pilot_params;
    return out;
  }
  if (!s.start) throw std::invalid_argument("resolve_robots: no robots and no start generator");
  std::mt19937_64 rng(s.seed ^ 0x5eedfacecafef00dULL);
  const auto poses = generate_start(goal, BodyGeometry::standard(s.body_length), *s.start, rng);
  std::vector<RobotSpec> out;
  for (std::size_t k = 0; k < poses.size(); ++k) {
    const bool pilot = std::find(s.start->pilots.begin(), s.start->pilots.end(),
                                 static_cast<int>(k)) != s.start->pilots.end();
    RobotKind kind = pilot ? RobotKind{RobotKindTag::Pilot, s.pilot_params}
                           : RobotKind{RobotKindTag::NonPilot, s.non_pilot_params};
    out.push_back({kind, poses[k]});
  }
  return out;
}

struct WorldRobot {
  int id = 0;
  RobotKind kind;
  Pose2D pose;
};

struct WorldState {
  double time = 0.0;
  std::vector<WorldRobot> robots;
  DisjointSet assemblies{0};
  std::vector<ConnectionPair> latched;
  std::uint64_t rng_seed = 0;
  std::mt19937_64 rng;

  static WorldState create(const std::vector<RobotSpec>& robots, std::uint64_t seed) {
    WorldState w;
    for (std::size_t k = 0; k < robots.size(); ++k)
      w.robots.push_back({static_cast<int>(k), robots[k].kind, robots[k].pose});
    w.assemblies = DisjointSet(robots.size());
    w.rng_seed = seed;
    w.rng.seed(seed);
    return w;
  }

  std::vector<Pose2D> poses() const {
    std::vector<Pose2D> out;
    for (const auto& r : robots) out.push_back(r.pose);
    return out;
  }
  std::vector<RobotKind> kinds() const {
    std::vector<RobotKind> out;
    for (const auto& r : robots) out.push_back(r.kind);
    return out;
  }
  bool is_latched(const ConnectionPair& p) const {
    return std::any_of(latched.begin(), latched.end(),
                       [&](const ConnectionPair& q) { return q.same_robots(p); });
  }
};

/// Projects u onto the robot's feasibility polygon (lobe chosen by the sign of v).
inline ControlInput clamp_to_polygon(const ControlInput& u, const CalibrationParams& params) {
  const auto rows = polygon_constraints(params, u.v >= 0.0 ? 1 : -1);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), 2);
  Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    a(k, 0) = rows[k].a_v;
    a(k, 1) = rows[k].a_omega;
    b(k) = rows[k].b;
  }
  const QpResult r = project_onto_polyhedron(Eigen::Vector2d{u.v, u.omega}, a, b);
  return {r.u(0), r.u(1)};
}

struct TraceRecord {
  int tick = 0;
  double t = 0.0;  // time at the start of the tick
  std::vector<Pose2D> poses;  // after integration
  std::vector<ControlInput> controls;
  std::vector<bool> busy;
  std::vector<ConnectionPair> connected;
  std::vector<ConnectionPair> executing;
  std::vector<AssemblyDiagnostics> diagnostics;
  std::vector<ConnectionPair> latched_now;
  std::vector<double> connected_separation;  // after integration, same order as connected
};

struct TickResult {
  WorldState world;
  ExecutionState state;
  TraceRecord record;
};

inline TickResult tick(WorldState world, const ScenarioSpec& spec, ExecutionState state,
                       int tick_index = 0) {
  const OrchestratorConfig cfg = orchestrator_config(spec);
  const auto poses = world.poses();
  const auto kinds = world.kinds();
  StepResult step = configuration_control_step(poses, kinds, std::move(state), cfg, world.time);
  auto controls = pilot_gate(step.controls, kinds, step.state);

  std::vector<bool> escalated(poses.size(), false);
  for (const auto& d : step.diagnostics)
    if (d.polygon_rows_dropped)
      for (int r : d.robots) escalated[r] = true;
  for (std::size_t i = 0; i < controls.size(); ++i)
    if (!escalated[i] && !within_polygon(controls[i], kinds[i].params, 1e-12))
      controls[i] = clamp_to_polygon(controls[i], kinds[i].params);

  std::normal_distribution<double> noise(0.0, spec.pose_noise > 0.0 ? spec.pose_noise : 1.0);
  for (std::size_t i = 0; i < world.robots.size(); ++i) {
    Pose2D next = step_unicycle(world.robots[i].pose, controls[i], spec.dt);
    if (spec.pose_noise > 0.0) {
      const double nx = noise(world.rng);
      const double ny = noise(world.rng);
      next = Pose2D(next.x() + nx, next.y() + ny, next.theta());
    }
    world.robots[i].pose = next;
  }

  TraceRecord rec;
  rec.tick = tick_index;
  rec.t = world.time;
  rec.poses = world.poses();
  const auto& geom = cfg.geom;
  auto latch = [&](const ConnectionPair& p) {
    if (world.is_latched(p)) return;
    world.latched.push_back(p);
    world.assemblies.unite(p.robot_i, p.robot_j);
    rec.latched_now.push_back(p);
  };
  for (const auto& c : step.state.connected) latch(c);
  for (const auto& e : step.state.executing) {
    const auto& p = e.goal.pair;
    if (pair_separation(p, rec.poses[p.robot_i], rec.poses[p.robot_j], geom) < spec.eps) latch(p);
  }

  world.time += spec.dt;
  rec.controls = std::move(controls);
  rec.busy = step.state.busy;
  rec.connected = step.state.connected;
  for (const auto& e : step.state.executing) rec.executing.push_back(e.goal.pair);
  rec.diagnostics = std::move(step.diagnostics);
  for (const auto& c : rec.connected)
    rec.connected_separation.push_back(
        find_min_distance_pair(rec.poses[c.robot_i], rec.poses[c.robot_j], geom).distance);
  return {std::move(world), std::move(step.state), std::move(rec)};
}

/// RMS distance between final and goal positions after the best rigid
/// alignment of the goal onto the final positions (2D Kabsch).
inline double procrustes_residual(const std::vector<Vec2>& goal, const std::vector<Vec2>& actual) {
  if (goal.size() != actual.size()) throw std::invalid_argument("procrustes_residual: size mismatch");
  if (goal.empty()) return 0.0;
  const double n = static_cast<double>(goal.size());
  Vec2 mg = Vec2::Zero(), ma = Vec2::Zero();
  for (std::size_t k = 0; k < goal.size(); ++k) {
    mg += goal[k];
    ma += actual[k];
  }
  mg /= n;
  ma /= n;
  double sdot = 0.0, scross = 0.0;
  for (std::size_t k = 0; k < goal.size(); ++k) {
    const Vec2 q = goal[k] - mg, p = actual[k] - ma;
    sdot += q.dot(p);
    scross += q.x() * p.y() - q.y() * p.x();
  }
  const double phi = std::atan2(scross, sdot);
  double ss = 0.0;
  for (std::size_t k = 0; k < goal.size(); ++k)
    ss += (rotate(goal[k] - mg, phi) - (actual[k] - ma)).squaredNorm();
  return std::sqrt(ss / n);
}

struct PairReport {
  GoalPair goal;
  double activated_at = 0.0;
  double connected_at = 0.0;
  double max_error = 0.0;  // largest separation while connected
};

struct RunReport {
  std::string scenario;
  bool success = false;
  std::string diagnostic;  // empty, "timeout" or "local-minimum"
  double completion_time = 0.0;
  int ticks = 0;
  std::size_t num_robots = 0;
  std::vector<int> goal_to_robot;
  std::vector<PairReport> pairs;  // connection timeline, in connection order
  double max_pair_error = 0.0;
  double max_kkt_residual = 0.0;
  int qp_infeasible = 0;
  int polygon_escalations = 0;
  double procrustes_residual = 0.0;
  std::size_t assemblies = 0;
  std::vector<Pose2D> final_poses;
  std::vector<RobotKindTag> kinds;
};

using TraceSink = std::function<void(const TraceRecord&)>;

/// Runs a validated scenario. Throws std::invalid_argument when the spec has
/// field errors.
inline RunReport run(const ScenarioSpec& spec, const TraceSink& sink = {}) {
  if (const auto errs = validate(spec); !errs.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& e : errs) msg += " " + e.path + ": " + e.message + ";";
    throw std::invalid_argument(msg);
  }
  const GoalConfiguration goal = resolve_goal(spec);
  const auto robots = resolve_robots(spec, goal);
  const BodyGeometry geom = BodyGeometry::standard(spec.body_length);
  WorldState world = WorldState::create(robots, spec.seed);

  RunReport rep;
  rep.scenario = spec.name;
  rep.num_robots = robots.size();
  for (const auto& r : robots) rep.kinds.push_back(r.kind.kind);

  PairAssignment asg;
  if (robots.size() >= 2) {
    asg = assign_connection_pairs(goal, world.poses(), geom);
  } else {
    asg.goal_to_robot = {0};
    asg.aligned_goal = goal;
  }
  rep.goal_to_robot = asg.goal_to_robot;
  ExecutionState state = ExecutionState::initial(asg.pairs, robots.size());

  std::vector<double> pair_max;  // indexed like state.connected
  const long max_ticks = static_cast<long>(std::ceil(spec.max_time / spec.dt - 1e-9));
  int k = 0;
  while (!is_goal_reached(state) && !state.stalled && k < max_ticks) {
    TickResult tr = tick(std::move(world), spec, std::move(state), k);
    world = std::move(tr.world);
    state = std::move(tr.state);
    const TraceRecord& rec = tr.record;
    pair_max.resize(rec.connected.size(), 0.0);
    for (std::size_t c = 0; c < rec.connected.size(); ++c)
      pair_max[c] = std::max(pair_max[c], rec.connected_separation[c]);
    for (const auto& d : rec.diagnostics) {
      rep.max_kkt_residual = std::max(rep.max_kkt_residual, d.kkt_residual);
      rep.qp_infeasible += d.infeasible ? 1 : 0;
      rep.polygon_escalations += d.polygon_rows_dropped ? 1 : 0;
    }
    if (sink) sink(rec);
    ++k;
  }
  rep.ticks = k;
  rep.success = is_goal_reached(state);
  rep.completion_time = world.time;
  if (!rep.success) rep.diagnostic = state.stalled ? state.diagnostic : "timeout";

  for (std::size_t c = 0; c < state.events.size(); ++c) {
    const auto& ev = state.events[c];
    rep.pairs.push_back({ev.goal, ev.activated_at, ev.connected_at, pair_max[c]});
    rep.max_pair_error = std::max(rep.max_pair_error, pair_max[c]);
  }
  rep.final_poses = world.poses();
  rep.assemblies = world.assemblies.num_sets();
  std::vector<Vec2> goal_pts(robots.size()), final_pts(robots.size());
  for (std::size_t g = 0; g < robots.size(); ++g) {
    goal_pts[g] = goal.poses[g].position();
    final_pts[g] = rep.final_poses[asg.goal_to_robot[g]].position();
  }
  rep.procrustes_residual = procrustes_residual(goal_pts, final_pts);
  return rep;
}

/// Minimum-deviation controls that move an assembly toward u_hat while
/// keeping every latched pair inside its eps box. Robots outside `members`
/// get zero control.
inline std::vector<ControlInput> maintenance_drive(const WorldState& world,
                                                   const std::vector<int>& members,
                                                   const std::vector<ControlInput>& u_hat,
                                                   const ScenarioSpec& spec,
                                                   AssemblyDiagnostics* diag_out = nullptr) {
  const std::size_t n = world.robots.size();
  if (u_hat.size() != n) throw std::invalid_argument("maintenance_drive: u_hat size mismatch");
  const BodyGeometry geom = BodyGeometry::standard(spec.body_length);
  std::vector<int> slot(n, -1);
  for (std::size_t k = 0; k < members.size(); ++k) slot.at(members[k]) = static_cast<int>(k);
  const auto nv = static_cast<Eigen::Index>(2 * members.size());
  LinearConstraintSet rows(nv);
  Eigen::VectorXd target(nv);
  for (std::size_t k = 0; k < members.size(); ++k) {
    target(2 * k) = u_hat[members[k]].v;
    target(2 * k + 1) = u_hat[members[k]].omega;
  }
  for (const auto& p : world.latched) {
    if (slot[p.robot_i] < 0 || slot[p.robot_j] < 0) continue;
    // Keep the point assignment closest at the current poses.
    const auto cp = find_min_distance_pair(world.robots[p.robot_i].pose,
                                           world.robots[p.robot_j].pose, geom);
    ConnectionPair q = p;
    q.point_i = cp.points.first;
    q.point_j = cp.points.second;
    append_pair_rows(rows,
                     {world.robots[p.robot_i].pose, world.robots[p.robot_j].pose, q,
                      slot[p.robot_i], slot[p.robot_j]},
                     geom, spec.dt, spec.eps);
  }
  AssemblyProblem prob{target, std::move(rows), members, {}};
  for (int r : members) prob.params.push_back(world.robots[r].kind.params);
  AssemblyDiagnostics diag;
  const QpResult sol = solve_assembly(prob, diag, spec.refine_lobes);
  std::vector<ControlInput> out(n);
  for (std::size_t k = 0; k < members.size(); ++k)
    out[members[k]] = {sol.u(2 * k), sol.u(2 * k + 1)};
  if (diag_out) *diag_out = std::move(diag);
  return out;
}

}  // namespace pairswarm

#endif  // PAIRSWARM_SIMULATOR_HPP_
