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

// Connection-pair based configuration control, one tick at a time.
//
// The controller tracks three things: which robots are busy aligning a pair,
// which goal pairs are already connected, and which are being executed. Each
// tick it refreshes the point assignment of connected pairs, activates goal
// pairs whose robots are free, steers busy robots with the pair alignment
// law, lets coupled followers mimic their leader, blends in the connection
// bias, and projects every assembly's command onto its maintenance
// constraints. Pairs whose points came within eps are retired to the
// connected set and their robots are held still for that tick.

#ifndef PAIRSWARM_ORCHESTRATOR_HPP_
#define PAIRSWARM_ORCHESTRATOR_HPP_

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pairswarm/alignment.hpp"
#include "pairswarm/assembly_qp.hpp"
#include "pairswarm/geometry.hpp"
#include "pairswarm/kinematics.hpp"
#include "pairswarm/planner.hpp"

namespace pairswarm {

/// How the side-pair heading bias is signed for each robot of a pair.
enum class BiasSign {
  Same,      // +theta_bias for both robots
  Opposite,  // +theta_bias for robot_i, -theta_bias for robot_j
  LeanIn,    // per robot, tilts the approach toward the partner's side
};

/// How a coupled follower inherits its leader's target.
enum class MimicMode {
  Copy,   // the leader's (v, omega) verbatim
  Rigid,  // the leader's twist carried to the follower's pose, projected by J+
};

struct OrchestratorConfig {
  BodyGeometry geom = BodyGeometry::standard();
  double eps = 0.004;  // m
  double dt = 0.02;    // s, also the linearization step of the maintenance rows
  AlignmentGains gains{};
  double theta_bias = 0.0;  // rad, applied to side-to-side pairs only
  BiasSign bias_sign = BiasSign::Same;
  MimicMode mimic = MimicMode::Rigid;
  bool refine_lobes = true;
  double k_bias = 0.3;
  double stall_window = 5.0;      // s
  double stall_progress = 1e-4;   // m

  double position_epsilon() const { return eps / 2.0; }
};

struct ExecutingPair {
  GoalPair goal;
  double activated_at = 0.0;
  double best_separation = std::numeric_limits<double>::infinity();
  double last_progress_at = 0.0;
};

struct ConnectionEvent {
  GoalPair goal;
  double activated_at = 0.0;
  double connected_at = 0.0;
};

struct ExecutionState {
  std::vector<bool> busy;
  std::vector<ConnectionPair> connected;  // C_conn
  std::vector<ExecutingPair> executing;   // C_exec
  std::vector<GoalPair> goal_pairs;       // C_goal, activation order
  std::vector<ConnectionEvent> events;    // one per connected pair, in order
  bool stalled = false;
  std::string diagnostic;

  static ExecutionState initial(std::vector<GoalPair> goal_pairs, std::size_t num_robots) {
    ExecutionState s;
    s.busy.assign(num_robots, false);
    s.goal_pairs = std::move(goal_pairs);
    return s;
  }

  bool is_connected(const ConnectionPair& p) const {
    return std::any_of(connected.begin(), connected.end(),
                       [&](const ConnectionPair& c) { return c.same_robots(p); });
  }
  bool is_executing(const ConnectionPair& p) const {
    return std::any_of(executing.begin(), executing.end(),
                       [&](const ExecutingPair& e) { return e.goal.pair.same_robots(p); });
  }
};

inline bool is_goal_reached(const ExecutionState& state) {
  return std::all_of(state.goal_pairs.begin(), state.goal_pairs.end(),
                     [&](const GoalPair& g) { return state.is_connected(g.pair); });
}

/// Per robot: sum over connected partners j of J+(theta_i) (p_j - p_i), with
/// the heading difference wrapped.
inline std::vector<ControlInput> connection_bias(const std::vector<Pose2D>& poses,
                                                 const std::vector<ConnectionPair>& connected) {
  std::vector<ControlInput> bias(poses.size());
  auto add = [&](int i, int j) {
    const Pose2D& a = poses[i];
    const Pose2D& b = poses[j];
    bias[i] = bias[i] + apply_pseudo_inverse(a.theta(), b.x() - a.x(), b.y() - a.y(),
                                             wrap_angle(b.theta() - a.theta()));
  };
  for (const auto& c : connected) {
    add(c.robot_i, c.robot_j);
    add(c.robot_j, c.robot_i);
  }
  return bias;
}

/// Pilots hold still until they belong to an assembly. A pilot paired with a
/// non-pilot while still uncoupled is the passive side of that pair.
inline std::vector<ControlInput> pilot_gate(std::vector<ControlInput> controls,
                                            const std::vector<RobotKind>& kinds,
                                            const ExecutionState& state) {
  for (std::size_t i = 0; i < controls.size(); ++i) {
    if (!kinds[i].is_pilot()) continue;
    const int id = static_cast<int>(i);
    const bool coupled = std::any_of(state.connected.begin(), state.connected.end(),
                                     [&](const ConnectionPair& c) { return c.involves(id); });
    if (!coupled) controls[i] = {};
  }
  return controls;
}

struct StepResult {
  std::vector<ControlInput> controls;
  std::vector<ControlInput> u_hat;  // blended target before projection
  ExecutionState state;
  std::vector<AssemblyDiagnostics> diagnostics;
  std::vector<ConnectionPair> completed;  // retired from C_exec this tick
};

namespace detail {

inline DisjointSet assemblies_of(std::size_t n, const std::vector<ConnectionPair>& connected) {
  DisjointSet ds(n);
  for (const auto& c : connected) ds.unite(c.robot_i, c.robot_j);
  return ds;
}

// Goal pairs at a strictly shorter goal distance than `gp` must all be
// connected before `gp` may start.
inline bool shorter_pairs_done(const ExecutionState& s, const GoalPair& gp) {
  const auto key = tie_key(gp.goal_distance);
  for (const auto& other : s.goal_pairs)
    if (tie_key(other.goal_distance) < key && !s.is_connected(other.pair)) return false;
  return true;
}

// Follower command reproducing, as far as a unicycle can, the motion of a
// rigid body moving with the leader.
inline ControlInput transport_twist(const Pose2D& leader, const ControlInput& u,
                                    const Pose2D& follower) {
  const Vec2 r = follower.position() - leader.position();
  const double vx = u.v * std::cos(leader.theta()) - u.omega * r.y();
  const double vy = u.v * std::sin(leader.theta()) + u.omega * r.x();
  return apply_pseudo_inverse(follower.theta(), vx, vy, u.omega);
}

inline double signed_bias(const OrchestratorConfig& cfg, const Pose2D& pose,
                          const BodyGeometry& geom, ConnectionPointId own, const Vec2& target,
                          bool first) {
  switch (cfg.bias_sign) {
    case BiasSign::Same:
      return cfg.theta_bias;
    case BiasSign::Opposite:
      return first ? cfg.theta_bias : -cfg.theta_bias;
    case BiasSign::LeanIn: {
      const Vec2 d = target - connection_point_world(pose, geom, own);
      const Vec2 n = rotate(side_normal(own), pose.theta());
      return d.x() * n.y() - d.y() * n.x() >= 0.0 ? cfg.theta_bias : -cfg.theta_bias;
    }
  }
  return cfg.theta_bias;
}

}  // namespace detail

/// One tick of configuration control at time `now`.
inline StepResult configuration_control_step(const std::vector<Pose2D>& poses,
                                             const std::vector<RobotKind>& kinds,
                                             ExecutionState state, const OrchestratorConfig& cfg,
                                             double now) {
  const std::size_t n = poses.size();
  StepResult out;
  out.controls.assign(n, {});
  out.u_hat.assign(n, {});
  if (is_goal_reached(state)) {
    out.state = std::move(state);
    return out;
  }
  const BodyGeometry& geom = cfg.geom;

  // Refresh the point assignment of connected pairs; robots stay fixed.
  for (auto& c : state.connected) {
    const auto cp = find_min_distance_pair(poses[c.robot_i], poses[c.robot_j], geom);
    c.point_i = cp.points.first;
    c.point_j = cp.points.second;
  }

  // Activate every goal pair whose robots are both free.
  for (const auto& gp : state.goal_pairs) {
    const auto& p = gp.pair;
    if (state.is_connected(p) || state.is_executing(p)) continue;
    if (state.busy[p.robot_i] || state.busy[p.robot_j]) continue;
    if (!detail::shorter_pairs_done(state, gp)) continue;
    const double sep = pair_separation(p, poses[p.robot_i], poses[p.robot_j], geom);
    state.executing.push_back({gp, now, sep, now});
    state.busy[p.robot_i] = true;
    state.busy[p.robot_j] = true;
  }

  // Busy robots steer their point onto the partner's.
  std::vector<ControlInput> u_hat(n);
  for (const auto& e : state.executing) {
    const auto& p = e.goal.pair;
    for (int self : {p.robot_i, p.robot_j}) {
      const int other = p.partner_of(self);
      const Vec2 target = connection_point_world(poses[other], geom, p.point_of(other));
      const double bias =
          p.couples_sides() ? detail::signed_bias(cfg, poses[self], geom, p.point_of(self),
                                                  target, self == p.robot_i)
                            : 0.0;
      AlignmentTarget t{p.point_of(self), target, bias, cfg.gains};
      u_hat[self] = align_pair_control(poses[self], geom, t, cfg.position_epsilon());
    }
  }

  // Coupled followers copy their leader, breadth-first through C_conn.
  {
    std::vector<std::vector<int>> adj(n);
    for (const auto& c : state.connected) {
      adj[c.robot_i].push_back(c.robot_j);
      adj[c.robot_j].push_back(c.robot_i);
    }
    std::vector<bool> assigned(state.busy.begin(), state.busy.end());
    for (std::size_t leader = 0; leader < n; ++leader) {
      if (!state.busy[leader]) continue;
      std::deque<int> queue{static_cast<int>(leader)};
      while (!queue.empty()) {
        const int cur = queue.front();
        queue.pop_front();
        for (int nb : adj[cur]) {
          if (assigned[nb]) continue;
          assigned[nb] = true;
          u_hat[nb] = cfg.mimic == MimicMode::Copy
                          ? u_hat[leader]
                          : detail::transport_twist(poses[leader], u_hat[leader], poses[nb]);
          queue.push_back(nb);
        }
      }
    }
  }

  // Connection bias for robots that belong to an assembly.
  if (cfg.k_bias != 0.0 && !state.connected.empty()) {
    const auto bias = connection_bias(poses, state.connected);
    for (std::size_t i = 0; i < n; ++i) {
      const int id = static_cast<int>(i);
      const bool coupled = std::any_of(state.connected.begin(), state.connected.end(),
                                       [&](const ConnectionPair& c) { return c.involves(id); });
      if (coupled) u_hat[i] = (1.0 - cfg.k_bias) * u_hat[i] + cfg.k_bias * bias[i];
    }
  }

  // Retire executing pairs whose points met; their robots hold still.
  std::vector<bool> pinned(n, false);
  for (auto it = state.executing.begin(); it != state.executing.end();) {
    const auto& p = it->goal.pair;
    const double sep = pair_separation(p, poses[p.robot_i], poses[p.robot_j], geom);
    if (sep < cfg.eps) {
      state.connected.push_back(p);
      state.events.push_back({it->goal, it->activated_at, now});
      state.busy[p.robot_i] = false;
      state.busy[p.robot_j] = false;
      pinned[p.robot_i] = true;
      pinned[p.robot_j] = true;
      u_hat[p.robot_i] = {};
      u_hat[p.robot_j] = {};
      out.completed.push_back(p);
      it = state.executing.erase(it);
      continue;
    }
    if (sep < it->best_separation - cfg.stall_progress) {
      it->best_separation = sep;
      it->last_progress_at = now;
    } else if (now - it->last_progress_at > cfg.stall_window) {
      state.stalled = true;
      state.diagnostic = "local-minimum";
    }
    ++it;
  }

  // Project every assembly (singletons included) onto its constraints.
  const DisjointSet groups = detail::assemblies_of(n, state.connected);
  for (const auto& members : groups.groups()) {
    std::vector<int> vars;  // free robots in this assembly
    for (int r : members)
      if (!pinned[r]) vars.push_back(r);
    if (vars.empty()) continue;
    std::vector<int> slot(n, -1);
    for (std::size_t k = 0; k < vars.size(); ++k) slot[vars[k]] = static_cast<int>(k);

    const auto nv = static_cast<Eigen::Index>(2 * vars.size());
    AssemblyProblem prob;
    prob.pair_rows = LinearConstraintSet(nv);
    prob.u_hat.resize(nv);
    prob.robots = vars;
    for (std::size_t k = 0; k < vars.size(); ++k) {
      prob.u_hat(2 * k) = u_hat[vars[k]].v;
      prob.u_hat(2 * k + 1) = u_hat[vars[k]].omega;
      prob.params.push_back(kinds[vars[k]].params);
    }
    for (const auto& c : state.connected) {
      if (groups.find(c.robot_i) != groups.find(members.front())) continue;
      if (pinned[c.robot_i] && pinned[c.robot_j]) continue;
      // Rows are built over both robots, then pinned columns (u = 0) dropped.
      LinearConstraintSet pr = pair_constraint_rows(poses[c.robot_i], poses[c.robot_j], c, geom,
                                                    cfg.dt, cfg.eps);
      for (Eigen::Index r = 0; r < pr.num_rows(); ++r) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nv);
        if (slot[c.robot_i] >= 0) row.segment<2>(2 * slot[c.robot_i]) = pr.a.row(r).segment<2>(0);
        if (slot[c.robot_j] >= 0) row.segment<2>(2 * slot[c.robot_j]) = pr.a.row(r).segment<2>(2);
        prob.pair_rows.append(row, pr.b(r), pr.labels[r]);
      }
    }

    AssemblyDiagnostics diag;
    const QpResult sol = solve_assembly(prob, diag, cfg.refine_lobes);
    for (std::size_t k = 0; k < vars.size(); ++k)
      out.controls[vars[k]] = {sol.u(2 * k), sol.u(2 * k + 1)};
    out.diagnostics.push_back(std::move(diag));
  }

  out.u_hat = std::move(u_hat);
  out.state = std::move(state);
  return out;
}

}  // namespace pairswarm

#endif  // PAIRSWARM_ORCHESTRATOR_HPP_
