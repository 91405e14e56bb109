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

// Connection maintenance for an assembly: the one-step linearization of a
// connection point's motion, the +-eps pair rows built from it, the
// feasibility-polygon rows, and the minimum-deviation projection.

#ifndef PAIRSWARM_ASSEMBLY_QP_HPP_
#define PAIRSWARM_ASSEMBLY_QP_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pairswarm/geometry.hpp"
#include "pairswarm/kinematics.hpp"
#include "pairswarm/qp.hpp"

namespace pairswarm {

/// Affine map u -> c(u) = coeff * u * dt + constant for one connection point
/// under one step of length dt, linearized in omega * dt.
struct LinearizedPoint {
  Eigen::Matrix2d coeff;
  Vec2 constant;

  Vec2 evaluate(const ControlInput& u, double dt) const {
    return coeff * Vec2{u.v, u.omega} * dt + constant;
  }
};

inline LinearizedPoint linearize_point(const Pose2D& pose, const Vec2& offset) {
  const double c = std::cos(pose.theta()), s = std::sin(pose.theta());
  const double dx = offset.x(), dy = offset.y();
  LinearizedPoint lp;
  lp.coeff << c, -dx * s - dy * c, s, dx * c - dy * s;
  lp.constant = {pose.x() + dx * c - dy * s, pose.y() + dx * s + dy * c};
  return lp;
}

inline Vec2 linearized_point(const Pose2D& pose, const Vec2& offset, const ControlInput& u,
                             double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("linearized_point: dt must be positive");
  return linearize_point(pose, offset).evaluate(u, dt);
}

enum class RowKind { PairX, PairY, Polygon };

struct RowLabel {
  RowKind kind = RowKind::Polygon;
  int robot_i = -1;  // polygon rows: the robot; pair rows: the pair's robots
  int robot_j = -1;
};

/// Rows of A u <= b over a stacked control vector [v_0, w_0, v_1, w_1, ...].
struct LinearConstraintSet {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  std::vector<RowLabel> labels;

  explicit LinearConstraintSet(Eigen::Index num_vars = 0) : a(0, num_vars), b(0) {}

  Eigen::Index num_vars() const { return a.cols(); }
  Eigen::Index num_rows() const { return a.rows(); }

  void append(const Eigen::RowVectorXd& row, double rhs, RowLabel label) {
    const Eigen::Index r = a.rows();
    a.conservativeResize(r + 1, Eigen::NoChange);
    b.conservativeResize(r + 1);
    a.row(r) = row;
    b(r) = rhs;
    labels.push_back(label);
  }

  LinearConstraintSet without(RowKind kind) const {
    LinearConstraintSet out(num_vars());
    for (Eigen::Index r = 0; r < num_rows(); ++r)
      if (labels[r].kind != kind) out.append(a.row(r), b(r), labels[r]);
    return out;
  }
};

/// Row i of the stacked vector for robot slot k: (2k, 2k+1).
struct PairRowsInput {
  Pose2D pose_i;
  Pose2D pose_j;
  ConnectionPair pair;
  int slot_i = 0;  // position of robot_i in the stacked vector
  int slot_j = 1;
};

/// Four rows encoding -eps <= c_i(u) - c_j(u) <= eps componentwise, with the
/// current point positions folded into b.
inline void append_pair_rows(LinearConstraintSet& set, const PairRowsInput& in,
                             const BodyGeometry& geom, double dt, double eps) {
  if (!(dt > 0.0) || !(eps > 0.0)) throw std::invalid_argument("pair rows need dt > 0, eps > 0");
  const auto li = linearize_point(in.pose_i, geom.offset(in.pair.point_i));
  const auto lj = linearize_point(in.pose_j, geom.offset(in.pair.point_j));
  const Vec2 k = li.constant - lj.constant;
  for (int axis = 0; axis < 2; ++axis) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(set.num_vars());
    row.segment<2>(2 * in.slot_i) = li.coeff.row(axis) * dt;
    row.segment<2>(2 * in.slot_j) = -lj.coeff.row(axis) * dt;
    const RowLabel label{axis == 0 ? RowKind::PairX : RowKind::PairY, in.pair.robot_i,
                         in.pair.robot_j};
    set.append(row, eps - k(axis), label);
    set.append(-row, eps + k(axis), label);
  }
}

inline LinearConstraintSet pair_constraint_rows(const Pose2D& pose_i, const Pose2D& pose_j,
                                                const ConnectionPair& pair,
                                                const BodyGeometry& geom, double dt, double eps) {
  LinearConstraintSet set(4);
  append_pair_rows(set, {pose_i, pose_j, pair, 0, 1}, geom, dt, eps);
  return set;
}

inline void append_polygon_rows(LinearConstraintSet& set, int slot, int robot,
                                const CalibrationParams& params, int v_sign) {
  for (const auto& h : polygon_constraints(params, v_sign)) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(set.num_vars());
    row(2 * slot) = h.a_v;
    row(2 * slot + 1) = h.a_omega;
    set.append(row, h.b, {RowKind::Polygon, robot, -1});
  }
}

/// Minimum-deviation control: the projection of u_hat onto {A u <= b}.
inline QpResult solve_min_deviation(const Eigen::VectorXd& u_hat,
                                    const LinearConstraintSet& constraints) {
  if (u_hat.size() != constraints.num_vars())
    throw std::invalid_argument("solve_min_deviation: dimension mismatch");
  return project_onto_polyhedron(u_hat, constraints.a, constraints.b);
}

/// Solver outcome for one assembly, as recorded in traces.
struct AssemblyDiagnostics {
  std::vector<int> robots;
  std::vector<RowLabel> active;
  double kkt_residual = 0.0;
  bool polygon_rows_dropped = false;
  bool infeasible = false;
  int iterations = 0;
};

/// Solves with the full row set; if that is infeasible, retries with the
/// polygon rows removed. Pair rows are never dropped.
inline QpResult solve_with_escalation(const Eigen::VectorXd& u_hat,
                                      const LinearConstraintSet& constraints,
                                      AssemblyDiagnostics& diag) {
  QpResult r = solve_min_deviation(u_hat, constraints);
  const LinearConstraintSet* used = &constraints;
  LinearConstraintSet reduced;
  if (r.status == QpStatus::Infeasible) {
    reduced = constraints.without(RowKind::Polygon);
    diag.polygon_rows_dropped = true;
    r = solve_min_deviation(u_hat, reduced);
    used = &reduced;
  }
  diag.infeasible = !r.ok();
  diag.kkt_residual = r.kkt_residual;
  diag.iterations = r.iterations;
  diag.active.clear();
  for (int row : r.active_set) diag.active.push_back(used->labels[row]);
  return r;
}

/// One assembly's projection. Each robot's feasible set is the union of a
/// forward and a backward polygon lobe; the lobe of each robot starts at the
/// sign of its target v and is then flipped greedily, robot by robot, while
/// that lowers the objective.
struct AssemblyProblem {
  Eigen::VectorXd u_hat;                 // stacked [v_0, w_0, ...]
  LinearConstraintSet pair_rows;         // over the same stacked vector
  std::vector<int> robots;               // robot id of each slot
  std::vector<CalibrationParams> params;  // per slot
};

inline QpResult solve_assembly(const AssemblyProblem& prob, AssemblyDiagnostics& diag,
                               bool refine_lobes = true) {
  const std::size_t k = prob.robots.size();
  std::vector<int> lobe(k);
  for (std::size_t r = 0; r < k; ++r) lobe[r] = prob.u_hat(2 * r) >= 0.0 ? 1 : -1;

  auto build = [&](const std::vector<int>& lobes) {
    LinearConstraintSet rows = prob.pair_rows;
    for (std::size_t r = 0; r < k; ++r)
      append_polygon_rows(rows, static_cast<int>(r), prob.robots[r], prob.params[r], lobes[r]);
    return rows;
  };
  auto objective = [&](const QpResult& q) {
    return q.ok() ? (q.u - prob.u_hat).squaredNorm() : std::numeric_limits<double>::infinity();
  };

  LinearConstraintSet rows = build(lobe);
  QpResult best = solve_min_deviation(prob.u_hat, rows);
  if (refine_lobes && k > 0) {
    for (std::size_t r = 0; r < k; ++r) {
      std::vector<int> trial = lobe;
      trial[r] = -trial[r];
      LinearConstraintSet trial_rows = build(trial);
      QpResult q = solve_min_deviation(prob.u_hat, trial_rows);
      if (objective(q) < objective(best) - 1e-15) {
        best = std::move(q);
        lobe = std::move(trial);
        rows = std::move(trial_rows);
      }
    }
  }
  diag.robots = prob.robots;
  return solve_with_escalation(prob.u_hat, rows, diag);
}

}  // namespace pairswarm

#endif  // PAIRSWARM_ASSEMBLY_QP_HPP_
