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

// Configuration planning: which connection pairs a configuration implies
// (minimum spanning tree over robot positions, closest point combination per
// edge), and which physical robot takes which goal slot (center alignment,
// distance-sorted pairs, Hungarian assignment). Also the line and mesh goal
// generators.

#ifndef PAIRSWARM_PLANNER_HPP_
#define PAIRSWARM_PLANNER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pairswarm/geometry.hpp"

namespace pairswarm {

/// Relative goal poses, meaningful up to a rigid transform.
struct GoalConfiguration {
  std::vector<Pose2D> poses;

  std::size_t size() const { return poses.size(); }
};

using PointPair = std::pair<ConnectionPointId, ConnectionPointId>;
/// (i, j) with i < j -> (point on i, point on j).
using PairDict = std::map<std::pair<int, int>, PointPair>;

/// A goal pair over robot ids, with the center distance of its two robots in
/// the goal configuration (the sort key).
struct GoalPair {
  ConnectionPair pair;
  double goal_distance = 0.0;
};

// Distances closer than this are treated as ties and resolved canonically.
inline constexpr double kTieTolerance = 1e-9;

inline std::int64_t tie_key(double w) {
  return static_cast<std::int64_t>(std::llround(w / kTieTolerance));
}

// ---------------------------------------------------------------------------
// Disjoint sets

class DisjointSet {
 public:
  DisjointSet() = default;
  explicit DisjointSet(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  int find(int x) const {
    while (parent_[x] != x) x = parent_[x];
    return x;
  }
  /// Returns false when already joined.
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }
  std::size_t size() const { return parent_.size(); }
  std::size_t num_sets() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < parent_.size(); ++i) n += parent_[i] == static_cast<int>(i);
    return n;
  }
  /// Members of every set, each sorted ascending, sets ordered by smallest member.
  std::vector<std::vector<int>> groups() const {
    std::map<int, std::vector<int>> by_root;
    std::vector<std::vector<int>> out;
    for (std::size_t i = 0; i < parent_.size(); ++i) by_root[find(static_cast<int>(i))].push_back(static_cast<int>(i));
    for (auto& [root, members] : by_root) out.push_back(std::move(members));
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
};

// ---------------------------------------------------------------------------
// Hungarian algorithm

/// Minimum-cost perfect assignment for a square cost matrix. Returns perm with
/// perm[row] = assigned column. O(n^3) shortest augmenting path with potentials.
inline std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols()) throw std::invalid_argument("hungarian: cost matrix must be square");
  if (!cost.allFinite()) throw std::invalid_argument("hungarian: cost entries must be finite");
  const int n = static_cast<int>(cost.rows());
  if (n == 0) return {};
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is a virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> perm(n, -1);
  for (int j = 1; j <= n; ++j) perm[match[j] - 1] = j - 1;
  return perm;
}

/// Sum of cost(row, perm[row]) in row order.
inline double assignment_cost(const Eigen::MatrixXd& cost, const std::vector<int>& perm) {
  double s = 0.0;
  for (std::size_t r = 0; r < perm.size(); ++r) s += cost(static_cast<Eigen::Index>(r), perm[r]);
  return s;
}

// ---------------------------------------------------------------------------
// Minimum spanning tree

struct WeightedEdge {
  int i = 0;
  int j = 0;
  double weight = 0.0;
};

/// Kruskal over the complete graph of the given positions, weights are
/// Euclidean distances. Ties are broken by (i, j).
inline std::vector<WeightedEdge> minimum_spanning_tree(const std::vector<Vec2>& points) {
  const int n = static_cast<int>(points.size());
  std::vector<WeightedEdge> edges;
  edges.reserve(static_cast<std::size_t>(n) * (n > 0 ? n - 1 : 0) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j, (points[i] - points[j]).norm()});
  std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
    return std::tuple(tie_key(a.weight), a.i, a.j) < std::tuple(tie_key(b.weight), b.i, b.j);
  });
  DisjointSet ds(static_cast<std::size_t>(n));
  std::vector<WeightedEdge> tree;
  for (const auto& e : edges) {
    if (ds.unite(e.i, e.j)) tree.push_back(e);
    if (static_cast<int>(tree.size()) + 1 == n) break;
  }
  return tree;
}

inline std::vector<Vec2> positions_of(const std::vector<Pose2D>& poses) {
  std::vector<Vec2> out;
  out.reserve(poses.size());
  for (const auto& p : poses) out.push_back(p.position());
  return out;
}

// ---------------------------------------------------------------------------
// Connection pairs

struct ClosestPoints {
  PointPair points;
  double distance = 0.0;
};

/// Closest combination of connection points between two robots; ties within
/// kTieTolerance go to the lowest (point_i, point_j) index pair.
inline ClosestPoints find_min_distance_pair(const Pose2D& pose_i, const Pose2D& pose_j,
                                            const BodyGeometry& geom) {
  std::array<Vec2, ConnectionPointId::kCount> ci, cj;
  for (int k = 0; k < ConnectionPointId::kCount; ++k) {
    ci[k] = connection_point_world(pose_i, geom, ConnectionPointId::from_index(k));
    cj[k] = connection_point_world(pose_j, geom, ConnectionPointId::from_index(k));
  }
  ClosestPoints best{{}, std::numeric_limits<double>::infinity()};
  for (int a = 0; a < ConnectionPointId::kCount; ++a) {
    for (int b = 0; b < ConnectionPointId::kCount; ++b) {
      const double d = (ci[a] - cj[b]).norm();
      if (d < best.distance - kTieTolerance) {
        best = {{ConnectionPointId::from_index(a), ConnectionPointId::from_index(b)}, d};
      }
    }
  }
  return best;
}

/// Connection pairs implied by an aligned configuration: the minimum spanning
/// tree of robot positions, each edge labelled with its closest point pair.
inline PairDict find_exist_pairs(const std::vector<Pose2D>& poses, const BodyGeometry& geom) {
  PairDict dict;
  if (poses.size() < 2) return dict;
  for (const auto& e : minimum_spanning_tree(positions_of(poses))) {
    dict[{e.i, e.j}] = find_min_distance_pair(poses[e.i], poses[e.j], geom).points;
  }
  return dict;
}

inline Vec2 mean_position(const std::vector<Pose2D>& poses) {
  Vec2 m = Vec2::Zero();
  for (const auto& p : poses) m += p.position();
  return poses.empty() ? m : Vec2(m / static_cast<double>(poses.size()));
}

/// Shifts the goal so its mean position equals the mean of the current poses.
inline GoalConfiguration align_center(const GoalConfiguration& goal, const std::vector<Pose2D>& poses) {
  if (goal.size() != poses.size()) throw std::invalid_argument("align_center: size mismatch");
  const Vec2 shift = mean_position(poses) - mean_position(goal.poses);
  GoalConfiguration out;
  out.poses.reserve(goal.size());
  for (const auto& g : goal.poses) out.poses.emplace_back(g.x() + shift.x(), g.y() + shift.y(), g.theta());
  return out;
}

/// Goal pairs sorted ascending by goal center distance, ties by (i, j).
inline std::vector<GoalPair> sort_pairs(const PairDict& dict, const std::vector<Pose2D>& goal_poses) {
  std::vector<GoalPair> out;
  for (const auto& [key, pts] : dict) {
    const double d = (goal_poses[key.first].position() - goal_poses[key.second].position()).norm();
    out.push_back({ConnectionPair{key.first, pts.first, key.second, pts.second}, d});
  }
  std::stable_sort(out.begin(), out.end(), [](const GoalPair& a, const GoalPair& b) {
    return std::tuple(tie_key(a.goal_distance), a.pair) < std::tuple(tie_key(b.goal_distance), b.pair);
  });
  return out;
}

struct PairAssignment {
  std::vector<GoalPair> pairs;      // over robot ids, activation order
  std::vector<int> goal_to_robot;   // goal slot -> robot id
  GoalConfiguration aligned_goal;   // goal shifted onto the robots' centroid
};

/// Goal pairs relabelled onto physical robots. Pairs are ordered by goal
/// distance, so line (1 L) couplings come before cross-row (sqrt(2) L) ones.
inline PairAssignment assign_connection_pairs(const GoalConfiguration& goal,
                                              const std::vector<Pose2D>& poses,
                                              const BodyGeometry& geom) {
  if (goal.size() != poses.size()) throw std::invalid_argument("assign_connection_pairs: size mismatch");
  PairAssignment out;
  out.aligned_goal = align_center(goal, poses);
  const auto sorted = sort_pairs(find_exist_pairs(out.aligned_goal.poses, geom), out.aligned_goal.poses);
  const auto n = static_cast<Eigen::Index>(poses.size());
  Eigen::MatrixXd cost(n, n);
  for (Eigen::Index g = 0; g < n; ++g)
    for (Eigen::Index r = 0; r < n; ++r)
      cost(g, r) = (out.aligned_goal.poses[g].position() - poses[r].position()).squaredNorm();
  out.goal_to_robot = hungarian(cost);
  for (const auto& gp : sorted) {
    const auto& p = gp.pair;
    out.pairs.push_back({ConnectionPair::make(out.goal_to_robot[p.robot_i], p.point_i,
                                              out.goal_to_robot[p.robot_j], p.point_j),
                         gp.goal_distance});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Goal generators

inline GoalConfiguration centered(std::vector<Pose2D> poses) {
  const Vec2 m = mean_position(poses);
  for (auto& p : poses) p = Pose2D(p.x() - m.x(), p.y() - m.y(), p.theta());
  return {std::move(poses)};
}

/// n robots side by side, same heading, centers one body length apart.
inline GoalConfiguration make_line(int n, const BodyGeometry& geom) {
  if (n < 2) throw std::invalid_argument("make_line: need at least 2 robots");
  std::vector<Pose2D> poses;
  for (int k = 0; k < n; ++k) poses.emplace_back(0.0, k * geom.body_length, 0.0);
  return centered(std::move(poses));
}

/// rows x cols robots: each row is a line; consecutive rows are shifted half a
/// body sideways and couple front-to-back, so a robot interlocks with two
/// robots of the neighbouring row at a center distance of sqrt(2) L.
inline GoalConfiguration make_mesh(int rows, int cols, const BodyGeometry& geom) {
  if (rows < 1 || cols < 1 || rows * cols < 2)
    throw std::invalid_argument("make_mesh: need rows, cols >= 1 and at least 2 robots");
  const double l = geom.body_length;
  const double row_spacing = 2.0 * geom.offset(ConnectionPointId{Side::Front, 0}).x();
  std::vector<Pose2D> poses;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      poses.emplace_back(r * row_spacing, c * l + (r % 2) * l / 2.0, 0.0);
  return centered(std::move(poses));
}

/// Every goal robot has a partner whose closest connection points are within tol.
inline bool is_coupled_configuration(const GoalConfiguration& goal, const BodyGeometry& geom,
                                     double tol) {
  if (goal.size() < 2) return true;
  for (std::size_t i = 0; i < goal.size(); ++i) {
    bool found = false;
    for (std::size_t j = 0; j < goal.size() && !found; ++j)
      if (i != j && find_min_distance_pair(goal.poses[i], goal.poses[j], geom).distance <= tol)
        found = true;
    if (!found) return false;
  }
  return true;
}

}  // namespace pairswarm

#endif  // PAIRSWARM_PLANNER_HPP_
