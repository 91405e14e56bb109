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

// Brute-force reference implementations and the verification suites that
// compare the production algorithms against them.

#ifndef PAIRSWARM_ORACLES_HPP_
#define PAIRSWARM_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pairswarm/assembly_qp.hpp"
#include "pairswarm/kinematics.hpp"
#include "pairswarm/planner.hpp"

namespace pairswarm::oracle {

// ---------------------------------------------------------------------------
// Reference implementations

/// Minimum assignment cost over all n! permutations.
inline double brute_force_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    best = std::min(best, assignment_cost(cost, perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Tree weight summed in ascending edge order, so equal edge sets give
/// bit-identical totals.
inline double tree_weight(std::vector<double> w) {
  std::sort(w.begin(), w.end());
  return std::accumulate(w.begin(), w.end(), 0.0);
}

/// Minimum spanning-tree weight over every labelled tree (Pruefer sequences).
inline double enumerate_mst_weight(const std::vector<Vec2>& pts) {
  const int n = static_cast<int>(pts.size());
  if (n < 2) return 0.0;
  if (n == 2) return (pts[0] - pts[1]).norm();
  std::vector<int> seq(n - 2, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<int> degree(n, 1);
    for (int s : seq) ++degree[s];
    std::vector<double> w;
    w.reserve(n - 1);
    for (int s : seq) {
      int leaf = 0;
      while (degree[leaf] != 1) ++leaf;
      w.push_back((pts[leaf] - pts[s]).norm());
      --degree[leaf];
      --degree[s];
    }
    int a = -1, b = -1;
    for (int k = 0; k < n; ++k)
      if (degree[k] == 1) (a < 0 ? a : b) = k;
    w.push_back((pts[a] - pts[b]).norm());
    best = std::min(best, tree_weight(std::move(w)));

    int pos = n - 3;
    while (pos >= 0 && seq[pos] == n - 1) seq[pos--] = 0;
    if (pos < 0) break;
    ++seq[pos];
  }
  return best;
}

namespace detail {

// Evaluates the grid center + basis * z, z on `points` values per axis in
// [-half, half], and keeps the best feasible point.
inline void scan_grid(const Eigen::VectorXd& u_hat, const Eigen::MatrixXd& a,
                      const Eigen::VectorXd& b, const Eigen::VectorXd& center,
                      const Eigen::MatrixXd& basis, const Eigen::VectorXd& half, int points,
                      double& best, Eigen::VectorXd& best_u) {
  const Eigen::Index k = basis.cols(), m = a.rows();
  const Eigen::MatrixXd ab = a * basis;
  const Eigen::VectorXd slack0 = a * center - b;
  const Eigen::VectorXd d0 = center - u_hat;
  // The objective is expanded as |d0 + B z|^2 = |d0|^2 + 2 d0'B z + z'B'B z.
  const Eigen::VectorXd g = basis.transpose() * d0;
  const Eigen::MatrixXd gram = basis.transpose() * basis;
  const double f0 = d0.squaredNorm();
  std::vector<int> idx(k, 0);
  Eigen::VectorXd z(k), lhs(m);
  while (true) {
    for (Eigen::Index d = 0; d < k; ++d) z(d) = -half(d) + 2.0 * half(d) * idx[d] / (points - 1);
    const double f = f0 + 2.0 * g.dot(z) + z.dot(gram * z);
    if (f < best) {
      lhs.noalias() = ab * z;
      bool feasible = true;
      for (Eigen::Index r = 0; r < m && feasible; ++r) feasible = slack0(r) + lhs(r) <= 0.0;
      if (feasible) {
        const Eigen::VectorXd u = center + basis * z;
        // Recheck in the original form so the reported value is exact.
        if (((a * u - b).array() <= 0.0).all()) {
          const double fu = (u - u_hat).squaredNorm();
          if (fu < best) {
            best = fu;
            best_u = u;
          }
        }
      }
    }
    Eigen::Index d = 0;
    while (d < k && ++idx[d] == points) idx[d++] = 0;
    if (d == k) break;
  }
}

}  // namespace detail

/// Dense grid search of min ||u - u_hat||^2 s.t. A u <= b, starting from the
/// box [lo, hi]. Each round scans a grid of `points` values per axis around
/// the best point so far. When that grid brings no improvement, a second grid
/// of the same width is laid out along the face of the rows that are nearly
/// tight at the best point; if neither improves, the width halves.
inline double grid_search_projection(const Eigen::VectorXd& u_hat, const Eigen::MatrixXd& a,
                                     const Eigen::VectorXd& b, const Eigen::VectorXd& lo,
                                     const Eigen::VectorXd& hi, double min_width = 1e-9,
                                     int points = 5, int max_rounds = 4000) {
  const Eigen::Index dim = u_hat.size();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd center = (lo + hi) / 2.0, half = (hi - lo) / 2.0;
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_u = center;
  detail::scan_grid(u_hat, a, b, center, eye, half, points, best, best_u);
  for (int round = 0; round < max_rounds && half.maxCoeff() > min_width; ++round) {
    const double before = best;
    center = best_u;
    detail::scan_grid(u_hat, a, b, center, eye, half, points, best, best_u);
    if (best < before) continue;

    std::vector<Eigen::Index> tight;
    const double reach = half.norm();
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      if (b(r) - a.row(r).dot(center) <= reach * a.row(r).norm()) tight.push_back(r);
    if (!tight.empty()) {
      Eigen::MatrixXd at(static_cast<Eigen::Index>(tight.size()), dim);
      for (std::size_t k = 0; k < tight.size(); ++k) at.row(static_cast<Eigen::Index>(k)) = a.row(tight[k]);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(at);
      const Eigen::MatrixXd basis = lu.kernel();
      if (lu.rank() < dim && basis.cols() > 0) {
        const Eigen::VectorXd kh = Eigen::VectorXd::Constant(basis.cols(), half.maxCoeff());
        detail::scan_grid(u_hat, a, b, center, basis, kh, points, best, best_u);
      }
    }
    if (!(best < before)) half /= 2.0;
  }
  return best;
}

/// Distance between the exact connection point after one step and its
/// one-step linearization.
inline double linearization_error(const Pose2D& pose, const ControlInput& u, const Vec2& offset,
                                  double dt) {
  const Pose2D next = step_unicycle(pose, u, dt);
  const double c = std::cos(next.theta()), s = std::sin(next.theta());
  const Vec2 exact{next.x() + offset.x() * c - offset.y() * s,
                   next.y() + offset.x() * s + offset.y() * c};
  return (exact - linearize_point(pose, offset).evaluate(u, dt)).norm();
}

/// Best objective over all integer PWM pairs with each motor stopped or in
/// [m_min, m_max] in magnitude.
inline double exhaustive_pwm_objective(const ControlInput& target, const CalibrationParams& p) {
  std::vector<int> values{0};
  for (int m = static_cast<int>(std::ceil(p.m_min)); m <= static_cast<int>(std::floor(p.m_max)); ++m) {
    values.push_back(m);
    values.push_back(-m);
  }
  double best = std::numeric_limits<double>::infinity();
  for (int r : values)
    for (int l : values) best = std::min(best, pwm_objective(r, l, target, p));
  return best;
}

/// Upper bound on how much the objective can rise when moving the continuous
/// solution to an integer point at most one unit away per motor.
inline double pwm_quantization_bound(const PwmCommand& m, const ControlInput& target,
                                     const CalibrationParams& p) {
  const double a = p.k_v / 2.0, b = p.k_omega;
  const double ev = a * (m.m_r + m.m_l) - target.v;
  const double ew = b * (m.m_r - m.m_l) - target.omega;
  const double gr = 2.0 * (p.mu_v * a * ev + p.mu_omega * b * ew);
  const double gl = 2.0 * (p.mu_v * a * ev - p.mu_omega * b * ew);
  const double wmax = std::max(p.mu_v * a * a, p.mu_omega * b * b);
  return std::abs(gr) + std::abs(gl) + 4.0 * wmax;
}

// ---------------------------------------------------------------------------
// Random instances

/// A 3-robot assembly near a coupled configuration, with every pair inside
/// its eps box, and a target control that pushes against the constraints.
struct QpInstance {
  Eigen::VectorXd u_hat;
  LinearConstraintSet rows;
  Eigen::VectorXd lo, hi;
};

inline QpInstance random_qp_instance(std::mt19937_64& rng, double dt = 0.02, double eps = 0.004) {
  const BodyGeometry geom = BodyGeometry::standard();
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const auto base = coin(rng) ? make_line(3, geom) : make_mesh(2, 2, geom);
  const double rot = kPi * unit(rng);
  std::vector<Pose2D> poses;
  for (int k = 0; k < 3; ++k) {
    const Vec2 p = rotate(base.poses[k].position(), rot);
    poses.emplace_back(p.x() + 0.3 * eps * unit(rng), p.y() + 0.3 * eps * unit(rng),
                       base.poses[k].theta() + rot + 0.02 * unit(rng));
  }
  const std::vector<CalibrationParams> params{CalibrationParams::pilot(),
                                              CalibrationParams::non_pilot(),
                                              CalibrationParams::non_pilot()};
  QpInstance inst{Eigen::VectorXd(6), LinearConstraintSet(6), Eigen::VectorXd(6),
                  Eigen::VectorXd(6)};
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const auto cp = find_min_distance_pair(poses[i], poses[j], geom);
      if (cp.distance >= eps) continue;
      append_pair_rows(inst.rows,
                       {poses[i], poses[j], {i, cp.points.first, j, cp.points.second}, i, j}, geom,
                       dt, eps);
    }
  for (int k = 0; k < 3; ++k) {
    const auto& p = params[k];
    const int sign = coin(rng) ? 1 : -1;
    inst.u_hat(2 * k) = sign * p.polygon_b * (0.2 + 1.0 * std::abs(unit(rng)));
    inst.u_hat(2 * k + 1) = -p.polygon_a.y() * 1.2 * unit(rng);
    append_polygon_rows(inst.rows, k, k, p, sign);
    inst.lo(2 * k) = sign > 0 ? 0.0 : -p.polygon_b;
    inst.hi(2 * k) = sign > 0 ? p.polygon_b : 0.0;
    inst.lo(2 * k + 1) = p.polygon_a.y();
    inst.hi(2 * k + 1) = -p.polygon_a.y();
  }
  return inst;
}

// ---------------------------------------------------------------------------
// Suites

struct SuiteResult {
  std::string name;
  int cases = 0;
  int failures = 0;
  std::string detail;  // first failure, or a summary statistic
  bool passed() const { return cases > 0 && failures == 0; }
};

/// The implementations under test. Defaults are the production functions;
/// a suite fails when its hook disagrees with the reference.
struct Hooks {
  std::function<std::vector<int>(const Eigen::MatrixXd&)> hungarian = pairswarm::hungarian;
  std::function<std::vector<WeightedEdge>(const std::vector<Vec2>&)> mst =
      pairswarm::minimum_spanning_tree;
  std::function<QpResult(const Eigen::VectorXd&, const LinearConstraintSet&)> qp =
      [](const Eigen::VectorXd& u, const LinearConstraintSet& c) { return solve_min_deviation(u, c); };
  std::function<LinearizedPoint(const Pose2D&, const Vec2&)> linearize = linearize_point;
  std::function<PwmCommand(const ControlInput&, const CalibrationParams&)> pwm =
      [](const ControlInput& t, const CalibrationParams& p) {
        return allocate_pwm(t, p, {.deadband = false});
      };
};

/// Hungarian with the assignments of its first two rows exchanged.
inline std::vector<int> mutated_hungarian(const Eigen::MatrixXd& cost) {
  auto perm = pairswarm::hungarian(cost);
  if (perm.size() >= 2) std::swap(perm[0], perm[1]);
  return perm;
}

inline SuiteResult hungarian_suite(const Hooks& h, std::uint64_t seed, int cases = 200) {
  SuiteResult r;
  r.name = "hungarian";
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(1, 8), entry(0, 1000);
  for (int c = 0; c < cases; ++c) {
    const int n = size(rng);
    Eigen::MatrixXd cost(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cost(i, j) = entry(rng);
    const double got = assignment_cost(cost, h.hungarian(cost));
    const double want = brute_force_assignment(cost);
    ++r.cases;
    if (got != want) {
      if (r.failures++ == 0) {
        std::ostringstream os;
        os << "case " << c << " (n=" << n << "): cost " << got << " vs brute force " << want;
        r.detail = os.str();
      }
    }
  }
  return r;
}

inline SuiteResult mst_suite(const Hooks& h, std::uint64_t seed, int cases = 200) {
  SuiteResult r;
  r.name = "mst";
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(2, 7);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  for (int c = 0; c < cases; ++c) {
    const int n = size(rng);
    std::vector<Vec2> pts(n);
    for (auto& p : pts) p = {coord(rng), coord(rng)};
    std::vector<double> w;
    for (const auto& e : h.mst(pts)) w.push_back(e.weight);
    const double got = static_cast<int>(w.size()) == n - 1 ? tree_weight(w)
                                                          : std::numeric_limits<double>::infinity();
    const double want = enumerate_mst_weight(pts);
    ++r.cases;
    if (got != want && r.failures++ == 0) {
      std::ostringstream os;
      os.precision(17);
      os << "case " << c << " (n=" << n << "): weight " << got << " vs enumeration " << want;
      r.detail = os.str();
    }
  }
  return r;
}

inline SuiteResult qp_grid_suite(const Hooks& h, std::uint64_t seed, int cases = 100,
                                 double tol = 1e-5) {
  SuiteResult r;
  r.name = "qp_grid";
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int c = 0; c < cases; ++c) {
    const QpInstance inst = random_qp_instance(rng);
    const QpResult q = h.qp(inst.u_hat, inst.rows);
    const double got = q.ok() ? (q.u - inst.u_hat).squaredNorm() : std::numeric_limits<double>::infinity();
    const double want =
        grid_search_projection(inst.u_hat, inst.rows.a, inst.rows.b, inst.lo, inst.hi);
    const double gap = std::abs(got - want);
    worst = std::max(worst, gap);
    ++r.cases;
    if (!(gap <= tol) && r.failures++ == 0) {
      std::ostringstream os;
      os << "case " << c << ": objective " << got << " vs grid " << want;
      r.detail = os.str();
    }
  }
  if (r.failures == 0) {
    std::ostringstream os;
    os << "max objective gap " << std::scientific << worst;
    r.detail = os.str();
  }
  return r;
}

inline SuiteResult linearization_suite(const Hooks& h, std::uint64_t seed, int cases = 1000,
                                       double min_ratio = 3.5) {
  SuiteResult r;
  r.name = "linearization";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double dts[] = {0.02, 0.01, 0.005};
  double lowest = std::numeric_limits<double>::infinity();
  for (int c = 0; c < cases; ++c) {
    const Pose2D pose(unit(rng), unit(rng), kPi * unit(rng));
    const ControlInput u{0.47 * unit(rng), 2.19 * unit(rng)};
    const Vec2 offset{0.05 * unit(rng), 0.05 * unit(rng)};
    const auto lp = h.linearize(pose, offset);
    double err[3];
    for (int k = 0; k < 3; ++k) {
      const Pose2D next = step_unicycle(pose, u, dts[k]);
      const double cs = std::cos(next.theta()), sn = std::sin(next.theta());
      const Vec2 exact{next.x() + offset.x() * cs - offset.y() * sn,
                       next.y() + offset.x() * sn + offset.y() * cs};
      err[k] = (exact - lp.evaluate(u, dts[k])).norm();
    }
    const double ratio = std::min(err[0] / err[1], err[1] / err[2]);
    lowest = std::min(lowest, ratio);
    ++r.cases;
    if (!(ratio >= min_ratio) && r.failures++ == 0) {
      std::ostringstream os;
      os << "case " << c << ": error ratio " << ratio;
      r.detail = os.str();
    }
  }
  if (r.failures == 0) {
    std::ostringstream os;
    os << "min error ratio " << lowest;
    r.detail = os.str();
  }
  return r;
}

inline SuiteResult pwm_suite(const Hooks& h, std::uint64_t seed, int cases_per_kind = 500) {
  SuiteResult r;
  r.name = "pwm";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (const auto& p : {CalibrationParams::pilot(), CalibrationParams::non_pilot()}) {
    for (int c = 0; c < cases_per_kind; ++c) {
      // Half the targets are small enough to sit near the stop band.
      const double scale = c % 2 == 0 ? 1.0 : 0.1;
      const ControlInput t{scale * p.k_v * p.m_max * unit(rng),
                           scale * 2.0 * p.k_omega * p.m_max * unit(rng)};
      const PwmCommand m = h.pwm(t, p);
      const double got = pwm_objective(m.m_r, m.m_l, t, p);
      const double want = exhaustive_pwm_objective(t, p);
      const double scale_f = std::max(want, 1e-300);
      const bool relaxation_ok = got <= want + 1e-12 * scale_f + 1e-18;
      const bool quantization_ok = want <= got + pwm_quantization_bound(m, t, p);
      const bool feasible = pwm_feasible(m.m_r, p) && pwm_feasible(m.m_l, p);
      ++r.cases;
      if (!(relaxation_ok && quantization_ok && feasible) && r.failures++ == 0) {
        std::ostringstream os;
        os << "target (" << t.v << ", " << t.omega << "): objective " << got
           << " vs exhaustive " << want;
        r.detail = os.str();
      }
    }
  }
  return r;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"hungarian", "mst", "qp_grid", "linearization", "pwm"};
  return names;
}

inline std::vector<SuiteResult> run_all(const Hooks& h = {}, std::uint64_t seed = 20260101) {
  return {hungarian_suite(h, seed), mst_suite(h, seed + 1), qp_grid_suite(h, seed + 2),
          linearization_suite(h, seed + 3), pwm_suite(h, seed + 4)};
}

}  // namespace pairswarm::oracle

#endif  // PAIRSWARM_ORACLES_HPP_
