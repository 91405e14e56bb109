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

// Dense dual active-set solver (Goldfarb-Idnani, identity Hessian) for
//
//   min ||u - u_hat||^2   s.t.   A u <= b
//
// i.e. the Euclidean projection of u_hat onto a polyhedron. Sized for the
// small per-assembly problems of this library (a few dozen variables).

#ifndef PAIRSWARM_QP_HPP_
#define PAIRSWARM_QP_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace pairswarm {

enum class QpStatus { Optimal, Infeasible, IterationLimit };

struct QpResult {
  QpStatus status = QpStatus::Optimal;
  Eigen::VectorXd u;
  Eigen::VectorXd multipliers;  // one per row of A, zero for inactive rows
  std::vector<int> active_set;  // row indices, in the order they were added
  double kkt_residual = 0.0;
  int most_violated_row = -1;  // set when infeasible
  double max_violation = 0.0;  // of the returned point, in the units of b
  int iterations = 0;

  bool ok() const { return status == QpStatus::Optimal; }
};

struct QpOptions {
  double feasibility_tol = 1e-11;  // on unit-normalized rows
  int max_iterations = 2000;
};

/// Max of stationarity, primal infeasibility, dual infeasibility and
/// complementarity for a candidate (u, lambda), with rows unit-normalized.
inline double projection_kkt_residual(const Eigen::VectorXd& u_hat, const Eigen::MatrixXd& a,
                                      const Eigen::VectorXd& b, const Eigen::VectorXd& u,
                                      const Eigen::VectorXd& lambda) {
  double res = ((u - u_hat) + a.transpose() * lambda).cwiseAbs().maxCoeff();
  if (u.size() == 0) res = 0.0;
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    const double nrm = a.row(k).norm();
    const double scale = nrm > 0.0 ? nrm : 1.0;
    const double slack = (a.row(k).dot(u) - b(k)) / scale;
    res = std::max(res, std::max(0.0, slack));
    res = std::max(res, std::max(0.0, -lambda(k) * scale));
    res = std::max(res, std::abs(lambda(k) * scale * slack));
  }
  return res;
}

inline QpResult project_onto_polyhedron(const Eigen::VectorXd& u_hat, const Eigen::MatrixXd& a_in,
                                        const Eigen::VectorXd& b_in, QpOptions opts = {}) {
  const Eigen::Index n = u_hat.size();
  const Eigen::Index m = a_in.rows();
  QpResult res;
  res.multipliers = Eigen::VectorXd::Zero(m);

  // Unit-normalize rows so tolerances are distances.
  Eigen::MatrixXd a = a_in;
  Eigen::VectorXd b = b_in;
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double nrm = a.row(k).norm();
    if (nrm > 0.0) {
      scale(k) = nrm;
      a.row(k) /= nrm;
      b(k) /= nrm;
    } else if (b(k) < -opts.feasibility_tol) {
      res.status = QpStatus::Infeasible;
      res.most_violated_row = static_cast<int>(k);
      res.u = u_hat;
      res.max_violation = -b(k);
      return res;
    }
  }

  Eigen::VectorXd u = u_hat;
  std::vector<int> active;
  std::vector<double> lam;  // multipliers of active rows (normalized rows)

  auto finish = [&](QpStatus st) {
    res.status = st;
    res.u = u;
    res.active_set = active;
    Eigen::VectorXd lam_norm = Eigen::VectorXd::Zero(m);
    for (std::size_t k = 0; k < active.size(); ++k) lam_norm(active[k]) = lam[k];
    res.multipliers = lam_norm.cwiseQuotient(scale);
    res.kkt_residual = projection_kkt_residual(u_hat, a_in, b_in, u, res.multipliers);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) worst = std::max(worst, a_in.row(k).dot(u) - b_in(k));
    res.max_violation = worst;
    return res;
  };

  while (res.iterations < opts.max_iterations) {
    // Most violated row.
    int p = -1;
    double worst = opts.feasibility_tol;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (std::find(active.begin(), active.end(), static_cast<int>(k)) != active.end()) continue;
      const double s = a.row(k).dot(u) - b(k);
      if (s > worst) {
        worst = s;
        p = static_cast<int>(k);
      }
    }
    if (p < 0) return finish(QpStatus::Optimal);

    double lam_p = 0.0;
    for (;;) {
      ++res.iterations;
      if (res.iterations > opts.max_iterations) return finish(QpStatus::IterationLimit);
      const Eigen::VectorXd ap = a.row(p).transpose();
      Eigen::VectorXd z = ap;
      Eigen::VectorXd r;
      if (!active.empty()) {
        Eigen::MatrixXd nmat(n, static_cast<Eigen::Index>(active.size()));
        for (std::size_t k = 0; k < active.size(); ++k) nmat.col(k) = a.row(active[k]).transpose();
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(nmat);
        r = qr.solve(ap);
        z = ap - nmat * r;
      }
      const double zz = z.squaredNorm();
      const double slack = ap.dot(u) - b(p);

      double t1 = std::numeric_limits<double>::infinity();
      int drop = -1;
      for (std::size_t k = 0; k < active.size(); ++k) {
        if (r(k) > 1e-14) {
          const double t = lam[k] / r(k);
          if (t < t1) {
            t1 = t;
            drop = static_cast<int>(k);
          }
        }
      }
      const double t2 = zz > 1e-20 ? slack / zz : std::numeric_limits<double>::infinity();

      if (!std::isfinite(t1) && !std::isfinite(t2)) {
        res.most_violated_row = p;
        return finish(QpStatus::Infeasible);
      }
      const double t = std::min(t1, t2);
      if (std::isfinite(t2)) u -= t * z;
      for (std::size_t k = 0; k < active.size(); ++k) lam[k] -= t * r(k);
      lam_p += t;

      if (t2 <= t1) {
        active.push_back(p);
        lam.push_back(lam_p);
        break;
      }
      active.erase(active.begin() + drop);
      lam.erase(lam.begin() + drop);
    }
  }
  return finish(QpStatus::IterationLimit);
}

}  // namespace pairswarm

#endif  // PAIRSWARM_QP_HPP_
