// Copyright 2026 The kmpc Authors
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

#include "kmpc/qp.hpp"

#include <cmath>
#include <limits>

namespace kmpc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Factorization state: J = L^{-T} Q with the first `iq` columns of J spanning
// the active normals, R upper triangular (iq x iq).
struct Factor {
  Matrix J;
  Matrix R;
  int iq = 0;
  double r_norm = 1.0;
};

// Rotates d so that only its first iq+1 entries are nonzero, applies the same
// rotations to J, and appends d as a new column of R.
bool add_constraint(Factor& f, Vector& d) {
  const int n = static_cast<int>(f.J.rows());
  for (int j = n - 1; j >= f.iq + 1; --j) {
    double cc = d[j - 1];
    double ss = d[j];
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    d[j] = 0.0;
    ss /= h;
    cc /= h;
    if (cc < 0.0) {
      cc = -cc;
      ss = -ss;
      d[j - 1] = -h;
    } else {
      d[j - 1] = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = 0; k < n; ++k) {
      const double t1 = f.J(k, j - 1);
      const double t2 = f.J(k, j);
      f.J(k, j - 1) = t1 * cc + t2 * ss;
      f.J(k, j) = xny * (t1 + f.J(k, j - 1)) - t2;
    }
  }
  ++f.iq;
  f.R.col(f.iq - 1).head(f.iq) = d.head(f.iq);
  const double diag = std::abs(d[f.iq - 1]);
  if (diag <= std::numeric_limits<double>::epsilon() * f.r_norm) {
    return false;
  }
  f.r_norm = std::max(f.r_norm, diag);
  return true;
}

// Removes the active constraint at position `pos`, shifting the active list
// and multipliers (including the pending multiplier at index iq) down.
void delete_constraint(Factor& f, std::vector<int>& active, Vector& u, int pos) {
  const int n = static_cast<int>(f.J.rows());
  for (int i = pos; i < f.iq - 1; ++i) {
    active[i] = active[i + 1];
    u[i] = u[i + 1];
    f.R.col(i) = f.R.col(i + 1);
  }
  active[f.iq - 1] = active[f.iq];
  u[f.iq - 1] = u[f.iq];
  active[f.iq] = -1;
  u[f.iq] = 0.0;
  f.R.col(f.iq - 1).setZero();
  --f.iq;
  if (f.iq == 0) return;

  for (int j = pos; j < f.iq; ++j) {
    double cc = f.R(j, j);
    double ss = f.R(j + 1, j);
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    cc /= h;
    ss /= h;
    f.R(j + 1, j) = 0.0;
    if (cc < 0.0) {
      f.R(j, j) = -h;
      cc = -cc;
      ss = -ss;
    } else {
      f.R(j, j) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = j + 1; k < f.iq; ++k) {
      const double t1 = f.R(j, k);
      const double t2 = f.R(j + 1, k);
      f.R(j, k) = t1 * cc + t2 * ss;
      f.R(j + 1, k) = xny * (t1 + f.R(j, k)) - t2;
    }
    for (int k = 0; k < n; ++k) {
      const double t1 = f.J(k, j);
      const double t2 = f.J(k, j + 1);
      f.J(k, j) = t1 * cc + t2 * ss;
      f.J(k, j + 1) = xny * (f.J(k, j) + t1) - t2;
    }
  }
}

// Primal direction z = J2 d2 and dual direction r = R^{-1} d1 for normal np.
void step_directions(const Factor& f, const Vector& np, Vector& d, Vector& z, Vector& r) {
  const int n = static_cast<int>(f.J.rows());
  d.noalias() = f.J.transpose() * np;
  z.noalias() = f.J.rightCols(n - f.iq) * d.tail(n - f.iq);
  r = f.R.topLeftCorner(f.iq, f.iq).triangularView<Eigen::Upper>().solve(d.head(f.iq));
}

}  // namespace

QpResult solve_qp(const QpProblem& p, const QpOptions& options) {
  const int n = static_cast<int>(p.hessian.rows());
  const int me = static_cast<int>(p.eq.rows());
  const int mi = static_cast<int>(p.ineq.rows());
  if (p.hessian.cols() != n || p.gradient.size() != n || (me > 0 && p.eq.cols() != n) ||
      (mi > 0 && p.ineq.cols() != n) || p.eq_offset.size() != me || p.ineq_offset.size() != mi) {
    throw Error(ErrorCode::InvalidArgument, "QP data has inconsistent dimensions");
  }

  Eigen::LLT<Matrix> llt(p.hessian);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::Numerical, "QP Hessian is not positive definite");
  }

  QpResult res;
  res.eq_multipliers = Vector::Zero(me);
  res.ineq_multipliers = Vector::Zero(mi);

  Factor f;
  f.J = llt.matrixU().solve(Matrix::Identity(n, n));  // U^{-1} = L^{-T}
  f.R = Matrix::Zero(n, n);

  Vector x = llt.solve(-p.gradient);
  Vector u = Vector::Zero(n + 1);
  std::vector<int> active(n + 1, -1);  // constraint id; equalities are [0, me)
  Vector d(n), z(n), r;

  for (int i = 0; i < me; ++i) {
    const Vector np = p.eq.row(i).transpose();
    step_directions(f, np, d, z, r);
    double t2 = 0.0;
    if (z.squaredNorm() > std::numeric_limits<double>::epsilon()) {
      t2 = -(np.dot(x) + p.eq_offset[i]) / z.dot(np);
    }
    x += t2 * z;
    u[f.iq] = t2;
    u.head(f.iq) -= t2 * r;
    active[f.iq] = i;
    if (!add_constraint(f, d)) {
      throw Error(ErrorCode::Numerical, "QP equality constraints are linearly dependent");
    }
  }

  std::vector<char> is_active(mi, 0);
  Vector row_norm(mi);
  for (int i = 0; i < mi; ++i) row_norm[i] = std::max(1.0, p.ineq.row(i).norm());

  auto finish = [&](QpStatus status) {
    res.status = status;
    res.x = x;
    for (int k = 0; k < f.iq; ++k) {
      if (active[k] < me) {
        res.eq_multipliers[active[k]] = u[k];
      } else {
        res.ineq_multipliers[active[k] - me] = u[k];
        res.active.push_back(active[k] - me);
      }
    }
    res.objective = 0.5 * x.dot(p.hessian * x) + p.gradient.dot(x);
    return res;
  };

  Vector slack(mi);
  while (true) {
    if (++res.iterations > options.max_iterations) return finish(QpStatus::MaxIterations);

    // Most violated inactive constraint (scaled by its row norm).
    if (mi > 0) slack.noalias() = p.ineq * x + p.ineq_offset;
    int ip = -1;
    double worst = -options.feasibility_tol;
    for (int i = 0; i < mi; ++i) {
      if (is_active[i]) continue;
      const double s = slack[i] / row_norm[i];
      if (s < worst) {
        worst = s;
        ip = i;
      }
    }
    if (ip < 0) return finish(QpStatus::Optimal);

    const Vector np = p.ineq.row(ip).transpose();
    double s_p = slack[ip];
    u[f.iq] = 0.0;
    active[f.iq] = me + ip;

    while (true) {
      step_directions(f, np, d, z, r);

      // Largest dual step keeping active inequality multipliers nonnegative.
      double t1 = kInf;
      int drop = -1;
      for (int k = me; k < f.iq; ++k) {
        if (r[k] > 0.0) {
          const double ratio = u[k] / r[k];
          if (ratio < t1) {
            t1 = ratio;
            drop = k;
          }
        }
      }
      // Full step onto the new constraint.
      double t2 = kInf;
      if (z.squaredNorm() > std::numeric_limits<double>::epsilon() * 1e-4) {
        t2 = -s_p / z.dot(np);
      }
      const double t = std::min(t1, t2);
      if (t == kInf) return finish(QpStatus::Infeasible);

      if (t2 == kInf) {
        // Dual-only step; the dropped constraint frees a primal direction.
        u.head(f.iq) -= t * r;
        u[f.iq] += t;
        is_active[active[drop] - me] = 0;
        delete_constraint(f, active, u, drop);
        continue;
      }

      x += t * z;
      u.head(f.iq) -= t * r;
      u[f.iq] += t;

      if (t == t2) {
        if (!add_constraint(f, d)) return finish(QpStatus::Infeasible);
        is_active[ip] = 1;
        break;
      }
      is_active[active[drop] - me] = 0;
      delete_constraint(f, active, u, drop);
      s_p = np.dot(x) + p.ineq_offset[ip];
      if (++res.iterations > options.max_iterations) return finish(QpStatus::MaxIterations);
    }
  }
}

}  // namespace kmpc
