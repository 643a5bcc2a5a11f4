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

#include "kmpc/terminal.hpp"

#include <cmath>
#include <vector>

#include "kmpc/rng.hpp"

namespace kmpc {
namespace {

double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                     const Matrix& P) {
  const Matrix S = R + B.transpose() * P * B;
  const Matrix BtPA = B.transpose() * P * A;
  const Matrix rhs = Q + A.transpose() * P * A - BtPA.transpose() * S.ldlt().solve(BtPA);
  return (rhs - P).cwiseAbs().maxCoeff() / (1.0 + P.cwiseAbs().maxCoeff());
}

Matrix gain_from(const Matrix& A, const Matrix& B, const Matrix& R, const Matrix& P) {
  const Matrix S = R + B.transpose() * P * B;
  return -S.ldlt().solve(B.transpose() * P * A);
}

}  // namespace

Linearization linearize(const SystemModel& model, const Vector& x_eq, const Vector& u_eq,
                        double h) {
  if (x_eq.size() != model.n_x || u_eq.size() != model.n_u) {
    throw Error(ErrorCode::InvalidArgument, "linearization point has wrong dimension");
  }
  const double defect = (model.step(x_eq, u_eq) - x_eq).lpNorm<Eigen::Infinity>();
  if (!(defect <= 1e-8)) {
    throw Error(ErrorCode::InvalidArgument,
                "linearization point is not an equilibrium (defect " + std::to_string(defect) + ")");
  }
  Linearization lin;
  finite_difference_jacobian(model, x_eq, u_eq, lin.A, lin.B, h);
  return lin;
}

double spectral_radius(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

RiccatiSolution solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != B.cols() ||
      R.cols() != B.cols()) {
    throw Error(ErrorCode::InvalidArgument, "Riccati data has inconsistent shapes");
  }
  constexpr double kTol = 1e-10;
  RiccatiSolution out;

  // Structured doubling: H_k converges quadratically to the stabilizing P.
  Matrix Ak = A;
  Matrix Gk = B * R.ldlt().solve(B.transpose());
  Matrix Hk = Q;
  const Matrix I = Matrix::Identity(n, n);
  bool ok = false;
  for (int it = 0; it < 100; ++it) {
    const Eigen::PartialPivLU<Matrix> W(I + Gk * Hk);
    const Matrix WA = W.solve(Ak);
    const Matrix WG = W.solve(Gk);
    const Matrix H_next = Hk + Ak.transpose() * Hk * WA;
    const Matrix G_next = Gk + Ak * WG * Ak.transpose();
    const Matrix A_next = Ak * WA;
    out.iterations = it + 1;
    if (!H_next.allFinite()) break;
    const double change = (H_next - Hk).cwiseAbs().maxCoeff();
    Hk = 0.5 * (H_next + H_next.transpose());
    Gk = 0.5 * (G_next + G_next.transpose());
    Ak = A_next;
    if (change <= 1e-15 * (1.0 + Hk.cwiseAbs().maxCoeff())) {
      ok = true;
      break;
    }
  }
  Matrix P = Hk;
  if (!ok || dare_residual(A, B, Q, R, P) > kTol) {
    // Value iteration from Q.
    P = Q;
    ok = false;
    for (int it = 0; it < 100000; ++it) {
      const Matrix S = R + B.transpose() * P * B;
      const Matrix BtPA = B.transpose() * P * A;
      Matrix next = Q + A.transpose() * P * A - BtPA.transpose() * S.ldlt().solve(BtPA);
      next = 0.5 * (next + next.transpose());
      if (!next.allFinite() || next.cwiseAbs().maxCoeff() > 1e300) break;
      const double change = (next - P).cwiseAbs().maxCoeff();
      P = next;
      ++out.iterations;
      if (change <= 1e-14 * (1.0 + P.cwiseAbs().maxCoeff())) {
        ok = true;
        break;
      }
    }
  }
  if (!ok || !P.allFinite() || dare_residual(A, B, Q, R, P) > kTol) {
    throw Error(ErrorCode::Numerical, "Riccati iteration diverged; (A, B) may not be stabilizable");
  }
  out.P = P;
  out.K = gain_from(A, B, R, P);
  if (spectral_radius(A + B * out.K) >= 1.0) {
    throw Error(ErrorCode::Numerical, "Riccati solution does not stabilize (A, B)");
  }
  return out;
}

Matrix lqr_gain(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R) {
  return solve_dare(A, B, Q, R).K;
}

Matrix lyapunov_solve(const Matrix& A_K, const Matrix& M) {
  const Eigen::Index n = A_K.rows();
  if (A_K.cols() != n || M.rows() != n || M.cols() != n) {
    throw Error(ErrorCode::InvalidArgument, "Lyapunov data has inconsistent shapes");
  }
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + M.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::InvalidArgument, "Lyapunov right-hand side must be symmetric");
  }
  if (spectral_radius(A_K) >= 1.0) {
    throw Error(ErrorCode::InvalidArgument, "closed-loop matrix is not Schur stable");
  }

  Matrix P;
  if (n <= 16) {
    // (I - A' kron A') vec(P) = vec(M), column-major vec.
    const Eigen::Index nn = n * n;
    Matrix L = Matrix::Identity(nn, nn);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        L.block(i * n, j * n, n, n) -= A_K(j, i) * A_K.transpose();
      }
    }
    const Eigen::FullPivLU<Matrix> lu(L);
    const Vector m = Eigen::Map<const Vector>(M.data(), nn);
    Vector p = lu.solve(m);
    p += lu.solve(m - L * p);  // one refinement step
    P = Eigen::Map<const Matrix>(p.data(), n, n);
  } else {
    // Smith doubling: P = sum_k (A')^k M A^k.
    P = M;
    Matrix Ak = A_K;
    for (int it = 0; it < 64; ++it) {
      const Matrix inc = Ak.transpose() * P * Ak;
      P += inc;
      Ak = Ak * Ak;
      if (inc.cwiseAbs().maxCoeff() <= 1e-17 * P.cwiseAbs().maxCoeff()) break;
    }
  }
  P = 0.5 * (P + P.transpose());
  return P;
}

double size_terminal_set(const TerminalDesign& d, const SystemModel& model, const Box& u_box,
                         const Box& x_box, const TerminalSizingOptions& opt) {
  const int nx = model.n_x;
  if (d.P.rows() != nx || d.K.cols() != nx || d.K.rows() != model.n_u) {
    throw Error(ErrorCode::InvalidArgument, "terminal design does not match the model");
  }
  if (opt.n_check <= 0) throw Error(ErrorCode::InvalidArgument, "n_check must be positive");
  const Eigen::LLT<Matrix> llt(d.P);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidArgument, "terminal matrix P is not positive definite");
  }

  // Unit-level points z (z'Pz <= 1): x = sqrt(alpha) z.
  Rng rng(opt.seed);
  std::vector<Vector> unit;
  unit.reserve(opt.n_check);
  const Matrix Linv_t = llt.matrixU().solve(Matrix::Identity(nx, nx));  // L^{-T}
  for (int i = 0; i < opt.n_check; ++i) {
    Vector w(nx);
    for (int c = 0; c < nx; ++c) w[c] = rng.normal();
    const double norm = w.norm();
    if (norm == 0.0) {
      --i;
      continue;
    }
    w /= norm;
    if (i % 2 == 1) w *= std::pow(rng.uniform(), 1.0 / nx);
    unit.push_back(Linv_t * w);
  }

  const Matrix stage = d.Q + d.K.transpose() * d.R * d.K;
  auto passes = [&](double alpha) {
    const double scale = std::sqrt(alpha);
    for (const Vector& z : unit) {
      const Vector x = scale * z;
      const Vector u = d.K * x;
      if (!u_box.contains(u) || !x_box.contains(x)) return false;
      const Vector xn = model.step(x, u);
      const double v0 = x.dot(d.P * x);
      const double decrease = xn.dot(d.P * xn) - v0;
      if (decrease > -x.dot(stage * x) + opt.tol * (1.0 + v0)) return false;
    }
    return true;
  };

  double lo = 0.0;
  double hi = 1.0;
  if (passes(hi)) {
    lo = hi;
    while (true) {
      hi = 2.0 * lo;
      if (hi > opt.alpha_max) return opt.alpha_max;
      if (!passes(hi)) break;
      lo = hi;
    }
  } else {
    double a = 0.5;
    while (a > 1e-12 && !passes(a)) a *= 0.5;
    if (a <= 1e-12) {
      throw Error(ErrorCode::Numerical, "no positive terminal level satisfies the checks");
    }
    lo = a;
    hi = 2.0 * a;
  }
  for (int it = 0; it < opt.bisection_steps; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (passes(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

TerminalDesign design_terminal(const SystemModel& model, const Matrix& Q, const Matrix& R,
                               const Matrix& delta_q, const Box& u_box, const Box& x_box,
                               const TerminalSizingOptions& options) {
  TerminalDesign d;
  const Linearization lin =
      linearize(model, Vector::Zero(model.n_x), Vector::Zero(model.n_u));
  d.A = lin.A;
  d.B = lin.B;
  d.Q = Q;
  d.R = R;
  d.delta_q = delta_q;
  d.K = lqr_gain(d.A, d.B, Q, R);
  d.P = lyapunov_solve(d.closed_loop(), Q + d.K.transpose() * R * d.K + delta_q);
  d.alpha = size_terminal_set(d, model, u_box, x_box, options);
  return d;
}

}  // namespace kmpc
