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

#include "kmpc/mpc.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "kmpc/qp.hpp"

namespace kmpc {
namespace {

bool is_symmetric(const Matrix& M, double tol = 1e-10) {
  return M.rows() == M.cols() && (M - M.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + M.cwiseAbs().maxCoeff());
}

double min_eigenvalue(const Matrix& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()));
  return es.eigenvalues().minCoeff();
}

// Violation of the state box, input box and normalized terminal constraint.
struct Violation {
  double gaps = 0.0;         // l1 norm of shooting gaps
  double constraints = 0.0;  // l1 norm of box / terminal violations
  double max_abs = 0.0;      // max over constraint violations only
};

Violation measure(const OcpSpec& spec, const Box& xb, const std::vector<Vector>& xs,
                  const std::vector<Vector>& us) {
  Violation v;
  const int N = spec.horizon;
  for (int i = 0; i < N; ++i) {
    v.gaps += (spec.model.step(xs[i], us[i]) - xs[i + 1]).lpNorm<1>();
  }
  for (int k = 1; k <= N; ++k) {
    for (Eigen::Index c = 0; c < xb.dim(); ++c) {
      const double lo = std::max(0.0, xb.lb[c] - xs[k][c]);
      const double hi = std::max(0.0, xs[k][c] - xb.ub[c]);
      v.constraints += lo + hi;
      v.max_abs = std::max({v.max_abs, lo, hi});
    }
  }
  const double term = std::max(0.0, spec.terminal_penalty(xs[N]) / spec.terminal_level - 1.0);
  v.constraints += term;
  v.max_abs = std::max(v.max_abs, term * spec.terminal_level);
  return v;
}

MpcSolution infeasible_at(const OcpSpec& spec, const Vector& x) {
  MpcSolution s;
  s.states.assign(spec.horizon + 1, x);
  s.inputs.assign(spec.horizon, Vector::Zero(spec.model.n_u));
  s.status = SolveStatus::Infeasible;
  s.objective_value = std::numeric_limits<double>::infinity();
  s.kkt_residual = std::numeric_limits<double>::infinity();
  return s;
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged:
      return "converged";
    case SolveStatus::MaxIterations:
      return "max-iterations";
    case SolveStatus::Infeasible:
      return "infeasible";
  }
  return "unknown";
}

void OcpSpec::validate() const {
  model.validate();
  const int nx = model.n_x;
  const int nu = model.n_u;
  auto fail = [](const std::string& field, const std::string& why) {
    throw Error(ErrorCode::InvalidArgument, "ocp." + field + ": " + why);
  };
  if (horizon <= 0) fail("horizon", "must be positive");
  if (Q.rows() != nx || Q.cols() != nx) fail("Q", "must be n_x x n_x");
  if (R.rows() != nu || R.cols() != nu) fail("R", "must be n_u x n_u");
  if (P.rows() != nx || P.cols() != nx) fail("P", "must be n_x x n_x");
  if (!is_symmetric(Q) || min_eigenvalue(Q) < -1e-12) fail("Q", "must be symmetric positive semidefinite");
  if (!is_symmetric(R) || min_eigenvalue(R) <= 0.0) fail("R", "must be symmetric positive definite");
  if (!is_symmetric(P) || min_eigenvalue(P) <= 0.0) fail("P", "must be symmetric positive definite");
  if (!(terminal_level > 0.0) || !std::isfinite(terminal_level)) fail("terminal_level", "must be positive");
  if (x_tighten.dim() != nx) fail("x_tighten", "dimension must be n_x");
  if (u_tighten.dim() != nu) fail("u_tighten", "dimension must be n_u");
  if (state_box().empty()) fail("x_tighten", "tightened state box is empty");
  if (input_box().empty()) fail("u_tighten", "tightened input box is empty");
  if (terminal_gain.size() != 0 && (terminal_gain.rows() != nu || terminal_gain.cols() != nx)) {
    fail("terminal_gain", "must be n_u x n_x");
  }
  if (sqp.max_iterations <= 0 || !(sqp.kkt_tol > 0.0)) fail("sqp", "invalid solver options");
}

double objective(const OcpSpec& spec, const std::vector<Vector>& states,
                 const std::vector<Vector>& inputs) {
  double J = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) J += spec.stage_cost(states[i], inputs[i]);
  return J + spec.terminal_penalty(states.back());
}

namespace {

MpcSolution sqp(const OcpSpec& spec, const Vector& x0, std::vector<Vector> xs, std::vector<Vector> us,
                double mu) {
  const int N = spec.horizon;
  const int nx = spec.model.n_x;
  const int nu = spec.model.n_u;
  const Box xb = spec.state_box();
  const Box ub = spec.input_box();
  const SqpOptions& opt = spec.sqp;
  xs[0] = x0;
  for (auto& u : us) u = u.cwiseMax(ub.lb).cwiseMin(ub.ub);

  const int n_du = N * nu;
  const int nv = n_du + 1;  // + elastic slack
  const double alpha = spec.terminal_level;

  // Row layout of the QP inequalities.
  int n_rows = 2 * n_du + 1 + 1;
  for (int c = 0; c < nx; ++c) {
    if (std::isfinite(xb.lb[c])) n_rows += N;
    if (std::isfinite(xb.ub[c])) n_rows += N;
  }

  std::vector<Matrix> A(N), B(N);
  std::vector<Vector> gap(N);
  Matrix G = Matrix::Zero(N * nx, n_du);  // d x_{k+1} = G_k du + e_k
  Vector e = Vector::Zero(N * nx);
  QpProblem qp;
  qp.hessian.resize(nv, nv);
  qp.gradient.resize(nv);
  qp.eq.resize(0, nv);
  qp.eq_offset.resize(0);
  qp.ineq.resize(n_rows, nv);
  qp.ineq_offset.resize(n_rows);

  const Matrix Hq = 2.0 * spec.Q;
  const Matrix Hr = 2.0 * spec.R;

  MpcSolution sol;
  double nu_merit = 1.0;
  int terminal_row = -1;
  bool converged = false;
  bool infeasible = false;
  double kkt = std::numeric_limits<double>::infinity();

  auto merit = [&](const std::vector<Vector>& X, const std::vector<Vector>& U, double weight) {
    const Violation v = measure(spec, xb, X, U);
    return objective(spec, X, U) + weight * (v.gaps + v.constraints);
  };

  int iter = 0;
  for (; iter < opt.max_iterations; ++iter) {
    // Linearize and condense the shooting constraints.
    for (int i = 0; i < N; ++i) {
      spec.model.linearization(xs[i], us[i], A[i], B[i]);
      gap[i] = spec.model.step(xs[i], us[i]) - xs[i + 1];
    }
    G.setZero();
    for (int k = 0; k < N; ++k) {
      if (k > 0) {
        for (int j = 0; j < k; ++j) {
          G.block(k * nx, j * nu, nx, nu).noalias() = A[k] * G.block((k - 1) * nx, j * nu, nx, nu);
        }
        e.segment(k * nx, nx).noalias() = A[k] * e.segment((k - 1) * nx, nx);
        e.segment(k * nx, nx) += gap[k];
      } else {
        e.segment(0, nx) = gap[0];
      }
      G.block(k * nx, k * nu, nx, nu) = B[k];
    }

    // Gauss-Newton model of the cost; the terminal ellipsoid contributes its
    // exact curvature through the current multiplier estimate.
    Matrix HxG(N * nx, n_du);
    Vector qx(N * nx);
    for (int k = 0; k < N; ++k) {
      const Vector& xk = xs[k + 1];
      const bool last = (k == N - 1);
      const Matrix Hk = last ? Matrix(2.0 * spec.P * (1.0 + mu / alpha)) : Hq;
      const Vector gk = last ? Vector(2.0 * spec.P * xk) : Vector(Hq * xk);
      HxG.middleRows(k * nx, nx).noalias() = Hk * G.middleRows(k * nx, nx);
      qx.segment(k * nx, nx) = gk + Hk * e.segment(k * nx, nx);
    }
    qp.hessian.setZero();
    qp.hessian.topLeftCorner(n_du, n_du).noalias() = G.transpose() * HxG;
    for (int i = 0; i < N; ++i) qp.hessian.block(i * nu, i * nu, nu, nu) += Hr;
    qp.hessian(n_du, n_du) = opt.slack_weight;
    qp.gradient.head(n_du).noalias() = G.transpose() * qx;
    for (int i = 0; i < N; ++i) qp.gradient.segment(i * nu, nu) += Hr * us[i];
    qp.gradient[n_du] = opt.slack_penalty;
    // Keep symmetric to rounding.
    qp.hessian = 0.5 * (qp.hessian + qp.hessian.transpose()).eval();

    qp.ineq.setZero();
    int row = 0;
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < nu; ++j) {
        const int col = i * nu + j;
        qp.ineq(row, col) = 1.0;
        qp.ineq_offset[row++] = us[i][j] - ub.lb[j];
        qp.ineq(row, col) = -1.0;
        qp.ineq_offset[row++] = ub.ub[j] - us[i][j];
      }
    }
    for (int k = 0; k < N; ++k) {
      for (int c = 0; c < nx; ++c) {
        const int r = k * nx + c;
        const double xk = xs[k + 1][c];
        if (std::isfinite(xb.lb[c])) {
          qp.ineq.row(row).head(n_du) = G.row(r);
          qp.ineq(row, n_du) = 1.0;
          qp.ineq_offset[row++] = xk + e[r] - xb.lb[c];
        }
        if (std::isfinite(xb.ub[c])) {
          qp.ineq.row(row).head(n_du) = -G.row(r);
          qp.ineq(row, n_du) = 1.0;
          qp.ineq_offset[row++] = xb.ub[c] - xk - e[r];
        }
      }
    }
    {
      const Vector& xN = xs[N];
      const Vector grad = 2.0 * spec.P * xN / alpha;
      const Vector eN = e.tail(nx);
      terminal_row = row;
      qp.ineq.row(row).head(n_du) = -(grad.transpose() * G.bottomRows(nx));
      qp.ineq(row, n_du) = 1.0;
      qp.ineq_offset[row++] = 1.0 - spec.terminal_penalty(xN) / alpha - grad.dot(eN);
    }
    qp.ineq(row, n_du) = 1.0;
    qp.ineq_offset[row++] = 0.0;

    const QpResult q = solve_qp(qp);
    if (q.status != QpStatus::Optimal) {
      // The elastic QP is always feasible; this only happens on numerical breakdown.
      break;
    }
    const Vector du = q.x.head(n_du);
    const double slack = q.x[n_du];
    const Vector dx = G * du + e;
    const double mu_qp = q.ineq_multipliers[terminal_row];

    const Violation v = measure(spec, xb, xs, us);
    const double step_norm = std::max(du.lpNorm<Eigen::Infinity>(), dx.lpNorm<Eigen::Infinity>());
    double gap_max = 0.0;
    for (const auto& g : gap) gap_max = std::max(gap_max, g.lpNorm<Eigen::Infinity>());
    kkt = std::max({step_norm, gap_max, v.max_abs});

    if (step_norm <= opt.kkt_tol) {
      if (gap_max <= opt.kkt_tol && v.max_abs <= opt.constraint_tol && slack <= opt.constraint_tol) {
        converged = true;
      } else {
        // Stationary for the elastic problem with the constraints still violated.
        infeasible = true;
      }
      mu = mu_qp;
      break;
    }

    // Directional derivative of the l1 merit along the step.
    double dJ = 0.0;
    for (int i = 0; i < N; ++i) dJ += (Hr * us[i]).dot(du.segment(i * nu, nu));
    for (int k = 0; k < N; ++k) {
      const Vector gk = (k == N - 1) ? Vector(2.0 * spec.P * xs[N]) : Vector(Hq * xs[k + 1]);
      dJ += gk.dot(dx.segment(k * nx, nx));
    }
    // Residual linearized violation is carried by the slack.
    Vector lin = qp.ineq.middleRows(2 * n_du, n_rows - 2 * n_du - 1).leftCols(n_du) * du +
                 qp.ineq_offset.segment(2 * n_du, n_rows - 2 * n_du - 1);
    double v_lin = 0.0;
    for (Eigen::Index r = 0; r < lin.size(); ++r) v_lin += std::max(0.0, -lin[r]);
    // Terminal rows are measured normalized in both merit and QP.
    const double v_now = v.gaps + v.constraints;
    const double decrease = v_now - v_lin;
    if (decrease > 1e-14) {
      const double curv = du.dot(qp.hessian.topLeftCorner(n_du, n_du) * du);
      const double required = (dJ + 0.5 * std::max(0.0, curv)) / (0.9 * decrease);
      if (nu_merit < required) nu_merit = required + 1.0;
    }
    const double dphi = dJ - nu_merit * std::max(0.0, decrease);

    const double phi0 = merit(xs, us, nu_merit);
    double t = 1.0;
    std::vector<Vector> xt(N + 1), ut(N);
    while (true) {
      xt[0] = xs[0];
      for (int i = 0; i < N; ++i) {
        ut[i] = us[i] + t * du.segment(i * nu, nu);
        ut[i] = ut[i].cwiseMax(ub.lb).cwiseMin(ub.ub);
        xt[i + 1] = xs[i + 1] + t * dx.segment(i * nx, nx);
      }
      if (dphi >= 0.0) break;
      if (merit(xt, ut, nu_merit) <= phi0 + 1e-4 * t * dphi) break;
      t *= 0.5;
      if (t < 1e-8) break;
    }
    xs.swap(xt);
    us.swap(ut);
    mu = mu + t * (std::max(0.0, mu_qp) - mu);
  }

  sol.iterations = std::min(iter + 1, opt.max_iterations);
  sol.terminal_multiplier = mu;
  if (infeasible) {
    MpcSolution s = infeasible_at(spec, x0);
    s.iterations = sol.iterations;
    s.states = xs;
    s.inputs = us;
    s.kkt_residual = kkt;
    return s;
  }

  if (converged) {
    // Project onto the dynamics so the returned sequences are exactly consistent.
    for (int i = 0; i < N; ++i) xs[i + 1] = spec.model.step(xs[i], us[i]);
  }
  const Violation v = measure(spec, xb, xs, us);
  double gap_max = 0.0;
  for (int i = 0; i < N; ++i) {
    gap_max = std::max(gap_max, (spec.model.step(xs[i], us[i]) - xs[i + 1]).lpNorm<Eigen::Infinity>());
  }
  sol.states = std::move(xs);
  sol.inputs = std::move(us);
  sol.objective_value = objective(spec, sol.states, sol.inputs);
  sol.kkt_residual = kkt;
  sol.shooting_gap = gap_max;
  sol.max_violation = v.max_abs;
  sol.status = converged ? SolveStatus::Converged : SolveStatus::MaxIterations;
  return sol;
}

// Closed loop of the saturated terminal gain; feasible for the OCP whenever
// it stays in the state box and ends in the terminal set.
bool gain_rollout(const OcpSpec& spec, const Vector& x0, std::vector<Vector>& xs,
                  std::vector<Vector>& us) {
  const int N = spec.horizon;
  const Box xb = spec.state_box();
  const Box ub = spec.input_box();
  xs.assign(N + 1, x0);
  us.assign(N, Vector::Zero(spec.model.n_u));
  bool feasible = true;
  for (int i = 0; i < N; ++i) {
    us[i] = (spec.terminal_gain * xs[i]).cwiseMax(ub.lb).cwiseMin(ub.ub);
    xs[i + 1] = spec.model.step(xs[i], us[i]);
    if (!xs[i + 1].allFinite()) return false;
    feasible = feasible && xb.contains(xs[i + 1]);
  }
  return feasible && spec.in_terminal_set(xs[N]);
}

bool better(const MpcSolution& a, const MpcSolution& b) {
  if (a.status == SolveStatus::Converged) return b.status != SolveStatus::Converged;
  if (b.status == SolveStatus::Converged) return false;
  if (a.status == SolveStatus::MaxIterations && b.status == SolveStatus::Infeasible) return true;
  return a.status == b.status && a.max_violation < b.max_violation;
}

}  // namespace

MpcSolution solve_ocp(const OcpSpec& spec, const Vector& x0, const MpcSolution* warm) {
  const int N = spec.horizon;
  const int nx = spec.model.n_x;
  const int nu = spec.model.n_u;
  if (x0.size() != nx || !x0.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "OCP initial state must be finite with dimension n_x");
  }
  // x_0 is fixed; outside the tightened state box no feasible sequence exists.
  if (!spec.state_box().contains(x0)) return infeasible_at(spec, x0);

  const Box ub = spec.input_box();
  if (warm && static_cast<int>(warm->inputs.size()) == N &&
      static_cast<int>(warm->states.size()) == N + 1) {
    return sqp(spec, x0, warm->states, warm->inputs, warm->terminal_multiplier);
  }

  // Cold start: the terminal-gain closed loop when it is feasible, otherwise
  // the state held at x0 with inputs at zero; the other guess is tried if the
  // first one fails.
  std::vector<Vector> gx, gu;
  const bool have_gain = spec.terminal_gain.size() != 0;
  const bool gain_ok = have_gain && gain_rollout(spec, x0, gx, gu);
  if (gain_ok) {
    MpcSolution s = sqp(spec, x0, gx, gu, 0.0);
    if (s.status == SolveStatus::Converged) return s;
  }
  std::vector<Vector> hx(N + 1, x0);
  std::vector<Vector> hu(N, Vector::Zero(nu).cwiseMax(ub.lb).cwiseMin(ub.ub));
  MpcSolution best = sqp(spec, x0, hx, hu, 0.0);
  if (best.status == SolveStatus::Converged || !have_gain || gain_ok) return best;
  if (gx.size() == static_cast<std::size_t>(N + 1) && gx.back().allFinite()) {
    MpcSolution s = sqp(spec, x0, gx, gu, 0.0);
    if (s.status == SolveStatus::Converged) return s;
    if (better(s, best)) best = std::move(s);
  }
  // Swing-type guesses: one input bound, then the other, switching at a few
  // fractions of the horizon. Needed where gradient steps from the guesses
  // above stall against the input bounds.
  for (const int num : {1, 2, 3}) {
    for (const bool low_first : {true, false}) {
      const int k_switch = std::max(1, N * num / 6);
      std::vector<Vector> su(N), sx(N + 1);
      sx[0] = x0;
      for (int i = 0; i < N; ++i) {
        su[i] = ((i < k_switch) == low_first) ? ub.lb : ub.ub;
        sx[i + 1] = spec.model.step(sx[i], su[i]);
      }
      if (!sx.back().allFinite()) continue;
      MpcSolution s = sqp(spec, x0, sx, su, 0.0);
      if (s.status == SolveStatus::Converged) return s;
      if (better(s, best)) best = std::move(s);
    }
  }
  return best;
}

MpcSolution shift_solution(const OcpSpec& spec, const MpcSolution& sol) {
  MpcSolution s = sol;
  const int N = spec.horizon;
  if (static_cast<int>(sol.inputs.size()) != N) return s;
  const Box ub = spec.input_box();
  for (int i = 0; i + 1 < N; ++i) s.inputs[i] = sol.inputs[i + 1];
  for (int i = 0; i < N; ++i) s.states[i] = sol.states[i + 1];
  Vector tail = spec.terminal_gain.size() ? Vector(spec.terminal_gain * sol.states[N])
                                          : sol.inputs[N - 1];
  tail = tail.cwiseMax(ub.lb).cwiseMin(ub.ub);
  s.inputs[N - 1] = tail;
  s.states[N] = spec.model.step(sol.states[N], tail);
  return s;
}

MpcController::MpcController(OcpSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

Vector MpcController::evaluate(const Vector& x) {
  MpcSolution sol;
  if (previous_) {
    const MpcSolution warm = shift_solution(spec_, *previous_);
    sol = solve_ocp(spec_, x, &warm);
    if (sol.status != SolveStatus::Converged) {
      MpcSolution cold = solve_ocp(spec_, x);
      if (cold.status == SolveStatus::Converged || sol.status == SolveStatus::Infeasible) {
        sol = std::move(cold);
      }
    }
  } else {
    sol = solve_ocp(spec_, x);
  }
  if (sol.status == SolveStatus::Infeasible) {
    previous_.reset();
    throw Error(ErrorCode::Infeasible, "MPC infeasible at x = " + to_string(x));
  }
  if (sol.status == SolveStatus::MaxIterations && sol.max_violation > 1e-3) {
    previous_.reset();
    throw Error(ErrorCode::Infeasible, "MPC did not reach a feasible point at x = " + to_string(x));
  }
  Vector u = sol.inputs.front();
  previous_ = std::move(sol);
  return u;
}

std::unique_ptr<Controller> MpcController::clone() const {
  return std::make_unique<MpcController>(spec_);
}

std::unique_ptr<MpcController> mpc_law(const OcpSpec& spec) {
  return std::make_unique<MpcController>(spec);
}

}  // namespace kmpc
