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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kmpc/config.hpp"
#include "kmpc/model.hpp"
#include "kmpc/mpc.hpp"
#include "kmpc/rng.hpp"
#include "kmpc/terminal.hpp"

namespace kmpc {
namespace {

constexpr double kPi = std::numbers::pi;

OcpSpec scalar_ocp(double a, double b, double q, double r, double p, int N) {
  OcpSpec s;
  const Box big{Vector{{-1e3}}, Vector{{1e3}}};
  s.model = linear_model(Matrix{{a}}, Matrix{{b}}, big, big);
  s.horizon = N;
  s.Q = Matrix{{q}};
  s.R = Matrix{{r}};
  s.P = Matrix{{p}};
  s.terminal_level = 1e12;
  s.x_tighten = Box::point(Vector::Zero(1));
  s.u_tighten = Box::point(Vector::Zero(1));
  return s;
}

// First optimal input of the unconstrained finite-horizon LQ problem by
// backward Riccati recursion.
double lq_first_input(double a, double b, double q, double r, double p, int N, double x) {
  double P = p;
  for (int k = N - 1; k >= 1; --k) {
    P = q + a * a * P - (a * b * P) * (a * b * P) / (r + b * b * P);
  }
  return -(a * b * P) / (r + b * b * P) * x;
}

TEST(Mpc, UnconstrainedScalarMatchesRiccatiRecursion) {
  const double a = 1.1, b = 0.5, q = 1.0, r = 0.5, p = 2.0;
  const int N = 10;
  const OcpSpec spec = scalar_ocp(a, b, q, r, p, N);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-5, 5);
    const MpcSolution sol = solve_ocp(spec, Vector{{x}});
    ASSERT_EQ(sol.status, SolveStatus::Converged);
    EXPECT_NEAR(sol.inputs[0][0], lq_first_input(a, b, q, r, p, N, x), 1e-4);
    EXPECT_NEAR(sol.objective_value, objective(spec, sol.states, sol.inputs), 1e-9);
  }
}

class PendulumMpc : public ::testing::Test {
 protected:
  void SetUp() override {
    config = RunConfig{};
    terminal = config.build_terminal();
    spec = config.build_ocp(terminal);
  }
  RunConfig config;
  TerminalDesign terminal;
  OcpSpec spec;
};

TEST_F(PendulumMpc, ConvergedSolutionsAreFeasible) {
  Rng rng(17);
  const Box region{Vector{{-4.0, -3.0}}, Vector{{0.5, 4.0}}};
  int converged = 0;
  for (int i = 0; i < 30; ++i) {
    const Vector x{{rng.uniform(region.lb[0], region.ub[0]), rng.uniform(region.lb[1], region.ub[1])}};
    const MpcSolution sol = solve_ocp(spec, x);
    if (sol.status != SolveStatus::Converged) continue;
    ++converged;
    ASSERT_EQ(sol.states.size(), static_cast<std::size_t>(spec.horizon + 1));
    EXPECT_EQ(sol.states[0], x);
    const Box xs = spec.state_box();
    const Box us = spec.input_box();
    for (int k = 0; k < spec.horizon; ++k) {
      EXPECT_TRUE(us.contains(sol.inputs[k], 1e-6));
      EXPECT_TRUE(xs.contains(sol.states[k + 1], 1e-6));
      const Vector next = spec.model(sol.states[k], sol.inputs[k]);
      EXPECT_LE((next - sol.states[k + 1]).cwiseAbs().maxCoeff(), 1e-6);
    }
    EXPECT_TRUE(spec.in_terminal_set(sol.states.back(), 1e-6));
  }
  EXPECT_GE(converged, 25);
}

TEST_F(PendulumMpc, TerminalInteriorCostBoundedByPenalty) {
  const Eigen::LLT<Matrix> chol(terminal.P);
  const Matrix Linv = Matrix(chol.matrixU()).inverse();
  Rng rng(23);
  for (int i = 0; i < 30; ++i) {
    Vector dir{{rng.normal(), rng.normal()}};
    dir.normalize();
    const Vector x = Linv * (std::sqrt(0.5 * terminal.alpha * rng.uniform()) * dir);
    const MpcSolution sol = solve_ocp(spec, x);
    ASSERT_EQ(sol.status, SolveStatus::Converged);
    // The terminal-gain rollout is feasible with cost at most x'Px.
    EXPECT_LE(sol.objective_value, x.dot(terminal.P * x) * (1 + 1e-6) + 1e-9);
  }
}

// P is the Lyapunov matrix with the extra delta_q margin, not the Riccati
// solution, so the local MPC law is the finite-horizon LQ gain of the
// linearization with terminal weight P rather than K itself.
TEST_F(PendulumMpc, LocalLawMatchesFiniteHorizonGain) {
  const Matrix& A = terminal.A;
  const Matrix& B = terminal.B;
  Matrix P = terminal.P;
  for (int k = spec.horizon - 1; k >= 1; --k) {
    const Matrix S = spec.R + B.transpose() * P * B;
    P = spec.Q + A.transpose() * P * A - A.transpose() * P * B * S.ldlt().solve(B.transpose() * P * A);
  }
  const Matrix K_N = -(spec.R + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
  const Eigen::LLT<Matrix> chol(terminal.P);
  const Matrix Linv = Matrix(chol.matrixU()).inverse();
  Rng rng(29);
  for (int i = 0; i < 30; ++i) {
    Vector dir{{rng.normal(), rng.normal()}};
    dir.normalize();
    const Vector x = Linv * (std::sqrt(0.01 * terminal.alpha * rng.uniform()) * dir);
    const MpcSolution sol = solve_ocp(spec, x);
    ASSERT_EQ(sol.status, SolveStatus::Converged);
    EXPECT_NEAR(sol.inputs[0][0], (K_N * x)[0], 1e-2);
    // Close to the origin the designed gain itself is within 1e-2.
    const Vector y = 1e-3 * x;
    EXPECT_NEAR(solve_ocp(spec, y).inputs[0][0], (terminal.K * y)[0], 1e-2);
  }
}

TEST_F(PendulumMpc, OriginGivesZeroInput) {
  MpcController ctrl(spec);
  EXPECT_LE(std::abs(ctrl.evaluate(Vector::Zero(2))[0]), 1e-4);
}

TEST_F(PendulumMpc, WarmStartNeedsFewerIterations) {
  MpcController ctrl(spec);
  Vector x{{-2.0, 1.0}};
  x = spec.model(x, ctrl.evaluate(x));
  const MpcSolution warm_guess = shift_solution(spec, *ctrl.last_solution());
  const MpcSolution warm = solve_ocp(spec, x, &warm_guess);
  const MpcSolution cold = solve_ocp(spec, x);
  ASSERT_EQ(warm.status, SolveStatus::Converged);
  ASSERT_EQ(cold.status, SolveStatus::Converged);
  EXPECT_LT(warm.iterations, cold.iterations);
}

TEST_F(PendulumMpc, OutsideStateBoxIsInfeasible) {
  const MpcSolution sol = solve_ocp(spec, Vector{{7.0, 0.0}});
  EXPECT_EQ(sol.status, SolveStatus::Infeasible);
  MpcController ctrl(spec);
  try {
    ctrl.evaluate(Vector{{7.0, 0.0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Infeasible);
  }
}

TEST_F(PendulumMpc, ShiftAppendsTerminalGainStage) {
  const Vector x{{-0.3, 0.2}};
  const MpcSolution sol = solve_ocp(spec, x);
  ASSERT_EQ(sol.status, SolveStatus::Converged);
  const MpcSolution s = shift_solution(spec, sol);
  const int N = spec.horizon;
  for (int i = 0; i + 1 < N; ++i) EXPECT_EQ(s.inputs[i], sol.inputs[i + 1]);
  for (int i = 0; i < N; ++i) EXPECT_EQ(s.states[i], sol.states[i + 1]);
  const Vector tail = terminal.K * sol.states[N];
  EXPECT_NEAR(s.inputs[N - 1][0], tail[0], 1e-12);
  EXPECT_EQ(s.states[N], spec.model(sol.states[N], s.inputs[N - 1]));
}

TEST_F(PendulumMpc, WarmStartAgreesWithColdSolve) {
  MpcController ctrl(spec);
  Vector x{{-0.8, 0.5}};
  for (int k = 0; k < 10; ++k) {
    const Vector u = ctrl.evaluate(x);
    const MpcSolution cold = solve_ocp(spec, x);
    ASSERT_EQ(cold.status, SolveStatus::Converged);
    EXPECT_NEAR(u[0], cold.inputs[0][0], 1e-3) << "step " << k;
    x = spec.model(x, u);
  }
}

TEST(OcpSpec, ValidateNamesField) {
  RunConfig c;
  OcpSpec s = c.build_ocp(c.build_terminal());
  s.horizon = 0;
  try {
    s.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("ocp.horizon"), std::string::npos);
  }
}

}  // namespace
}  // namespace kmpc
