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

// Always fails, to exercise rollout error propagation.
class ThrowingController final : public Controller {
 public:
  explicit ThrowingController(int fail_at) : fail_at_(fail_at) {}
  ControllerKind kind() const override { return ControllerKind::LinearGain; }
  Vector evaluate(const Vector&) override {
    if (calls_++ == fail_at_) throw Error(ErrorCode::Infeasible, "no solution");
    return Vector::Zero(1);
  }
  void reset() override { calls_ = 0; }
  std::unique_ptr<Controller> clone() const override {
    return std::make_unique<ThrowingController>(fail_at_);
  }

 private:
  int fail_at_;
  int calls_ = 0;
};

TEST(Pendulum, Equilibria) {
  const SystemModel m = pendulum_model({});
  EXPECT_EQ(m.n_x, 2);
  EXPECT_EQ(m.n_u, 1);
  EXPECT_EQ(m(Vector::Zero(2), Vector::Zero(1)), Vector::Zero(2));
  const Vector hanging{{-kPi, 0.0}};
  const Vector next = m(hanging, Vector::Zero(1));
  EXPECT_NEAR(next[0], -kPi, 1e-15);
  EXPECT_NEAR(next[1], 0.0, 1e-15);
}

TEST(Pendulum, StepMatchesHandComputation) {
  const SystemModel m = pendulum_model({});
  const Vector x{{0.3, -1.2}};
  const Vector u{{2.0}};
  const double th = 0.3 + 0.1 * -1.2;
  const double om = -1.2 + 0.1 * (9.81 * std::sin(0.3) - 0.1 * -1.2 + 2.0);
  const Vector next = m(x, u);
  EXPECT_DOUBLE_EQ(next[0], th);
  EXPECT_DOUBLE_EQ(next[1], om);
}

TEST(Pendulum, AnalyticJacobianMatchesFiniteDifferences) {
  const SystemModel m = pendulum_model({});
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector x{{rng.uniform(-2 * kPi, 2 * kPi), rng.uniform(-10, 10)}};
    const Vector u{{rng.uniform(-5, 5)}};
    Matrix A, B, Af, Bf;
    m.linearization(x, u, A, B);
    finite_difference_jacobian(m, x, u, Af, Bf);
    for (Eigen::Index i = 0; i < A.size(); ++i) {
      EXPECT_LE(std::abs(A(i) - Af(i)), 1e-5 * std::max(1.0, std::abs(A(i))));
    }
    for (Eigen::Index i = 0; i < B.size(); ++i) {
      EXPECT_LE(std::abs(B(i) - Bf(i)), 1e-5 * std::max(1.0, std::abs(B(i))));
    }
  }
}

TEST(Pendulum, JacobianAtOriginMatchesLinearization) {
  const SystemModel m = pendulum_model({});
  Matrix Af, Bf;
  finite_difference_jacobian(m, Vector::Zero(2), Vector::Zero(1), Af, Bf);
  const Matrix A{{1.0, 0.1}, {0.981, 0.99}};
  const Matrix B{{0.0}, {0.1}};
  EXPECT_LE((Af - A).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE((Bf - B).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Pendulum, LipschitzEstimateBounded) {
  const SystemModel m = pendulum_model({});
  Rng rng(5);
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const Vector x1{{rng.uniform(-2 * kPi, 2 * kPi), rng.uniform(-10, 10)}};
    const Vector x2{{rng.uniform(-2 * kPi, 2 * kPi), rng.uniform(-10, 10)}};
    const Vector u1{{rng.uniform(-5, 5)}};
    const Vector u2{{rng.uniform(-5, 5)}};
    const double num = (m(x1, u1) - m(x2, u2)).norm();
    const double den = std::hypot((x1 - x2).norm(), (u1 - u2).norm());
    worst = std::max(worst, num / den);
  }
  // |df/d(x,u)| is at most 1 + dt * (g/l + b + 1) in the 1-norm sense.
  EXPECT_LT(worst, 1.0 + 0.1 * (9.81 + 0.1 + 1.0) + 0.2);
}

TEST(Pendulum, RejectsNonPositiveParameters) {
  PendulumParams p;
  p.mass = 0.0;
  try {
    pendulum_model(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    EXPECT_NE(std::string(e.what()).find("mass"), std::string::npos);
  }
  p = {};
  p.dt = -0.1;
  EXPECT_THROW(pendulum_model(p), Error);
  p = {};
  p.damping = 0.0;
  EXPECT_THROW(pendulum_model(p), Error);
}

TEST(Rollout, EmptyRollout) {
  const SystemModel m = pendulum_model({});
  LinearGainController k(Matrix::Zero(1, 2));
  const Trajectory t = rollout(m, k, Vector{{0.5, 0.0}}, 0);
  ASSERT_EQ(t.states.size(), 1u);
  EXPECT_TRUE(t.inputs.empty());
  EXPECT_TRUE(t.disturbances.empty());
  EXPECT_THROW(rollout(m, k, Vector{{0.5, 0.0}}, -1), Error);
  EXPECT_THROW(rollout(m, k, Vector{{0.5}}, 3), Error);
}

TEST(Rollout, DisturbedReplayIsBitExact) {
  const SystemModel m = pendulum_model({});
  LinearGainController k(Matrix{{-17.0, -5.0}});
  Disturbance d = Disturbance::uniform(Box(Vector{{-0.5}}, Vector{{0.5}}), Rng(9));
  const Trajectory t = rollout(m, k, Vector{{0.2, 0.1}}, 40, &d);
  ASSERT_EQ(t.states.size(), 41u);
  bool nonzero = false;
  for (std::size_t j = 0; j < t.inputs.size(); ++j) {
    EXPECT_EQ(t.inputs[j], k.evaluate(t.states[j]));
    EXPECT_LE(std::abs(t.disturbances[j][0]), 0.5);
    nonzero = nonzero || t.disturbances[j][0] != 0.0;
  }
  EXPECT_TRUE(nonzero);
  const auto states = replay(m, t);
  ASSERT_EQ(states.size(), t.states.size());
  for (std::size_t j = 0; j < states.size(); ++j) EXPECT_EQ(states[j], t.states[j]);
}

TEST(Rollout, ZeroDisturbanceBoxGivesZeros) {
  Disturbance d = Disturbance::uniform(Box::point(Vector::Zero(1)), Rng(1));
  EXPECT_TRUE(d.is_zero());
  EXPECT_EQ(d.next(), Vector::Zero(1));
  EXPECT_TRUE(Disturbance::none(2).is_zero());
}

TEST(Rollout, ControllerFailureCarriesStep) {
  const SystemModel m = pendulum_model({});
  ThrowingController c(3);
  try {
    rollout(m, c, Vector{{0.0, 0.0}}, 10);
    FAIL();
  } catch (const RolloutError& e) {
    EXPECT_EQ(e.step(), 3);
    EXPECT_EQ(e.code(), ErrorCode::Infeasible);
    EXPECT_NE(std::string(e.what()).find("step 3"), std::string::npos);
  }
}

TEST(Rollout, LinearGainStaysInTerminalEllipsoid) {
  RunConfig cfg;
  const TerminalDesign t = cfg.build_terminal();
  const SystemModel lin = linear_model(t.A, t.B, cfg.model.x_con, cfg.model.u_con);
  LinearGainController k(t.K);
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    // Random point inside the ellipsoid x'Px <= alpha.
    Vector dir{{rng.normal(), rng.normal()}};
    const double r = std::sqrt(rng.uniform());
    const Eigen::LLT<Matrix> llt(t.P / t.alpha);
    const Vector x0 = llt.matrixU().solve(dir.normalized() * r);
    ASSERT_LE(x0.dot(t.P * x0), t.alpha * (1 + 1e-12));
    const Trajectory traj = rollout(lin, k, x0, 60);
    for (const Vector& x : traj.states) EXPECT_LE(x.dot(t.P * x), t.alpha * (1 + 1e-9));
  }
}

TEST(Rollout, MpcSwingUpFromHangingPosition) {
  RunConfig cfg;
  const OcpSpec ocp = cfg.build_ocp(cfg.build_terminal());
  MpcController mpc(ocp);
  const Trajectory t = rollout(ocp.model, mpc, Vector{{-kPi, 0.0}}, cfg.n_sim);
  EXPECT_LE(t.states.back().norm(), 1e-2);
}

}  // namespace
}  // namespace kmpc
