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

#include "kmpc/model.hpp"

#include <cmath>
#include <string>

namespace kmpc {

void finite_difference_jacobian(const SystemModel& model, const Vector& x, const Vector& u,
                                Matrix& A, Matrix& B, double h) {
  A.resize(model.n_x, model.n_x);
  B.resize(model.n_x, model.n_u);
  Vector xp = x;
  for (int i = 0; i < model.n_x; ++i) {
    const double hi = h * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + hi;
    const Vector fp = model.step(xp, u);
    xp[i] = x[i] - hi;
    const Vector fm = model.step(xp, u);
    xp[i] = x[i];
    A.col(i) = (fp - fm) / (2.0 * hi);
  }
  Vector up = u;
  for (int j = 0; j < model.n_u; ++j) {
    const double hj = h * std::max(1.0, std::abs(u[j]));
    up[j] = u[j] + hj;
    const Vector fp = model.step(x, up);
    up[j] = u[j] - hj;
    const Vector fm = model.step(x, up);
    up[j] = u[j];
    B.col(j) = (fp - fm) / (2.0 * hj);
  }
}

void SystemModel::linearization(const Vector& x, const Vector& u, Matrix& A, Matrix& B) const {
  if (jacobian) {
    jacobian(x, u, A, B);
  } else {
    finite_difference_jacobian(*this, x, u, A, B);
  }
}

void SystemModel::validate() const {
  if (n_x <= 0 || n_u <= 0) {
    throw Error(ErrorCode::InvalidArgument, "model dimensions must be positive");
  }
  if (!step) throw Error(ErrorCode::InvalidArgument, "model has no step function");
  if (x_con.dim() != n_x || u_con.dim() != n_u) {
    throw Error(ErrorCode::InvalidArgument, "constraint boxes do not match model dimensions");
  }
  if (x_con.empty() || u_con.empty()) {
    throw Error(ErrorCode::InvalidArgument, "constraint box is empty");
  }
}

SystemModel pendulum_model(const PendulumParams& p) {
  auto positive = [](double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string("pendulum parameter '") + field + "' must be positive");
    }
  };
  positive(p.gravity, "gravity");
  positive(p.length, "length");
  positive(p.mass, "mass");
  positive(p.damping, "damping");
  positive(p.dt, "dt");

  const double g_over_l = p.gravity / p.length;
  const double inv_inertia = 1.0 / (p.mass * p.length * p.length);
  const double b = p.damping;
  const double dt = p.dt;

  SystemModel m;
  m.name = "pendulum";
  m.n_x = 2;
  m.n_u = 1;
  m.x_con = p.x_con;
  m.u_con = p.u_con;
  m.step = [=](const Vector& x, const Vector& u) {
    Vector next(2);
    next[0] = x[0] + dt * x[1];
    next[1] = x[1] + dt * (g_over_l * std::sin(x[0]) - b * x[1] + inv_inertia * u[0]);
    return next;
  };
  m.jacobian = [=](const Vector& x, const Vector&, Matrix& A, Matrix& B) {
    A.resize(2, 2);
    B.resize(2, 1);
    A << 1.0, dt, dt * g_over_l * std::cos(x[0]), 1.0 - dt * b;
    B << 0.0, dt * inv_inertia;
  };
  m.validate();
  return m;
}

SystemModel linear_model(const Matrix& A, const Matrix& B, Box x_con, Box u_con) {
  if (A.rows() != A.cols() || B.rows() != A.rows()) {
    throw Error(ErrorCode::InvalidArgument, "linear model matrices have inconsistent shapes");
  }
  SystemModel m;
  m.name = "linear";
  m.n_x = static_cast<int>(A.rows());
  m.n_u = static_cast<int>(B.cols());
  m.x_con = std::move(x_con);
  m.u_con = std::move(u_con);
  m.step = [A, B](const Vector& x, const Vector& u) -> Vector { return A * x + B * u; };
  m.jacobian = [A, B](const Vector&, const Vector&, Matrix& Ao, Matrix& Bo) {
    Ao = A;
    Bo = B;
  };
  m.validate();
  return m;
}

const char* to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::ImplicitMpc:
      return "implicit-mpc";
    case ControllerKind::KernelInterpolant:
      return "kernel-interpolant";
    case ControllerKind::LinearGain:
      return "linear-gain";
  }
  return "unknown";
}

Disturbance Disturbance::none(int n_u) {
  return Disturbance(Box::point(Vector::Zero(n_u)), std::nullopt);
}

Disturbance Disturbance::uniform(Box box, Rng rng) {
  if (box.empty()) throw Error(ErrorCode::InvalidArgument, "disturbance box is empty");
  if ((box.lb.array() == 0.0).all() && (box.ub.array() == 0.0).all()) {
    return Disturbance(std::move(box), std::nullopt);
  }
  return Disturbance(std::move(box), std::move(rng));
}

Vector Disturbance::next() {
  if (!rng_) return Vector::Zero(box_.dim());
  Vector r(box_.dim());
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = rng_->uniform(box_.lb[i], box_.ub[i]);
  return r;
}

Trajectory rollout(const SystemModel& model, Controller& ctrl, const Vector& x0, int n_steps,
                   Disturbance* dist) {
  if (x0.size() != model.n_x || !x0.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "initial state must be finite with dimension n_x");
  }
  if (n_steps < 0) throw Error(ErrorCode::InvalidArgument, "negative rollout length");

  ctrl.reset();
  Trajectory t;
  t.states.reserve(n_steps + 1);
  t.inputs.reserve(n_steps);
  t.disturbances.reserve(n_steps);
  t.states.push_back(x0);
  for (int j = 0; j < n_steps; ++j) {
    Vector u;
    try {
      u = ctrl.evaluate(t.states.back());
    } catch (const Error& e) {
      throw RolloutError(e.code(), j,
                         "controller failed at step " + std::to_string(j) + ": " + e.what());
    }
    Vector d = dist ? dist->next() : Vector::Zero(model.n_u);
    t.states.push_back(model.step(t.states.back(), u + d));
    t.inputs.push_back(std::move(u));
    t.disturbances.push_back(std::move(d));
  }
  return t;
}

std::vector<Vector> replay(const SystemModel& model, const Trajectory& traj) {
  std::vector<Vector> states;
  states.reserve(traj.states.size());
  states.push_back(traj.states.front());
  for (std::size_t j = 0; j < traj.inputs.size(); ++j) {
    states.push_back(model.step(states.back(), traj.inputs[j] + traj.disturbances[j]));
  }
  return states;
}

}  // namespace kmpc
