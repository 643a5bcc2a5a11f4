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

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kmpc/rng.hpp"
#include "kmpc/types.hpp"

namespace kmpc {

/// Discrete-time controlled system x+ = f(x, u) with box constraints.
struct SystemModel {
  using StepFn = std::function<Vector(const Vector& x, const Vector& u)>;
  using JacobianFn = std::function<void(const Vector& x, const Vector& u, Matrix& A, Matrix& B)>;

  std::string name;
  int n_x = 0;
  int n_u = 0;
  StepFn step;
  // Optional closed-form Jacobians; central differences are used otherwise.
  JacobianFn jacobian;
  Box x_con;
  Box u_con;

  Vector operator()(const Vector& x, const Vector& u) const { return step(x, u); }

  /// Fills A = df/dx and B = df/du at (x, u).
  void linearization(const Vector& x, const Vector& u, Matrix& A, Matrix& B) const;

  void validate() const;
};

/// Central-difference Jacobians of model.step with per-coordinate step
/// h * max(1, |coordinate|).
void finite_difference_jacobian(const SystemModel& model, const Vector& x, const Vector& u,
                                Matrix& A, Matrix& B, double h = 1e-6);

struct PendulumParams {
  double gravity = 9.81;
  double length = 1.0;
  double mass = 1.0;
  double damping = 0.1;
  double dt = 0.1;
  Box x_con{Vector{{-2.0 * 3.141592653589793, -10.0}}, Vector{{2.0 * 3.141592653589793, 10.0}}};
  Box u_con{Vector{{-5.0}}, Vector{{5.0}}};
};

/// Explicit-Euler inverted pendulum, state (angle, angular velocity), upright
/// at the origin:
///   angle+    = angle + dt * omega
///   omega+    = omega + dt * (g/l sin(angle) - b omega + u / (m l^2))
SystemModel pendulum_model(const PendulumParams& params);

/// x+ = A x + B u with the given constraint boxes.
SystemModel linear_model(const Matrix& A, const Matrix& B, Box x_con, Box u_con);

enum class ControllerKind { ImplicitMpc, KernelInterpolant, LinearGain };

const char* to_string(ControllerKind kind);

/// State feedback law. Implementations may carry mutable warm-start state,
/// so one instance must not be shared across threads; use clone().
class Controller {
 public:
  virtual ~Controller() = default;

  virtual ControllerKind kind() const = 0;
  virtual Vector evaluate(const Vector& x) = 0;
  /// Drops any history (warm starts). Called at the start of every rollout.
  virtual void reset() {}
  virtual std::unique_ptr<Controller> clone() const = 0;
};

using ControllerFactory = std::function<std::unique_ptr<Controller>()>;

class LinearGainController final : public Controller {
 public:
  explicit LinearGainController(Matrix gain) : gain_(std::move(gain)) {}

  ControllerKind kind() const override { return ControllerKind::LinearGain; }
  Vector evaluate(const Vector& x) override { return gain_ * x; }
  std::unique_ptr<Controller> clone() const override {
    return std::make_unique<LinearGainController>(gain_);
  }

  const Matrix& gain() const { return gain_; }

 private:
  Matrix gain_;
};

/// Per-step additive input disturbance, iid uniform over a box.
class Disturbance {
 public:
  /// Always zero.
  static Disturbance none(int n_u);
  static Disturbance uniform(Box box, Rng rng);

  Vector next();
  bool is_zero() const { return !rng_.has_value(); }
  const Box& box() const { return box_; }

 private:
  Disturbance(Box box, std::optional<Rng> rng) : box_(std::move(box)), rng_(std::move(rng)) {}

  Box box_;
  std::optional<Rng> rng_;
};

struct Trajectory {
  std::vector<Vector> states;        // n_steps + 1
  std::vector<Vector> inputs;        // n_steps, controller outputs
  std::vector<Vector> disturbances;  // n_steps, added to the input before stepping

  std::size_t steps() const { return inputs.size(); }
};

/// A controller failure inside a rollout, tagged with the step index.
class RolloutError : public Error {
 public:
  RolloutError(ErrorCode code, int step, const std::string& what)
      : Error(code, what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

/// Closed-loop simulation; resets the controller first.
Trajectory rollout(const SystemModel& model, Controller& ctrl, const Vector& x0, int n_steps,
                   Disturbance* dist = nullptr);

/// Recomputes the states of `traj` from its first state, inputs and
/// disturbances.
std::vector<Vector> replay(const SystemModel& model, const Trajectory& traj);

}  // namespace kmpc
