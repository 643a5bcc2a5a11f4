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

#include <memory>
#include <optional>
#include <vector>

#include "kmpc/model.hpp"
#include "kmpc/types.hpp"

namespace kmpc {

struct SqpOptions {
  double kkt_tol = 1e-6;         // on max(step, constraint violation)
  int max_iterations = 100;
  double constraint_tol = 1e-6;
  // Elastic slack shared by the state-box and terminal rows of each QP.
  double slack_penalty = 1e5;
  double slack_weight = 1.0;
};

/// Optimal control problem
///   min  sum_{i<N} l(x_i, u_i) + x_N' P x_N,   l(x, u) = x'Qx + u'Ru
///   s.t. x_{i+1} = f(x_i, u_i),  x_0 = x,
///        x_i in X_con ⊖ X~,  u_i in U_con ⊖ U~,  x_N' P x_N <= alpha.
struct OcpSpec {
  SystemModel model;
  int horizon = 0;
  Matrix Q;
  Matrix R;
  Matrix P;
  double terminal_level = 0.0;
  Box x_tighten;
  Box u_tighten;
  // Local feedback used to extend shifted warm starts; may be empty.
  Matrix terminal_gain;
  SqpOptions sqp;

  Box state_box() const { return model.x_con.minkowski_difference(x_tighten); }
  Box input_box() const { return model.u_con.minkowski_difference(u_tighten); }

  double stage_cost(const Vector& x, const Vector& u) const {
    return x.dot(Q * x) + u.dot(R * u);
  }
  double terminal_penalty(const Vector& x) const { return x.dot(P * x); }
  bool in_terminal_set(const Vector& x, double tol = 0.0) const {
    return terminal_penalty(x) <= terminal_level + tol;
  }

  /// Throws Error(InvalidArgument) naming the offending field.
  void validate() const;
};

enum class SolveStatus { Converged, MaxIterations, Infeasible };

const char* to_string(SolveStatus s);

struct MpcSolution {
  std::vector<Vector> states;  // horizon + 1, states[0] = x
  std::vector<Vector> inputs;  // horizon
  double objective_value = 0.0;
  double kkt_residual = 0.0;
  double shooting_gap = 0.0;   // max |f(x_i, u_i) - x_{i+1}|
  double max_violation = 0.0;  // state/input/terminal constraints
  double terminal_multiplier = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::Infeasible;
};

/// Cost sum_{i<N} l(X_i, U_i) + E(X_N) of the given sequences.
double objective(const OcpSpec& spec, const std::vector<Vector>& states,
                 const std::vector<Vector>& inputs);

/// Solves the OCP from x by Gauss-Newton SQP on the multiple-shooting
/// variables. Without a warm start the state trajectory is held at x and the
/// inputs at zero (projected onto the input box).
MpcSolution solve_ocp(const OcpSpec& spec, const Vector& x, const MpcSolution* warm_start = nullptr);

/// Receding-horizon shift: drops the first stage and appends one stage under
/// the terminal gain (or a repeated last input when no gain is set).
MpcSolution shift_solution(const OcpSpec& spec, const MpcSolution& sol);

/// Implicit MPC law kappa(x) = U*_0(x). Each call after the first warm-starts
/// from the shifted previous solution until reset().
class MpcController final : public Controller {
 public:
  explicit MpcController(OcpSpec spec);

  ControllerKind kind() const override { return ControllerKind::ImplicitMpc; }
  Vector evaluate(const Vector& x) override;
  void reset() override { previous_.reset(); }
  std::unique_ptr<Controller> clone() const override;

  const OcpSpec& spec() const { return spec_; }
  /// Full solution of the most recent evaluate().
  const std::optional<MpcSolution>& last_solution() const { return previous_; }

 private:
  OcpSpec spec_;
  std::optional<MpcSolution> previous_;
};

std::unique_ptr<MpcController> mpc_law(const OcpSpec& spec);

}  // namespace kmpc
