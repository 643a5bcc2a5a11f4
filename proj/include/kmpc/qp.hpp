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

#include <vector>

#include "kmpc/types.hpp"

namespace kmpc {

/// Strictly convex dense QP
///   min 0.5 x'Hx + g'x   s.t.  E x + e = 0,  C x + c >= 0.
/// Constraints are stored row-wise.
struct QpProblem {
  Matrix hessian;
  Vector gradient;
  Matrix eq;
  Vector eq_offset;
  Matrix ineq;
  Vector ineq_offset;
};

enum class QpStatus { Optimal, Infeasible, MaxIterations };

struct QpResult {
  QpStatus status = QpStatus::Infeasible;
  Vector x;
  Vector eq_multipliers;
  Vector ineq_multipliers;  // zero for inactive rows
  std::vector<int> active;  // active inequality rows
  int iterations = 0;
  double objective = 0.0;
};

struct QpOptions {
  double feasibility_tol = 1e-10;
  int max_iterations = 1000;
};

/// Dual active-set method (Goldfarb-Idnani): starts from the unconstrained
/// minimizer and adds the most violated constraint until primal feasible.
/// Throws Error(Numerical) if the Hessian is not positive definite.
QpResult solve_qp(const QpProblem& problem, const QpOptions& options = {});

}  // namespace kmpc
