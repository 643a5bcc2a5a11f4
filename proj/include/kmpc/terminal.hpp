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

#include <cstdint>

#include "kmpc/model.hpp"
#include "kmpc/types.hpp"

namespace kmpc {

/// Quasi-infinite-horizon terminal ingredients: local gain u = Kx, penalty
/// x'Px and level alpha of the terminal ellipsoid {x : x'Px <= alpha}.
struct TerminalDesign {
  Matrix A;
  Matrix B;
  Matrix Q;
  Matrix R;
  Matrix K;
  Matrix P;
  Matrix delta_q;
  double alpha = 0.0;

  Matrix closed_loop() const { return A + B * K; }
};

struct Linearization {
  Matrix A;
  Matrix B;
};

/// Central-difference Jacobians at an equilibrium. Rejects points with
/// |f(x_eq, u_eq) - x_eq| > 1e-8.
Linearization linearize(const SystemModel& model, const Vector& x_eq, const Vector& u_eq,
                        double h = 1e-6);

double spectral_radius(const Matrix& M);

struct RiccatiSolution {
  Matrix K;  // u = Kx
  Matrix P;  // stabilizing DARE solution
  int iterations = 0;
};

/// Discrete algebraic Riccati equation by structured doubling, falling back
/// to fixed-point iteration. Throws Error(Numerical) on divergence or when
/// the result does not stabilize (A, B).
RiccatiSolution solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R);

/// Stabilizing LQR gain in the u = Kx convention (A + BK Schur).
Matrix lqr_gain(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R);

/// Solves A_K' P A_K - P = -M for Schur A_K and symmetric M.
Matrix lyapunov_solve(const Matrix& A_K, const Matrix& M);

struct TerminalSizingOptions {
  int n_check = 10000;
  std::uint64_t seed = 0x7e11a1;
  int bisection_steps = 50;
  double alpha_max = 1e8;
  double tol = 1e-9;
};

/// Largest alpha found by bisection such that every check sample x with
/// x'Px <= alpha (half on the boundary, half inside) satisfies
///   Kx in u_box,  x in x_box,
///   V(f(x, Kx)) - V(x) <= -x'(Q + K'RK)x  (V = x'Px, nonlinear step).
/// The check directions are fixed by the seed, so the result is monotone in
/// u_box. Throws Error(Numerical) if no positive level passes.
double size_terminal_set(const TerminalDesign& design, const SystemModel& model, const Box& u_box,
                         const Box& x_box, const TerminalSizingOptions& options = {});

/// Full pipeline: linearize at the origin, LQR gain, Lyapunov matrix for
/// Q + K'RK + delta_q, sampled terminal level.
TerminalDesign design_terminal(const SystemModel& model, const Matrix& Q, const Matrix& R,
                               const Matrix& delta_q, const Box& u_box, const Box& x_box,
                               const TerminalSizingOptions& options = {});

}  // namespace kmpc
