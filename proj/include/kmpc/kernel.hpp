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
#include <string>

#include "kmpc/model.hpp"
#include "kmpc/types.hpp"

namespace kmpc {

enum class KernelFamily { NeuralNetwork, SquaredExponential };

const char* to_string(KernelFamily f);
KernelFamily kernel_family_from_string(const std::string& s);

/// Kernel hyperparameters.
///   NeuralNetwork:      scales = diag(Sigma), length n_x + 1 (bias first)
///     k(x, z) = s2 (2/pi) asin(2 x~'Sz~ / sqrt((1 + 2 x~'Sx~)(1 + 2 z~'Sz~))),  x~ = (1, x)
///   SquaredExponential: scales = lengthscales, length n_x
///     k(x, z) = s2 exp(-0.5 |(x - z) / l|^2)
struct KernelSpec {
  KernelFamily family = KernelFamily::NeuralNetwork;
  double signal_variance = 1.0;
  Vector scales;

  double operator()(const Vector& x, const Vector& z) const;
  void validate(int n_x) const;
};

/// kappa~(x) = sum_i alpha_i k(x, x_i) with alpha = (K + eps I)^{-1} Y.
/// Immutable after construction; predict() is safe to call concurrently.
class KernelInterpolant {
 public:
  KernelInterpolant() = default;
  /// Empty data set: predicts zero.
  KernelInterpolant(KernelSpec spec, int n_x, int n_u, double ridge = 1e-8);

  /// points: N x n_x, targets: N x n_u. Throws Error(InvalidArgument) on
  /// duplicate points (naming the indices) or Error(Numerical) if the
  /// regularized Gram matrix cannot be factorized.
  static KernelInterpolant fit(const KernelSpec& spec, const Matrix& points, const Matrix& targets,
                               double ridge);

  /// Reassembles an interpolant from stored coefficients and rejects them if
  /// (K + eps I) alpha = Y does not hold to `tol` (relative).
  static KernelInterpolant from_parts(const KernelSpec& spec, const Matrix& points,
                                      const Matrix& targets, const Matrix& coefficients,
                                      double ridge, double tol = 1e-8);

  Vector predict(const Vector& x) const;

  /// Refit with one more sample appended.
  KernelInterpolant with_sample(const Vector& x, const Vector& y) const;

  int size() const { return static_cast<int>(points_.rows()); }
  int n_x() const { return n_x_; }
  int n_u() const { return n_u_; }
  const KernelSpec& spec() const { return spec_; }
  const Matrix& points() const { return points_; }
  const Matrix& targets() const { return targets_; }
  const Matrix& coefficients() const { return coefficients_; }
  double ridge() const { return ridge_; }

  Matrix gram() const;
  /// max |(K + eps I) alpha - Y| / (1 + max |Y|).
  double solve_residual() const;
  /// trace(alpha' K alpha).
  double rkhs_norm_proxy() const;

 private:
  void precompute();

  KernelSpec spec_;
  int n_x_ = 0;
  int n_u_ = 0;
  Matrix points_;
  Matrix targets_;
  Matrix coefficients_;
  double ridge_ = 0.0;
  // Neural-network kernel: rows Sigma * (1, x_i) and 1 + 2 x~_i' Sigma x~_i.
  Matrix scaled_;
  Vector norms_;
};

class KernelController final : public Controller {
 public:
  explicit KernelController(std::shared_ptr<const KernelInterpolant> interp)
      : interp_(std::move(interp)) {}

  ControllerKind kind() const override { return ControllerKind::KernelInterpolant; }
  Vector evaluate(const Vector& x) override { return interp_->predict(x); }
  std::unique_ptr<Controller> clone() const override {
    return std::make_unique<KernelController>(interp_);
  }

  const KernelInterpolant& interpolant() const { return *interp_; }

 private:
  std::shared_ptr<const KernelInterpolant> interp_;
};

}  // namespace kmpc
