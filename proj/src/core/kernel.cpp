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

#include "kmpc/kernel.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace kmpc {
namespace {

constexpr double kTwoOverPi = 2.0 / std::numbers::pi;

double clamp_unit(double v) { return std::max(-1.0, std::min(1.0, v)); }

}  // namespace

const char* to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::NeuralNetwork:
      return "neural_network";
    case KernelFamily::SquaredExponential:
      return "squared_exponential";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& s) {
  if (s == "neural_network") return KernelFamily::NeuralNetwork;
  if (s == "squared_exponential") return KernelFamily::SquaredExponential;
  throw Error(ErrorCode::InvalidArgument, "unknown kernel family '" + s + "'");
}

double KernelSpec::operator()(const Vector& x, const Vector& z) const {
  switch (family) {
    case KernelFamily::NeuralNetwork: {
      const Eigen::Index n = x.size();
      const double s0 = scales[0];
      const auto sx = scales.tail(n).array();
      const double xz = s0 + (x.array() * sx * z.array()).sum();
      const double xx = s0 + (x.array().square() * sx).sum();
      const double zz = s0 + (z.array().square() * sx).sum();
      return signal_variance * kTwoOverPi *
             std::asin(clamp_unit(2.0 * xz / std::sqrt((1.0 + 2.0 * xx) * (1.0 + 2.0 * zz))));
    }
    case KernelFamily::SquaredExponential: {
      const double r2 = ((x - z).array() / scales.array()).square().sum();
      return signal_variance * std::exp(-0.5 * r2);
    }
  }
  return 0.0;
}

void KernelSpec::validate(int n_x) const {
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
    throw Error(ErrorCode::InvalidArgument, "kernel.signal_variance must be positive");
  }
  const Eigen::Index expected = family == KernelFamily::NeuralNetwork ? n_x + 1 : n_x;
  if (scales.size() != expected) {
    throw Error(ErrorCode::InvalidArgument,
                "kernel.scales must have " + std::to_string(expected) + " entries");
  }
  if (!(scales.array() > 0.0).all() || !scales.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "kernel.scales must be positive");
  }
}

KernelInterpolant::KernelInterpolant(KernelSpec spec, int n_x, int n_u, double ridge)
    : spec_(std::move(spec)), n_x_(n_x), n_u_(n_u), ridge_(ridge) {
  spec_.validate(n_x);
  points_.resize(0, n_x);
  targets_.resize(0, n_u);
  coefficients_.resize(0, n_u);
  precompute();
}

KernelInterpolant KernelInterpolant::fit(const KernelSpec& spec, const Matrix& points,
                                         const Matrix& targets, double ridge) {
  const Eigen::Index N = points.rows();
  if (N == 0) throw Error(ErrorCode::InvalidArgument, "cannot fit an interpolant to no data");
  if (targets.rows() != N) {
    throw Error(ErrorCode::InvalidArgument, "points and targets have different counts");
  }
  if (!(ridge > 0.0)) throw Error(ErrorCode::InvalidArgument, "ridge must be positive");
  if (!points.allFinite() || !targets.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "data contains non-finite values");
  }
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = i + 1; j < N; ++j) {
      if (points.row(i) == points.row(j)) {
        throw Error(ErrorCode::InvalidArgument, "duplicate data points at indices " +
                                                    std::to_string(i) + " and " + std::to_string(j));
      }
    }
  }

  KernelInterpolant k(spec, static_cast<int>(points.cols()), static_cast<int>(targets.cols()));
  k.points_ = points;
  k.targets_ = targets;
  k.ridge_ = ridge;
  k.precompute();

  Matrix A = k.gram();
  A.diagonal().array() += ridge;
  A = 0.5 * (A + A.transpose()).eval();
  const Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::Numerical, "regularized Gram matrix is not positive definite");
  }
  Matrix alpha = llt.solve(targets);
  alpha += llt.solve(targets - A * alpha);  // one refinement step
  k.coefficients_ = std::move(alpha);
  return k;
}

KernelInterpolant KernelInterpolant::from_parts(const KernelSpec& spec, const Matrix& points,
                                                const Matrix& targets, const Matrix& coefficients,
                                                double ridge, double tol) {
  if (targets.rows() != points.rows() || coefficients.rows() != points.rows() ||
      coefficients.cols() != targets.cols()) {
    throw Error(ErrorCode::InvalidArgument, "interpolant parts have inconsistent shapes");
  }
  KernelInterpolant k(spec, static_cast<int>(points.cols()), static_cast<int>(targets.cols()));
  k.points_ = points;
  k.targets_ = targets;
  k.coefficients_ = coefficients;
  k.ridge_ = ridge;
  k.precompute();
  if (points.rows() > 0) {
    const double r = k.solve_residual();
    if (!(r <= tol)) {
      throw Error(ErrorCode::Schema, "stored coefficients do not solve the regularized system "
                                     "(residual " + std::to_string(r) + ")");
    }
  }
  return k;
}

void KernelInterpolant::precompute() {
  if (spec_.family != KernelFamily::NeuralNetwork) return;
  const Eigen::Index N = points_.rows();
  scaled_.resize(N, n_x_ + 1);
  norms_.resize(N);
  const double s0 = spec_.scales[0];
  const Vector sx = spec_.scales.tail(n_x_);
  for (Eigen::Index i = 0; i < N; ++i) {
    scaled_(i, 0) = s0;
    scaled_.row(i).tail(n_x_) = points_.row(i).cwiseProduct(sx.transpose());
    norms_[i] = 1.0 + 2.0 * (s0 + points_.row(i).cwiseProduct(points_.row(i)).dot(sx.transpose()));
  }
}

Vector KernelInterpolant::predict(const Vector& x) const {
  Vector out = Vector::Zero(n_u_);
  const Eigen::Index N = points_.rows();
  if (N == 0) return out;
  if (spec_.family == KernelFamily::NeuralNetwork) {
    const Vector sx = spec_.scales.tail(n_x_);
    const double xx = 1.0 + 2.0 * (spec_.scales[0] + x.cwiseProduct(x).dot(sx));
    const double c = spec_.signal_variance * kTwoOverPi;
    for (Eigen::Index i = 0; i < N; ++i) {
      const double xz = scaled_(i, 0) + scaled_.row(i).tail(n_x_).dot(x);
      const double k = c * std::asin(clamp_unit(2.0 * xz / std::sqrt(xx * norms_[i])));
      out.noalias() += k * coefficients_.row(i).transpose();
    }
  } else {
    for (Eigen::Index i = 0; i < N; ++i) {
      out.noalias() += spec_(x, points_.row(i).transpose()) * coefficients_.row(i).transpose();
    }
  }
  return out;
}

KernelInterpolant KernelInterpolant::with_sample(const Vector& x, const Vector& y) const {
  Matrix pts(points_.rows() + 1, n_x_);
  Matrix tgt(targets_.rows() + 1, n_u_);
  pts.topRows(points_.rows()) = points_;
  tgt.topRows(targets_.rows()) = targets_;
  pts.row(points_.rows()) = x.transpose();
  tgt.row(targets_.rows()) = y.transpose();
  return fit(spec_, pts, tgt, ridge_);
}

Matrix KernelInterpolant::gram() const {
  const Eigen::Index N = points_.rows();
  Matrix K(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = i; j < N; ++j) {
      K(i, j) = spec_(points_.row(i).transpose(), points_.row(j).transpose());
      K(j, i) = K(i, j);
    }
  }
  return K;
}

double KernelInterpolant::solve_residual() const {
  if (points_.rows() == 0) return 0.0;
  Matrix A = gram();
  A.diagonal().array() += ridge_;
  const double scale = 1.0 + targets_.cwiseAbs().maxCoeff();
  return (A * coefficients_ - targets_).cwiseAbs().maxCoeff() / scale;
}

double KernelInterpolant::rkhs_norm_proxy() const {
  if (points_.rows() == 0) return 0.0;
  return (coefficients_.transpose() * gram() * coefficients_).trace();
}

}  // namespace kmpc
