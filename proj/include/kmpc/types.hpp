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

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace kmpc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ErrorCode {
  InvalidArgument = 1,
  Io,
  Parse,
  Schema,
  Infeasible,
  Numerical,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Axis-aligned box {x : lb <= x <= ub}. Also used as an interval hull.
struct Box {
  Vector lb;
  Vector ub;

  Box() = default;
  Box(Vector lower, Vector upper);

  /// The degenerate box {p}.
  static Box point(const Vector& p);
  /// [-h, h] componentwise.
  static Box symmetric(const Vector& half_width);

  Eigen::Index dim() const { return lb.size(); }
  bool empty() const;
  bool contains(const Vector& x, double tol = 0.0) const;
  bool contains(const Box& other, double tol = 0.0) const;
  Vector center() const { return 0.5 * (lb + ub); }
  Vector width() const { return ub - lb; }
  double volume() const;

  /// Pontryagin difference this ⊖ margin = {x : x + t in this for all t in margin}.
  Box minkowski_difference(const Box& margin) const;

  bool operator==(const Box& other) const;
};

using IntervalHull = Box;

/// Incrementally grown interval hull of a point set.
class HullBuilder {
 public:
  explicit HullBuilder(Eigen::Index dim);

  void add(const Vector& p);
  void merge(const HullBuilder& other);
  bool has_points() const { return count_ > 0; }
  std::size_t count() const { return count_; }
  /// Throws if no point has been added.
  Box hull() const;

 private:
  Vector lb_;
  Vector ub_;
  std::size_t count_ = 0;
};

std::string to_string(const Vector& v);
std::string to_string(const Box& b);

}  // namespace kmpc
