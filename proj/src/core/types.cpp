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

#include "kmpc/types.hpp"

#include <limits>
#include <sstream>

namespace kmpc {

Box::Box(Vector lower, Vector upper) : lb(std::move(lower)), ub(std::move(upper)) {
  if (lb.size() != ub.size()) {
    throw Error(ErrorCode::InvalidArgument, "box bounds have different dimensions");
  }
}

Box Box::point(const Vector& p) { return Box(p, p); }

Box Box::symmetric(const Vector& half_width) { return Box(-half_width, half_width); }

bool Box::empty() const { return (lb.array() > ub.array()).any(); }

bool Box::contains(const Vector& x, double tol) const {
  if (x.size() != lb.size()) return false;
  return (x.array() >= lb.array() - tol).all() && (x.array() <= ub.array() + tol).all();
}

bool Box::contains(const Box& other, double tol) const {
  if (other.dim() != dim()) return false;
  return (other.lb.array() >= lb.array() - tol).all() &&
         (other.ub.array() <= ub.array() + tol).all();
}

double Box::volume() const {
  if (empty()) return 0.0;
  return (ub - lb).prod();
}

Box Box::minkowski_difference(const Box& margin) const {
  if (margin.dim() != dim()) {
    throw Error(ErrorCode::InvalidArgument, "tightening box has wrong dimension");
  }
  return Box(lb - margin.lb, ub - margin.ub);
}

bool Box::operator==(const Box& other) const {
  return lb.size() == other.lb.size() && lb == other.lb && ub == other.ub;
}

HullBuilder::HullBuilder(Eigen::Index dim)
    : lb_(Vector::Constant(dim, std::numeric_limits<double>::infinity())),
      ub_(Vector::Constant(dim, -std::numeric_limits<double>::infinity())) {}

void HullBuilder::add(const Vector& p) {
  lb_ = lb_.cwiseMin(p);
  ub_ = ub_.cwiseMax(p);
  ++count_;
}

void HullBuilder::merge(const HullBuilder& other) {
  if (!other.has_points()) return;
  lb_ = lb_.cwiseMin(other.lb_);
  ub_ = ub_.cwiseMax(other.ub_);
  count_ += other.count_;
}

Box HullBuilder::hull() const {
  if (count_ == 0) throw Error(ErrorCode::InvalidArgument, "interval hull of an empty set");
  return Box(lb_, ub_);
}

std::string to_string(const Vector& v) {
  std::ostringstream os;
  os.precision(6);
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << v[i];
  }
  os << ']';
  return os.str();
}

std::string to_string(const Box& b) {
  std::ostringstream os;
  os.precision(6);
  for (Eigen::Index i = 0; i < b.dim(); ++i) {
    if (i) os << " x ";
    os << '[' << b.lb[i] << ", " << b.ub[i] << ']';
  }
  return os.str();
}

}  // namespace kmpc
