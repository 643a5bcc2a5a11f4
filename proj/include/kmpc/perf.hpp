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

#include <limits>
#include <string>

#include "kmpc/model.hpp"
#include "kmpc/types.hpp"

namespace kmpc {

/// l(x, u) = x'Qx + u'Ru.
struct StageCost {
  Matrix Q;
  Matrix R;

  double operator()(const Vector& x, const Vector& u) const { return x.dot(Q * x) + u.dot(R * u); }
};

/// Sum of stage costs along an undisturbed rollout of n_sim steps.
double closed_loop_performance(const SystemModel& model, Controller& ctrl, const StageCost& cost,
                               const Vector& x0, int n_sim);

/// Same sum over an existing trajectory (its controller outputs, not the
/// disturbed inputs).
double trajectory_cost(const Trajectory& traj, const StageCost& cost);

enum class FailedSide { None, Candidate, Reference };

struct PerformanceRecord {
  Vector x0;
  double p_value = 0.0;  // candidate controller
  double p_ref = 0.0;    // reference controller
  double abs_dev = 0.0;
  double rel_dev = 0.0;  // +inf when p_ref < kRelativeGuard
  FailedSide failed = FailedSide::None;
  std::string failure;

  bool valid() const { return failed == FailedSide::None; }

  static constexpr double kRelativeGuard = 1e-12;
};

/// Rolls both controllers out independently from x0 and compares their
/// closed-loop performance. A failing rollout marks the record invalid
/// instead of throwing.
PerformanceRecord performance_deviation(const SystemModel& model, Controller& candidate,
                                        Controller& reference, const StageCost& cost,
                                        const Vector& x0, int n_sim);

/// Completes abs/rel deviations from two performance values.
PerformanceRecord make_record(const Vector& x0, double p_value, double p_ref);

}  // namespace kmpc
