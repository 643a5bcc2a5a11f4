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

#include "kmpc/perf.hpp"

#include <cmath>

namespace kmpc {

double trajectory_cost(const Trajectory& traj, const StageCost& cost) {
  double p = 0.0;
  for (std::size_t i = 0; i < traj.inputs.size(); ++i) p += cost(traj.states[i], traj.inputs[i]);
  return p;
}

double closed_loop_performance(const SystemModel& model, Controller& ctrl, const StageCost& cost,
                               const Vector& x0, int n_sim) {
  return trajectory_cost(rollout(model, ctrl, x0, n_sim), cost);
}

PerformanceRecord make_record(const Vector& x0, double p_value, double p_ref) {
  PerformanceRecord r;
  r.x0 = x0;
  r.p_value = p_value;
  r.p_ref = p_ref;
  r.abs_dev = std::abs(p_value - p_ref);
  if (p_ref < PerformanceRecord::kRelativeGuard) {
    r.rel_dev = r.abs_dev == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    r.rel_dev = r.abs_dev / p_ref;
  }
  return r;
}

PerformanceRecord performance_deviation(const SystemModel& model, Controller& candidate,
                                        Controller& reference, const StageCost& cost,
                                        const Vector& x0, int n_sim) {
  double p_value = 0.0;
  double p_ref = 0.0;
  try {
    p_value = closed_loop_performance(model, candidate, cost, x0, n_sim);
  } catch (const Error& e) {
    PerformanceRecord r;
    r.x0 = x0;
    r.failed = FailedSide::Candidate;
    r.failure = e.what();
    return r;
  }
  try {
    p_ref = closed_loop_performance(model, reference, cost, x0, n_sim);
  } catch (const Error& e) {
    PerformanceRecord r;
    r.x0 = x0;
    r.failed = FailedSide::Reference;
    r.failure = e.what();
    return r;
  }
  return make_record(x0, p_value, p_ref);
}

}  // namespace kmpc
