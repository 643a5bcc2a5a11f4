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
#include <string>
#include <vector>

#include "kmpc/model.hpp"
#include "kmpc/perf.hpp"
#include "kmpc/types.hpp"

namespace kmpc {

/// Smallest N_s with N_s >= (1/eps) (e/(e-1)) (ln(1/omega) + 2 n_x).
std::uint64_t scenario_sample_count(double eps, double omega, int n_x);

struct ReachCertificate {
  double eps = 0.0;
  double omega = 0.0;
  std::uint64_t n_samples = 0;
};

struct ReachOptions {
  int n_sim = 0;
  double eps = 1e-2;
  double omega = 1e-5;
  Box disturbance;  // additive input disturbance; dimension 0 means none
  std::uint64_t seed = 0;
  std::size_t workers = 0;  // 0: worker_count()
  // 0: derive from (eps, omega, n_x). Tests use smaller counts.
  std::uint64_t n_samples_override = 0;
  bool keep_trajectories = false;
  bool phase_two = true;
  // Reference controller for the performance-deviation hull. When unset the
  // controller is its own reference and the hull is {0}.
  ControllerFactory reference;
  StageCost cost;
};

/// Monte Carlo reachable-set estimate. The state union is the union of the
/// per-step hulls.
struct ReachEstimate {
  std::vector<Box> per_step_hulls;  // n_sim + 1
  Box input_hull;
  Box perf_hull;      // abs performance deviation
  Box rel_perf_hull;  // finite relative deviations only
  double perf_mean = 0.0;
  double rel_perf_mean = 0.0;
  // Phase-two samples dropped because a controller failed there.
  std::uint64_t input_failures = 0;
  std::uint64_t perf_failures = 0;
  ReachCertificate certificate;
  std::uint64_t seed = 0;
  int n_sim = 0;
  Box disturbance;
  std::vector<Vector> initial_states;
  std::vector<Vector> phase_two_samples;
  std::vector<Trajectory> trajectories;  // only with keep_trajectories

  const std::vector<Box>& state_union() const { return per_step_hulls; }
  bool union_contains(const Vector& x, double tol = 0.0) const;
  /// Interval hull of the state union.
  Box bounding_box() const;
};

/// Phase one: N_s iid uniform initial states in x0_box, rolled out n_sim
/// steps, giving per-step hulls. Phase two: N_s fresh samples uniform over the
/// state union, giving the input hull and the performance-deviation hull.
/// A controller failure in phase one throws RolloutError naming the sample.
ReachEstimate estimate_reach(const SystemModel& model, const ControllerFactory& ctrl,
                             const Box& x0_box, const ReachOptions& options);

/// Uniform samples over a union of boxes: a box is picked with probability
/// proportional to its volume, a point drawn in it, and the point accepted
/// with probability 1 / (number of boxes containing it).
std::vector<Vector> sample_union_of_boxes(const std::vector<Box>& boxes, std::size_t n,
                                          std::uint64_t seed);

/// True if every point of `inner` lies in the union of `outer` (exact for
/// closed boxes via coordinate compression).
bool union_covers(const std::vector<Box>& outer, const Box& inner);
bool union_covers(const std::vector<Box>& outer, const std::vector<Box>& inner);

struct Verdict {
  bool pass = false;
  bool states_ok = false;
  bool inputs_ok = false;
  bool perf_ok = false;
  std::vector<std::string> failures;
};

/// pass iff state union ⊆ x_con, input hull ⊆ u_con, perf hull ub <= eps_perf.
Verdict verify_specs(const ReachEstimate& est, const Box& x_con, const Box& u_con,
                     double eps_perf);

}  // namespace kmpc
