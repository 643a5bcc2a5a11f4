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

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kmpc/kernel.hpp"
#include "kmpc/model.hpp"
#include "kmpc/mpc.hpp"
#include "kmpc/perf.hpp"
#include "kmpc/reach.hpp"

namespace kmpc {

enum class Criterion : int { AbsPerfDev = 0, RelPerfDev = 1, InputDev = 2, MinDataDistance = 3 };
inline constexpr std::size_t kNumCriteria = 4;

const char* to_string(Criterion c);
Criterion criterion_from_string(const std::string& s);

enum class Normalization { PoolMax, None };

/// S(x) = sum_j c_j w_j S_j(x) over the active criteria, where c_j is
/// 1 / max_pool S_j under PoolMax normalization and 1 otherwise.
struct ScoreSpec {
  std::array<double, kNumCriteria> weights{1.0, 1.0, 1.0, 0.0};
  std::array<bool, kNumCriteria> active{true, true, true, false};
  Normalization normalization = Normalization::PoolMax;

  void validate() const;
};

/// Raw criteria at one candidate.
struct ScoreBreakdown {
  std::array<double, kNumCriteria> raw{};
  double total = 0.0;
  bool discarded = false;  // reference MPC infeasible at the candidate
  std::string reason;
  Vector reference_input;  // kappa(x), when computed
};

/// Everything needed to evaluate S at a state.
struct ScoreContext {
  const SystemModel* model = nullptr;
  const KernelInterpolant* interpolant = nullptr;
  StageCost cost;
  int n_sim = 0;
};

/// Raw criteria S_1..S_4 at x. S_1, S_2 compare undisturbed rollouts of the
/// candidate and reference controllers from x; S_3 = |kappa(x) - kappa~(x)|;
/// S_4 = distance to the closest data point (a large cap for empty data).
ScoreBreakdown score_raw(const ScoreSpec& spec, const ScoreContext& ctx, Controller& candidate,
                         Controller& reference, const Vector& x);

/// Normalizes the raw criteria over a pool and returns the argmax index (first
/// index on ties, -1 if every candidate was discarded). Fills `total`.
int select_candidate(const ScoreSpec& spec, std::vector<ScoreBreakdown>& pool);

struct DesignOptions {
  double eps = 1e-2;
  double omega = 1e-5;
  double eps_perf = 4.0;
  int pool_size = 500;
  int max_iters = 20;
  int verify_every = 1;
  int n_sim = 60;
  std::uint64_t seed = 0;
  double ridge = 1e-8;
  std::size_t workers = 0;
  // 0: scenario count from (eps, omega). Tests use fewer samples.
  std::uint64_t n_samples_override = 0;
};

struct HullSummary {
  Box state_bounds;  // interval hull of the state union
  Box input_hull;
  Box perf_hull;
  Box rel_perf_hull;
  double perf_mean = 0.0;
  double rel_perf_mean = 0.0;
  std::uint64_t perf_failures = 0;
};

struct DesignIteration {
  int index = 0;
  Vector chosen;
  Vector target;
  ScoreBreakdown score;
  std::array<double, kNumCriteria> normalizers{};
  int discarded = 0;
  int n_data = 0;
  bool verified = false;
  Verdict verdict;
  HullSummary hulls;
  bool inside_reference = false;
};

enum class Termination { Converged, IterationCap };

const char* to_string(Termination t);

struct DesignReport {
  std::vector<DesignIteration> iterations;
  KernelInterpolant final_controller;
  Termination terminated = Termination::IterationCap;
  ReachEstimate final_reach;  // last verification
};

using DesignLog = std::function<void(const std::string&)>;

/// Reachable-set estimate of the implicit MPC with per-step input
/// disturbances drawn from dist_box, which must equal the OCP input
/// tightening.
ReachEstimate reference_reach(const OcpSpec& ocp, const Box& x0_box, const Box& dist_box,
                              double eps, double omega, int n_sim, std::uint64_t seed,
                              std::size_t workers = 0, std::uint64_t n_samples_override = 0);

/// Active-sampling design of the kernel controller. Each iteration draws
/// pool_size candidates uniformly in the reference state union, adds the MPC
/// sample at the score argmax, refits, and (every verify_every iterations and
/// at the cap) verifies the new controller against x_con, u_con and eps_perf.
DesignReport design_controller(const OcpSpec& ocp, const Box& x0_box, const ScoreSpec& score,
                               const KernelSpec& kernel, const ReachEstimate& reference,
                               const DesignOptions& options, const DesignLog& log = {});

}  // namespace kmpc
