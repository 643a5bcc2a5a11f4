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

#include "kmpc/design.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "kmpc/parallel.hpp"
#include "kmpc/rng.hpp"

namespace kmpc {
namespace {

constexpr double kEmptyDistanceCap = 1e6;

std::uint64_t iteration_seed(std::uint64_t seed, std::uint64_t purpose, int iteration) {
  return Rng::mix(seed ^ Rng::mix(purpose) ^ Rng::mix(static_cast<std::uint64_t>(iteration) + 77));
}

HullSummary summarize(const ReachEstimate& est) {
  HullSummary h;
  h.state_bounds = est.bounding_box();
  h.input_hull = est.input_hull;
  h.perf_hull = est.perf_hull;
  h.rel_perf_hull = est.rel_perf_hull;
  h.perf_mean = est.perf_mean;
  h.rel_perf_mean = est.rel_perf_mean;
  h.perf_failures = est.perf_failures;
  return h;
}

}  // namespace

const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::AbsPerfDev:
      return "abs_perf_dev";
    case Criterion::RelPerfDev:
      return "rel_perf_dev";
    case Criterion::InputDev:
      return "input_dev";
    case Criterion::MinDataDistance:
      return "min_data_distance";
  }
  return "unknown";
}

Criterion criterion_from_string(const std::string& s) {
  for (std::size_t j = 0; j < kNumCriteria; ++j) {
    if (s == to_string(static_cast<Criterion>(j))) return static_cast<Criterion>(j);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown score criterion '" + s + "'");
}

const char* to_string(Termination t) {
  return t == Termination::Converged ? "converged" : "iteration-cap";
}

void ScoreSpec::validate() const {
  bool any = false;
  for (std::size_t j = 0; j < kNumCriteria; ++j) {
    if (!(weights[j] >= 0.0) || !std::isfinite(weights[j])) {
      throw Error(ErrorCode::InvalidArgument, "score.weights must be finite and nonnegative");
    }
    any = any || (active[j] && weights[j] > 0.0);
  }
  if (!any) {
    throw Error(ErrorCode::InvalidArgument, "score needs an active criterion with positive weight");
  }
}

ScoreBreakdown score_raw(const ScoreSpec& spec, const ScoreContext& ctx, Controller& candidate,
                         Controller& reference, const Vector& x) {
  ScoreBreakdown b;
  const bool need_perf = spec.active[0] || spec.active[1];
  Vector kappa;
  Vector kappa_tilde;
  try {
    if (need_perf && ctx.n_sim > 0) {
      const Trajectory ref = rollout(*ctx.model, reference, x, ctx.n_sim);
      const Trajectory cand = rollout(*ctx.model, candidate, x, ctx.n_sim);
      kappa = ref.inputs.front();
      kappa_tilde = cand.inputs.front();
      const PerformanceRecord r =
          make_record(x, trajectory_cost(cand, ctx.cost), trajectory_cost(ref, ctx.cost));
      b.raw[0] = r.abs_dev;
      b.raw[1] = std::isfinite(r.rel_dev) ? r.rel_dev : 0.0;
    } else {
      reference.reset();
      kappa = reference.evaluate(x);
      candidate.reset();
      kappa_tilde = candidate.evaluate(x);
    }
  } catch (const Error& e) {
    b.discarded = true;
    b.reason = e.what();
    return b;
  }
  b.reference_input = kappa;
  b.raw[2] = (kappa - kappa_tilde).norm();
  const KernelInterpolant* interp = ctx.interpolant;
  if (interp && interp->size() > 0) {
    b.raw[3] = (interp->points().rowwise() - x.transpose()).rowwise().norm().minCoeff();
  } else {
    b.raw[3] = kEmptyDistanceCap;
  }
  return b;
}

namespace {

std::array<double, kNumCriteria> normalizers(const ScoreSpec& spec,
                                             const std::vector<ScoreBreakdown>& pool) {
  std::array<double, kNumCriteria> c{};
  for (std::size_t j = 0; j < kNumCriteria; ++j) {
    if (!spec.active[j]) continue;
    if (spec.normalization == Normalization::None) {
      c[j] = 1.0;
      continue;
    }
    double m = 0.0;
    for (const auto& s : pool) {
      if (!s.discarded) m = std::max(m, s.raw[j]);
    }
    c[j] = m > 0.0 ? 1.0 / m : 0.0;
  }
  return c;
}

}  // namespace

int select_candidate(const ScoreSpec& spec, std::vector<ScoreBreakdown>& pool) {
  const auto c = normalizers(spec, pool);
  int best = -1;
  double best_total = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto& s = pool[i];
    if (s.discarded) continue;
    double total = 0.0;
    for (std::size_t j = 0; j < kNumCriteria; ++j) {
      if (spec.active[j]) total += c[j] * spec.weights[j] * s.raw[j];
    }
    s.total = total;
    if (total > best_total) {
      best_total = total;
      best = static_cast<int>(i);
    }
  }
  return best;
}

ReachEstimate reference_reach(const OcpSpec& ocp, const Box& x0_box, const Box& dist_box,
                              double eps, double omega, int n_sim, std::uint64_t seed,
                              std::size_t workers, std::uint64_t n_samples_override) {
  if (!(dist_box == ocp.u_tighten)) {
    throw Error(ErrorCode::InvalidArgument,
                "reference disturbance box must equal the OCP input tightening");
  }
  const MpcController proto(ocp);
  ReachOptions ro;
  ro.n_sim = n_sim;
  ro.eps = eps;
  ro.omega = omega;
  ro.disturbance = dist_box;
  ro.seed = seed;
  ro.workers = workers;
  ro.n_samples_override = n_samples_override;
  ro.cost = StageCost{ocp.Q, ocp.R};
  return estimate_reach(ocp.model, [&] { return proto.clone(); }, x0_box, ro);
}

DesignReport design_controller(const OcpSpec& ocp, const Box& x0_box, const ScoreSpec& score,
                               const KernelSpec& kernel, const ReachEstimate& reference,
                               const DesignOptions& opt, const DesignLog& log) {
  score.validate();
  ocp.validate();
  kernel.validate(ocp.model.n_x);
  if (opt.pool_size <= 0 || opt.max_iters <= 0 || opt.verify_every <= 0 || opt.n_sim < 0) {
    throw Error(ErrorCode::InvalidArgument, "design counts must be positive");
  }
  if (reference.per_step_hulls.empty()) {
    throw Error(ErrorCode::InvalidArgument, "reference reachable set is empty");
  }

  const SystemModel& model = ocp.model;
  const MpcController mpc_proto(ocp);
  const StageCost cost{ocp.Q, ocp.R};
  const std::size_t workers =
      std::min<std::size_t>(opt.workers == 0 ? worker_count() : opt.workers, opt.pool_size);

  DesignReport report;
  auto interp = std::make_shared<const KernelInterpolant>(kernel, model.n_x, model.n_u, opt.ridge);

  for (int it = 1; it <= opt.max_iters; ++it) {
    const std::vector<Vector> pool =
        sample_union_of_boxes(reference.per_step_hulls, opt.pool_size, iteration_seed(opt.seed, 1, it));

    ScoreContext ctx{&model, interp.get(), cost, opt.n_sim};
    std::vector<ScoreBreakdown> scores(pool.size());
    std::vector<std::unique_ptr<Controller>> cands(workers);
    std::vector<std::unique_ptr<Controller>> refs(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      cands[w] = std::make_unique<KernelController>(interp);
      refs[w] = mpc_proto.clone();
    }
    parallel_for(pool.size(), workers, [&](std::size_t i, std::size_t w) {
      scores[i] = score_raw(score, ctx, *cands[w], *refs[w], pool[i]);
    });

    DesignIteration rec;
    rec.index = it;
    for (const auto& s : scores) rec.discarded += s.discarded ? 1 : 0;
    if (rec.discarded > 0 && log) {
      log("iteration " + std::to_string(it) + ": discarded " + std::to_string(rec.discarded) +
          " candidates where the MPC is infeasible");
    }
    const int best = select_candidate(score, scores);
    if (best < 0) {
      throw Error(ErrorCode::Infeasible, "every candidate was discarded; MPC infeasible on the pool");
    }
    rec.normalizers = normalizers(score, scores);
    rec.chosen = pool[best];
    rec.score = scores[best];
    rec.target = scores[best].reference_input;

    interp = std::make_shared<const KernelInterpolant>(interp->with_sample(rec.chosen, rec.target));
    rec.n_data = interp->size();

    const bool verify = (it % opt.verify_every == 0) || it == opt.max_iters;
    if (verify) {
      ReachOptions ro;
      ro.n_sim = opt.n_sim;
      ro.eps = opt.eps;
      ro.omega = opt.omega;
      ro.seed = iteration_seed(opt.seed, 2, it);
      ro.workers = workers;
      ro.n_samples_override = opt.n_samples_override;
      ro.reference = [&] { return mpc_proto.clone(); };
      ro.cost = cost;
      const auto shared = interp;
      ReachEstimate est = estimate_reach(
          model, [shared] { return std::make_unique<KernelController>(shared); }, x0_box, ro);
      rec.verified = true;
      rec.verdict = verify_specs(est, model.x_con, model.u_con, opt.eps_perf);
      rec.hulls = summarize(est);
      rec.inside_reference = union_covers(reference.per_step_hulls, est.per_step_hulls);
      report.final_reach = std::move(est);
    }

    if (log) {
      std::ostringstream os;
      os.precision(6);
      os << "iteration " << it << ": N_D=" << rec.n_data << " x*=" << to_string(rec.chosen)
         << " S=" << rec.score.total << " (abs " << rec.score.raw[0] << ", rel "
         << rec.score.raw[1] << ", du " << rec.score.raw[2] << ", dist " << rec.score.raw[3] << ")";
      if (rec.verified) {
        os << " verify=" << (rec.verdict.pass ? "pass" : "fail") << " u_hull="
           << to_string(rec.hulls.input_hull) << " perf_ub=" << rec.hulls.perf_hull.ub[0]
           << " inside_ref=" << (rec.inside_reference ? "yes" : "no");
      }
      log(os.str());
    }

    const bool done = rec.verified && rec.verdict.pass;
    report.iterations.push_back(std::move(rec));
    if (done) {
      report.terminated = Termination::Converged;
      break;
    }
  }
  report.final_controller = *interp;
  return report;
}

}  // namespace kmpc
