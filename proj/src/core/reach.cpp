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

#include "kmpc/reach.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kmpc/parallel.hpp"
#include "kmpc/rng.hpp"

namespace kmpc {
namespace {

// Stream ids for the seeded generators.
enum Stream : std::uint64_t { kInitialState = 1, kDisturbance = 2, kUnion = 3 };

Vector uniform_in(const Box& b, Rng& rng) {
  Vector x(b.dim());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(b.lb[i], b.ub[i]);
  return x;
}

std::size_t resolve_workers(std::size_t w) { return w == 0 ? worker_count() : w; }

}  // namespace

std::uint64_t scenario_sample_count(double eps, double omega, int n_x) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::InvalidArgument, "eps must lie in (0, 1)");
  if (!(omega > 0.0 && omega < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "omega must lie in (0, 1)");
  }
  if (n_x < 1) throw Error(ErrorCode::InvalidArgument, "n_x must be at least 1");
  const double e = std::numbers::e;
  const double bound = (1.0 / eps) * (e / (e - 1.0)) * (std::log(1.0 / omega) + 2.0 * n_x);
  return static_cast<std::uint64_t>(std::ceil(bound));
}

bool ReachEstimate::union_contains(const Vector& x, double tol) const {
  return std::any_of(per_step_hulls.begin(), per_step_hulls.end(),
                     [&](const Box& b) { return b.contains(x, tol); });
}

Box ReachEstimate::bounding_box() const {
  if (per_step_hulls.empty()) throw Error(ErrorCode::InvalidArgument, "empty reach estimate");
  HullBuilder h(per_step_hulls.front().dim());
  for (const Box& b : per_step_hulls) {
    h.add(b.lb);
    h.add(b.ub);
  }
  return h.hull();
}

std::vector<Vector> sample_union_of_boxes(const std::vector<Box>& boxes, std::size_t n,
                                          std::uint64_t seed) {
  if (boxes.empty()) throw Error(ErrorCode::InvalidArgument, "cannot sample an empty union");
  std::vector<double> cumulative;
  cumulative.reserve(boxes.size());
  double total = 0.0;
  for (const Box& b : boxes) {
    total += b.volume();
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "union of boxes has zero volume");
  }

  Rng rng = Rng::stream(seed, kUnion);
  std::vector<Vector> out;
  out.reserve(n);
  while (out.size() < n) {
    const double pick = rng.uniform() * total;
    std::size_t i = std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin();
    i = std::min(i, boxes.size() - 1);
    if (boxes[i].volume() == 0.0) continue;
    Vector x = uniform_in(boxes[i], rng);
    const auto covering = std::count_if(boxes.begin(), boxes.end(), [&](const Box& b) {
      return b.volume() > 0.0 && b.contains(x);
    });
    if (covering <= 1 || rng.uniform() * static_cast<double>(covering) < 1.0) {
      out.push_back(std::move(x));
    }
  }
  return out;
}

bool union_covers(const std::vector<Box>& outer, const Box& inner) {
  for (const Box& b : outer) {
    if (b.contains(inner)) return true;
  }
  const Eigen::Index n = inner.dim();
  // Breakpoints of the outer boxes inside `inner`, per axis.
  std::vector<std::vector<double>> cuts(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    cuts[a] = {inner.lb[a], inner.ub[a]};
    for (const Box& b : outer) {
      if (b.lb[a] > inner.lb[a] && b.lb[a] < inner.ub[a]) cuts[a].push_back(b.lb[a]);
      if (b.ub[a] > inner.lb[a] && b.ub[a] < inner.ub[a]) cuts[a].push_back(b.ub[a]);
    }
    std::sort(cuts[a].begin(), cuts[a].end());
    cuts[a].erase(std::unique(cuts[a].begin(), cuts[a].end()), cuts[a].end());
  }
  // Every cell (and every cut point for degenerate axes) must lie in some
  // outer box; cells are tested at their midpoints and corners via the
  // closed-box membership of the midpoint's cell.
  std::vector<std::size_t> idx(n, 0);
  std::vector<std::size_t> cells(n);
  for (Eigen::Index a = 0; a < n; ++a) cells[a] = std::max<std::size_t>(1, cuts[a].size() - 1);
  while (true) {
    Box cell{Vector(n), Vector(n)};
    for (Eigen::Index a = 0; a < n; ++a) {
      const auto& c = cuts[a];
      if (c.size() == 1) {
        cell.lb[a] = cell.ub[a] = c[0];
      } else {
        cell.lb[a] = c[idx[a]];
        cell.ub[a] = c[idx[a] + 1];
      }
    }
    const bool covered =
        std::any_of(outer.begin(), outer.end(), [&](const Box& b) { return b.contains(cell); });
    if (!covered) return false;
    Eigen::Index a = 0;
    while (a < n) {
      if (++idx[a] < cells[a]) break;
      idx[a] = 0;
      ++a;
    }
    if (a == n) break;
  }
  return true;
}

bool union_covers(const std::vector<Box>& outer, const std::vector<Box>& inner) {
  return std::all_of(inner.begin(), inner.end(),
                     [&](const Box& b) { return union_covers(outer, b); });
}

ReachEstimate estimate_reach(const SystemModel& model, const ControllerFactory& make_ctrl,
                             const Box& x0_box, const ReachOptions& opt) {
  if (!make_ctrl) throw Error(ErrorCode::InvalidArgument, "no controller given");
  if (x0_box.dim() != model.n_x || x0_box.empty()) {
    throw Error(ErrorCode::InvalidArgument, "initial-state box must be nonempty with dimension n_x");
  }
  if (opt.n_sim < 0) throw Error(ErrorCode::InvalidArgument, "n_sim must be nonnegative");
  const bool disturbed = opt.disturbance.dim() > 0;
  if (disturbed && opt.disturbance.dim() != model.n_u) {
    throw Error(ErrorCode::InvalidArgument, "disturbance box must have dimension n_u");
  }

  ReachEstimate est;
  est.certificate.eps = opt.eps;
  est.certificate.omega = opt.omega;
  est.certificate.n_samples = opt.n_samples_override
                                  ? opt.n_samples_override
                                  : scenario_sample_count(opt.eps, opt.omega, model.n_x);
  est.seed = opt.seed;
  est.n_sim = opt.n_sim;
  est.disturbance = disturbed ? opt.disturbance : Box::point(Vector::Zero(model.n_u));
  const std::size_t n_s = est.certificate.n_samples;
  const std::size_t workers = resolve_workers(opt.workers);

  std::vector<std::unique_ptr<Controller>> ctrls(std::min(workers, n_s));
  for (auto& c : ctrls) c = make_ctrl();

  // Phase one: trajectories from iid initial states.
  est.initial_states.resize(n_s);
  for (std::size_t i = 0; i < n_s; ++i) {
    Rng rng = Rng::stream(opt.seed, kInitialState, i);
    est.initial_states[i] = uniform_in(x0_box, rng);
  }
  std::vector<Trajectory> trajs(n_s);
  parallel_for(n_s, ctrls.size(), [&](std::size_t i, std::size_t w) {
    Disturbance dist = disturbed ? Disturbance::uniform(opt.disturbance,
                                                        Rng::stream(opt.seed, kDisturbance, i))
                                 : Disturbance::none(model.n_u);
    try {
      trajs[i] = rollout(model, *ctrls[w], est.initial_states[i], opt.n_sim, &dist);
    } catch (const RolloutError& e) {
      throw RolloutError(e.code(), e.step(),
                         "reach sample " + std::to_string(i) + " (x0 = " +
                             to_string(est.initial_states[i]) + "), " + e.what());
    }
  });

  est.per_step_hulls.reserve(opt.n_sim + 1);
  for (int j = 0; j <= opt.n_sim; ++j) {
    HullBuilder h(model.n_x);
    for (const auto& t : trajs) h.add(t.states[j]);
    est.per_step_hulls.push_back(h.hull());
  }

  if (opt.phase_two) {
    double volume = 0.0;
    for (const Box& b : est.per_step_hulls) volume += b.volume();
    if (volume > 0.0) {
      est.phase_two_samples = sample_union_of_boxes(est.per_step_hulls, n_s, opt.seed);
    } else {
      // Degenerate union (e.g. a single undisturbed initial state): fall back
      // to the visited states themselves.
      Rng rng = Rng::stream(opt.seed, kUnion, 1);
      est.phase_two_samples.reserve(n_s);
      for (std::size_t i = 0; i < n_s; ++i) {
        const auto& t = trajs[rng.index(trajs.size())];
        est.phase_two_samples.push_back(t.states[rng.index(t.states.size())]);
      }
    }

    std::vector<Vector> inputs(n_s);
    std::vector<char> input_ok(n_s, 0);
    std::vector<PerformanceRecord> records(n_s);
    std::vector<std::unique_ptr<Controller>> refs;
    if (opt.reference) {
      refs.resize(ctrls.size());
      for (auto& r : refs) r = opt.reference();
    }
    parallel_for(n_s, ctrls.size(), [&](std::size_t i, std::size_t w) {
      const Vector& x = est.phase_two_samples[i];
      Controller& c = *ctrls[w];
      c.reset();
      try {
        inputs[i] = c.evaluate(x);
        input_ok[i] = 1;
      } catch (const Error&) {
        input_ok[i] = 0;
      }
      if (opt.reference) {
        records[i] = performance_deviation(model, c, *refs[w], opt.cost, x, opt.n_sim);
      } else {
        records[i] = make_record(x, 0.0, 0.0);
      }
    });

    HullBuilder uh(model.n_u);
    HullBuilder ph(1);
    HullBuilder rh(1);
    double perf_sum = 0.0;
    double rel_sum = 0.0;
    std::size_t n_perf = 0;
    std::size_t n_rel = 0;
    for (std::size_t i = 0; i < n_s; ++i) {
      if (input_ok[i]) {
        uh.add(inputs[i]);
      } else {
        ++est.input_failures;
      }
      const auto& r = records[i];
      if (!r.valid()) {
        ++est.perf_failures;
        continue;
      }
      ph.add(Vector::Constant(1, r.abs_dev));
      perf_sum += r.abs_dev;
      ++n_perf;
      if (std::isfinite(r.rel_dev)) {
        rh.add(Vector::Constant(1, r.rel_dev));
        rel_sum += r.rel_dev;
        ++n_rel;
      }
    }
    if (!uh.has_points()) {
      throw Error(ErrorCode::Infeasible, "controller failed at every phase-two sample");
    }
    est.input_hull = uh.hull();
    est.perf_hull = ph.has_points() ? ph.hull() : Box::point(Vector::Zero(1));
    est.rel_perf_hull = rh.has_points() ? rh.hull() : Box::point(Vector::Zero(1));
    est.perf_mean = n_perf ? perf_sum / static_cast<double>(n_perf) : 0.0;
    est.rel_perf_mean = n_rel ? rel_sum / static_cast<double>(n_rel) : 0.0;
  } else {
    est.input_hull = Box::point(Vector::Zero(model.n_u));
    est.perf_hull = Box::point(Vector::Zero(1));
    est.rel_perf_hull = Box::point(Vector::Zero(1));
  }

  if (opt.keep_trajectories) est.trajectories = std::move(trajs);
  return est;
}

Verdict verify_specs(const ReachEstimate& est, const Box& x_con, const Box& u_con,
                     double eps_perf) {
  Verdict v;
  v.states_ok = std::all_of(est.per_step_hulls.begin(), est.per_step_hulls.end(),
                            [&](const Box& b) { return x_con.contains(b); });
  v.inputs_ok = u_con.contains(est.input_hull);
  v.perf_ok = est.perf_hull.ub[0] <= eps_perf;
  if (!v.states_ok) v.failures.push_back("state union not contained in state constraints");
  if (!v.inputs_ok) {
    v.failures.push_back("input hull " + to_string(est.input_hull) +
                         " not contained in input constraints " + to_string(u_con));
  }
  if (!v.perf_ok) {
    v.failures.push_back("performance deviation bound " + std::to_string(est.perf_hull.ub[0]) +
                         " exceeds " + std::to_string(eps_perf));
  }
  v.pass = v.states_ok && v.inputs_ok && v.perf_ok;
  return v;
}

}  // namespace kmpc
