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

#include "kmpc/kmpc.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <utility>

#include "kmpc/config.hpp"
#include "kmpc/design.hpp"
#include "kmpc/persist.hpp"
#include "kmpc/reach.hpp"

using namespace kmpc;

struct kmpc_config {
  RunConfig value;
};

struct kmpc_reach {
  ReachEstimate value;
};

struct kmpc_design {
  DesignReport report;
  ControllerArtifact artifact;
};

struct kmpc_artifact {
  ControllerArtifact value;
};

struct kmpc_verdict {
  Verdict verdict;
  kmpc_reach reach;
  double eps_perf = 0.0;
  bool inside_reference = false;
};

struct kmpc_controller {
  std::unique_ptr<Controller> impl;
  int n_x = 0;
  int n_u = 0;
};

struct kmpc_trajectory {
  Trajectory value;
  double cost = 0.0;
};

namespace {

thread_local std::string g_last_error;

kmpc_status record(kmpc_status s, const std::string& what) {
  g_last_error = what;
  return s;
}

kmpc_status to_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
      return KMPC_ERR_INVALID_ARGUMENT;
    case ErrorCode::Io:
      return KMPC_ERR_IO;
    case ErrorCode::Parse:
      return KMPC_ERR_PARSE;
    case ErrorCode::Schema:
      return KMPC_ERR_SCHEMA;
    case ErrorCode::Infeasible:
      return KMPC_ERR_INFEASIBLE;
    case ErrorCode::Numerical:
      return KMPC_ERR_NUMERICAL;
    case ErrorCode::Internal:
      break;
  }
  return KMPC_ERR_INTERNAL;
}

template <class F>
kmpc_status guard(F&& f) {
  try {
    f();
    return KMPC_OK;
  } catch (const Error& e) {
    return record(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return record(KMPC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(KMPC_ERR_INTERNAL, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

DesignLog make_log(kmpc_log_fn log, void* user) {
  if (!log) return {};
  return [log, user](const std::string& line) { log(line.c_str(), user); };
}

Vector copy_in(const double* p, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = p[i];
  return v;
}

void copy_out(const Vector& v, double* p) {
  for (Eigen::Index i = 0; i < v.size(); ++i) p[i] = v[i];
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

ReachEstimate compute_reference(const RunConfig& c, const DesignLog& log) {
  const OcpSpec ocp = c.build_ocp(c.build_terminal());
  if (log) {
    log("reference reach: " + std::to_string(c.scenario_count()) + " disturbed MPC rollouts of " +
        std::to_string(c.n_sim) + " steps");
  }
  return reference_reach(ocp, c.x0_box, c.disturbance, c.eps, c.omega, c.n_sim, c.seed, 0,
                         c.n_samples_override);
}

template <class F>
kmpc_status update(kmpc_config* c, F&& f) {
  return guard([&] {
    require(c, "config must not be null");
    RunConfig next = c->value;
    f(next);
    next.validate();
    c->value = std::move(next);
  });
}

}  // namespace

extern "C" {

const char* kmpc_version(void) { return tool_version(); }

const char* kmpc_last_error(void) { return g_last_error.c_str(); }

const char* kmpc_status_name(kmpc_status s) {
  switch (s) {
    case KMPC_OK:
      return "ok";
    case KMPC_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case KMPC_ERR_IO:
      return "i/o error";
    case KMPC_ERR_PARSE:
      return "parse error";
    case KMPC_ERR_SCHEMA:
      return "schema error";
    case KMPC_ERR_INFEASIBLE:
      return "infeasible";
    case KMPC_ERR_NUMERICAL:
      return "numerical error";
    case KMPC_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

void kmpc_string_free(char* s) { std::free(s); }

kmpc_status kmpc_config_default(kmpc_config** out) {
  return guard([&] {
    require(out, "out must not be null");
    auto c = std::make_unique<kmpc_config>();
    c->value.validate();
    *out = c.release();
  });
}

kmpc_status kmpc_config_load(const char* path, kmpc_config** out) {
  return guard([&] {
    require(path && out, "path and out must not be null");
    *out = new kmpc_config{load_config(path)};
  });
}

kmpc_status kmpc_config_parse(const char* text, kmpc_config** out) {
  return guard([&] {
    require(text && out, "text and out must not be null");
    *out = new kmpc_config{parse_config(text)};
  });
}

void kmpc_config_free(kmpc_config* c) { delete c; }

kmpc_status kmpc_config_to_json(const kmpc_config* c, char** out) {
  return guard([&] {
    require(c && out, "config and out must not be null");
    *out = dup(config_to_json(c->value));
  });
}

kmpc_status kmpc_config_set_seed(kmpc_config* c, uint64_t seed) {
  return update(c, [&](RunConfig& r) { r.seed = seed; });
}

kmpc_status kmpc_config_set_verify_every(kmpc_config* c, int k) {
  return update(c, [&](RunConfig& r) { r.verify_every = k; });
}

kmpc_status kmpc_config_set_eps_perf(kmpc_config* c, double eps_perf) {
  return update(c, [&](RunConfig& r) { r.eps_perf = eps_perf; });
}

kmpc_status kmpc_config_set_out_dir(kmpc_config* c, const char* dir) {
  return update(c, [&](RunConfig& r) { r.out_dir = dir ? dir : ""; });
}

kmpc_status kmpc_config_set_n_samples(kmpc_config* c, uint64_t n) {
  return update(c, [&](RunConfig& r) { r.n_samples_override = n; });
}

kmpc_status kmpc_config_set_pool_size(kmpc_config* c, int m) {
  return update(c, [&](RunConfig& r) { r.pool_size = m; });
}

kmpc_status kmpc_config_set_max_iters(kmpc_config* c, int n) {
  return update(c, [&](RunConfig& r) { r.max_iters = n; });
}

uint64_t kmpc_config_seed(const kmpc_config* c) { return c ? c->value.seed : 0; }
double kmpc_config_eps_perf(const kmpc_config* c) { return c ? c->value.eps_perf : 0.0; }
int kmpc_config_n_sim(const kmpc_config* c) { return c ? c->value.n_sim : 0; }
int kmpc_config_n_x(const kmpc_config* c) { return c ? 2 : 0; }
int kmpc_config_n_u(const kmpc_config* c) { return c ? 1 : 0; }
const char* kmpc_config_out_dir(const kmpc_config* c) { return c ? c->value.out_dir.c_str() : ""; }

kmpc_status kmpc_config_scenario_count(const kmpc_config* c, uint64_t* out) {
  return guard([&] {
    require(c && out, "config and out must not be null");
    *out = c->value.scenario_count();
  });
}

kmpc_status kmpc_reference_reach(const kmpc_config* c, kmpc_log_fn log, void* user, kmpc_reach** out) {
  return guard([&] {
    require(c && out, "config and out must not be null");
    *out = new kmpc_reach{compute_reference(c->value, make_log(log, user))};
  });
}

kmpc_status kmpc_reach_load(const char* path, kmpc_reach** out) {
  return guard([&] {
    require(path && out, "path and out must not be null");
    *out = new kmpc_reach{load_reach(path)};
  });
}

kmpc_status kmpc_reach_save(const kmpc_reach* r, const char* path) {
  return guard([&] {
    require(r && path, "reach and path must not be null");
    save_reach(r->value, path);
  });
}

void kmpc_reach_free(kmpc_reach* r) { delete r; }

int kmpc_reach_n_hulls(const kmpc_reach* r) {
  return r ? static_cast<int>(r->value.per_step_hulls.size()) : 0;
}

int kmpc_reach_n_x(const kmpc_reach* r) {
  return r && !r->value.per_step_hulls.empty() ? static_cast<int>(r->value.per_step_hulls[0].dim()) : 0;
}

int kmpc_reach_n_u(const kmpc_reach* r) { return r ? static_cast<int>(r->value.input_hull.dim()) : 0; }

uint64_t kmpc_reach_n_samples(const kmpc_reach* r) { return r ? r->value.certificate.n_samples : 0; }

kmpc_status kmpc_reach_state_hull(const kmpc_reach* r, int step, double* lb, double* ub) {
  return guard([&] {
    require(r && lb && ub, "arguments must not be null");
    require(step >= 0 && step < kmpc_reach_n_hulls(r), "step out of range");
    copy_out(r->value.per_step_hulls[step].lb, lb);
    copy_out(r->value.per_step_hulls[step].ub, ub);
  });
}

kmpc_status kmpc_reach_input_hull(const kmpc_reach* r, double* lb, double* ub) {
  return guard([&] {
    require(r && lb && ub, "arguments must not be null");
    copy_out(r->value.input_hull.lb, lb);
    copy_out(r->value.input_hull.ub, ub);
  });
}

kmpc_status kmpc_reach_perf_hull(const kmpc_reach* r, double* abs_lb, double* abs_ub, double* rel_lb,
                                 double* rel_ub) {
  return guard([&] {
    require(r, "reach must not be null");
    const auto get = [](const Box& b, double* lo, double* hi) {
      if (lo) *lo = b.dim() > 0 ? b.lb[0] : 0.0;
      if (hi) *hi = b.dim() > 0 ? b.ub[0] : 0.0;
    };
    get(r->value.perf_hull, abs_lb, abs_ub);
    get(r->value.rel_perf_hull, rel_lb, rel_ub);
  });
}

kmpc_status kmpc_reach_contains(const kmpc_reach* r, const double* x, double tol, int* inside) {
  return guard([&] {
    require(r && x && inside, "arguments must not be null");
    *inside = r->value.union_contains(copy_in(x, kmpc_reach_n_x(r)), tol) ? 1 : 0;
  });
}

kmpc_status kmpc_reach_sample(const kmpc_reach* r, int n, uint64_t seed, double* out) {
  return guard([&] {
    require(r && out, "arguments must not be null");
    require(n >= 0, "n must be nonnegative");
    const int nx = kmpc_reach_n_x(r);
    const auto pts = sample_union_of_boxes(r->value.per_step_hulls, static_cast<std::size_t>(n), seed);
    for (int i = 0; i < n; ++i) copy_out(pts[i], out + static_cast<std::ptrdiff_t>(i) * nx);
  });
}

kmpc_status kmpc_design_run(const kmpc_config* c, const kmpc_reach* reference, kmpc_log_fn log,
                            void* user, kmpc_design** out) {
  return guard([&] {
    require(c && out, "config and out must not be null");
    const RunConfig& cfg = c->value;
    const DesignLog sink = make_log(log, user);
    const TerminalDesign terminal = cfg.build_terminal();
    const OcpSpec ocp = cfg.build_ocp(terminal);
    std::optional<ReachEstimate> own;
    if (!reference) own = compute_reference(cfg, sink);
    const ReachEstimate& ref = reference ? reference->value : *own;
    auto d = std::make_unique<kmpc_design>();
    d->report = design_controller(ocp, cfg.x0_box, cfg.score, cfg.kernel, ref, cfg.design_options(), sink);
    d->artifact.controller = d->report.final_controller;
    d->artifact.terminal = terminal;
    d->artifact.ocp = summarize_ocp(cfg);
    d->artifact.provenance = make_provenance(cfg.seed);
    *out = d.release();
  });
}

void kmpc_design_free(kmpc_design* d) { delete d; }

int kmpc_design_converged(const kmpc_design* d) {
  return d && d->report.terminated == Termination::Converged ? 1 : 0;
}

int kmpc_design_iterations(const kmpc_design* d) {
  return d ? static_cast<int>(d->report.iterations.size()) : 0;
}

int kmpc_design_n_data(const kmpc_design* d) { return d ? d->report.final_controller.size() : 0; }

kmpc_status kmpc_design_artifact(const kmpc_design* d, kmpc_artifact** out) {
  return guard([&] {
    require(d && out, "design and out must not be null");
    *out = new kmpc_artifact{d->artifact};
  });
}

kmpc_status kmpc_design_save_report(const kmpc_design* d, const char* path) {
  return guard([&] {
    require(d && path, "design and path must not be null");
    save_report(d->report, path);
  });
}

kmpc_status kmpc_artifact_load(const char* path, kmpc_artifact** out) {
  return guard([&] {
    require(path && out, "path and out must not be null");
    *out = new kmpc_artifact{load_artifact(path)};
  });
}

kmpc_status kmpc_artifact_save(const kmpc_artifact* a, const char* path) {
  return guard([&] {
    require(a && path, "artifact and path must not be null");
    save_artifact(a->value, path);
  });
}

void kmpc_artifact_free(kmpc_artifact* a) { delete a; }

int kmpc_artifact_n_data(const kmpc_artifact* a) { return a ? a->value.controller.size() : 0; }
int kmpc_artifact_n_x(const kmpc_artifact* a) { return a ? a->value.controller.n_x() : 0; }
int kmpc_artifact_n_u(const kmpc_artifact* a) { return a ? a->value.controller.n_u() : 0; }

kmpc_status kmpc_artifact_data_point(const kmpc_artifact* a, int i, double* x, double* u) {
  return guard([&] {
    require(a && x && u, "arguments must not be null");
    require(i >= 0 && i < a->value.controller.size(), "data index out of range");
    copy_out(a->value.controller.points().row(i).transpose(), x);
    copy_out(a->value.controller.targets().row(i).transpose(), u);
  });
}

kmpc_status kmpc_artifact_predict(const kmpc_artifact* a, const double* x, double* u) {
  return guard([&] {
    require(a && x && u, "arguments must not be null");
    copy_out(a->value.controller.predict(copy_in(x, a->value.controller.n_x())), u);
  });
}

kmpc_status kmpc_verify(const kmpc_artifact* a, const kmpc_config* c, const kmpc_reach* reference,
                        kmpc_log_fn log, void* user, kmpc_verdict** out) {
  return guard([&] {
    require(a && c && out, "artifact, config and out must not be null");
    const RunConfig& cfg = c->value;
    const DesignLog sink = make_log(log, user);
    const SystemModel model = cfg.build_model();
    require(a->value.controller.n_x() == model.n_x && a->value.controller.n_u() == model.n_u,
            "artifact dimensions do not match the configured model");
    const OcpSpec ocp = cfg.build_ocp(cfg.build_terminal());
    const MpcController mpc(ocp);
    auto interp = std::make_shared<const KernelInterpolant>(a->value.controller);

    ReachOptions ro;
    ro.n_sim = cfg.n_sim;
    ro.eps = cfg.eps;
    ro.omega = cfg.omega;
    ro.seed = cfg.seed;
    ro.n_samples_override = cfg.n_samples_override;
    ro.reference = [&] { return mpc.clone(); };
    ro.cost = StageCost{cfg.Q, cfg.R};
    if (sink) sink("verify: " + std::to_string(cfg.scenario_count()) + " closed-loop samples");
    auto v = std::make_unique<kmpc_verdict>();
    v->reach.value = estimate_reach(
        model, [interp] { return std::make_unique<KernelController>(interp); }, cfg.x0_box, ro);
    v->verdict = verify_specs(v->reach.value, model.x_con, model.u_con, cfg.eps_perf);
    v->eps_perf = cfg.eps_perf;
    v->inside_reference = reference && union_covers(reference->value.per_step_hulls,
                                                    v->reach.value.per_step_hulls);
    if (sink) {
      sink(std::string("verify: ") + (v->verdict.pass ? "pass" : "fail") +
           ", perf hull ub = " + std::to_string(v->reach.value.perf_hull.ub[0]));
      for (const auto& f : v->verdict.failures) sink("verify: " + f);
    }
    *out = v.release();
  });
}

void kmpc_verdict_free(kmpc_verdict* v) { delete v; }
int kmpc_verdict_pass(const kmpc_verdict* v) { return v && v->verdict.pass ? 1 : 0; }
int kmpc_verdict_inside_reference(const kmpc_verdict* v) { return v && v->inside_reference ? 1 : 0; }

int kmpc_verdict_n_failures(const kmpc_verdict* v) {
  return v ? static_cast<int>(v->verdict.failures.size()) : 0;
}

const char* kmpc_verdict_failure(const kmpc_verdict* v, int i) {
  if (!v || i < 0 || i >= kmpc_verdict_n_failures(v)) return nullptr;
  return v->verdict.failures[i].c_str();
}

const kmpc_reach* kmpc_verdict_reach(const kmpc_verdict* v) { return v ? &v->reach : nullptr; }

kmpc_status kmpc_verdict_save(const kmpc_verdict* v, const char* path) {
  return guard([&] {
    require(v && path, "verdict and path must not be null");
    const std::string text = serialize_verdict(v->verdict, v->reach.value, v->eps_perf, v->inside_reference);
    FILE* f = std::fopen(path, "wb");
    if (!f) throw Error(ErrorCode::Io, std::string("cannot open '") + path + "' for writing");
    const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
    if (std::fclose(f) != 0 || !ok) throw Error(ErrorCode::Io, std::string("error writing '") + path + "'");
  });
}

kmpc_status kmpc_controller_from_artifact(const kmpc_artifact* a, kmpc_controller** out) {
  return guard([&] {
    require(a && out, "artifact and out must not be null");
    auto interp = std::make_shared<const KernelInterpolant>(a->value.controller);
    *out = new kmpc_controller{std::make_unique<KernelController>(interp), interp->n_x(), interp->n_u()};
  });
}

kmpc_status kmpc_controller_mpc(const kmpc_config* c, kmpc_controller** out) {
  return guard([&] {
    require(c && out, "config and out must not be null");
    const OcpSpec ocp = c->value.build_ocp(c->value.build_terminal());
    *out = new kmpc_controller{std::make_unique<MpcController>(ocp), ocp.model.n_x, ocp.model.n_u};
  });
}

void kmpc_controller_free(kmpc_controller* c) { delete c; }

kmpc_status kmpc_controller_evaluate(kmpc_controller* c, const double* x, double* u) {
  return guard([&] {
    require(c && x && u, "arguments must not be null");
    copy_out(c->impl->evaluate(copy_in(x, c->n_x)), u);
  });
}

void kmpc_controller_reset(kmpc_controller* c) {
  if (c) c->impl->reset();
}

kmpc_status kmpc_simulate(const kmpc_config* c, kmpc_controller* ctrl, const double* x0, int n_steps,
                          kmpc_trajectory** out) {
  return guard([&] {
    require(c && ctrl && x0 && out, "arguments must not be null");
    require(n_steps >= 0, "n_steps must be nonnegative");
    const SystemModel model = c->value.build_model();
    require(ctrl->n_x == model.n_x && ctrl->n_u == model.n_u,
            "controller dimensions do not match the configured model");
    auto t = std::make_unique<kmpc_trajectory>();
    t->value = rollout(model, *ctrl->impl, copy_in(x0, model.n_x), n_steps);
    t->cost = trajectory_cost(t->value, StageCost{c->value.Q, c->value.R});
    *out = t.release();
  });
}

void kmpc_trajectory_free(kmpc_trajectory* t) { delete t; }

int kmpc_trajectory_length(const kmpc_trajectory* t) {
  return t ? static_cast<int>(t->value.inputs.size()) : 0;
}

kmpc_status kmpc_trajectory_state(const kmpc_trajectory* t, int k, double* x) {
  return guard([&] {
    require(t && x, "arguments must not be null");
    require(k >= 0 && k < static_cast<int>(t->value.states.size()), "state index out of range");
    copy_out(t->value.states[k], x);
  });
}

kmpc_status kmpc_trajectory_input(const kmpc_trajectory* t, int k, double* u) {
  return guard([&] {
    require(t && u, "arguments must not be null");
    require(k >= 0 && k < kmpc_trajectory_length(t), "input index out of range");
    copy_out(t->value.inputs[k], u);
  });
}

double kmpc_trajectory_cost(const kmpc_trajectory* t) { return t ? t->cost : 0.0; }

}  // extern "C"
