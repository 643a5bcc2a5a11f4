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

#include "kmpc/config.hpp"

#include <cmath>

#include "json_util.hpp"
#include "kmpc/reach.hpp"

namespace kmpc {

using json_util::json;
using json_util::Reader;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, field + ": " + what);
}

void check_positive(const std::string& field, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) bad(field, "must be positive and finite, got " + std::to_string(v));
}

void check_count(const std::string& field, long long v) {
  if (v <= 0) bad(field, "must be a positive integer, got " + std::to_string(v));
}

void check_probability(const std::string& field, double v) {
  if (!(v > 0.0 && v < 1.0)) bad(field, "must lie in (0, 1), got " + std::to_string(v));
}

void check_square(const std::string& field, const Matrix& m, Eigen::Index n) {
  if (m.rows() != n || m.cols() != n) {
    bad(field, "must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (!m.allFinite()) bad(field, "entries must be finite");
  if (!m.isApprox(m.transpose(), 1e-12)) bad(field, "must be symmetric");
}

void check_box(const std::string& field, const Box& b, Eigen::Index n) {
  if (b.dim() != n) bad(field, "must have dimension " + std::to_string(n));
  if (!b.lb.allFinite() || !b.ub.allFinite()) bad(field, "bounds must be finite");
  if ((b.lb.array() > b.ub.array()).any()) bad(field, "lb exceeds ub");
}

void read_model(const Reader& r, PendulumParams& p) {
  r.allow_only({"name", "gravity", "length", "mass", "damping", "dt", "x_con", "u_con"});
  if (r.has("name") && r.string("name") != "pendulum") r.fail("name", "only 'pendulum' is supported");
  r.number("gravity", p.gravity);
  r.number("length", p.length);
  r.number("mass", p.mass);
  r.number("damping", p.damping);
  r.number("dt", p.dt);
  r.box("x_con", p.x_con);
  r.box("u_con", p.u_con);
}

void read_ocp(const Reader& r, RunConfig& c) {
  r.allow_only({"horizon", "n_sim", "Q", "R", "delta_q", "x_tighten", "u_tighten", "sqp"});
  r.integer("horizon", c.horizon);
  r.integer("n_sim", c.n_sim);
  r.matrix("Q", c.Q);
  r.matrix("R", c.R);
  r.matrix("delta_q", c.delta_q);
  r.box("x_tighten", c.x_tighten);
  r.box("u_tighten", c.u_tighten);
  if (r.has("sqp")) {
    const Reader s = r.child("sqp");
    s.allow_only({"kkt_tol", "max_iterations", "constraint_tol", "slack_penalty", "slack_weight"});
    s.number("kkt_tol", c.sqp.kkt_tol);
    s.integer("max_iterations", c.sqp.max_iterations);
    s.number("constraint_tol", c.sqp.constraint_tol);
    s.number("slack_penalty", c.sqp.slack_penalty);
    s.number("slack_weight", c.sqp.slack_weight);
  }
}

void read_terminal(const Reader& r, TerminalSizingOptions& t) {
  r.allow_only({"n_check", "seed", "bisection_steps", "alpha_max"});
  r.integer("n_check", t.n_check);
  r.unsigned_integer("seed", t.seed);
  r.integer("bisection_steps", t.bisection_steps);
  r.number("alpha_max", t.alpha_max);
}

void read_kernel(const Reader& r, RunConfig& c) {
  r.allow_only({"family", "signal_variance", "scales", "ridge"});
  if (r.has("family")) {
    try {
      c.kernel.family = kernel_family_from_string(r.string("family"));
    } catch (const Error& e) {
      r.fail("family", e.what());
    }
  }
  r.number("signal_variance", c.kernel.signal_variance);
  if (r.has("scales")) c.kernel.scales = r.vector("scales");
  r.number("ridge", c.ridge);
}

void read_score(const Reader& r, ScoreSpec& s) {
  r.allow_only({"criteria", "weights", "normalization"});
  if (r.has("criteria")) {
    const json& list = r.at("criteria");
    if (!list.is_array()) r.fail("criteria", "expected an array of criterion names");
    s.active.fill(false);
    for (const auto& name : list) {
      if (!name.is_string()) r.fail("criteria", "expected criterion names");
      try {
        s.active[static_cast<std::size_t>(criterion_from_string(name.get<std::string>()))] = true;
      } catch (const Error& e) {
        r.fail("criteria", e.what());
      }
    }
  }
  if (r.has("weights")) {
    const Reader w = r.child("weights");
    w.require_object();
    for (auto it = w.raw().begin(); it != w.raw().end(); ++it) {
      std::size_t j = 0;
      try {
        j = static_cast<std::size_t>(criterion_from_string(it.key()));
      } catch (const Error& e) {
        w.fail(it.key(), e.what());
      }
      s.weights[j] = w.number(it.key());
    }
  }
  if (r.has("normalization")) {
    const std::string n = r.string("normalization");
    if (n == "pool_max") {
      s.normalization = Normalization::PoolMax;
    } else if (n == "none") {
      s.normalization = Normalization::None;
    } else {
      r.fail("normalization", "expected 'pool_max' or 'none'");
    }
  }
}

void read_reach(const Reader& r, RunConfig& c) {
  r.allow_only({"eps", "omega", "seed", "x0", "disturbance", "n_samples"});
  r.number("eps", c.eps);
  r.number("omega", c.omega);
  r.unsigned_integer("seed", c.seed);
  r.box("x0", c.x0_box);
  r.box("disturbance", c.disturbance);
  r.unsigned_integer("n_samples", c.n_samples_override);
}

void read_design(const Reader& r, RunConfig& c) {
  r.allow_only({"eps_perf", "pool_size", "max_iters", "verify_every"});
  r.number("eps_perf", c.eps_perf);
  r.integer("pool_size", c.pool_size);
  r.integer("max_iters", c.max_iters);
  r.integer("verify_every", c.verify_every);
}

}  // namespace

void RunConfig::validate() const {
  check_positive("model.gravity", model.gravity);
  check_positive("model.length", model.length);
  check_positive("model.mass", model.mass);
  check_positive("model.damping", model.damping);
  check_positive("model.dt", model.dt);
  check_box("model.x_con", model.x_con, 2);
  check_box("model.u_con", model.u_con, 1);

  check_count("ocp.horizon", horizon);
  check_count("ocp.n_sim", n_sim);
  check_square("ocp.Q", Q, 2);
  check_square("ocp.R", R, 1);
  check_square("ocp.delta_q", delta_q, 2);
  check_box("ocp.x_tighten", x_tighten, 2);
  check_box("ocp.u_tighten", u_tighten, 1);
  if (model.x_con.minkowski_difference(x_tighten).empty()) bad("ocp.x_tighten", "leaves an empty state box");
  if (model.u_con.minkowski_difference(u_tighten).empty()) bad("ocp.u_tighten", "leaves an empty input box");
  check_positive("ocp.sqp.kkt_tol", sqp.kkt_tol);
  check_count("ocp.sqp.max_iterations", sqp.max_iterations);
  check_positive("ocp.sqp.constraint_tol", sqp.constraint_tol);
  check_positive("ocp.sqp.slack_penalty", sqp.slack_penalty);
  check_positive("ocp.sqp.slack_weight", sqp.slack_weight);

  check_count("terminal.n_check", terminal.n_check);
  check_count("terminal.bisection_steps", terminal.bisection_steps);
  check_positive("terminal.alpha_max", terminal.alpha_max);

  try {
    kernel.validate(2);
  } catch (const Error& e) {
    bad("kernel", e.what());
  }
  check_positive("kernel.ridge", ridge);
  try {
    score.validate();
  } catch (const Error& e) {
    bad("score", e.what());
  }

  check_probability("reach.eps", eps);
  check_probability("reach.omega", omega);
  check_box("reach.x0", x0_box, 2);
  check_box("reach.disturbance", disturbance, 1);
  if (!(disturbance == u_tighten)) bad("reach.disturbance", "must equal ocp.u_tighten");

  if (!std::isfinite(eps_perf) || eps_perf < 0.0) bad("design.eps_perf", "must be nonnegative and finite");
  check_count("design.pool_size", pool_size);
  check_count("design.max_iters", max_iters);
  check_count("design.verify_every", verify_every);
  if (out_dir.empty()) bad("output.dir", "must not be empty");
}

SystemModel RunConfig::build_model() const { return pendulum_model(model); }

TerminalDesign RunConfig::build_terminal() const {
  const SystemModel m = build_model();
  return design_terminal(m, Q, R, delta_q, m.u_con.minkowski_difference(u_tighten),
                         m.x_con.minkowski_difference(x_tighten), terminal);
}

OcpSpec RunConfig::build_ocp(const TerminalDesign& t) const {
  OcpSpec o;
  o.model = build_model();
  o.horizon = horizon;
  o.Q = Q;
  o.R = R;
  o.P = t.P;
  o.terminal_level = t.alpha;
  o.x_tighten = x_tighten;
  o.u_tighten = u_tighten;
  o.terminal_gain = t.K;
  o.sqp = sqp;
  o.validate();
  return o;
}

DesignOptions RunConfig::design_options() const {
  DesignOptions d;
  d.eps = eps;
  d.omega = omega;
  d.eps_perf = eps_perf;
  d.pool_size = pool_size;
  d.max_iters = max_iters;
  d.verify_every = verify_every;
  d.n_sim = n_sim;
  d.seed = seed;
  d.ridge = ridge;
  d.n_samples_override = n_samples_override;
  return d;
}

std::uint64_t RunConfig::scenario_count() const {
  return n_samples_override > 0 ? n_samples_override : scenario_sample_count(eps, omega, 2);
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  const json doc = json_util::parse(text, source);
  const Reader root(doc, "");
  root.allow_only({"model", "ocp", "terminal", "kernel", "score", "reach", "design", "output"});
  RunConfig c;
  if (root.has("model")) read_model(root.child("model"), c.model);
  if (root.has("ocp")) read_ocp(root.child("ocp"), c);
  if (root.has("terminal")) read_terminal(root.child("terminal"), c.terminal);
  if (root.has("kernel")) read_kernel(root.child("kernel"), c);
  if (root.has("score")) read_score(root.child("score"), c.score);
  if (root.has("reach")) read_reach(root.child("reach"), c);
  if (root.has("design")) read_design(root.child("design"), c);
  if (root.has("output")) {
    const Reader o = root.child("output");
    o.allow_only({"dir"});
    o.string("dir", c.out_dir);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  return parse_config(json_util::read_text(path), path);
}

std::string config_to_json(const RunConfig& c) {
  json criteria = json::array();
  json weights = json::object();
  for (std::size_t j = 0; j < kNumCriteria; ++j) {
    const char* name = to_string(static_cast<Criterion>(j));
    if (c.score.active[j]) criteria.push_back(name);
    weights[name] = c.score.weights[j];
  }
  json doc = {
      {"model",
       {{"name", "pendulum"},
        {"gravity", c.model.gravity},
        {"length", c.model.length},
        {"mass", c.model.mass},
        {"damping", c.model.damping},
        {"dt", c.model.dt},
        {"x_con", json_util::to_json(c.model.x_con)},
        {"u_con", json_util::to_json(c.model.u_con)}}},
      {"ocp",
       {{"horizon", c.horizon},
        {"n_sim", c.n_sim},
        {"Q", json_util::to_json(c.Q)},
        {"R", json_util::to_json(c.R)},
        {"delta_q", json_util::to_json(c.delta_q)},
        {"x_tighten", json_util::to_json(c.x_tighten)},
        {"u_tighten", json_util::to_json(c.u_tighten)},
        {"sqp",
         {{"kkt_tol", c.sqp.kkt_tol},
          {"max_iterations", c.sqp.max_iterations},
          {"constraint_tol", c.sqp.constraint_tol},
          {"slack_penalty", c.sqp.slack_penalty},
          {"slack_weight", c.sqp.slack_weight}}}}},
      {"terminal",
       {{"n_check", c.terminal.n_check},
        {"seed", c.terminal.seed},
        {"bisection_steps", c.terminal.bisection_steps},
        {"alpha_max", c.terminal.alpha_max}}},
      {"kernel",
       {{"family", to_string(c.kernel.family)},
        {"signal_variance", c.kernel.signal_variance},
        {"scales", json_util::to_json(c.kernel.scales)},
        {"ridge", c.ridge}}},
      {"score",
       {{"criteria", criteria},
        {"weights", weights},
        {"normalization", c.score.normalization == Normalization::PoolMax ? "pool_max" : "none"}}},
      {"reach",
       {{"eps", c.eps},
        {"omega", c.omega},
        {"seed", c.seed},
        {"x0", json_util::to_json(c.x0_box)},
        {"disturbance", json_util::to_json(c.disturbance)},
        {"n_samples", c.n_samples_override}}},
      {"design",
       {{"eps_perf", c.eps_perf},
        {"pool_size", c.pool_size},
        {"max_iters", c.max_iters},
        {"verify_every", c.verify_every}}},
      {"output", {{"dir", c.out_dir}}},
  };
  return json_util::canonical(doc);
}

}  // namespace kmpc
