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

#include "kmpc/persist.hpp"

#include <cstdlib>
#include <ctime>

#include "json_util.hpp"

#ifndef KMPC_VERSION_STRING
#define KMPC_VERSION_STRING "0.0.0"
#endif

namespace kmpc {

using json_util::json;
using json_util::Reader;
using json_util::to_json;

namespace {

json hull_list(const std::vector<Box>& boxes) {
  json a = json::array();
  for (const Box& b : boxes) a.push_back(to_json(b));
  return a;
}

json verdict_json(const Verdict& v) {
  return {{"pass", v.pass},
          {"states_ok", v.states_ok},
          {"inputs_ok", v.inputs_ok},
          {"perf_ok", v.perf_ok},
          {"failures", v.failures}};
}

json criteria_json(const std::array<double, kNumCriteria>& values) {
  json o = json::object();
  for (std::size_t j = 0; j < kNumCriteria; ++j) o[to_string(static_cast<Criterion>(j))] = values[j];
  return o;
}

json reach_json(const ReachEstimate& e) {
  return {{"certificate",
           {{"eps", e.certificate.eps},
            {"omega", e.certificate.omega},
            {"n_samples", e.certificate.n_samples}}},
          {"seed", e.seed},
          {"n_sim", e.n_sim},
          {"disturbance", to_json(e.disturbance)},
          {"state_hulls", hull_list(e.per_step_hulls)},
          {"input_hull", to_json(e.input_hull)},
          {"perf_hull", to_json(e.perf_hull)},
          {"rel_perf_hull", to_json(e.rel_perf_hull)},
          {"perf_mean", e.perf_mean},
          {"rel_perf_mean", e.rel_perf_mean},
          {"input_failures", e.input_failures},
          {"perf_failures", e.perf_failures}};
}

Box read_box_any(const Reader& r, const std::string& key) {
  const Reader b = r.child(key);
  b.allow_only({"lb", "ub"});
  return Box{b.vector("lb"), b.vector("ub")};
}

}  // namespace

const char* tool_version() { return KMPC_VERSION_STRING; }

OcpSummary summarize_ocp(const RunConfig& c) {
  OcpSummary s;
  s.horizon = c.horizon;
  s.n_sim = c.n_sim;
  s.Q = c.Q;
  s.R = c.R;
  s.x_con = c.model.x_con;
  s.u_con = c.model.u_con;
  s.x_tighten = c.x_tighten;
  s.u_tighten = c.u_tighten;
  return s;
}

Provenance make_provenance(std::uint64_t seed) {
  Provenance p;
  p.seed = seed;
  p.tool_version = tool_version();
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long t = std::strtoll(env, &end, 10);
    if (end != env && *end == '\0' && t >= 0) {
      const std::time_t tt = static_cast<std::time_t>(t);
      std::tm tm{};
      gmtime_r(&tt, &tm);
      char buf[32];
      std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
      p.created = buf;
    }
  }
  return p;
}

std::string serialize_artifact(const ControllerArtifact& a) {
  const KernelInterpolant& k = a.controller;
  const TerminalDesign& t = a.terminal;
  json doc = {
      {"schema_version", a.schema_version},
      {"kernel",
       {{"family", to_string(k.spec().family)},
        {"signal_variance", k.spec().signal_variance},
        {"scales", to_json(k.spec().scales)}}},
      {"n_x", k.n_x()},
      {"n_u", k.n_u()},
      {"ridge", k.ridge()},
      {"points", to_json(k.points())},
      {"targets", to_json(k.targets())},
      {"coefficients", to_json(k.coefficients())},
      {"terminal",
       {{"A", to_json(t.A)},
        {"B", to_json(t.B)},
        {"Q", to_json(t.Q)},
        {"R", to_json(t.R)},
        {"K", to_json(t.K)},
        {"P", to_json(t.P)},
        {"delta_q", to_json(t.delta_q)},
        {"alpha", t.alpha}}},
      {"ocp",
       {{"horizon", a.ocp.horizon},
        {"n_sim", a.ocp.n_sim},
        {"Q", to_json(a.ocp.Q)},
        {"R", to_json(a.ocp.R)},
        {"x_con", to_json(a.ocp.x_con)},
        {"u_con", to_json(a.ocp.u_con)},
        {"x_tighten", to_json(a.ocp.x_tighten)},
        {"u_tighten", to_json(a.ocp.u_tighten)}}},
      {"provenance",
       {{"seed", a.provenance.seed},
        {"tool_version", a.provenance.tool_version},
        {"created", a.provenance.created}}},
  };
  return json_util::canonical(doc);
}

ControllerArtifact deserialize_artifact(const std::string& text, const std::string& source) {
  const json doc = json_util::parse(text, source);
  const Reader root(doc, "", ErrorCode::Schema);
  root.require_object();
  const long long version = root.integer("schema_version");
  if (version != kArtifactSchemaVersion) {
    throw Error(ErrorCode::Schema,
                source + ": unsupported schema_version " + std::to_string(version) + " (this build reads " +
                    std::to_string(kArtifactSchemaVersion) +
                    "); regenerate the artifact with `kmpc design` from this version or upgrade kmpc");
  }
  root.allow_only({"schema_version", "kernel", "n_x", "n_u", "ridge", "points", "targets",
                   "coefficients", "terminal", "ocp", "provenance"});
  ControllerArtifact a;
  a.schema_version = static_cast<int>(version);

  const Reader kr = root.child("kernel");
  kr.allow_only({"family", "signal_variance", "scales"});
  KernelSpec spec;
  try {
    spec.family = kernel_family_from_string(kr.string("family"));
  } catch (const Error& e) {
    kr.fail("family", e.what());
  }
  spec.signal_variance = kr.number("signal_variance");
  spec.scales = kr.vector("scales");
  const int n_x = static_cast<int>(root.integer("n_x"));
  const int n_u = static_cast<int>(root.integer("n_u"));
  if (n_x <= 0 || n_u <= 0) root.fail("n_x", "dimensions must be positive");
  try {
    spec.validate(n_x);
  } catch (const Error& e) {
    root.fail("kernel", e.what());
  }
  const double ridge = root.number("ridge");
  if (!(ridge > 0.0)) root.fail("ridge", "must be positive");

  const auto data = [&](const char* key, int cols) -> Matrix {
    const json& v = root.at(key);
    if (!v.is_array()) root.fail(key, "expected an array of rows");
    if (v.empty()) return Matrix(0, cols);
    Matrix m = root.matrix(key);
    if (m.cols() != cols) root.fail(key, "rows must have " + std::to_string(cols) + " entries");
    if (!m.allFinite()) root.fail(key, "entries must be finite");
    return m;
  };
  const Matrix points = data("points", n_x);
  const Matrix targets = data("targets", n_u);
  const Matrix coefficients = data("coefficients", n_u);
  if (targets.rows() != points.rows() || coefficients.rows() != points.rows()) {
    root.fail("coefficients", "points, targets and coefficients differ in length");
  }
  try {
    a.controller = points.rows() == 0
                       ? KernelInterpolant(spec, n_x, n_u, ridge)
                       : KernelInterpolant::from_parts(spec, points, targets, coefficients, ridge);
  } catch (const Error& e) {
    throw Error(ErrorCode::Schema, source + ": " + e.what());
  }

  const Reader tr = root.child("terminal");
  tr.allow_only({"A", "B", "Q", "R", "K", "P", "delta_q", "alpha"});
  a.terminal.A = tr.matrix("A");
  a.terminal.B = tr.matrix("B");
  a.terminal.Q = tr.matrix("Q");
  a.terminal.R = tr.matrix("R");
  a.terminal.K = tr.matrix("K");
  a.terminal.P = tr.matrix("P");
  a.terminal.delta_q = tr.matrix("delta_q");
  a.terminal.alpha = tr.number("alpha");

  const Reader orr = root.child("ocp");
  orr.allow_only({"horizon", "n_sim", "Q", "R", "x_con", "u_con", "x_tighten", "u_tighten"});
  a.ocp.horizon = static_cast<int>(orr.integer("horizon"));
  a.ocp.n_sim = static_cast<int>(orr.integer("n_sim"));
  a.ocp.Q = orr.matrix("Q");
  a.ocp.R = orr.matrix("R");
  a.ocp.x_con = orr.box("x_con");
  a.ocp.u_con = orr.box("u_con");
  a.ocp.x_tighten = orr.box("x_tighten");
  a.ocp.u_tighten = orr.box("u_tighten");

  const Reader pr = root.child("provenance");
  pr.allow_only({"seed", "tool_version", "created"});
  a.provenance.seed = pr.unsigned_integer("seed");
  a.provenance.tool_version = pr.string("tool_version");
  a.provenance.created = pr.string("created");
  return a;
}

void save_artifact(const ControllerArtifact& a, const std::string& path) {
  json_util::write_text(path, serialize_artifact(a));
}

ControllerArtifact load_artifact(const std::string& path) {
  return deserialize_artifact(json_util::read_text(path), path);
}

std::string serialize_reach(const ReachEstimate& e) { return json_util::canonical(reach_json(e)); }

ReachEstimate deserialize_reach(const std::string& text, const std::string& source) {
  const json doc = json_util::parse(text, source);
  const Reader root(doc, "", ErrorCode::Schema);
  root.allow_only({"certificate", "seed", "n_sim", "disturbance", "state_hulls", "input_hull",
                   "perf_hull", "rel_perf_hull", "perf_mean", "rel_perf_mean", "input_failures",
                   "perf_failures"});
  ReachEstimate e;
  const Reader c = root.child("certificate");
  c.allow_only({"eps", "omega", "n_samples"});
  e.certificate.eps = c.number("eps");
  e.certificate.omega = c.number("omega");
  e.certificate.n_samples = c.unsigned_integer("n_samples");
  e.seed = root.unsigned_integer("seed");
  e.n_sim = static_cast<int>(root.integer("n_sim"));
  e.disturbance = read_box_any(root, "disturbance");
  const json& hulls = root.at("state_hulls");
  if (!hulls.is_array() || hulls.empty()) root.fail("state_hulls", "expected a nonempty array");
  for (std::size_t i = 0; i < hulls.size(); ++i) {
    const Reader h(hulls[i], "state_hulls[" + std::to_string(i) + "]", ErrorCode::Schema);
    h.allow_only({"lb", "ub"});
    Box b{h.vector("lb"), h.vector("ub")};
    if (b.lb.size() != b.ub.size() || (b.lb.array() > b.ub.array()).any()) h.fail("", "invalid box");
    e.per_step_hulls.push_back(std::move(b));
  }
  e.input_hull = read_box_any(root, "input_hull");
  e.perf_hull = read_box_any(root, "perf_hull");
  e.rel_perf_hull = read_box_any(root, "rel_perf_hull");
  e.perf_mean = root.number("perf_mean");
  e.rel_perf_mean = root.number("rel_perf_mean");
  e.input_failures = root.unsigned_integer("input_failures");
  e.perf_failures = root.unsigned_integer("perf_failures");
  return e;
}

void save_reach(const ReachEstimate& e, const std::string& path) {
  json_util::write_text(path, serialize_reach(e));
}

ReachEstimate load_reach(const std::string& path) {
  return deserialize_reach(json_util::read_text(path), path);
}

std::string serialize_report(const DesignReport& r) {
  json iterations = json::array();
  for (const DesignIteration& it : r.iterations) {
    json o = {{"index", it.index},
              {"chosen", to_json(it.chosen)},
              {"target", to_json(it.target)},
              {"raw_scores", criteria_json(it.score.raw)},
              {"normalizers", criteria_json(it.normalizers)},
              {"total_score", it.score.total},
              {"discarded", it.discarded},
              {"n_data", it.n_data},
              {"verified", it.verified}};
    if (it.verified) {
      o["verdict"] = verdict_json(it.verdict);
      o["inside_reference"] = it.inside_reference;
      o["hulls"] = {{"state_bounds", to_json(it.hulls.state_bounds)},
                    {"input_hull", to_json(it.hulls.input_hull)},
                    {"perf_hull", to_json(it.hulls.perf_hull)},
                    {"rel_perf_hull", to_json(it.hulls.rel_perf_hull)},
                    {"perf_mean", it.hulls.perf_mean},
                    {"rel_perf_mean", it.hulls.rel_perf_mean},
                    {"perf_failures", it.hulls.perf_failures}};
    }
    iterations.push_back(std::move(o));
  }
  json doc = {{"terminated", to_string(r.terminated)},
              {"n_data", r.final_controller.size()},
              {"iterations", std::move(iterations)},
              {"final_reach", reach_json(r.final_reach)}};
  return json_util::canonical(doc);
}

void save_report(const DesignReport& r, const std::string& path) {
  json_util::write_text(path, serialize_report(r));
}

std::string serialize_verdict(const Verdict& v, const ReachEstimate& e, double eps_perf,
                              bool inside_reference) {
  json doc = {{"verdict", verdict_json(v)},
              {"eps_perf", eps_perf},
              {"inside_reference", inside_reference},
              {"reach", reach_json(e)}};
  return json_util::canonical(doc);
}

}  // namespace kmpc
