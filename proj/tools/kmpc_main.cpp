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

// kmpc command-line front end. Links only the C API.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kmpc/kmpc.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitFail = 2;

// Carries a C API failure out to main().
struct ApiFailure : std::runtime_error {
  ApiFailure(kmpc_status s, const std::string& what) : std::runtime_error(what), status(s) {}
  kmpc_status status;
};

void check(kmpc_status s, const std::string& context) {
  if (s != KMPC_OK) throw ApiFailure(s, context + ": " + kmpc_last_error());
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Config = std::unique_ptr<kmpc_config, Deleter<kmpc_config, kmpc_config_free>>;
using Reach = std::unique_ptr<kmpc_reach, Deleter<kmpc_reach, kmpc_reach_free>>;
using Design = std::unique_ptr<kmpc_design, Deleter<kmpc_design, kmpc_design_free>>;
using Artifact = std::unique_ptr<kmpc_artifact, Deleter<kmpc_artifact, kmpc_artifact_free>>;
using VerdictPtr = std::unique_ptr<kmpc_verdict, Deleter<kmpc_verdict, kmpc_verdict_free>>;
using ControllerPtr = std::unique_ptr<kmpc_controller, Deleter<kmpc_controller, kmpc_controller_free>>;
using TrajectoryPtr = std::unique_ptr<kmpc_trajectory, Deleter<kmpc_trajectory, kmpc_trajectory_free>>;

void log_line(const char* line, void*) { std::cerr << "kmpc: " << line << '\n'; }

struct Common {
  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool dry_run = false;
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
  auto* opt = cmd->add_option("--config", c.config, "run configuration (JSON)");
  if (config_required) opt->required();
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&c](const std::uint64_t& s) { c.seed = s, c.seed_set = true; },
      "overrides the configured seed");
  cmd->add_option("--out-dir", c.out_dir, "output directory (overrides the config)");
  cmd->add_flag("--dry-run", c.dry_run, "resolve the run and exit without solving");
}

Config load_config(const Common& c) {
  kmpc_config* raw = nullptr;
  if (c.config.empty()) {
    check(kmpc_config_default(&raw), "default config");
  } else {
    check(kmpc_config_load(c.config.c_str(), &raw), "config");
  }
  Config cfg(raw);
  if (c.seed_set) check(kmpc_config_set_seed(cfg.get(), c.seed), "--seed");
  if (!c.out_dir.empty()) check(kmpc_config_set_out_dir(cfg.get(), c.out_dir.c_str()), "--out-dir");
  return cfg;
}

std::string out_path(const kmpc_config* cfg, const std::string& name) {
  const fs::path dir(kmpc_config_out_dir(cfg));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ApiFailure(KMPC_ERR_IO, "cannot create output directory '" + dir.string() + "': " + ec.message());
  return (dir / name).string();
}

Artifact load_artifact(const std::string& path) {
  kmpc_artifact* raw = nullptr;
  check(kmpc_artifact_load(path.c_str(), &raw), "artifact");
  return Artifact(raw);
}

Reach load_reach(const std::string& path) {
  kmpc_reach* raw = nullptr;
  check(kmpc_reach_load(path.c_str(), &raw), "reach");
  return Reach(raw);
}

// Loads `path` when given, else <out-dir>/reference.reach.json when present,
// else computes the reference set.
Reach reference_for(const kmpc_config* cfg, const std::string& path) {
  if (!path.empty()) return load_reach(path);
  const fs::path cached = fs::path(kmpc_config_out_dir(cfg)) / "reference.reach.json";
  if (fs::exists(cached)) return load_reach(cached.string());
  kmpc_reach* raw = nullptr;
  check(kmpc_reference_reach(cfg, log_line, nullptr, &raw), "reference reach");
  return Reach(raw);
}

std::vector<double> parse_vector(const std::string& text, int n, const std::string& flag) {
  std::string s = text;
  std::replace_if(s.begin(), s.end(), [](char ch) { return ch == '[' || ch == ']' || ch == ','; }, ' ');
  std::istringstream in(s);
  std::vector<double> v;
  double d = 0.0;
  while (in >> d) v.push_back(d);
  if (!in.eof() || static_cast<int>(v.size()) != n) {
    throw ApiFailure(KMPC_ERR_INVALID_ARGUMENT,
                     flag + ": expected " + std::to_string(n) + " numbers, got '" + text + "'");
  }
  return v;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- design ----------------------------------------------------------------

struct DesignArgs {
  Common common;
  int verify_every = 0;
  std::string reference;
};

int cmd_design(const DesignArgs& a) {
  Config cfg = load_config(a.common);
  if (a.verify_every != 0) check(kmpc_config_set_verify_every(cfg.get(), a.verify_every), "--verify-every");
  std::uint64_t n_s = 0;
  check(kmpc_config_scenario_count(cfg.get(), &n_s), "scenario count");
  if (a.common.dry_run) {
    std::cout << "N_s = " << n_s << '\n';
    std::cout << "seed = " << kmpc_config_seed(cfg.get()) << '\n';
    std::cout << "out_dir = " << kmpc_config_out_dir(cfg.get()) << '\n';
    return kExitOk;
  }
  Reach ref;
  if (!a.reference.empty()) {
    ref = load_reach(a.reference);
  } else {
    kmpc_reach* raw = nullptr;
    check(kmpc_reference_reach(cfg.get(), log_line, nullptr, &raw), "reference reach");
    ref.reset(raw);
  }
  check(kmpc_reach_save(ref.get(), out_path(cfg.get(), "reference.reach.json").c_str()), "save reference");

  kmpc_design* raw = nullptr;
  check(kmpc_design_run(cfg.get(), ref.get(), log_line, nullptr, &raw), "design");
  Design design(raw);
  kmpc_artifact* art_raw = nullptr;
  check(kmpc_design_artifact(design.get(), &art_raw), "artifact");
  Artifact art(art_raw);
  const std::string art_path = out_path(cfg.get(), "controller.kmpc.json");
  check(kmpc_artifact_save(art.get(), art_path.c_str()), "save artifact");
  check(kmpc_design_save_report(design.get(), out_path(cfg.get(), "design_report.json").c_str()),
        "save report");
  const bool converged = kmpc_design_converged(design.get()) != 0;
  std::cout << (converged ? "converged" : "iteration cap reached") << " after "
            << kmpc_design_iterations(design.get()) << " iterations, N_D = "
            << kmpc_design_n_data(design.get()) << "\n";
  std::cout << "artifact: " << art_path << '\n';
  return converged ? kExitOk : kExitFail;
}

// ---- verify ----------------------------------------------------------------

struct VerifyArgs {
  Common common;
  std::string artifact;
  std::string reference;
  double eps_perf = 0.0;
  bool eps_perf_set = false;
};

int cmd_verify(const VerifyArgs& a) {
  Config cfg = load_config(a.common);
  if (a.eps_perf_set) check(kmpc_config_set_eps_perf(cfg.get(), a.eps_perf), "--eps-perf");
  Artifact art = load_artifact(a.artifact);
  if (a.common.dry_run) {
    std::uint64_t n_s = 0;
    check(kmpc_config_scenario_count(cfg.get(), &n_s), "scenario count");
    std::cout << "N_s = " << n_s << "\nN_D = " << kmpc_artifact_n_data(art.get()) << '\n';
    return kExitOk;
  }
  Reach ref;
  if (!a.reference.empty()) ref = load_reach(a.reference);
  kmpc_verdict* raw = nullptr;
  check(kmpc_verify(art.get(), cfg.get(), ref.get(), log_line, nullptr, &raw), "verify");
  VerdictPtr v(raw);
  check(kmpc_reach_save(kmpc_verdict_reach(v.get()), out_path(cfg.get(), "verify.reach.json").c_str()),
        "save reach");
  check(kmpc_verdict_save(v.get(), out_path(cfg.get(), "verdict.json").c_str()), "save verdict");
  const bool pass = kmpc_verdict_pass(v.get()) != 0;
  std::cout << (pass ? "PASS" : "FAIL") << '\n';
  for (int i = 0; i < kmpc_verdict_n_failures(v.get()); ++i) {
    std::cout << "  " << kmpc_verdict_failure(v.get(), i) << '\n';
  }
  return pass ? kExitOk : kExitFail;
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
  Common common;
  std::string artifact;
  std::string x0 = "[-3.141592653589793, 0]";
  int steps = -1;
  bool mpc = false;
  std::string csv;
};

void write_rows(std::ostream& out, const char* name, const kmpc_trajectory* t, int n_x, int n_u) {
  std::vector<double> x(n_x), xn(n_x), u(n_u);
  for (int k = 0; k < kmpc_trajectory_length(t); ++k) {
    check(kmpc_trajectory_state(t, k, x.data()), "trajectory");
    check(kmpc_trajectory_state(t, k + 1, xn.data()), "trajectory");
    check(kmpc_trajectory_input(t, k, u.data()), "trajectory");
    out << name << ',' << k;
    for (double v : x) out << ',' << fmt(v);
    for (double v : u) out << ',' << fmt(v);
    for (double v : xn) out << ',' << fmt(v);
    out << '\n';
  }
}

void write_header(std::ostream& out, int n_x, int n_u) {
  out << "controller,step";
  for (int i = 0; i < n_x; ++i) out << ",x_" << i;
  for (int i = 0; i < n_u; ++i) out << ",u_" << i;
  for (int i = 0; i < n_x; ++i) out << ",next_x_" << i;
  out << '\n';
}

int run_trajectories(const kmpc_config* cfg, const kmpc_artifact* art, const std::vector<double>& x0,
                     int steps, bool with_mpc, const std::string& path) {
  const int n_x = kmpc_config_n_x(cfg);
  const int n_u = kmpc_config_n_u(cfg);
  std::ostringstream csv;
  write_header(csv, n_x, n_u);
  int code = kExitOk;
  if (art) {
    kmpc_controller* raw = nullptr;
    check(kmpc_controller_from_artifact(art, &raw), "controller");
    ControllerPtr ctrl(raw);
    kmpc_trajectory* traw = nullptr;
    check(kmpc_simulate(cfg, ctrl.get(), x0.data(), steps, &traw), "simulate approx");
    TrajectoryPtr t(traw);
    write_rows(csv, "approx", t.get(), n_x, n_u);
    std::cerr << "kmpc: approx closed-loop cost " << kmpc_trajectory_cost(t.get()) << '\n';
  }
  if (with_mpc) {
    kmpc_controller* raw = nullptr;
    check(kmpc_controller_mpc(cfg, &raw), "mpc");
    ControllerPtr ctrl(raw);
    kmpc_trajectory* traw = nullptr;
    const kmpc_status s = kmpc_simulate(cfg, ctrl.get(), x0.data(), steps, &traw);
    if (s == KMPC_ERR_INFEASIBLE) {
      std::cerr << "kmpc: " << kmpc_last_error() << '\n';
      code = kExitFail;
    } else {
      check(s, "simulate mpc");
      TrajectoryPtr t(traw);
      write_rows(csv, "mpc", t.get(), n_x, n_u);
      std::cerr << "kmpc: mpc closed-loop cost " << kmpc_trajectory_cost(t.get()) << '\n';
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ApiFailure(KMPC_ERR_IO, "cannot open '" + path + "' for writing");
  out << csv.str();
  if (!out) throw ApiFailure(KMPC_ERR_IO, "error writing '" + path + "'");
  std::cout << path << '\n';
  return code;
}

int cmd_simulate(const SimulateArgs& a) {
  Config cfg = load_config(a.common);
  if (a.artifact.empty() && !a.mpc) {
    throw ApiFailure(KMPC_ERR_INVALID_ARGUMENT, "simulate needs --artifact, --mpc, or both");
  }
  const std::vector<double> x0 = parse_vector(a.x0, kmpc_config_n_x(cfg.get()), "--x0");
  const int steps = a.steps < 0 ? kmpc_config_n_sim(cfg.get()) : a.steps;
  Artifact art;
  if (!a.artifact.empty()) art = load_artifact(a.artifact);
  if (a.common.dry_run) {
    std::cout << "steps = " << steps << '\n';
    return kExitOk;
  }
  const std::string path = a.csv.empty() ? out_path(cfg.get(), "trajectory.csv") : a.csv;
  return run_trajectories(cfg.get(), art.get(), x0, steps, a.mpc, path);
}

// ---- bench -----------------------------------------------------------------

struct BenchArgs {
  Common common;
  std::string artifact;
  std::string reference;
  int n_eval = 1000;
  int warmup = 10;
};

struct Stats {
  double mean = 0, median = 0, stdev = 0, min = 0, max = 0;
  std::size_t n = 0;
};

Stats summarize(std::vector<double> v) {
  Stats s;
  s.n = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  s.min = v.front();
  s.max = v.back();
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  s.median = v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.stdev = v.size() > 1 ? std::sqrt(ss / (v.size() - 1)) : 0.0;
  return s;
}

int cmd_bench(const BenchArgs& a) {
  Config cfg = load_config(a.common);
  if (a.n_eval <= 0) throw ApiFailure(KMPC_ERR_INVALID_ARGUMENT, "--n-eval must be positive");
  Artifact art = load_artifact(a.artifact);
  if (a.common.dry_run) {
    std::cout << "n_eval = " << a.n_eval << "\nN_D = " << kmpc_artifact_n_data(art.get()) << '\n';
    return kExitOk;
  }
  Reach ref = reference_for(cfg.get(), a.reference);
  const int n_x = kmpc_config_n_x(cfg.get());
  const int n_u = kmpc_config_n_u(cfg.get());
  const int total = a.n_eval + a.warmup;
  std::vector<double> states(static_cast<std::size_t>(total) * n_x);
  check(kmpc_reach_sample(ref.get(), total, kmpc_config_seed(cfg.get()), states.data()), "sample");

  kmpc_controller* raw = nullptr;
  check(kmpc_controller_from_artifact(art.get(), &raw), "controller");
  ControllerPtr approx(raw);
  check(kmpc_controller_mpc(cfg.get(), &raw), "mpc");
  ControllerPtr mpc(raw);

  using clock = std::chrono::steady_clock;
  std::vector<double> t_mpc, t_approx;
  std::vector<double> u(n_u);
  int infeasible = 0;
  volatile double sink = 0.0;
  for (int i = 0; i < total; ++i) {
    const double* x = states.data() + static_cast<std::ptrdiff_t>(i) * n_x;
    const auto a0 = clock::now();
    check(kmpc_controller_evaluate(approx.get(), x, u.data()), "approx");
    const auto a1 = clock::now();
    sink = sink + u[0];
    kmpc_controller_reset(mpc.get());
    const auto m0 = clock::now();
    const kmpc_status s = kmpc_controller_evaluate(mpc.get(), x, u.data());
    const auto m1 = clock::now();
    if (s == KMPC_ERR_INFEASIBLE) {
      ++infeasible;
      continue;
    }
    check(s, "mpc");
    if (i < a.warmup) continue;
    t_approx.push_back(std::chrono::duration<double>(a1 - a0).count());
    t_mpc.push_back(std::chrono::duration<double>(m1 - m0).count());
  }
  if (t_mpc.empty()) throw ApiFailure(KMPC_ERR_INFEASIBLE, "MPC infeasible at every benchmark state");
  const Stats sm = summarize(t_mpc);
  const Stats sa = summarize(t_approx);
  const double ratio = sm.mean / sa.mean;

  std::printf("%-14s %12s %12s %12s %12s %12s\n", "[s]", "mean", "median", "std", "min", "max");
  const auto row = [](const char* name, const Stats& s) {
    std::printf("%-14s %12.4e %12.4e %12.4e %12.4e %12.4e\n", name, s.mean, s.median, s.stdev, s.min, s.max);
  };
  row("MPC", sm);
  row("approximation", sa);
  std::printf("speedup mean(MPC)/mean(approximation) = %.1f\n", ratio);
  std::printf("evaluations = %zu (warm-up %d, MPC infeasible %d), N_D = %d\n", sm.n, a.warmup, infeasible,
              kmpc_artifact_n_data(art.get()));

  std::ofstream out(out_path(cfg.get(), "bench.csv"));
  out << "controller,mean,median,std,min,max,n\n";
  for (const auto& [name, s] : {std::pair{"mpc", sm}, std::pair{"approx", sa}}) {
    out << name << ',' << fmt(s.mean) << ',' << fmt(s.median) << ',' << fmt(s.stdev) << ',' << fmt(s.min)
        << ',' << fmt(s.max) << ',' << s.n << '\n';
  }
  out << "ratio," << fmt(ratio) << ",,,,," << sm.n << '\n';
  return kExitOk;
}

// ---- export ----------------------------------------------------------------

struct ExportArgs {
  Common common;
  std::string what;
  std::string artifact;
  std::string reference;
  std::string reach;
  std::string grid = "-4.5:1:50,-1:3.5:50";
  std::string x0 = "[-3.141592653589793, 0]";
};

struct Axis {
  double lo = 0, hi = 0;
  int n = 0;
};

std::vector<Axis> parse_grid(const std::string& spec) {
  std::vector<Axis> axes;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    Axis ax;
    char c1 = 0, c2 = 0;
    std::istringstream in(part);
    if (!(in >> ax.lo >> c1 >> ax.hi >> c2 >> ax.n) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof()) {
      throw ApiFailure(KMPC_ERR_INVALID_ARGUMENT, "--grid: expected lo:hi:n per axis, got '" + part + "'");
    }
    if (ax.n <= 0) throw ApiFailure(KMPC_ERR_INVALID_ARGUMENT, "--grid: empty grid axis '" + part + "'");
    if (!(ax.lo <= ax.hi)) throw ApiFailure(KMPC_ERR_INVALID_ARGUMENT, "--grid: lo exceeds hi in '" + part + "'");
    axes.push_back(ax);
  }
  if (axes.size() != 2) throw ApiFailure(KMPC_ERR_INVALID_ARGUMENT, "--grid: expected two axes");
  return axes;
}

double grid_point(const Axis& a, int i) {
  return a.n == 1 ? a.lo : a.lo + (a.hi - a.lo) * static_cast<double>(i) / (a.n - 1);
}

void hulls_json(std::ostream& out, const kmpc_reach* r) {
  const int n_x = kmpc_reach_n_x(r);
  std::vector<double> lb(n_x), ub(n_x);
  out << "[";
  for (int k = 0; k < kmpc_reach_n_hulls(r); ++k) {
    check(kmpc_reach_state_hull(r, k, lb.data(), ub.data()), "hull");
    out << (k ? ",\n    " : "\n    ") << "{\"step\": " << k << ", \"lb\": [";
    for (int i = 0; i < n_x; ++i) out << (i ? ", " : "") << fmt(lb[i]);
    out << "], \"ub\": [";
    for (int i = 0; i < n_x; ++i) out << (i ? ", " : "") << fmt(ub[i]);
    out << "]}";
  }
  out << "\n  ]";
}

int cmd_export(const ExportArgs& a) {
  Config cfg = load_config(a.common);
  if (a.what == "contour") {
    const auto axes = parse_grid(a.grid);
    if (a.artifact.empty()) throw ApiFailure(KMPC_ERR_INVALID_ARGUMENT, "contour export needs --artifact");
    Artifact art = load_artifact(a.artifact);
    if (a.common.dry_run) {
      std::cout << "grid points = " << axes[0].n * axes[1].n << '\n';
      return kExitOk;
    }
    kmpc_controller* raw = nullptr;
    check(kmpc_controller_mpc(cfg.get(), &raw), "mpc");
    ControllerPtr mpc(raw);
    const std::string path = out_path(cfg.get(), "contour.csv");
    std::ofstream out(path);
    out << "x_0,x_1,input_deviation\n";
    double x[2], u_mpc[1], u_approx[1];
    for (int i = 0; i < axes[0].n; ++i) {
      for (int j = 0; j < axes[1].n; ++j) {
        x[0] = grid_point(axes[0], i);
        x[1] = grid_point(axes[1], j);
        check(kmpc_artifact_predict(art.get(), x, u_approx), "predict");
        kmpc_controller_reset(mpc.get());
        const kmpc_status s = kmpc_controller_evaluate(mpc.get(), x, u_mpc);
        out << fmt(x[0]) << ',' << fmt(x[1]) << ',';
        if (s == KMPC_ERR_INFEASIBLE) {
          out << "nan\n";
        } else {
          check(s, "mpc");
          out << fmt(std::abs(u_mpc[0] - u_approx[0])) << '\n';
        }
      }
    }
    if (!out) throw ApiFailure(KMPC_ERR_IO, "error writing '" + path + "'");
    std::cout << path << '\n';
    return kExitOk;
  }
  if (a.what == "hulls") {
    if (a.common.dry_run) return kExitOk;
    Reach ref = reference_for(cfg.get(), a.reference);
    Reach approx;
    if (!a.reach.empty()) approx = load_reach(a.reach);
    const std::string path = out_path(cfg.get(), "hulls.json");
    std::ofstream out(path);
    out << "{\n  \"reference\": ";
    hulls_json(out, ref.get());
    if (approx) {
      out << ",\n  \"approx\": ";
      hulls_json(out, approx.get());
    }
    out << "\n}\n";
    if (!out) throw ApiFailure(KMPC_ERR_IO, "error writing '" + path + "'");
    std::cout << path << '\n';
    return kExitOk;
  }
  if (a.what == "traj") {
    if (a.artifact.empty()) throw ApiFailure(KMPC_ERR_INVALID_ARGUMENT, "traj export needs --artifact");
    Artifact art = load_artifact(a.artifact);
    const std::vector<double> x0 = parse_vector(a.x0, kmpc_config_n_x(cfg.get()), "--x0");
    if (a.common.dry_run) return kExitOk;
    return run_trajectories(cfg.get(), art.get(), x0, kmpc_config_n_sim(cfg.get()), true,
                            out_path(cfg.get(), "traj.csv"));
  }
  throw ApiFailure(KMPC_ERR_INVALID_ARGUMENT, "export: unknown target '" + a.what + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel approximation of implicit MPC with reachability-based verification"};
  app.set_version_flag("--version", std::string(kmpc_version()));
  app.require_subcommand(1);

  DesignArgs design;
  auto* c_design = app.add_subcommand("design", "design a kernel controller by active sampling");
  add_common(c_design, design.common, false);
  c_design->add_option("--verify-every", design.verify_every, "verify every k iterations (and at the cap)")
      ->check(CLI::PositiveNumber);
  c_design->add_option("--reference", design.reference, "reuse a reference .reach.json");

  VerifyArgs verify;
  auto* c_verify = app.add_subcommand("verify", "verify a stored controller");
  add_common(c_verify, verify.common, false);
  c_verify->add_option("--artifact", verify.artifact, "controller .kmpc.json")->required();
  c_verify->add_option("--reference", verify.reference, "reference .reach.json for the containment check");
  c_verify->add_option_function<double>(
      "--eps-perf", [&verify](const double& v) { verify.eps_perf = v, verify.eps_perf_set = true; },
      "overrides the performance threshold");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "closed-loop trajectories as CSV");
  add_common(c_sim, sim.common, false);
  c_sim->add_option("--artifact", sim.artifact, "controller .kmpc.json");
  c_sim->add_option("--x0", sim.x0, "initial state, e.g. \"[-3.1416, 0]\"");
  c_sim->add_option("--steps", sim.steps, "number of steps (default: n_sim)");
  c_sim->add_flag("--mpc", sim.mpc, "also simulate the implicit MPC");
  c_sim->add_option("--csv", sim.csv, "output file (default: <out-dir>/trajectory.csv)");

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "evaluation-time statistics of MPC and approximation");
  add_common(c_bench, bench.common, false);
  c_bench->add_option("--artifact", bench.artifact, "controller .kmpc.json")->required();
  c_bench->add_option("--reference", bench.reference, "reference .reach.json to sample states from");
  c_bench->add_option("--n-eval", bench.n_eval, "timed evaluations");
  c_bench->add_option("--warmup", bench.warmup, "discarded leading evaluations")->check(CLI::NonNegativeNumber);

  ExportArgs exp;
  auto* c_exp = app.add_subcommand("export", "plot data: contour, hulls or traj");
  add_common(c_exp, exp.common, false);
  c_exp->add_option("what", exp.what, "contour | hulls | traj")->required();
  c_exp->add_option("--artifact", exp.artifact, "controller .kmpc.json");
  c_exp->add_option("--reference", exp.reference, "reference .reach.json");
  c_exp->add_option("--reach", exp.reach, "approximation .reach.json (hulls)");
  c_exp->add_option("--grid", exp.grid, "lo:hi:n,lo:hi:n (contour)");
  c_exp->add_option("--x0", exp.x0, "initial state (traj)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (*c_design) return cmd_design(design);
    if (*c_verify) return cmd_verify(verify);
    if (*c_sim) return cmd_simulate(sim);
    if (*c_bench) return cmd_bench(bench);
    if (*c_exp) return cmd_export(exp);
  } catch (const ApiFailure& e) {
    std::cerr << "kmpc: error: " << e.what() << '\n';
    return e.status == KMPC_ERR_INFEASIBLE ? kExitFail : kExitError;
  } catch (const std::exception& e) {
    std::cerr << "kmpc: error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
