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

// Acceptance run: one PASS/FAIL line per criterion, full case-study scale.
// Exit status 0 only if every criterion passes.

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "kmpc/config.hpp"
#include "kmpc/design.hpp"
#include "kmpc/mpc.hpp"
#include "kmpc/parallel.hpp"
#include "kmpc/persist.hpp"
#include "kmpc/reach.hpp"
#include "kmpc/rng.hpp"
#include "kmpc/terminal.hpp"

namespace {

using namespace kmpc;
using clock_type = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failed = 0;

void report(int id, const std::string& name, const Outcome& o, clock_type::time_point start) {
  const double secs = std::chrono::duration<double>(clock_type::now() - start).count();
  std::ostringstream os;
  os.precision(1);
  os << std::fixed << secs;
  std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << name << "): " << o.detail
            << " [" << os.str() << " s]" << std::endl;
  if (!o.pass) ++g_failed;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void log_line(const std::string& s) { std::cerr << "  " << s << std::endl; }

Outcome scenario_count() {
  const auto n = scenario_sample_count(1e-2, 1e-5, 2);
  return {n == 2455, "N_s = " + std::to_string(n)};
}

double training_residual(const KernelInterpolant& f, const OcpSpec& ocp) {
  // Against fresh MPC evaluations at the stored points, not the stored targets.
  MpcController mpc(ocp);
  double worst = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    const Vector x = f.points().row(i).transpose();
    mpc.reset();
    worst = std::max(worst, (f.predict(x) - mpc.evaluate(x)).norm());
  }
  return worst;
}

Outcome lyapunov_riccati(const TerminalDesign& t) {
  const Matrix AK = t.closed_loop();
  const Matrix M = t.Q + t.K.transpose() * t.R * t.K + t.delta_q;
  Matrix series = Matrix::Zero(2, 2);
  Matrix Ak = Matrix::Identity(2, 2);
  for (int k = 0; k < 1000; ++k) {
    series += Ak.transpose() * M * Ak;
    Ak = AK * Ak;
  }
  const double lyap = (lyapunov_solve(AK, M) - series).cwiseAbs().maxCoeff() / series.cwiseAbs().maxCoeff();
  double ric = 0.0;
  const double cases[][4] = {{1.2, 0.5, 2.0, 1.0}, {0.5, 1.0, 1.0, 3.0}, {-1.5, 0.2, 0.1, 0.01}};
  for (const auto& c : cases) {
    const double a = c[0], b = c[1], q = c[2], r = c[3];
    const double lin = r * (1 - a * a) - q * b * b;
    const double p = (-lin + std::sqrt(lin * lin + 4 * b * b * q * r)) / (2 * b * b);
    const RiccatiSolution s = solve_dare(Matrix{{a}}, Matrix{{b}}, Matrix{{q}}, Matrix{{r}});
    ric = std::max(ric, std::abs(s.P(0, 0) - p) / std::max(1.0, p));
  }
  return {lyap <= 1e-8 && ric <= 1e-10,
          "Lyapunov vs series " + fmt(lyap) + " (<= 1e-8), scalar Riccati " + fmt(ric) + " (<= 1e-10)"};
}

Outcome mpc_vs_riccati() {
  const double a = 1.1, b = 0.5, q = 1.0, r = 0.5, p = 2.0;
  const int N = 10;
  OcpSpec s;
  const Box big{Vector{{-1e3}}, Vector{{1e3}}};
  s.model = linear_model(Matrix{{a}}, Matrix{{b}}, big, big);
  s.horizon = N;
  s.Q = Matrix{{q}};
  s.R = Matrix{{r}};
  s.P = Matrix{{p}};
  s.terminal_level = 1e12;
  s.x_tighten = Box::point(Vector::Zero(1));
  s.u_tighten = Box::point(Vector::Zero(1));
  double P = p;
  for (int k = N - 1; k >= 1; --k) P = q + a * a * P - (a * b * P) * (a * b * P) / (r + b * b * P);
  const double gain = -(a * b * P) / (r + b * b * P);
  Rng rng(4242);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-5, 5);
    const MpcSolution sol = solve_ocp(s, Vector{{x}});
    if (sol.status != SolveStatus::Converged) return {false, "solver did not converge"};
    worst = std::max(worst, std::abs(sol.inputs[0][0] - gain * x));
  }
  return {worst <= 1e-4, "max |u_0 - u_LQ| = " + fmt(worst) + " over 100 states (<= 1e-4)"};
}

Outcome certificate(const RunConfig& cfg, const OcpSpec& ocp, const ReachEstimate& ref) {
  const std::size_t n = 10000;
  const std::uint64_t fresh = Rng::mix(cfg.seed ^ 0xace5ace5ULL);
  const MpcController proto(ocp);
  const std::size_t workers = worker_count();
  std::vector<std::unique_ptr<Controller>> ctrls(workers);
  for (auto& c : ctrls) c = proto.clone();
  std::vector<char> left(n, 0), failed(n, 0);
  parallel_for(n, workers, [&](std::size_t i, std::size_t w) {
    Rng rng = Rng::stream(fresh, 1, i);
    Vector x0(2);
    for (int k = 0; k < 2; ++k) x0[k] = rng.uniform(cfg.x0_box.lb[k], cfg.x0_box.ub[k]);
    Disturbance d = Disturbance::uniform(cfg.disturbance, Rng::stream(fresh, 2, i));
    try {
      const Trajectory t = rollout(ocp.model, *ctrls[w], x0, cfg.n_sim, &d);
      for (const auto& x : t.states) {
        if (!ref.union_contains(x)) {
          left[i] = 1;
          break;
        }
      }
    } catch (const Error&) {
      failed[i] = 1;
      left[i] = 1;
    }
  });
  const auto n_left = std::count(left.begin(), left.end(), 1);
  const auto n_failed = std::count(failed.begin(), failed.end(), 1);
  const double freq = static_cast<double>(n_left) / static_cast<double>(n);
  return {freq <= 1e-2 + 3e-2, std::to_string(n_left) + "/10000 trajectories leave the union (" +
                                   std::to_string(n_failed) + " MPC failures counted as leaving), frequency " +
                                   fmt(freq) + " (<= 0.04; scenario level 0.01)"};
}

struct DesignRun {
  DesignReport report;
  ControllerArtifact artifact;
  std::string artifact_text;
  std::string report_text;
  std::string reference_text;
};

DesignRun run_design(const RunConfig& cfg, const TerminalDesign& terminal, const OcpSpec& ocp,
                     const ReachEstimate& ref) {
  DesignRun r;
  r.report = design_controller(ocp, cfg.x0_box, cfg.score, cfg.kernel, ref, cfg.design_options(), log_line);
  r.artifact.controller = r.report.final_controller;
  r.artifact.terminal = terminal;
  r.artifact.ocp = summarize_ocp(cfg);
  r.artifact.provenance = make_provenance(cfg.seed);
  r.artifact_text = serialize_artifact(r.artifact);
  r.report_text = serialize_report(r.report);
  r.reference_text = serialize_reach(ref);
  return r;
}

Outcome convergence(const DesignRun& d, double eps_perf) {
  const auto& last = d.report.iterations.back();
  const int n_data = d.report.final_controller.size();
  const bool ok = d.report.terminated == Termination::Converged && n_data <= 20 && last.verdict.pass;
  std::string detail = std::string(to_string(d.report.terminated)) + ", N_D = " + std::to_string(n_data) +
                       " (<= 20), input hull " + to_string(last.hulls.input_hull) +
                       ", perf bound " + fmt(last.hulls.perf_hull.ub[0]) + " (<= " + fmt(eps_perf) +
                       "), states " + (last.verdict.states_ok ? "inside" : "outside") + " X_con";
  return {ok, detail};
}

Outcome closed_loop(const DesignRun& d, const RunConfig& cfg, const SystemModel& model,
                    const ReachEstimate& ref) {
  KernelController k(std::make_shared<const KernelInterpolant>(d.report.final_controller));
  const Trajectory t = rollout(model, k, Vector{{-std::numbers::pi, 0.0}}, cfg.n_sim);
  double best = std::numeric_limits<double>::infinity();
  int reached = -1;
  for (std::size_t i = 0; i < t.states.size(); ++i) {
    const double n = t.states[i].norm();
    best = std::min(best, n);
    if (reached < 0 && n <= 0.05) reached = static_cast<int>(i);
  }
  const bool inside = union_covers(ref.per_step_hulls, d.report.final_reach.per_step_hulls);
  return {reached >= 0 && inside,
          (reached >= 0 ? "reaches |x| <= 0.05 at step " + std::to_string(reached)
                        : "closest approach |x| = " + fmt(best)) +
              ", final |x| = " + fmt(t.states.back().norm()) + ", approximation union " +
              (inside ? "inside" : "not inside") + " reference union"};
}

Outcome speedup(const DesignRun& d, const OcpSpec& ocp, const ReachEstimate& ref, std::uint64_t seed) {
  const int n = 1000;
  const auto states = sample_union_of_boxes(ref.per_step_hulls, n + 10, seed);
  MpcController mpc(ocp);
  KernelController k(std::make_shared<const KernelInterpolant>(d.report.final_controller));
  volatile double sink = 0.0;
  std::vector<double> t_mpc, t_k;
  int infeasible = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    mpc.reset();
    const auto a = clock_type::now();
    try {
      const Vector u = mpc.evaluate(states[i]);
      sink = sink + u[0];
    } catch (const Error&) {
      ++infeasible;
      continue;
    }
    const auto b = clock_type::now();
    if (i >= 10) t_mpc.push_back(std::chrono::duration<double>(b - a).count());
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto a = clock_type::now();
    const Vector u = k.evaluate(states[i]);
    sink = sink + u[0];
    const auto b = clock_type::now();
    if (i >= 10) t_k.push_back(std::chrono::duration<double>(b - a).count());
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  const double ratio = mean(t_mpc) / mean(t_k);
  const int n_data = d.report.final_controller.size();
  return {ratio >= 100.0 && n_data <= 20,
          "mean MPC " + fmt(mean(t_mpc) * 1e3) + " ms, mean approximation " + fmt(mean(t_k) * 1e6) +
              " us, ratio " + fmt(ratio) + " (>= 100) at N_D = " + std::to_string(n_data) + " (<= 20)" +
              (infeasible ? ", " + std::to_string(infeasible) + " infeasible states skipped" : "")};
}

Outcome argmax_invariance() {
  Rng rng(1010);
  int changed = 0;
  for (int trial = 0; trial < 100; ++trial) {
    ScoreSpec spec;
    spec.active = {true, true, true, true};
    for (auto& w : spec.weights) w = rng.uniform(0.01, 2.0);
    std::vector<ScoreBreakdown> pool(500);
    for (auto& s : pool) {
      s.raw = {rng.uniform(0, 1e4), rng.uniform(0, 10), rng.uniform(0, 9), rng.uniform(0, 5)};
      s.discarded = rng.uniform() < 0.01;
    }
    const int base = select_candidate(spec, pool);
    const double lambda = std::exp(rng.uniform(-10, 10));
    for (auto& w : spec.weights) w *= lambda;
    if (select_candidate(spec, pool) != base) ++changed;
  }
  return {changed == 0, std::to_string(changed) + "/100 pools changed their argmax"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kmpc acceptance run"};
  std::string config_path = "configs/pendulum.json";
  std::string out_dir = "acceptance_out";
  app.add_option("--config", config_path, "case-study configuration");
  app.add_option("--out-dir", out_dir, "where the designed artifact and report are written");
  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = load_config(config_path);
    std::filesystem::create_directories(out_dir);
    const SystemModel model = cfg.build_model();
    const TerminalDesign terminal = cfg.build_terminal();
    const OcpSpec ocp = cfg.build_ocp(terminal);
    std::cerr << "config " << config_path << ", " << worker_count() << " worker(s), K = "
              << to_string(Vector(terminal.K.row(0).transpose())) << ", alpha = " << terminal.alpha << std::endl;

    auto t0 = clock_type::now();
    report(1, "scenario bound", scenario_count(), t0);

    t0 = clock_type::now();
    report(3, "Lyapunov/Riccati", lyapunov_riccati(terminal), t0);

    t0 = clock_type::now();
    report(4, "MPC vs Riccati recursion", mpc_vs_riccati(), t0);

    t0 = clock_type::now();
    report(10, "argmax invariance", argmax_invariance(), t0);

    t0 = clock_type::now();
    std::cerr << "reference reach: " << cfg.scenario_count() << " disturbed MPC rollouts" << std::endl;
    const ReachEstimate ref = reference_reach(ocp, cfg.x0_box, cfg.disturbance, cfg.eps, cfg.omega,
                                              cfg.n_sim, cfg.seed, 0, cfg.n_samples_override);
    save_reach(ref, out_dir + "/reference.reach.json");
    std::cerr << "reference reach done in "
              << std::chrono::duration<double>(clock_type::now() - t0).count() << " s" << std::endl;

    t0 = clock_type::now();
    report(5, "reachability certificate", certificate(cfg, ocp, ref), t0);

    t0 = clock_type::now();
    const DesignRun first = run_design(cfg, terminal, ocp, ref);
    save_artifact(first.artifact, out_dir + "/controller.kmpc.json");
    save_report(first.report, out_dir + "/design_report.json");
    report(6, "design convergence", convergence(first, cfg.eps_perf), t0);

    t0 = clock_type::now();
    const double resid = training_residual(first.report.final_controller, ocp);
    report(2, "interpolation exactness",
           {resid <= 1e-5, "max |kappa~(x_i) - kappa(x_i)| = " + fmt(resid) + " over " +
                               std::to_string(first.report.final_controller.size()) + " points (<= 1e-5)"},
           t0);

    t0 = clock_type::now();
    report(7, "closed-loop behavior", closed_loop(first, cfg, model, ref), t0);

    t0 = clock_type::now();
    report(8, "speedup", speedup(first, ocp, ref, cfg.seed), t0);

    t0 = clock_type::now();
    const ReachEstimate ref2 = reference_reach(ocp, cfg.x0_box, cfg.disturbance, cfg.eps, cfg.omega,
                                               cfg.n_sim, cfg.seed, 0, cfg.n_samples_override);
    const DesignRun second = run_design(cfg, terminal, ocp, ref2);
    const bool same_ref = second.reference_text == first.reference_text;
    const bool same_art = second.artifact_text == first.artifact_text;
    const bool same_rep = second.report_text == first.report_text;
    report(9, "determinism",
           {same_ref && same_art && same_rep,
            std::string("reference ") + (same_ref ? "identical" : "differs") + ", artifact " +
                (same_art ? "identical" : "differs") + ", report " + (same_rep ? "identical" : "differs")},
           t0);
  } catch (const std::exception& e) {
    std::cout << "FAIL  aborted: " << e.what() << std::endl;
    return 1;
  }
  std::cout << (g_failed == 0 ? "all criteria passed" : std::to_string(g_failed) + " criterion/criteria failed")
            << std::endl;
  return g_failed == 0 ? 0 : 1;
}
