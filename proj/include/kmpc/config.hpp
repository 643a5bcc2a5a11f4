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

#include "kmpc/design.hpp"
#include "kmpc/kernel.hpp"
#include "kmpc/model.hpp"
#include "kmpc/mpc.hpp"
#include "kmpc/terminal.hpp"

namespace kmpc {

/// Everything a run needs. Defaults are the pendulum case study.
struct RunConfig {
  PendulumParams model;

  int horizon = 30;
  int n_sim = 60;
  Matrix Q = Matrix{{10.0, 0.0}, {0.0, 1.0}};
  Matrix R = Matrix{{1.0}};
  Matrix delta_q = Matrix::Identity(2, 2);
  Box x_tighten{Vector::Zero(2), Vector::Zero(2)};
  Box u_tighten{Vector{{-0.5}}, Vector{{0.5}}};
  SqpOptions sqp;
  TerminalSizingOptions terminal;

  KernelSpec kernel{KernelFamily::NeuralNetwork, 4.0, Vector{{1.0, 5.0, 5.0}}};
  double ridge = 1e-8;
  ScoreSpec score;

  double eps = 1e-2;
  double omega = 1e-5;
  std::uint64_t seed = 1;
  Box x0_box{Vector{{-3.5342917352885173, -0.1}}, Vector{{-2.748893571891069, 0.1}}};
  Box disturbance{Vector{{-0.5}}, Vector{{0.5}}};
  std::uint64_t n_samples_override = 0;

  double eps_perf = 4.0;
  int pool_size = 500;
  int max_iters = 20;
  int verify_every = 1;

  std::string out_dir = "out";

  /// Throws Error(InvalidArgument) naming the offending field.
  void validate() const;

  SystemModel build_model() const;
  TerminalDesign build_terminal() const;
  OcpSpec build_ocp(const TerminalDesign& terminal) const;
  DesignOptions design_options() const;
  std::uint64_t scenario_count() const;
};

/// Parses and validates a JSON config. Unknown keys are rejected. `source`
/// labels diagnostics.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Canonical JSON of the full resolved config.
std::string config_to_json(const RunConfig& config);

}  // namespace kmpc
