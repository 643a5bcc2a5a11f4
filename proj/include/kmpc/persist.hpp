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

#include "kmpc/config.hpp"
#include "kmpc/design.hpp"
#include "kmpc/kernel.hpp"
#include "kmpc/reach.hpp"
#include "kmpc/terminal.hpp"

namespace kmpc {

inline constexpr int kArtifactSchemaVersion = 1;

struct OcpSummary {
  int horizon = 0;
  int n_sim = 0;
  Matrix Q;
  Matrix R;
  Box x_con;
  Box u_con;
  Box x_tighten;
  Box u_tighten;
};

struct Provenance {
  std::uint64_t seed = 0;
  std::string tool_version;
  // ISO 8601 from SOURCE_DATE_EPOCH; empty when unset so reruns match byte for byte.
  std::string created;
};

struct ControllerArtifact {
  int schema_version = kArtifactSchemaVersion;
  KernelInterpolant controller;
  TerminalDesign terminal;
  OcpSummary ocp;
  Provenance provenance;
};

OcpSummary summarize_ocp(const RunConfig& config);
Provenance make_provenance(std::uint64_t seed);
const char* tool_version();

std::string serialize_artifact(const ControllerArtifact& artifact);
/// Rejects unknown schema versions, malformed fields and coefficients that
/// fail the Gram residual recheck. `source` labels diagnostics.
ControllerArtifact deserialize_artifact(const std::string& text, const std::string& source);
void save_artifact(const ControllerArtifact& artifact, const std::string& path);
ControllerArtifact load_artifact(const std::string& path);

/// Certificate file: hulls, certificate level and sampling metadata.
std::string serialize_reach(const ReachEstimate& estimate);
ReachEstimate deserialize_reach(const std::string& text, const std::string& source);
void save_reach(const ReachEstimate& estimate, const std::string& path);
ReachEstimate load_reach(const std::string& path);

std::string serialize_report(const DesignReport& report);
void save_report(const DesignReport& report, const std::string& path);

/// Verdict of a verification run with its hulls.
std::string serialize_verdict(const Verdict& verdict, const ReachEstimate& estimate, double eps_perf,
                              bool inside_reference);

}  // namespace kmpc
