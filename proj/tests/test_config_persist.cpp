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

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "kmpc/config.hpp"
#include "kmpc/persist.hpp"
#include "kmpc/rng.hpp"

namespace kmpc {
namespace {

std::string error_of(const std::function<void()>& f, ErrorCode expected) {
  try {
    f();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), expected) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "no error thrown";
  return {};
}

ControllerArtifact sample_artifact() {
  const RunConfig cfg;
  Rng rng(21);
  Matrix X(12, 2), Y(12, 1);
  for (int i = 0; i < 12; ++i) {
    X(i, 0) = rng.uniform(-4, 0.5);
    X(i, 1) = rng.uniform(-3, 4);
    Y(i, 0) = rng.uniform(-4.5, 4.5);
  }
  ControllerArtifact a;
  a.controller = KernelInterpolant::fit(cfg.kernel, X, Y, cfg.ridge);
  a.terminal = cfg.build_terminal();
  a.ocp = summarize_ocp(cfg);
  a.provenance = make_provenance(cfg.seed);
  return a;
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = std::filesystem::temp_directory_path() /
          ("kmpc_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
           ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir);
  }
  void TearDown() override { std::filesystem::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  std::filesystem::path dir;
};

using Artifact = TempDir;

TEST_F(Artifact, RoundTripPredictsIdentically) {
  const ControllerArtifact a = sample_artifact();
  save_artifact(a, path("c.json"));
  const ControllerArtifact b = load_artifact(path("c.json"));
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Vector x{{rng.uniform(-5, 1), rng.uniform(-4, 5)}};
    ASSERT_EQ(a.controller.predict(x), b.controller.predict(x));
  }
  EXPECT_EQ(b.terminal.K, a.terminal.K);
  EXPECT_EQ(b.terminal.P, a.terminal.P);
  EXPECT_EQ(b.terminal.alpha, a.terminal.alpha);
  EXPECT_EQ(b.ocp.horizon, 30);
  EXPECT_EQ(b.provenance.seed, 1u);
  EXPECT_EQ(serialize_artifact(b), serialize_artifact(a));
}

TEST_F(Artifact, SerializationIsCanonical) {
  const std::string s = serialize_artifact(sample_artifact());
  EXPECT_EQ(s, serialize_artifact(sample_artifact()));
  EXPECT_EQ(s.back(), '\n');
  const auto doc = nlohmann::json::parse(s);
  EXPECT_EQ(doc.at("schema_version"), kArtifactSchemaVersion);
  // Keys appear in sorted order.
  std::vector<std::string> keys;
  for (auto it = doc.begin(); it != doc.end(); ++it) keys.push_back(it.key());
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
}

TEST_F(Artifact, TruncatedFileReportsPosition) {
  const std::string s = serialize_artifact(sample_artifact());
  {
    std::ofstream out(path("t.json"));
    out << s.substr(0, s.size() / 2);
  }
  const std::string msg = error_of([&] { load_artifact(path("t.json")); }, ErrorCode::Parse);
  EXPECT_NE(msg.find("byte"), std::string::npos);
  EXPECT_NE(msg.find("t.json"), std::string::npos);
}

TEST_F(Artifact, UnknownSchemaVersionGivesHint) {
  auto doc = nlohmann::json::parse(serialize_artifact(sample_artifact()));
  doc["schema_version"] = 99;
  const std::string msg =
      error_of([&] { deserialize_artifact(doc.dump(), "x.json"); }, ErrorCode::Schema);
  EXPECT_NE(msg.find("99"), std::string::npos);
}

TEST_F(Artifact, CorruptedCoefficientsRejected) {
  auto doc = nlohmann::json::parse(serialize_artifact(sample_artifact()));
  auto& c = doc["coefficients"][4][0];
  c = c.get<double>() * 1.01 + 0.01;
  error_of([&] { deserialize_artifact(doc.dump(), "x.json"); }, ErrorCode::Schema);
}

TEST_F(Artifact, MissingFieldNamed) {
  auto doc = nlohmann::json::parse(serialize_artifact(sample_artifact()));
  doc.erase("ridge");
  const std::string msg =
      error_of([&] { deserialize_artifact(doc.dump(), "x.json"); }, ErrorCode::Schema);
  EXPECT_NE(msg.find("ridge"), std::string::npos);
}

TEST_F(Artifact, MissingFileIsIoError) {
  error_of([&] { load_artifact(path("absent.json")); }, ErrorCode::Io);
}

using ReachFile = TempDir;

TEST_F(ReachFile, RoundTrip) {
  ReachEstimate e;
  e.per_step_hulls = {Box{Vector{{-1.0, -2.0}}, Vector{{1.0, 2.0}}},
                      Box{Vector{{-0.5, 0.1}}, Vector{{0.25, 0.3}}}};
  e.input_hull = Box{Vector{{-4.5}}, Vector{{4.5}}};
  e.perf_hull = Box{Vector{{0.0}}, Vector{{3.5}}};
  e.rel_perf_hull = Box{Vector{{0.0}}, Vector{{0.01}}};
  e.perf_mean = 0.123456789012345678;
  e.certificate = {1e-2, 1e-5, 2455};
  e.seed = 7;
  e.n_sim = 1;
  e.disturbance = Box{Vector{{-0.5}}, Vector{{0.5}}};
  e.perf_failures = 3;
  save_reach(e, path("r.json"));
  const ReachEstimate f = load_reach(path("r.json"));
  EXPECT_EQ(f.per_step_hulls, e.per_step_hulls);
  EXPECT_EQ(f.input_hull, e.input_hull);
  EXPECT_EQ(f.perf_hull, e.perf_hull);
  EXPECT_EQ(f.perf_mean, e.perf_mean);
  EXPECT_EQ(f.certificate.n_samples, 2455u);
  EXPECT_EQ(f.perf_failures, 3u);
  EXPECT_EQ(serialize_reach(f), serialize_reach(e));
}

TEST(Config, DefaultsMatchCaseStudy) {
  const RunConfig c = parse_config("{}");
  EXPECT_EQ(c.scenario_count(), 2455u);
  EXPECT_EQ(c.horizon, 30);
  EXPECT_EQ(c.n_sim, 60);
  EXPECT_EQ(c.eps_perf, 4.0);
  EXPECT_EQ(c.pool_size, 500);
}

TEST(Config, ErrorsNameTheField) {
  std::string msg =
      error_of([] { parse_config(R"({"reach": {"omega": 1.5}})"); }, ErrorCode::InvalidArgument);
  EXPECT_NE(msg.find("reach.omega"), std::string::npos);
  msg = error_of([] { parse_config(R"({"ocp": {"horizon": 0}})"); }, ErrorCode::InvalidArgument);
  EXPECT_NE(msg.find("horizon"), std::string::npos);
  msg = error_of([] { parse_config(R"({"model": {"mass": -1}})"); }, ErrorCode::InvalidArgument);
  EXPECT_NE(msg.find("mass"), std::string::npos);
  msg = error_of([] { parse_config(R"({"kernel": {"bogus": 1}})"); }, ErrorCode::InvalidArgument);
  EXPECT_NE(msg.find("bogus"), std::string::npos);
  msg = error_of([] { parse_config(R"({"reach": {"eps": "x"}})"); }, ErrorCode::InvalidArgument);
  EXPECT_NE(msg.find("reach.eps"), std::string::npos);
  error_of([] { parse_config("{"); }, ErrorCode::Parse);
  msg = error_of([] { parse_config(R"({"reach": {"disturbance": {"lb": [-0.2], "ub": [0.2]}}})"); },
                 ErrorCode::InvalidArgument);
  EXPECT_NE(msg.find("disturbance"), std::string::npos);
}

TEST(Config, JsonRoundTrip) {
  RunConfig c;
  c.seed = 42;
  c.eps_perf = 2.5;
  c.score.active[3] = true;
  c.score.weights[3] = 0.3;
  c.kernel.scales = Vector{{2.0, 3.0, 4.0}};
  const std::string s = config_to_json(c);
  const RunConfig d = parse_config(s);
  EXPECT_EQ(d.seed, 42u);
  EXPECT_EQ(d.eps_perf, 2.5);
  EXPECT_TRUE(d.score.active[3]);
  EXPECT_EQ(d.kernel.scales, c.kernel.scales);
  EXPECT_EQ(config_to_json(d), s);
}

}  // namespace
}  // namespace kmpc
