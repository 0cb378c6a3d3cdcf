// Copyright 2026 The cbfform Authors
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

#include <filesystem>
#include <fstream>
#include <functional>

#include <gtest/gtest.h>

#include "cbf/errors.hpp"
#include "cbf/scenario.hpp"

namespace cbf {
namespace {

const char* kTwoAgent = R"({
  "label": "t",
  "formation": {
    "n": 2, "r": 0.5,
    "leader": {"type": "constant", "position": [0, 0, 0]},
    "edges": [{"c": 2.0, "g_star": [1, 0, 0], "omega_star": {"type": "zero"}}]
  },
  "controller": {"variant": "centralized", "followers": [{"k_p": 10, "k_v": 7, "k_o": 7}]},
  "sim": {"dt": 0.01, "t_end": 5},
  "initial": {"positions": [[0, 0, 0], [-2, 0.4, 0]], "velocities": [[0, 0, 0], [0, 0, 0]]}
})";

std::vector<std::string> problemsOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
  for (const auto& p : problems) {
    if (p.find(needle) != std::string::npos) return true;
  }
  return false;
}

TEST(Preset, FourAgentParameters) {
  const Scenario s = preset("paper-4agent");
  ASSERT_EQ(s.formation.n, 4);
  const auto& g = s.controller.gains;
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[0].kp, 10.0);
  EXPECT_EQ(g[1].kp, 14.0);
  EXPECT_EQ(g[2].kp, 16.0);
  EXPECT_EQ(g[0].kv, 7.0);
  EXPECT_EQ(g[1].kv, 11.0);
  EXPECT_EQ(g[2].kv, 12.0);
  EXPECT_EQ(g[0].ko, 7.0);
  EXPECT_EQ(g[1].ko, 11.0);
  EXPECT_EQ(g[2].ko, 12.0);
  EXPECT_EQ(s.initial.agents[0].v, Vec3(0, 0, 0));
  EXPECT_EQ(s.initial.agents[1].v, Vec3(0.2, 0, 0));
  EXPECT_EQ(s.initial.agents[2].v, Vec3(-0.2, 0, 0));
  EXPECT_EQ(s.initial.agents[3].v, Vec3(0, -1, 0));
  EXPECT_EQ(s.sim.tEnd, 30.0);
  EXPECT_THROW(preset("nope"), ValidationError);
}

TEST(Scenario, ParsesMinimalFileWithDefaults) {
  const Scenario s = parseScenario(kTwoAgent);
  EXPECT_EQ(s.formation.n, 2);
  EXPECT_EQ(s.controller.variant, NominalVariant::Centralized);
  EXPECT_EQ(s.controller.gains[0].hp.eta, 1.0);
  EXPECT_EQ(s.sim.integrator, Integrator::Rk4);
  EXPECT_EQ(s.sim.recordStride, 1);
}

TEST(Scenario, EdgeNotLongerThanRadiusIsRejected) {
  Scenario s = preset("two-agent");
  s.formation.edges[0].c = 0.5;
  EXPECT_TRUE(mentions(problemsOf([&] { s.validate(); }), "edges[0].c"));
}

TEST(Scenario, OverlappingStartIsRejected) {
  Scenario s = preset("two-agent");
  s.initial.agents[1].p = Vec3(0.3, 0, 0);
  EXPECT_TRUE(mentions(problemsOf([&] { s.validate(); }), "d(0)"));
}

TEST(Scenario, EveryViolationIsListed) {
  nlohmann::json j = nlohmann::json::parse(kTwoAgent);
  j["formation"]["edges"][0]["c"] = 0.1;
  j["controller"]["followers"][0]["k_p"] = -1;
  j["sim"]["dt"] = 0;
  j["initial"]["positions"][1] = {0.1, 0, 0};
  const auto problems = problemsOf([&] { scenarioFromJson(j); });
  EXPECT_GE(problems.size(), 4u);
  EXPECT_TRUE(mentions(problems, "controller"));
  EXPECT_TRUE(mentions(problems, "sim"));
}

TEST(Scenario, StructuralErrorsCarryJsonPath) {
  nlohmann::json j = nlohmann::json::parse(kTwoAgent);
  j["formation"]["edges"][0]["g_star"] = {1, 0};
  j["formation"]["leader"]["type"] = "teleport";
  j["controller"].erase("followers");
  const auto problems = problemsOf([&] { scenarioFromJson(j); });
  EXPECT_TRUE(mentions(problems, "formation.edges[0].g_star"));
  EXPECT_TRUE(mentions(problems, "formation.leader.type"));
  EXPECT_TRUE(mentions(problems, "controller.followers"));
}

TEST(Scenario, ParseErrorReportsLineAndColumn) {
  const std::string bad = "{\n  \"label\": \"x\",\n  \"formation\": {\n    \"n\": 2,,\n  }\n}";
  try {
    parseScenario(bad, "bad.json");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.json:4:"), std::string::npos) << e.what();
  }
}

TEST(Scenario, RoundTripPresets) {
  for (const auto& name : presetNames()) {
    const Scenario a = preset(name);
    const Scenario b = parseScenario(toJson(a).dump());
    EXPECT_TRUE(a == b) << name;
    EXPECT_EQ(toJson(a).dump(), toJson(b).dump());
  }
}

TEST(Scenario, RoundTripEveryLeaderAndSignalFamily) {
  Scenario s = preset("rotating-4agent");
  LeaderTrajectory::Sampled smp;
  smp.dt = 0.25;
  for (int k = 0; k < 6; ++k) smp.points.emplace_back(0.1 * k, 0.2 * k * k, 0.0);
  s.formation.leader = LeaderTrajectory(smp);
  s.initial.agents[0] = {s.formation.leader.position(0.0), s.formation.leader.velocity(0.0)};
  s.formation.edges[2].omega =
      OmegaSignal(OmegaSignal::PiecewiseConstant{{1.0, 2.0}, {Vec3(0, 0, 0.1), Vec3(0.2, 0, 0), Vec3::Zero()}});
  s.sim.integrator = Integrator::Rk45Adaptive;
  s.sim.recordStride = 3;
  s.validate();
  const Scenario back = parseScenario(toJson(s).dump(2));
  EXPECT_TRUE(s == back);

  s.formation.leader =
      LeaderTrajectory(LeaderTrajectory::ConstantAcceleration{Vec3::Zero(), Vec3(0.1, 0, 0), Vec3(0, 0.05, 0)});
  s.initial.agents[0] = {Vec3::Zero(), Vec3(0.1, 0, 0)};
  s.validate();
  EXPECT_TRUE(s == parseScenario(toJson(s).dump()));
}

TEST(Scenario, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "cbf_scenario_test.json";
  {
    std::ofstream f(path);
    f << toJson(preset("paper-4agent")).dump(2);
  }
  EXPECT_TRUE(loadScenario(path) == preset("paper-4agent"));
  std::filesystem::remove(path);
  EXPECT_THROW(loadScenario(path), ParseError);
}

TEST(Scenario, LeaderMustStartOnTrajectory) {
  Scenario s = preset("two-agent");
  s.initial.agents[0].p = Vec3(0.1, 0, 0);
  EXPECT_TRUE(mentions(problemsOf([&] { s.validate(); }), "leader"));
}

TEST(Override, GainsPerFollowerAndGlobal) {
  Scenario s = preset("paper-4agent");
  applyOverride(s, "k_p_3=20");
  EXPECT_EQ(s.controller.gains[1].kp, 20.0);
  EXPECT_EQ(s.controller.gains[0].kp, 10.0);
  applyOverride(s, "k_o=0");
  for (const auto& g : s.controller.gains) EXPECT_EQ(g.ko, 0.0);
  applyOverride(s, "eta_v_4=2");
  EXPECT_EQ(s.controller.gains[2].hv.eta, 2.0);
}

TEST(Override, StateAndSimKeys) {
  Scenario s = preset("two-agent");
  applyOverride(s, "p2y=1.25");
  applyOverride(s, "v2z=-0.5");
  applyOverride(s, "dt=0.005");
  applyOverride(s, "integrator=rk45-adaptive");
  applyOverride(s, "variant=distributed");
  applyOverride(s, "c_2=1.5");
  applyOverride(s, "label=x");
  EXPECT_EQ(s.initial.agents[1].p.y(), 1.25);
  EXPECT_EQ(s.initial.agents[1].v.z(), -0.5);
  EXPECT_EQ(s.sim.dt, 0.005);
  EXPECT_EQ(s.sim.integrator, Integrator::Rk45Adaptive);
  EXPECT_EQ(s.controller.variant, NominalVariant::Distributed);
  EXPECT_EQ(s.formation.edges[0].c, 1.5);
  EXPECT_EQ(s.label, "x");
}

TEST(Override, RejectsUnknownMalformedAndInvalid) {
  Scenario s = preset("two-agent");
  EXPECT_THROW(applyOverride(s, "gain=3"), ValidationError);
  EXPECT_THROW(applyOverride(s, "k_p"), ValidationError);
  EXPECT_THROW(applyOverride(s, "k_p=abc"), ValidationError);
  EXPECT_THROW(applyOverride(s, "k_p_3=1"), ValidationError);
  EXPECT_THROW(applyOverride(s, "p7x=1"), ValidationError);
  EXPECT_THROW(applyOverride(s, "record_stride=2.5"), ValidationError);
  EXPECT_THROW(applyOverride(s, "c_2=0.4"), ValidationError);
}

TEST(Metadata, CarriesRequiredKeys) {
  Scenario s = preset("paper-4agent");
  applyOverride(s, "k_o=0");
  const auto rec = run(s.initial, s.formation, s.controller, s.sim);
  const auto j = runMetadata(s, rec, 0.5);
  for (const char* key : {"scenario_label", "termination", "min_d", "max_abs_phi", "wall_time_s", "config_echo"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["termination"], "barrier_violation");
  EXPECT_TRUE(j.contains("violation_time"));
  EXPECT_TRUE(scenarioFromJson(j["config_echo"]) == s);
}

}  // namespace
}  // namespace cbf
