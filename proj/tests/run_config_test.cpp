// Copyright 2026 The kinky-mpc Authors
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

#include "kinky_mpc/run_config.hpp"

#include <gtest/gtest.h>

namespace kinky_mpc {
namespace {

using nlohmann::json;

TEST(RunConfigTest, PresetMatchesExample) {
  const RunConfig rc = BuildRunConfig(ExamplePreset());
  EXPECT_EQ(rc.sim.x0, Eigen::Vector2d(3.0, 0.0));
  EXPECT_EQ(rc.sim.horizon, 10);
  EXPECT_EQ(rc.sim.steps, 50);
  EXPECT_EQ(rc.sim.holder.q, 1.5);
  EXPECT_EQ(rc.sim.holder.lambda, 1.0);
  EXPECT_EQ(rc.sim.holder.norm, Norm::kEuclidean);
  EXPECT_EQ(rc.sim.feature, FeatureKind::kFirstState);
  ASSERT_EQ(rc.sim.selector.size(), 1u);
  EXPECT_EQ(rc.sim.selector[0], 1);
  EXPECT_TRUE(rc.sim.cost.q.isIdentity());
  EXPECT_EQ(rc.sim.cost.r(0, 0), 1.0);
  EXPECT_EQ(rc.sim.input_box.lo[0], -2.0);
  EXPECT_EQ(rc.sim.input_box.hi[0], 2.0);
  EXPECT_TRUE(rc.sim.learning_enabled);
  EXPECT_TRUE(rc.horizon_is_default);
  EXPECT_EQ(PresetDocument("paper_example"), ExamplePreset());
  EXPECT_THROW(PresetDocument("nope"), ConfigError);
}

TEST(RunConfigTest, MissingKeysTakeDefaults) {
  const json doc = CompleteConfig(json{{"ocp", {{"N", 15}}}});
  EXPECT_EQ(doc["ocp"]["N"], 15);
  EXPECT_EQ(doc["sim"]["T"], 50);
  const RunConfig rc = BuildRunConfig(doc);
  EXPECT_EQ(rc.sim.horizon, 15);
  EXPECT_FALSE(rc.horizon_is_default);
}

TEST(RunConfigTest, UnknownKeysAreRejected) {
  EXPECT_THROW(CompleteConfig(json{{"ocpp", json::object()}}), ConfigError);
  EXPECT_THROW(CompleteConfig(json{{"ocp", {{"horizon", 4}}}}), ConfigError);
  EXPECT_THROW(CompleteConfig(json{{"sim", 3}}), ConfigError);
}

TEST(RunConfigTest, MalformedTextIsConfigError) {
  EXPECT_THROW(ParseConfigText("{\"ocp\": {\"N\": }"), ConfigError);
  EXPECT_THROW(ParseConfigText("[1, 2]"), ConfigError);
  EXPECT_EQ(ParseConfigText("{}"), ExamplePreset());
}

TEST(RunConfigTest, OverridesParseJsonValues) {
  json doc = ExamplePreset();
  ApplyOverride(doc, "sim.learning=false");
  ApplyOverride(doc, "ocp.N=20");
  ApplyOverride(doc, "sim.x0=[1,-1]");
  ApplyOverride(doc, "learner.norm=chebyshev");
  EXPECT_EQ(doc["sim"]["learning"], false);
  EXPECT_EQ(doc["ocp"]["N"], 20);
  EXPECT_EQ(doc["sim"]["x0"], json::array({1, -1}));
  const RunConfig rc = BuildRunConfig(doc);
  EXPECT_FALSE(rc.sim.learning_enabled);
  EXPECT_EQ(rc.sim.holder.norm, Norm::kChebyshev);
  EXPECT_THROW(ApplyOverride(doc, "sim.learning"), ConfigError);
  EXPECT_THROW(ApplyOverride(doc, "sim.nothing=1"), ConfigError);
  EXPECT_THROW(ApplyOverride(doc, "=1"), ConfigError);
}

TEST(RunConfigTest, InvalidValuesAreConfigErrors) {
  const auto bad = [](const std::string& assignment) {
    json doc = ExamplePreset();
    ApplyOverride(doc, assignment);
    EXPECT_THROW(BuildRunConfig(doc), ConfigError) << assignment;
  };
  bad("learner.selector=[3]");
  bad("learner.selector=[0]");
  bad("learner.selector=[]");
  bad("learner.q=-1");
  bad("learner.lambda=1.5");
  bad("learner.feature=\"x3\"");
  bad("ocp.N=0");
  bad("ocp.N=2.5");
  bad("ocp.Q=[1,2,0,1]");
  bad("ocp.R=[0]");
  bad("ocp.u_lo=[1]");
  bad("sim.T=0");
  bad("sim.x0=[1]");
  bad("sim.learning=1");
  bad("plant.name=\"pendulum\"");
}

TEST(RunConfigTest, LinearPlantFromConfig) {
  json doc = ExamplePreset();
  ApplyOverride(doc, "plant.name=linear");
  ApplyOverride(doc, "plant.params={\"A\":[1,0.1,0,1],\"B\":[0,0.1]}");
  ApplyOverride(doc, "learner.feature=full");
  ApplyOverride(doc, "sim.c_box=[[-1,4],[-2,2],[-2,2]]");
  ApplyOverride(doc, "sim.c_grid=8");
  const RunConfig rc = BuildRunConfig(doc);
  EXPECT_EQ(rc.sim.feature, FeatureKind::kFull);
  const Eigen::Vector2d next =
      rc.sim.plant.plant->Step(Eigen::Vector2d(1, 1), Eigen::VectorXd::Ones(1));
  EXPECT_NEAR(next[0], 1.1, 1e-15);
  EXPECT_NEAR(next[1], 1.1, 1e-15);
}

}  // namespace
}  // namespace kinky_mpc
