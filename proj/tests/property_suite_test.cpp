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

#include "kinky_mpc/property_suite.hpp"

#include <gtest/gtest.h>

#include "kinky_mpc/dataset_io.hpp"

namespace kinky_mpc::verify {
namespace {

using nlohmann::json;

TEST(RngTest, Deterministic) {
  Rng a(7), b(7), c(8);
  for (int i = 0; i < 10; ++i) {
    const std::uint64_t va = a.Next();
    EXPECT_EQ(va, b.Next());
    EXPECT_NE(va, c.Next());
  }
  Rng r(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.Uniform(-2.0, 3.0);
    EXPECT_GE(u, -2.0);
    EXPECT_LT(u, 3.0);
    const int k = r.Integer(1, 3);
    EXPECT_GE(k, 1);
    EXPECT_LE(k, 3);
  }
}

TEST(PropertySuiteTest, PassesForFixedSeed) {
  const SuiteResult result = RunPropertySuite(1, 200, 2);
  EXPECT_TRUE(result.ok()) << result.counterexample->dump(2);
  EXPECT_TRUE(result.failed.empty());
  for (const char* name : {"containment", "interpolation", "monotone_refinement",
                           "symmetry", "predict_holder", "update_bound"}) {
    EXPECT_EQ(result.passed.at(name), 200) << name;
  }
  EXPECT_GT(result.passed.size(), 6u);  // solver checks are counted too
}

TEST(PropertySuiteTest, ThreadCountDoesNotChangeResult) {
  const SuiteResult one = RunPropertySuite(42, 60, 1);
  const SuiteResult four = RunPropertySuite(42, 60, 4);
  EXPECT_EQ(one.passed, four.passed);
  EXPECT_EQ(one.failed, four.failed);
  EXPECT_EQ(one.counterexample.has_value(), four.counterexample.has_value());
}

TEST(PropertySuiteTest, RejectsEmptyRun) {
  EXPECT_THROW(RunPropertySuite(1, 0, 1), InputError);
}

TEST(PropertySuiteTest, GridOracleAgreesWithSolver) {
  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    const LinearInstance inst = MakeLinearInstance(rng);
    const double grid = GridSearchValue(inst);
    const OcpSolution sol = Solve(inst.ToProblem(), inst.x0);
    EXPECT_LE(sol.value, grid + 1e-6 * (1.0 + grid));
  }
}

TEST(VerifyDatasetTest, ConsistentDatasetPasses) {
  KinkyModel model(HolderSpec{2.0, 1.0, Norm::kEuclidean}, 1, 1);
  model = model.Observe(Observation{Eigen::VectorXd::Constant(1, 1.0),
                                    Eigen::VectorXd::Constant(1, 1.5)});
  const SuiteResult result = VerifyDataset(DatasetToJson(model));
  EXPECT_TRUE(result.ok());
}

TEST(VerifyDatasetTest, ViolationNamesThePair) {
  json dataset = {{"q", 1.0},
                  {"lambda", 1.0},
                  {"norm", "euclidean"},
                  {"d_in", 1},
                  {"d_out", 1},
                  {"data",
                   {{{"z", {0.0}}, {"y", {0.0}}},
                    {{"z", {1.0}}, {"y", {0.5}}},
                    {{"z", {2.0}}, {"y", {3.0}}}}}};
  const SuiteResult result = VerifyDataset(dataset);
  ASSERT_FALSE(result.ok());
  const json& ce = *result.counterexample;
  EXPECT_EQ(ce["property"], "holder_consistency");
  // The first offending pair in scan order is reported.
  EXPECT_EQ(ce["details"]["pair"], json::array({0, 2}));
  EXPECT_NEAR(ce["details"]["implied_q"].get<double>(), 1.5, 1e-12);
}

}  // namespace
}  // namespace kinky_mpc::verify
