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

#include "kinky_mpc/dynamics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace kinky_mpc {
namespace {

using Eigen::VectorXd;

VectorXd Vec2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}
VectorXd Vec1(double a) { return VectorXd::Constant(1, a); }

CompositeModel ExampleModel(const ExamplePlant& plant) {
  return CompositeModel(plant.KnownPart(), 2, 1, FeatureKind::kFirstState,
                        {1}, KinkyModel(HolderSpec{1.5, 1.0}, 1, 1));
}

TEST(ExamplePlantTest, OriginIsEquilibrium) {
  const ExamplePlant plant;
  EXPECT_EQ(plant.Step(Vec2(0, 0), Vec1(0)), Vec2(0, 0));
}

TEST(ExamplePlantTest, FirstTransitionsOfTheExample) {
  const ExamplePlant plant;
  const VectorXd saturated = plant.Step(Vec2(3, 0), Vec1(-2));
  EXPECT_EQ(saturated[0], 3.0);
  EXPECT_NEAR(saturated[1], -0.665574915091165, 1e-6);  // published figure
  EXPECT_DOUBLE_EQ(saturated[1], -0.8 + 2.7 * std::exp(-3.0));

  const VectorXd idle = plant.Step(Vec2(3, 0), Vec1(0));
  EXPECT_EQ(idle[0], 3.0);
  EXPECT_NEAR(idle[1], 0.134425085, 1e-9);
}

TEST(ExamplePlantTest, AffineInVelocityAndInputForFixedPosition) {
  const ExamplePlant plant;
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const double x1 = dist(gen), x2 = dist(gen), u = dist(gen);
    Eigen::Matrix2d a;
    a << 1.0, 0.4, 0.0, 0.56 + 0.1 * x1;
    const Eigen::Vector2d b(0.0, 0.4);
    const Eigen::Vector2d g(0.0, 0.9 * x1 * std::exp(-x1));
    const Eigen::Vector2d expected = a * Eigen::Vector2d(x1, x2) + b * u + g;
    const VectorXd next = plant.Step(Vec2(x1, x2), Vec1(u));
    EXPECT_NEAR(next[0], expected[0], 1e-14);
    EXPECT_NEAR(next[1], expected[1], 1e-14);
  }
}

TEST(ExamplePlantTest, RejectsBadInputs) {
  const ExamplePlant plant;
  EXPECT_THROW(plant.Step(Vec1(0), Vec1(0)), InputError);
  EXPECT_THROW(plant.Step(Vec2(-1000, 1), Vec1(0)), NumericError);
}

TEST(CompositeModelTest, EmptyLearnerIsKnownPart) {
  const ExamplePlant plant;
  const CompositeModel model = ExampleModel(plant);
  EXPECT_EQ(model.Step(Vec2(3, 0), Vec1(-2)), Vec2(3.0, -0.8));
  EXPECT_EQ(model.Step(Vec2(0, 0), Vec1(0)), Vec2(0, 0));
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const VectorXd x = Vec2(dist(gen), dist(gen));
    const VectorXd u = Vec1(dist(gen));
    EXPECT_EQ(model.Step(x, u), model.Known(x, u));
  }
}

TEST(CompositeModelTest, ReproducesPlantAfterObservingTransition) {
  const ExamplePlant plant;
  CompositeModel model = ExampleModel(plant);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> dist(0.0, 3.0);
  for (int i = 0; i < 20; ++i) {
    const VectorXd x = Vec2(dist(gen), dist(gen) - 1.5);
    const VectorXd u = Vec1(dist(gen) - 1.5);
    const VectorXd next = plant.Step(x, u);
    const VectorXd target =
        ResidualTarget(next, model.Known(x, u), model.selector());
    model = model.WithResidual(
        model.residual().Observe({model.Feature(x, u), target}));
    EXPECT_NEAR((model.Step(x, u) - next).lpNorm<Eigen::Infinity>(), 0.0,
                1e-12);
  }
}

TEST(CompositeModelTest, LearnedResidualAtFirstExampleState) {
  const ExamplePlant plant;
  const CompositeModel model = ExampleModel(plant);
  const CompositeModel learned = model.WithResidual(
      model.residual().Observe({Vec1(3.0), Vec1(0.134425085)}));
  const VectorXd next = learned.Step(Vec2(3, 0), Vec1(-2));
  EXPECT_EQ(next[0], 3.0);
  EXPECT_NEAR(next[1], -0.665575, 1e-6);
  EXPECT_EQ(learned.Step(Vec2(0, 0), Vec1(0)), Vec2(0, 0));
}

TEST(CompositeModelTest, ValidatesShapes) {
  const ExamplePlant plant;
  const KinkyModel learner(HolderSpec{}, 1, 1);
  EXPECT_THROW(CompositeModel(plant.KnownPart(), 2, 1, FeatureKind::kFull, {1},
                              learner),
               InputError);
  EXPECT_THROW(CompositeModel(plant.KnownPart(), 2, 1,
                              FeatureKind::kFirstState, {2}, learner),
               InputError);
  EXPECT_THROW(CompositeModel(plant.KnownPart(), 2, 1,
                              FeatureKind::kFirstState, {0, 1}, learner),
               InputError);
  const CompositeModel full(plant.KnownPart(), 2, 1, FeatureKind::kFull,
                            {0, 1}, KinkyModel(HolderSpec{}, 3, 2));
  EXPECT_EQ(full.Feature(Vec2(1, 2), Vec1(3)).size(), 3);
}

TEST(ResidualTargetTest, SelectsDifferences) {
  EXPECT_NEAR(ResidualTarget(Vec2(3, -0.665575), Vec2(3, -0.8), {1})[0],
              0.134425, 1e-12);
  EXPECT_EQ(ResidualTarget(Vec2(1, 2), Vec2(1, 2), {0, 1}), Vec2(0, 0));
  EXPECT_EQ(ResidualTarget(Vec2(1, 5), Vec2(0.5, 2), {0, 1}), Vec2(0.5, 3));
  EXPECT_THROW(ResidualTarget(Vec2(1, 2), Vec1(1), {0}), InputError);
}

TEST(PlantRegistryTest, BuildsNamedPlants) {
  const PlantSetup example = MakePlant("example_2d", nullptr);
  EXPECT_EQ(example.plant->state_dim(), 2);
  EXPECT_EQ(example.known(Vec2(3, 0), Vec1(-2)), Vec2(3.0, -0.8));

  const PlantSetup tuned =
      MakePlant("example_2d", {{"g_gain", 0.0}, {"b2", 1.0}});
  EXPECT_EQ(tuned.plant->Step(Vec2(3, 0), Vec1(-2)), Vec2(3.0, -2.0));

  const PlantSetup linear =
      MakePlant("linear", {{"A", {1.0, 0.5, 0.0, 1.0}}, {"B", {0.0, 1.0}}});
  EXPECT_EQ(linear.plant->input_dim(), 1);
  EXPECT_EQ(linear.plant->Step(Vec2(1, 2), Vec1(1)), Vec2(2, 3));
  EXPECT_EQ(linear.known(Vec2(1, 2), Vec1(1)), Vec2(2, 3));

  EXPECT_THROW(MakePlant("pendulum", nullptr), InputError);
  EXPECT_THROW(MakePlant("example_2d", {{"mass", 1.0}}), InputError);
  EXPECT_THROW(MakePlant("linear", {{"A", {1.0, 2.0}}, {"B", {1.0}}}),
               InputError);
}

}  // namespace
}  // namespace kinky_mpc
