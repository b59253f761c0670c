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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kinky_mpc/kinky_model.hpp"
#include "kinky_mpc/ocp_solver.hpp"

namespace kinky_mpc::verify {

/// Portable deterministic generator (splitmix64).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t Next();
  /// Uniform in [lo, hi).
  double Uniform(double lo, double hi);
  /// Uniform integer in [lo, hi].
  int Integer(int lo, int hi);

 private:
  std::uint64_t state_;
};

/// Ground truth g(z) = min_k (a_k + s‖z − c_k‖^λ) − g(0) per output, which is
/// Hölder with constant s ≤ q and vanishes at the origin.
struct GroundTruth {
  HolderSpec spec;  // uses the truth slope s as q
  std::vector<std::vector<Eigen::VectorXd>> centers;  // [output][anchor]
  std::vector<std::vector<double>> offsets;
  Eigen::VectorXd shift;

  Eigen::VectorXd operator()(const Eigen::VectorXd& z) const;
};

struct HolderInstance {
  GroundTruth truth;
  KinkyModel model;       // seeded at the origin plus sampled data
  Observation next;       // a further sample for update checks
  double domain = 2.0;    // data drawn from [-domain, domain]^d_in
};

HolderInstance MakeHolderInstance(Rng& rng);

/// Slack of the spec-level property checks.
inline constexpr double kPropertySlack = 1e-9;
/// Slack of the update bound and containment.
inline constexpr double kTightSlack = 1e-12;

struct PropertyFailure {
  std::string property;
  nlohmann::json details;
};

/// Containment, interpolation, monotone refinement, symmetry, predict
/// Hölder bound and the single-update deviation bound. Returns one entry
/// per failed property (empty when all pass). `names` receives every
/// property that was checked.
std::vector<PropertyFailure> CheckEnvelopeProperties(
    const HolderInstance& inst, Rng& rng, std::vector<std::string>* names);

/// Random linear plant, quadratic cost, input box; n <= 2, m = 1, N <= 3.
struct LinearInstance {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::MatrixXd q;
  Eigen::MatrixXd r;
  InputBox box;
  int horizon = 1;
  Eigen::VectorXd x0;

  OcpProblem ToProblem() const;
  nlohmann::json ToJson() const;
};

LinearInstance MakeLinearInstance(Rng& rng);

/// Exhaustive grid search with successive zooming over the input box.
/// Evaluates the cost with its own plain rollout.
double GridSearchValue(const LinearInstance& inst);

struct SuiteResult {
  std::map<std::string, int> passed;
  std::map<std::string, int> failed;
  std::optional<nlohmann::json> counterexample;  // first failure by case

  bool ok() const { return !counterexample.has_value(); }
};

/// Runs `cases` random Hölder instances and min(cases, 50) solver
/// instances. Case i depends only on (seed, i), so splitting across
/// `threads` does not change the result.
SuiteResult RunPropertySuite(std::uint64_t seed, int cases, int threads);

/// Consistency and interpolation checks on a serialized dataset.
SuiteResult VerifyDataset(const nlohmann::json& dataset);

}  // namespace kinky_mpc::verify
