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

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "kinky_mpc/kinky_model.hpp"

namespace kinky_mpc {

/// True discrete-time plant x+ = f(x, u). Implementations must be
/// deterministic and keep the origin an equilibrium.
class SystemOracle {
 public:
  virtual ~SystemOracle() = default;

  virtual int state_dim() const = 0;
  virtual int input_dim() const = 0;

  /// Throws InputError on dimension mismatch and NumericError when the
  /// successor is not finite.
  Eigen::VectorXd Step(const Eigen::VectorXd& x,
                       const Eigen::VectorXd& u) const;

 protected:
  virtual Eigen::VectorXd DoStep(const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& u) const = 0;
};

using Dynamics =
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

/// Coefficients of the two-state family
///   x1+ = x1 + a12 x2
///   x2+ = (a22 + a22_x1 x1) x2 + b2 u + g_gain x1 exp(-g_rate x1)
/// The exponential term is the part the controller does not know.
struct ExamplePlantParams {
  double a12 = 0.4;
  double a22 = 0.56;
  double a22_x1 = 0.1;
  double b2 = 0.4;
  double g_gain = 0.9;
  double g_rate = 1.0;
};

class ExamplePlant final : public SystemOracle {
 public:
  explicit ExamplePlant(const ExamplePlantParams& params = {})
      : params_(params) {}

  int state_dim() const override { return 2; }
  int input_dim() const override { return 1; }
  const ExamplePlantParams& params() const { return params_; }

  /// The plant without the exponential term.
  Dynamics KnownPart() const;

 protected:
  Eigen::VectorXd DoStep(const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u) const override;

 private:
  ExamplePlantParams params_;
};

/// x+ = A x + B u.
class LinearPlant final : public SystemOracle {
 public:
  LinearPlant(Eigen::MatrixXd a, Eigen::MatrixXd b);

  int state_dim() const override { return static_cast<int>(a_.rows()); }
  int input_dim() const override { return static_cast<int>(b_.cols()); }
  const Eigen::MatrixXd& a() const { return a_; }
  const Eigen::MatrixXd& b() const { return b_; }

  Dynamics AsDynamics() const;

 protected:
  Eigen::VectorXd DoStep(const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u) const override;

 private:
  Eigen::MatrixXd a_;
  Eigen::MatrixXd b_;
};

/// Which coordinates of (x, u) the learner sees.
enum class FeatureKind {
  kFirstState,  // z = x1
  kFull,        // z = (x, u)
};

std::string FeatureName(FeatureKind kind);
FeatureKind ParseFeature(const std::string& name);
int FeatureDim(FeatureKind kind, int n, int m);
Eigen::VectorXd MakeFeature(FeatureKind kind, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& u);

/// Nominal model f_t(x, u) = known(x, u) + E g_t(feature(x, u)), where g_t
/// is the learner's prediction and E scatters it into the selected state
/// components.
class CompositeModel {
 public:
  /// `selector` holds 0-based state indices, one per learner output.
  CompositeModel(Dynamics known, int n, int m, FeatureKind feature,
                 std::vector<int> selector, KinkyModel residual);

  int state_dim() const { return n_; }
  int input_dim() const { return m_; }
  FeatureKind feature_kind() const { return feature_; }
  const std::vector<int>& selector() const { return selector_; }
  const KinkyModel& residual() const { return residual_; }

  Eigen::VectorXd Feature(const Eigen::VectorXd& x,
                          const Eigen::VectorXd& u) const;
  Eigen::VectorXd Known(const Eigen::VectorXd& x,
                        const Eigen::VectorXd& u) const;
  /// Nominal successor state.
  Eigen::VectorXd Step(const Eigen::VectorXd& x,
                       const Eigen::VectorXd& u) const;

  /// Same model with the learner replaced.
  CompositeModel WithResidual(KinkyModel residual) const;

 private:
  void CheckDims(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

  Dynamics known_;
  int n_;
  int m_;
  FeatureKind feature_;
  std::vector<int> selector_;
  KinkyModel residual_;
};

/// Selected components of plant_next - known_next.
Eigen::VectorXd ResidualTarget(const Eigen::VectorXd& plant_next,
                               const Eigen::VectorXd& known_next,
                               const std::vector<int>& selector);

/// A plant together with the part of it the controller knows.
struct PlantSetup {
  std::shared_ptr<const SystemOracle> plant;
  Dynamics known;
};

/// Registry lookup. "example_2d" takes ExamplePlantParams keys; "linear"
/// takes row-major "A" and "B" plus "n", "m" and is fully known.
PlantSetup MakePlant(const std::string& name, const nlohmann::json& params);

}  // namespace kinky_mpc
