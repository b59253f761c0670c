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

#include <cmath>
#include <map>
#include <sstream>

namespace kinky_mpc {

Eigen::VectorXd SystemOracle::Step(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u) const {
  if (x.size() != state_dim() || u.size() != input_dim()) {
    throw InputError("plant called with mismatched state/input dimensions");
  }
  Eigen::VectorXd next = DoStep(x, u);
  if (!next.allFinite()) {
    throw NumericError("plant produced a non-finite state", -1);
  }
  return next;
}

namespace {

Eigen::VectorXd ExampleKnown(const ExamplePlantParams& p,
                             const Eigen::VectorXd& x,
                             const Eigen::VectorXd& u) {
  Eigen::VectorXd next(2);
  next[0] = x[0] + p.a12 * x[1];
  next[1] = (p.a22 + p.a22_x1 * x[0]) * x[1] + p.b2 * u[0];
  return next;
}

}  // namespace

Eigen::VectorXd ExamplePlant::DoStep(const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& u) const {
  Eigen::VectorXd next = ExampleKnown(params_, x, u);
  next[1] += params_.g_gain * x[0] * std::exp(-params_.g_rate * x[0]);
  return next;
}

Dynamics ExamplePlant::KnownPart() const {
  return [p = params_](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return ExampleKnown(p, x, u);
  };
}

LinearPlant::LinearPlant(Eigen::MatrixXd a, Eigen::MatrixXd b)
    : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() == 0 || a_.rows() != a_.cols() || b_.rows() != a_.rows() ||
      b_.cols() == 0) {
    throw InputError("linear plant needs square A and B with matching rows");
  }
}

Eigen::VectorXd LinearPlant::DoStep(const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& u) const {
  return a_ * x + b_ * u;
}

Dynamics LinearPlant::AsDynamics() const {
  return [a = a_, b = b_](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return Eigen::VectorXd(a * x + b * u);
  };
}

std::string FeatureName(FeatureKind kind) {
  return kind == FeatureKind::kFirstState ? "x1" : "full";
}

FeatureKind ParseFeature(const std::string& name) {
  if (name == "x1") return FeatureKind::kFirstState;
  if (name == "full") return FeatureKind::kFull;
  throw InputError("unknown feature map '" + name + "'");
}

int FeatureDim(FeatureKind kind, int n, int m) {
  return kind == FeatureKind::kFirstState ? 1 : n + m;
}

Eigen::VectorXd MakeFeature(FeatureKind kind, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& u) {
  if (kind == FeatureKind::kFirstState) return x.head(1);
  Eigen::VectorXd z(x.size() + u.size());
  z << x, u;
  return z;
}

CompositeModel::CompositeModel(Dynamics known, int n, int m,
                               FeatureKind feature, std::vector<int> selector,
                               KinkyModel residual)
    : known_(std::move(known)),
      n_(n),
      m_(m),
      feature_(feature),
      selector_(std::move(selector)),
      residual_(std::move(residual)) {
  if (n <= 0 || m <= 0) throw InputError("model dimensions must be positive");
  if (!known_) throw InputError("composite model needs a known part");
  if (residual_.d_in() != FeatureDim(feature_, n, m)) {
    throw InputError("learner input dimension does not match the feature map");
  }
  if (static_cast<int>(selector_.size()) != residual_.d_out()) {
    throw InputError("selector length must equal the learner output dimension");
  }
  for (std::size_t i = 0; i < selector_.size(); ++i) {
    if (selector_[i] < 0 || selector_[i] >= n) {
      throw InputError("selector index out of range");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (selector_[i] == selector_[j]) {
        throw InputError("selector indices must be distinct");
      }
    }
  }
}

void CompositeModel::CheckDims(const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u) const {
  if (x.size() != n_ || u.size() != m_) {
    throw InputError("model called with mismatched state/input dimensions");
  }
}

Eigen::VectorXd CompositeModel::Feature(const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& u) const {
  CheckDims(x, u);
  return MakeFeature(feature_, x, u);
}

Eigen::VectorXd CompositeModel::Known(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& u) const {
  CheckDims(x, u);
  return known_(x, u);
}

Eigen::VectorXd CompositeModel::Step(const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& u) const {
  Eigen::VectorXd next = Known(x, u);
  const Eigen::VectorXd g = residual_.Predict(MakeFeature(feature_, x, u));
  for (std::size_t i = 0; i < selector_.size(); ++i) {
    next[selector_[i]] += g[static_cast<Eigen::Index>(i)];
  }
  return next;
}

CompositeModel CompositeModel::WithResidual(KinkyModel residual) const {
  return CompositeModel(known_, n_, m_, feature_, selector_,
                        std::move(residual));
}

Eigen::VectorXd ResidualTarget(const Eigen::VectorXd& plant_next,
                               const Eigen::VectorXd& known_next,
                               const std::vector<int>& selector) {
  if (plant_next.size() != known_next.size()) {
    throw InputError("residual target needs equally sized states");
  }
  Eigen::VectorXd target(selector.size());
  for (std::size_t i = 0; i < selector.size(); ++i) {
    if (selector[i] < 0 || selector[i] >= plant_next.size()) {
      throw InputError("selector index out of range");
    }
    target[static_cast<Eigen::Index>(i)] =
        plant_next[selector[i]] - known_next[selector[i]];
  }
  return target;
}

namespace {

std::vector<double> Numbers(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw InputError(std::string("plant parameter '") + key +
                     "' must be an array of numbers");
  }
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) {
      throw InputError(std::string("plant parameter '") + key +
                       "' must be an array of numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

PlantSetup MakeExample(const nlohmann::json& params) {
  ExamplePlantParams p;
  const std::map<std::string, double*> fields = {
      {"a12", &p.a12},       {"a22", &p.a22},       {"a22_x1", &p.a22_x1},
      {"b2", &p.b2},         {"g_gain", &p.g_gain}, {"g_rate", &p.g_rate}};
  for (const auto& [key, value] : params.items()) {
    auto it = fields.find(key);
    if (it == fields.end() || !value.is_number()) {
      throw InputError("invalid example_2d parameter '" + key + "'");
    }
    *it->second = value.get<double>();
  }
  auto plant = std::make_shared<const ExamplePlant>(p);
  return {plant, plant->KnownPart()};
}

PlantSetup MakeLinear(const nlohmann::json& params) {
  for (const auto& [key, value] : params.items()) {
    if (key != "A" && key != "B") {
      throw InputError("invalid linear plant parameter '" + key + "'");
    }
  }
  const std::vector<double> a = Numbers(params, "A");
  const std::vector<double> b = Numbers(params, "B");
  const auto n = static_cast<int>(std::lround(std::sqrt(a.size())));
  if (n == 0 || static_cast<std::size_t>(n * n) != a.size() ||
      b.empty() || b.size() % n != 0) {
    throw InputError("linear plant needs row-major n*n A and n*m B");
  }
  const int m = static_cast<int>(b.size()) / n;
  Eigen::MatrixXd am(n, n), bm(n, m);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) am(r, c) = a[r * n + c];
    for (int c = 0; c < m; ++c) bm(r, c) = b[r * m + c];
  }
  auto plant = std::make_shared<const LinearPlant>(am, bm);
  return {plant, plant->AsDynamics()};
}

}  // namespace

PlantSetup MakePlant(const std::string& name, const nlohmann::json& params) {
  const nlohmann::json p = params.is_null() ? nlohmann::json::object() : params;
  if (!p.is_object()) throw InputError("plant params must be an object");
  if (name == "example_2d") return MakeExample(p);
  if (name == "linear") return MakeLinear(p);
  throw InputError("unknown plant '" + name + "'");
}

}  // namespace kinky_mpc
