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

#include "kinky_mpc/kinky_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace kinky_mpc {
namespace {

double Distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                Norm norm) {
  if (norm == Norm::kChebyshev) return (a - b).lpNorm<Eigen::Infinity>();
  return (a - b).norm();
}

bool AllFinite(const Eigen::VectorXd& v) { return v.allFinite(); }

double ImpliedQ(const Observation& a, const Observation& b,
                const HolderSpec& spec) {
  const double dy = (a.y - b.y).lpNorm<Eigen::Infinity>();
  const double dz = std::pow(Distance(a.z, b.z, spec.norm), spec.lambda);
  if (dz == 0.0) return std::numeric_limits<double>::infinity();
  return dy / dz;
}

}  // namespace

void HolderSpec::Validate() const {
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw InputError("Hölder constant q must be positive and finite");
  }
  if (!(lambda > 0.0) || lambda > 1.0) {
    throw InputError(
        "Hölder exponent lambda must lie in (0, 1]; lambda > 1 only admits "
        "constant functions");
  }
}

double HolderSpec::Cone(const Eigen::VectorXd& a,
                        const Eigen::VectorXd& b) const {
  const double d = Distance(a, b, norm);
  return lambda == 1.0 ? q * d : q * std::pow(d, lambda);
}

KinkyModel::KinkyModel(const HolderSpec& spec, int d_in, int d_out)
    : spec_(spec), d_in_(d_in), d_out_(d_out) {
  spec_.Validate();
  if (d_in <= 0 || d_out <= 0) {
    throw InputError("learner dimensions must be positive");
  }
  data_ = std::make_shared<const std::vector<Observation>>(
      std::vector<Observation>{{Eigen::VectorXd::Zero(d_in),
                                Eigen::VectorXd::Zero(d_out)}});
}

KinkyModel::KinkyModel(const HolderSpec& spec, int d_in, int d_out,
                       std::shared_ptr<const std::vector<Observation>> data)
    : spec_(spec), d_in_(d_in), d_out_(d_out), data_(std::move(data)) {}

KinkyModel KinkyModel::FromObservations(
    const HolderSpec& spec, int d_in, int d_out,
    const std::vector<Observation>& data) {
  spec.Validate();
  if (d_in <= 0 || d_out <= 0) {
    throw InputError("learner dimensions must be positive");
  }
  if (data.empty()) throw InputError("dataset must not be empty");
  KinkyModel model(spec, d_in, d_out, nullptr);
  std::vector<Observation> kept;
  kept.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    model.CheckObservation(data[i]);
    if (!model.CheckAgainstData(kept, data[i], i)) kept.push_back(data[i]);
  }
  model.data_ = std::make_shared<const std::vector<Observation>>(
      std::move(kept));
  return model;
}

void KinkyModel::CheckQuery(const Eigen::VectorXd& z) const {
  if (z.size() != d_in_) {
    std::ostringstream os;
    os << "query has dimension " << z.size() << ", learner expects " << d_in_;
    throw InputError(os.str());
  }
  if (!AllFinite(z)) throw InputError("query point is not finite");
}

void KinkyModel::CheckObservation(const Observation& obs) const {
  if (obs.z.size() != d_in_ || obs.y.size() != d_out_) {
    throw InputError("observation dimensions do not match the learner");
  }
  if (!AllFinite(obs.z) || !AllFinite(obs.y)) {
    throw InputError("observation is not finite");
  }
}

bool KinkyModel::CheckAgainstData(const std::vector<Observation>& data,
                                  const Observation& obs,
                                  std::size_t obs_index) const {
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Observation& stored = data[i];
    const double dy = (stored.y - obs.y).lpNorm<Eigen::Infinity>();
    const double bound = spec_.Cone(stored.z, obs.z);
    if (dy > bound + kConsistencyTolerance) {
      const double implied = ImpliedQ(stored, obs, spec_);
      std::ostringstream os;
      os.precision(17);
      os << "Hölder violation between observation " << i << " and "
         << (obs_index == HolderViolation::kIncoming
                 ? std::string("the new observation")
                 : "observation " + std::to_string(obs_index))
         << ": |dy| = " << dy << " exceeds q|dz|^lambda = " << bound
         << " (implied q >= " << implied << ")";
      throw HolderViolation(os.str(), i, obs_index, implied);
    }
    if (stored.z == obs.z) return true;
  }
  return false;
}

KinkyModel::Envelopes KinkyModel::Evaluate(const Eigen::VectorXd& z) const {
  CheckQuery(z);
  const auto& data = *data_;
  Envelopes env{
      Eigen::VectorXd::Constant(d_out_,
                                std::numeric_limits<double>::infinity()),
      Eigen::VectorXd::Constant(d_out_,
                                -std::numeric_limits<double>::infinity())};
  std::vector<std::size_t> arg_upper(d_out_, 0), arg_lower(d_out_, 0);
  for (std::size_t j = 0; j < data.size(); ++j) {
    const double cone = spec_.Cone(z, data[j].z);
    for (int i = 0; i < d_out_; ++i) {
      const double up = data[j].y[i] + cone;
      const double low = data[j].y[i] - cone;
      if (up < env.upper[i]) {
        env.upper[i] = up;
        arg_upper[i] = j;
      }
      if (low > env.lower[i]) {
        env.lower[i] = low;
        arg_lower[i] = j;
      }
    }
  }
  for (int i = 0; i < d_out_; ++i) {
    if (env.lower[i] > env.upper[i] + kConsistencyTolerance) {
      const std::size_t a = arg_lower[i], b = arg_upper[i];
      const double implied = ImpliedQ(data[a], data[b], spec_);
      std::ostringstream os;
      os.precision(17);
      os << "lower envelope exceeds upper envelope by "
         << env.lower[i] - env.upper[i] << " (observations " << a << " and "
         << b << ", implied q >= " << implied << ")";
      throw HolderViolation(os.str(), a, b, implied);
    }
  }
  return env;
}

Eigen::VectorXd KinkyModel::EnvelopeMax(const Eigen::VectorXd& z) const {
  return Evaluate(z).upper;
}

Eigen::VectorXd KinkyModel::EnvelopeMin(const Eigen::VectorXd& z) const {
  return Evaluate(z).lower;
}

Eigen::VectorXd KinkyModel::Predict(const Eigen::VectorXd& z) const {
  const Envelopes env = Evaluate(z);
  return 0.5 * (env.upper + env.lower);
}

UncertaintyInterval KinkyModel::Interval(const Eigen::VectorXd& z) const {
  const Envelopes env = Evaluate(z);
  // Half gap; computed this way lo is exactly -hi.
  const Eigen::VectorXd half = 0.5 * (env.upper - env.lower);
  return {-half, half};
}

double KinkyModel::Width(const Eigen::VectorXd& z) const {
  const Envelopes env = Evaluate(z);
  return (env.upper - env.lower).lpNorm<Eigen::Infinity>();
}

KinkyModel KinkyModel::Observe(const Observation& obs) const {
  CheckObservation(obs);
  if (CheckAgainstData(*data_, obs, HolderViolation::kIncoming)) {
    return *this;
  }
  auto next = std::make_shared<std::vector<Observation>>(*data_);
  next->push_back(obs);
  return KinkyModel(spec_, d_in_, d_out_, std::move(next));
}

double KinkyModel::UncertaintySize(const Box& box,
                                   int points_per_axis) const {
  if (box.lo.size() != d_in_ || box.hi.size() != d_in_) {
    throw InputError("uncertainty box dimension does not match the learner");
  }
  if (points_per_axis < 2) {
    throw InputError("uncertainty grid needs at least 2 points per axis");
  }
  if (!AllFinite(box.lo) || !AllFinite(box.hi) ||
      (box.hi.array() < box.lo.array()).any()) {
    throw InputError("uncertainty box must be bounded with lo <= hi");
  }
  const Eigen::VectorXd cell = (box.hi - box.lo) / points_per_axis;
  const double cell_volume = cell.prod();

  std::vector<int> index(d_in_, 0);
  Eigen::VectorXd z(d_in_);
  double sum = 0.0;
  while (true) {
    for (int k = 0; k < d_in_; ++k) {
      z[k] = box.lo[k] + (index[k] + 0.5) * cell[k];
    }
    sum += Width(z);
    int k = 0;
    while (k < d_in_ && ++index[k] == points_per_axis) index[k++] = 0;
    if (k == d_in_) break;
  }
  return cell_volume * sum;
}

double ModelUpdateDeviation(const KinkyModel& old_model,
                            const KinkyModel& new_model,
                            const Eigen::VectorXd& z) {
  return (old_model.Predict(z) - new_model.Predict(z))
      .lpNorm<Eigen::Infinity>();
}

}  // namespace kinky_mpc
