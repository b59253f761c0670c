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

#include <memory>
#include <vector>

#include "kinky_mpc/errors.hpp"

namespace kinky_mpc {

enum class Norm { kEuclidean, kChebyshev };

/// Hölder class ‖f(a) − f(b)‖ ≤ q‖a − b‖^λ with 0 < λ ≤ 1.
struct HolderSpec {
  double q = 1.0;
  double lambda = 1.0;
  Norm norm = Norm::kEuclidean;

  /// Throws InputError unless q > 0 and 0 < lambda <= 1.
  void Validate() const;
  /// q‖a − b‖^λ.
  double Cone(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
};

/// Absolute slack for Hölder-consistency checks.
inline constexpr double kConsistencyTolerance = 1e-9;

struct Observation {
  Eigen::VectorXd z;
  Eigen::VectorXd y;
};

struct UncertaintyInterval {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

/// Axis-aligned box; lo and hi have one entry per input axis.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

/// Kinky-inference learner over a finite dataset.
///
/// Snapshots are immutable: Observe() returns a new model and leaves the
/// receiver untouched, so a snapshot may be queried from several threads.
/// Every query is a linear scan over the stored data.
class KinkyModel {
 public:
  /// Model seeded with the single observation (0, 0).
  KinkyModel(const HolderSpec& spec, int d_in, int d_out);

  /// Model over an arbitrary non-empty dataset. Duplicates are dropped and
  /// the pairwise consistency of the remainder is checked.
  static KinkyModel FromObservations(const HolderSpec& spec, int d_in,
                                     int d_out,
                                     const std::vector<Observation>& data);

  const HolderSpec& spec() const { return spec_; }
  int d_in() const { return d_in_; }
  int d_out() const { return d_out_; }
  const std::vector<Observation>& data() const { return *data_; }

  /// Componentwise min over the data of y + q‖z − z_i‖^λ.
  Eigen::VectorXd EnvelopeMax(const Eigen::VectorXd& z) const;
  /// Componentwise max over the data of y − q‖z − z_i‖^λ.
  Eigen::VectorXd EnvelopeMin(const Eigen::VectorXd& z) const;
  /// Midpoint of the two envelopes.
  Eigen::VectorXd Predict(const Eigen::VectorXd& z) const;
  /// Envelopes shifted by the prediction; lo == -hi.
  UncertaintyInterval Interval(const Eigen::VectorXd& z) const;
  /// Max-component gap between the envelopes.
  double Width(const Eigen::VectorXd& z) const;

  /// New snapshot with `obs` appended. Exact duplicates of a stored z with
  /// matching y leave the data unchanged.
  KinkyModel Observe(const Observation& obs) const;

  /// Midpoint-rule integral of Width() over `box` with `points_per_axis`
  /// cells along every axis.
  double UncertaintySize(const Box& box, int points_per_axis) const;

 private:
  struct Envelopes {
    Eigen::VectorXd upper;
    Eigen::VectorXd lower;
  };

  KinkyModel(const HolderSpec& spec, int d_in, int d_out,
             std::shared_ptr<const std::vector<Observation>> data);

  Envelopes Evaluate(const Eigen::VectorXd& z) const;
  void CheckQuery(const Eigen::VectorXd& z) const;
  void CheckObservation(const Observation& obs) const;
  // Throws HolderViolation if obs is inconsistent with `data`. Returns true
  // when obs duplicates a stored point.
  bool CheckAgainstData(const std::vector<Observation>& data,
                        const Observation& obs, std::size_t obs_index) const;

  HolderSpec spec_;
  int d_in_;
  int d_out_;
  std::shared_ptr<const std::vector<Observation>> data_;
};

/// ‖predict_old(z) − predict_new(z)‖_∞.
double ModelUpdateDeviation(const KinkyModel& old_model,
                            const KinkyModel& new_model,
                            const Eigen::VectorXd& z);

}  // namespace kinky_mpc
