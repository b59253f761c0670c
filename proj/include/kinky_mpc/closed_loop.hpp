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

#include <iosfwd>
#include <optional>
#include <vector>

#include "kinky_mpc/dynamics.hpp"
#include "kinky_mpc/kinky_model.hpp"
#include "kinky_mpc/ocp_solver.hpp"

namespace kinky_mpc {

/// h_t(z_t) at or below this counts as a revisited point.
inline constexpr double kZeroWidth = 1e-9;
/// Slack on the decrease condition to absorb inexact optimization.
inline constexpr double kSolverSlack = 1e-6;

struct SimConfig {
  PlantSetup plant;
  HolderSpec holder;
  FeatureKind feature = FeatureKind::kFirstState;
  std::vector<int> selector;  // 0-based state indices
  int horizon = 10;
  StageCost cost;
  InputBox input_box;
  SolverSettings solver;
  Eigen::VectorXd x0;
  int steps = 50;
  bool learning_enabled = true;
  Box uncertainty_box;  // in feature coordinates
  int uncertainty_grid = 400;
  int record_every = 1;

  void Validate() const;
};

struct StepRecord {
  int t = 0;
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  double stage_cost = 0.0;
  double value = 0.0;             // V_t*(x_t)
  double width = 0.0;             // h_t(z_t), learner before the update
  double uncertainty_size = 0.0;  // C_t
  int iterations = 0;
  bool converged = false;
  // V_{t+1}* - V_t* + l(x_t, u_t).
  double iss_residual = 0.0;
  // Cost of the shifted previous solution at x_t under the current model.
  std::optional<double> shifted_cost;
  // Learner diagnostics; zero when learning is disabled.
  double width_after_update = 0.0;
  double max_update_deviation = 0.0;  // sup over the probe grid
};

struct SimTrace {
  int state_dim = 0;
  int input_dim = 0;
  int record_every = 1;
  std::vector<StepRecord> steps;
  Eigen::VectorXd final_state;
  double final_value = 0.0;
  double final_uncertainty_size = 0.0;
  int final_iterations = 0;
  bool final_converged = false;
  /// Learner after the last update.
  std::optional<KinkyModel> final_learner;
};

/// Receding-horizon loop with online learning. Deterministic; throws
/// NumericError (with the step index), HolderViolation (suggesting a larger
/// q) or InvariantViolation when a certified property fails at runtime.
SimTrace RunClosedLoop(const SimConfig& config);

/// Roughly 100 points spread over the box, used to probe model updates.
std::vector<Eigen::VectorXd> ProbeGrid(const Box& box);

struct IssReport {
  std::vector<double> residuals;  // r_t
  std::vector<double> widths;     // h_t(z_t)
  int zero_width_steps = 0;
  int zero_width_violations = 0;  // r_t > kSolverSlack while h_t ~ 0
  double max_residual_at_zero_width = 0.0;
  int positive_residual_steps = 0;
  double spearman = 0.0;  // rank correlation of r_t and h_t, reported only

  bool holds() const { return zero_width_violations == 0; }
};

IssReport MakeIssReport(const SimTrace& trace);

struct ConvergenceReport {
  double final_state_norm = 0.0;  // infinity norm
  double final_width = 0.0;
  std::vector<double> uncertainty_sizes;  // C_0 .. C_T
  bool uncertainty_monotone = true;
  std::vector<double> width_partial_sums;
  double mean_x1_last10 = 0.0;
  bool state_converged = false;  // final_state_norm <= 1e-2
  bool plateau_detected = false;
};

/// Requires at least 20 steps.
ConvergenceReport MakeConvergenceReport(const SimTrace& trace);

/// CSV with header t,x1..xn,u1..um,stage_cost,V_star,h_t,C_t,iters,
/// converged,iss_residual; one row per recorded step plus a terminal row.
void WriteTraceCsv(const SimTrace& trace, std::ostream& os);

}  // namespace kinky_mpc
