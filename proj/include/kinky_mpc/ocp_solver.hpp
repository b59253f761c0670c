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

#include <optional>
#include <vector>

#include "kinky_mpc/dynamics.hpp"

namespace kinky_mpc {

/// l(x, u) = x'Qx + u'Ru.
struct StageCost {
  Eigen::MatrixXd q;
  Eigen::MatrixXd r;

  /// Symmetry to 1e-12 and positive leading principal minors.
  void Validate(int n, int m) const;
  double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;
};

struct InputBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  /// lo < hi componentwise and 0 inside.
  void Validate(int m) const;
};

/// Componentwise clamp of u into the box.
Eigen::VectorXd ProjectBox(const Eigen::VectorXd& u, const InputBox& box);

struct SolverSettings {
  int k_max = 500;
  double tol_grad = 1e-8;
  double tol_cost = 1e-12;
  double fd_step = 1e-6;
  double armijo_factor = 0.5;
  double sufficient_decrease = 1e-4;

  void Validate() const;
};

/// min sum_{k<N} l(x_k, u_k) s.t. x_{k+1} = f_t(x_k, u_k), u_k in box.
/// There is no terminal cost.
struct OcpProblem {
  int horizon = 10;
  StageCost cost;
  CompositeModel model;
  InputBox box;
  SolverSettings settings;

  void Validate() const;
};

struct RolloutResult {
  Eigen::MatrixXd states;  // (N+1) x n, row k is x_k
  double value = 0.0;
};

/// Nominal trajectory and cost of an N x m input sequence. Throws
/// NumericError naming the horizon step if the state blows up.
RolloutResult Rollout(const OcpProblem& problem, const Eigen::VectorXd& x0,
                      const Eigen::MatrixXd& inputs);

struct OcpSolution {
  Eigen::MatrixXd inputs;  // N x m
  Eigen::MatrixXd states;  // (N+1) x n
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Cost after each accepted step, starting with the chosen candidate.
  std::vector<double> cost_history;

  Eigen::VectorXd first_input() const { return inputs.row(0).transpose(); }
};

/// Drop the first input, append zero and project into the box.
Eigen::MatrixXd ShiftWarmStart(const OcpSolution& previous,
                               const InputBox& box);

/// Projected-gradient single shooting.
///
/// Starting candidates are `warm_start`, the shift of `previous` and the zero
/// sequence, in that order; descent starts from the cheapest (first wins on
/// ties), so the returned value never exceeds any candidate's cost. The
/// gradient is a central finite difference; step sizes start from a
/// Barzilai-Borwein guess and are backtracked until the Armijo condition
/// along the projection arc holds. Non-convergence is reported through
/// `converged`, never thrown.
OcpSolution Solve(const OcpProblem& problem, const Eigen::VectorXd& x0,
                  const std::optional<Eigen::MatrixXd>& warm_start = {},
                  const OcpSolution* previous = nullptr);

}  // namespace kinky_mpc
