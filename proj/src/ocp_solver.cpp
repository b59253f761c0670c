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

#include "kinky_mpc/ocp_solver.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <string>

namespace kinky_mpc {
namespace {

void CheckSpd(const Eigen::MatrixXd& mat, int dim, const char* name) {
  if (mat.rows() != dim || mat.cols() != dim) {
    throw InputError(std::string(name) + " has the wrong dimensions");
  }
  if (!mat.allFinite() || (mat - mat.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InputError(std::string(name) + " must be symmetric");
  }
  for (int k = 1; k <= dim; ++k) {
    if (!(mat.topLeftCorner(k, k).determinant() > 0.0)) {
      throw InputError(std::string(name) + " must be positive definite");
    }
  }
}

// Cost of steps k..N-1 when the inputs from k on are `inputs` and the state
// at step k is `xk`.
double SuffixCost(const OcpProblem& problem, Eigen::VectorXd x, int k,
                  const Eigen::MatrixXd& inputs) {
  double cost = 0.0;
  for (int i = k; i < problem.horizon; ++i) {
    const Eigen::VectorXd u = inputs.row(i).transpose();
    cost += problem.cost(x, u);
    if (i + 1 < problem.horizon) {
      x = problem.model.Step(x, u);
      if (!x.allFinite()) {
        throw NumericError("nominal state not finite at horizon step " +
                               std::to_string(i + 1),
                           i + 1);
      }
    }
  }
  return cost;
}

Eigen::MatrixXd ProjectAll(const Eigen::MatrixXd& inputs,
                           const InputBox& box) {
  Eigen::MatrixXd out(inputs.rows(), inputs.cols());
  for (Eigen::Index k = 0; k < inputs.rows(); ++k) {
    out.row(k) = ProjectBox(inputs.row(k).transpose(), box).transpose();
  }
  return out;
}

// Central-difference gradient. Perturbing u_k leaves x_0..x_k untouched, so
// only the suffix cost from k is re-evaluated.
Eigen::MatrixXd Gradient(const OcpProblem& problem,
                         const Eigen::MatrixXd& states,
                         const Eigen::MatrixXd& inputs) {
  const double h = problem.settings.fd_step;
  Eigen::MatrixXd grad(inputs.rows(), inputs.cols());
  Eigen::MatrixXd work = inputs;
  for (int k = 0; k < problem.horizon; ++k) {
    const Eigen::VectorXd xk = states.row(k).transpose();
    for (Eigen::Index j = 0; j < inputs.cols(); ++j) {
      const double base = inputs(k, j);
      work(k, j) = base + h;
      const double plus = SuffixCost(problem, xk, k, work);
      work(k, j) = base - h;
      const double minus = SuffixCost(problem, xk, k, work);
      work(k, j) = base;
      grad(k, j) = (plus - minus) / (2.0 * h);
    }
  }
  return grad;
}

}  // namespace

void StageCost::Validate(int n, int m) const {
  CheckSpd(q, n, "Q");
  CheckSpd(r, m, "R");
}

double StageCost::operator()(const Eigen::VectorXd& x,
                             const Eigen::VectorXd& u) const {
  return x.dot(q * x) + u.dot(r * u);
}

void InputBox::Validate(int m) const {
  if (lo.size() != m || hi.size() != m) {
    throw InputError("input box has the wrong dimension");
  }
  if (!lo.allFinite() || !hi.allFinite() || (lo.array() >= hi.array()).any()) {
    throw InputError("input box needs finite u_lo < u_hi");
  }
  if ((lo.array() > 0.0).any() || (hi.array() < 0.0).any()) {
    throw InputError("input box must contain the origin");
  }
}

Eigen::VectorXd ProjectBox(const Eigen::VectorXd& u, const InputBox& box) {
  return u.cwiseMax(box.lo).cwiseMin(box.hi);
}

void SolverSettings::Validate() const {
  if (k_max < 0) throw InputError("solver k_max must be non-negative");
  if (!(tol_grad >= 0.0) || !(tol_cost >= 0.0)) {
    throw InputError("solver tolerances must be non-negative");
  }
  if (!(fd_step > 0.0)) throw InputError("solver fd_step must be positive");
  if (!(armijo_factor > 0.0 && armijo_factor < 1.0)) {
    throw InputError("solver armijo_factor must lie in (0, 1)");
  }
  if (!(sufficient_decrease > 0.0 && sufficient_decrease < 1.0)) {
    throw InputError("solver sufficient_decrease must lie in (0, 1)");
  }
}

void OcpProblem::Validate() const {
  if (horizon < 1) throw InputError("horizon must be at least 1");
  cost.Validate(model.state_dim(), model.input_dim());
  box.Validate(model.input_dim());
  settings.Validate();
}

RolloutResult Rollout(const OcpProblem& problem, const Eigen::VectorXd& x0,
                      const Eigen::MatrixXd& inputs) {
  const int n = problem.model.state_dim();
  const int m = problem.model.input_dim();
  if (x0.size() != n) throw InputError("initial state has the wrong dimension");
  if (inputs.rows() != problem.horizon || inputs.cols() != m) {
    throw InputError("input sequence must be N x m");
  }
  if (!x0.allFinite()) throw NumericError("initial state is not finite", 0);
  RolloutResult out;
  out.states.resize(problem.horizon + 1, n);
  out.states.row(0) = x0.transpose();
  Eigen::VectorXd x = x0;
  for (int k = 0; k < problem.horizon; ++k) {
    const Eigen::VectorXd u = inputs.row(k).transpose();
    out.value += problem.cost(x, u);
    x = problem.model.Step(x, u);
    if (!x.allFinite()) {
      throw NumericError(
          "nominal state not finite at horizon step " + std::to_string(k + 1),
          k + 1);
    }
    out.states.row(k + 1) = x.transpose();
  }
  return out;
}

Eigen::MatrixXd ShiftWarmStart(const OcpSolution& previous,
                               const InputBox& box) {
  const Eigen::Index rows = previous.inputs.rows();
  Eigen::MatrixXd shifted = Eigen::MatrixXd::Zero(rows, previous.inputs.cols());
  if (rows > 1) {
    shifted.topRows(rows - 1) = previous.inputs.bottomRows(rows - 1);
  }
  return ProjectAll(shifted, box);
}

OcpSolution Solve(const OcpProblem& problem, const Eigen::VectorXd& x0,
                  const std::optional<Eigen::MatrixXd>& warm_start,
                  const OcpSolution* previous) {
  problem.Validate();
  const int m = problem.model.input_dim();
  const SolverSettings& cfg = problem.settings;

  std::vector<Eigen::MatrixXd> candidates;
  if (warm_start) {
    if (warm_start->rows() != problem.horizon || warm_start->cols() != m) {
      throw InputError("warm start must be N x m");
    }
    candidates.push_back(ProjectAll(*warm_start, problem.box));
  }
  if (previous != nullptr && previous->inputs.rows() == problem.horizon &&
      previous->inputs.cols() == m) {
    candidates.push_back(ShiftWarmStart(*previous, problem.box));
  }
  candidates.push_back(Eigen::MatrixXd::Zero(problem.horizon, m));

  // A candidate whose prediction overflows is skipped; only when every
  // candidate overflows is the error propagated.
  Eigen::MatrixXd u;
  RolloutResult current;
  std::optional<NumericError> overflow;
  for (const Eigen::MatrixXd& candidate : candidates) {
    try {
      RolloutResult r = Rollout(problem, x0, candidate);
      if (u.size() == 0 || r.value < current.value) {
        u = candidate;
        current = std::move(r);
      }
    } catch (const NumericError& e) {
      overflow = e;
    }
  }
  if (u.size() == 0) throw *overflow;

  OcpSolution sol;
  sol.cost_history.push_back(current.value);
  Eigen::MatrixXd grad_prev, u_prev;
  double step = 1.0;
  while (sol.iterations < cfg.k_max) {
    if (current.value <= 0.0) {
      sol.converged = true;  // l >= 0, so this is the global minimum
      break;
    }
    const Eigen::MatrixXd grad = Gradient(problem, current.states, u);
    const double pg_norm =
        (ProjectAll(u - grad, problem.box) - u).cwiseAbs().maxCoeff();
    if (pg_norm < cfg.tol_grad) {
      sol.converged = true;
      break;
    }
    if (grad_prev.size() != 0) {
      const Eigen::ArrayXXd s = (u - u_prev).array();
      const Eigen::ArrayXXd y = (grad - grad_prev).array();
      const double sy = (s * y).sum();
      const double ss = (s * s).sum();
      step = sy > 0.0 ? ss / sy : 2.0 * step;
      step = std::clamp(step, 1e-10, 1e10);
    }

    bool accepted = false;
    Eigen::MatrixXd trial;
    RolloutResult trial_result;
    for (int ls = 0; ls < 60; ++ls) {
      trial = ProjectAll(u - step * grad, problem.box);
      const double predicted =
          (grad.array() * (trial - u).array()).sum();
      try {
        trial_result = Rollout(problem, x0, trial);
      } catch (const NumericError&) {
        step *= cfg.armijo_factor;  // overflowing trial: shorten the step
        continue;
      }
      if (trial_result.value <=
          current.value + cfg.sufficient_decrease * predicted) {
        accepted = (trial - u).cwiseAbs().maxCoeff() > 0.0 &&
                   trial_result.value <= current.value;
        break;
      }
      step *= cfg.armijo_factor;
    }
    if (!accepted) break;  // stalled

    const double decrease = current.value - trial_result.value;
    grad_prev = grad;
    u_prev = u;
    u = std::move(trial);
    current = std::move(trial_result);
    ++sol.iterations;
    sol.cost_history.push_back(current.value);
    if (decrease < cfg.tol_cost) {
      sol.converged = true;
      break;
    }
  }

  sol.inputs = std::move(u);
  sol.states = std::move(current.states);
  sol.value = current.value;
  return sol;
}

}  // namespace kinky_mpc
