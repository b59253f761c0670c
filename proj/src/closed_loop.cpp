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

#include "kinky_mpc/closed_loop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

namespace kinky_mpc {
namespace {

std::string StepPrefix(int t) { return "step " + std::to_string(t) + ": "; }

std::vector<double> Ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double Pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = static_cast<double>(a.size());
  if (a.size() < 2) return 0.0;
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

void AppendDouble(std::string& row, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  row += buf;
}

}  // namespace

void SimConfig::Validate() const {
  if (!plant.plant || !plant.known) throw InputError("simulation needs a plant");
  const int n = plant.plant->state_dim();
  const int m = plant.plant->input_dim();
  holder.Validate();
  if (horizon < 1) throw InputError("horizon must be at least 1");
  if (steps < 1) throw InputError("simulation needs at least one step");
  if (record_every < 1) throw InputError("record_every must be positive");
  if (x0.size() != n || !x0.allFinite()) {
    throw InputError("x0 must be a finite vector of the plant state dimension");
  }
  if (selector.empty()) throw InputError("selector must not be empty");
  cost.Validate(n, m);
  input_box.Validate(m);
  solver.Validate();
  const int d_in = FeatureDim(feature, n, m);
  if (uncertainty_box.lo.size() != d_in || uncertainty_box.hi.size() != d_in) {
    throw InputError("uncertainty box must have one interval per feature axis");
  }
  if (uncertainty_grid < 2) {
    throw InputError("uncertainty grid needs at least 2 points per axis");
  }
}

std::vector<Eigen::VectorXd> ProbeGrid(const Box& box) {
  const auto d = static_cast<int>(box.lo.size());
  const int per_axis = std::max(
      2, static_cast<int>(std::ceil(std::pow(100.0, 1.0 / std::max(d, 1)))));
  std::vector<Eigen::VectorXd> points;
  std::vector<int> index(d, 0);
  while (true) {
    Eigen::VectorXd z(d);
    for (int k = 0; k < d; ++k) {
      z[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * index[k] / (per_axis - 1);
    }
    points.push_back(std::move(z));
    int k = 0;
    while (k < d && ++index[k] == per_axis) index[k++] = 0;
    if (k == d) break;
  }
  return points;
}

SimTrace RunClosedLoop(const SimConfig& config) {
  config.Validate();
  const int n = config.plant.plant->state_dim();
  const int m = config.plant.plant->input_dim();
  const int d_in = FeatureDim(config.feature, n, m);
  const SystemOracle& plant = *config.plant.plant;

  OcpProblem problem{
      config.horizon, config.cost,
      CompositeModel(config.plant.known, n, m, config.feature, config.selector,
                     KinkyModel(config.holder, d_in,
                                static_cast<int>(config.selector.size()))),
      config.input_box, config.solver};
  const std::vector<Eigen::VectorXd> probes =
      ProbeGrid(config.uncertainty_box);

  SimTrace trace;
  trace.state_dim = n;
  trace.input_dim = m;
  trace.record_every = config.record_every;
  trace.steps.reserve(config.steps);

  Eigen::VectorXd x = config.x0;
  std::optional<OcpSolution> previous;
  auto solve_at = [&](int t, StepRecord* record) {
    record->uncertainty_size = problem.model.residual().UncertaintySize(
        config.uncertainty_box, config.uncertainty_grid);
    if (!trace.steps.empty() &&
        record->uncertainty_size >
            trace.steps.back().uncertainty_size + 1e-12) {
      throw InvariantViolation(StepPrefix(t) +
                               "uncertainty size increased after an update");
    }
    if (previous) {
      try {
        record->shifted_cost =
            Rollout(problem, x, ShiftWarmStart(*previous, problem.box)).value;
      } catch (const NumericError&) {
        record->shifted_cost = std::numeric_limits<double>::infinity();
      }
    }
    OcpSolution sol =
        Solve(problem, x, std::nullopt, previous ? &*previous : nullptr);
    if (record->shifted_cost && sol.value > *record->shifted_cost) {
      throw InvariantViolation(StepPrefix(t) +
                               "optimal value exceeds the shifted candidate");
    }
    record->value = sol.value;
    record->iterations = sol.iterations;
    record->converged = sol.converged;
    if (!trace.steps.empty()) {
      StepRecord& last = trace.steps.back();
      last.iss_residual = sol.value - last.value + last.stage_cost;
    }
    return sol;
  };

  for (int t = 0; t < config.steps; ++t) {
    StepRecord rec;
    rec.t = t;
    rec.x = x;
    try {
      OcpSolution sol = solve_at(t, &rec);
      rec.u = sol.first_input();
      rec.stage_cost = config.cost(x, rec.u);

      const Eigen::VectorXd z = problem.model.Feature(x, rec.u);
      const KinkyModel& learner = problem.model.residual();
      rec.width = learner.Width(z);

      const Eigen::VectorXd next = plant.Step(x, rec.u);
      if (config.learning_enabled) {
        const Eigen::VectorXd target = ResidualTarget(
            next, problem.model.Known(x, rec.u), config.selector);
        KinkyModel updated = learner.Observe({z, target});
        for (const Eigen::VectorXd& probe : probes) {
          rec.max_update_deviation =
              std::max(rec.max_update_deviation,
                       ModelUpdateDeviation(learner, updated, probe));
        }
        rec.width_after_update = updated.Width(z);
        problem.model = problem.model.WithResidual(std::move(updated));
      }
      previous = std::move(sol);
      x = next;
    } catch (const HolderViolation& e) {
      throw HolderViolation(StepPrefix(t) + e.what() +
                                "; the data needs a larger learner q",
                            e.first(), e.second(), e.implied_q());
    } catch (const NumericError& e) {
      throw NumericError(StepPrefix(t) + e.what(), t);
    }
    trace.steps.push_back(std::move(rec));
  }

  StepRecord terminal;
  try {
    OcpSolution sol = solve_at(config.steps, &terminal);
    trace.final_iterations = sol.iterations;
    trace.final_converged = sol.converged;
  } catch (const NumericError& e) {
    throw NumericError(StepPrefix(config.steps) + e.what(), config.steps);
  }
  trace.final_state = x;
  trace.final_value = terminal.value;
  trace.final_uncertainty_size = terminal.uncertainty_size;
  trace.final_learner = problem.model.residual();
  return trace;
}

IssReport MakeIssReport(const SimTrace& trace) {
  IssReport report;
  for (const StepRecord& rec : trace.steps) {
    report.residuals.push_back(rec.iss_residual);
    report.widths.push_back(rec.width);
    if (rec.iss_residual > kSolverSlack) ++report.positive_residual_steps;
    if (rec.width <= kZeroWidth) {
      ++report.zero_width_steps;
      report.max_residual_at_zero_width =
          report.zero_width_steps == 1
              ? rec.iss_residual
              : std::max(report.max_residual_at_zero_width, rec.iss_residual);
      if (rec.iss_residual > kSolverSlack) ++report.zero_width_violations;
    }
  }
  report.spearman =
      Pearson(Ranks(report.residuals), Ranks(report.widths));
  return report;
}

ConvergenceReport MakeConvergenceReport(const SimTrace& trace) {
  if (trace.steps.size() < 20) {
    throw InputError("convergence report needs at least 20 steps");
  }
  ConvergenceReport report;
  report.final_state_norm = trace.final_state.lpNorm<Eigen::Infinity>();
  report.final_width = trace.steps.back().width;
  double sum = 0.0;
  for (const StepRecord& rec : trace.steps) {
    if (!report.uncertainty_sizes.empty() &&
        rec.uncertainty_size > report.uncertainty_sizes.back() + 1e-12) {
      report.uncertainty_monotone = false;
    }
    report.uncertainty_sizes.push_back(rec.uncertainty_size);
    sum += rec.width;
    report.width_partial_sums.push_back(sum);
  }
  if (trace.final_uncertainty_size > report.uncertainty_sizes.back() + 1e-12) {
    report.uncertainty_monotone = false;
  }
  report.uncertainty_sizes.push_back(trace.final_uncertainty_size);

  // Last ten states x_{T-9} .. x_T.
  std::vector<double> tail;
  for (std::size_t i = trace.steps.size() - 9; i < trace.steps.size(); ++i) {
    tail.push_back(trace.steps[i].x[0]);
  }
  tail.push_back(trace.final_state[0]);
  report.mean_x1_last10 =
      std::accumulate(tail.begin(), tail.end(), 0.0) / tail.size();
  const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
  report.state_converged = report.final_state_norm <= 1e-2;
  report.plateau_detected =
      !report.state_converged &&
      (*hi - *lo) <= 0.1 * std::abs(report.mean_x1_last10);
  return report;
}

void WriteTraceCsv(const SimTrace& trace, std::ostream& os) {
  std::string header = "t";
  for (int i = 1; i <= trace.state_dim; ++i) header += ",x" + std::to_string(i);
  for (int i = 1; i <= trace.input_dim; ++i) header += ",u" + std::to_string(i);
  header += ",stage_cost,V_star,h_t,C_t,iters,converged,iss_residual\n";
  os << header;
  for (const StepRecord& rec : trace.steps) {
    if (rec.t % trace.record_every != 0) continue;
    std::string row = std::to_string(rec.t);
    for (Eigen::Index i = 0; i < rec.x.size(); ++i) {
      row += ',';
      AppendDouble(row, rec.x[i]);
    }
    for (Eigen::Index i = 0; i < rec.u.size(); ++i) {
      row += ',';
      AppendDouble(row, rec.u[i]);
    }
    for (double v : {rec.stage_cost, rec.value, rec.width,
                     rec.uncertainty_size}) {
      row += ',';
      AppendDouble(row, v);
    }
    row += ',' + std::to_string(rec.iterations) + ',' +
           (rec.converged ? "1" : "0") + ',';
    AppendDouble(row, rec.iss_residual);
    os << row << '\n';
  }
  // Terminal row: x_T with V_T* and C_T; input-dependent fields stay empty.
  std::string row = std::to_string(trace.steps.size());
  for (Eigen::Index i = 0; i < trace.final_state.size(); ++i) {
    row += ',';
    AppendDouble(row, trace.final_state[i]);
  }
  row += std::string(trace.input_dim, ',');
  row += ",,";
  AppendDouble(row, trace.final_value);
  row += ",,";
  AppendDouble(row, trace.final_uncertainty_size);
  row += ',' + std::to_string(trace.final_iterations) + ',' +
         (trace.final_converged ? "1" : "0") + ",\n";
  os << row;
}

}  // namespace kinky_mpc
