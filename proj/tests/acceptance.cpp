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

// Acceptance gate. Runs every criterion at its stated tolerance, prints one
// PASS/FAIL line per criterion and exits nonzero when any of them fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "kinky_mpc/closed_loop.hpp"
#include "kinky_mpc/ocp_solver.hpp"
#include "kinky_mpc/property_suite.hpp"
#include "kinky_mpc/run_config.hpp"

namespace {

using namespace kinky_mpc;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Format(const char* fmt, double a = 0, double b = 0, double c = 0,
                   double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c, d);
  return buf;
}

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Csv(const SimTrace& trace) {
  std::ostringstream os;
  WriteTraceCsv(trace, os);
  return os.str();
}

SimConfig Preset(int horizon, bool learning) {
  SimConfig config = BuildRunConfig(ExamplePreset()).sim;
  config.horizon = horizon;
  config.learning_enabled = learning;
  return config;
}

// Closed-loop runs shared by several criteria, keyed by (N, learning).
struct Runs {
  std::map<std::pair<int, bool>, SimTrace> traces;
  std::map<std::pair<int, bool>, std::string> errors;
  double preset_seconds = 0.0;
};

Runs RunAll() {
  Runs runs;
  for (int horizon : {5, 10, 20}) {
    for (bool learning : {true, false}) {
      const auto start = Clock::now();
      try {
        runs.traces.emplace(std::make_pair(horizon, learning),
                            RunClosedLoop(Preset(horizon, learning)));
      } catch (const std::exception& e) {
        runs.errors.emplace(std::make_pair(horizon, learning), e.what());
      }
      if (horizon == kDefaultHorizon && learning) {
        runs.preset_seconds = Seconds(start);
      }
    }
  }
  return runs;
}

std::string RunName(const std::pair<int, bool>& key) {
  return "N=" + std::to_string(key.first) +
         (key.second ? " learning" : " baseline");
}

const verify::SuiteResult& Suite(double* seconds) {
  static double elapsed = 0.0;
  static const verify::SuiteResult result = [] {
    const auto start = Clock::now();
    verify::SuiteResult r = verify::RunPropertySuite(1, 200, 1);
    elapsed = Seconds(start);
    return r;
  }();
  if (seconds) *seconds = elapsed;
  return result;
}

int Count(const std::map<std::string, int>& m, const std::string& key) {
  const auto it = m.find(key);
  return it == m.end() ? 0 : it->second;
}

Outcome EnvelopeSuite() {
  double seconds = 0.0;
  const verify::SuiteResult& suite = Suite(&seconds);
  Outcome out{seconds < 10.0, ""};
  for (const char* name : {"containment", "interpolation",
                           "monotone_refinement", "symmetry",
                           "predict_holder"}) {
    const int ok = Count(suite.passed, name);
    const int bad = Count(suite.failed, name);
    if (ok != 200 || bad != 0) out.pass = false;
    out.detail += std::string(name) + " " + std::to_string(ok) + "/200, ";
  }
  out.detail += Format("%.2f s", seconds);
  return out;
}

Outcome UpdateBound() {
  const verify::SuiteResult& suite = Suite(nullptr);
  const int ok = Count(suite.passed, "update_bound");
  const int bad = Count(suite.failed, "update_bound");
  return {ok == 200 && bad == 0,
          "update_bound " + std::to_string(ok) + "/200 within 1e-12"};
}

Outcome UncertaintySize(const Runs& runs) {
  KinkyModel model(HolderSpec{1.5, 1.0, Norm::kEuclidean}, 1, 1);
  const Box box{Eigen::VectorXd::Constant(1, 0.0),
                Eigen::VectorXd::Constant(1, 3.0)};
  const double c = model.UncertaintySize(box, 1000);
  // Width is 2 * 1.5 |z|, so the integral over [0, 3] is 13.5.
  bool pass = std::abs(c - 13.5) <= 0.05;
  int violations = 0;
  for (const auto& [key, trace] : runs.traces) {
    for (std::size_t t = 1; t < trace.steps.size(); ++t) {
      if (trace.steps[t].uncertainty_size > trace.steps[t - 1].uncertainty_size) {
        ++violations;
      }
    }
    if (trace.final_uncertainty_size > trace.steps.back().uncertainty_size) {
      ++violations;
    }
  }
  pass = pass && violations == 0 && runs.errors.empty();
  return {pass, Format("C = %.9f, increases across %g runs: %g", c,
                       static_cast<double>(runs.traces.size()),
                       static_cast<double>(violations))};
}

Outcome SolverOracle() {
  const verify::SuiteResult& suite = Suite(nullptr);
  const int ok = Count(suite.passed, "solver_oracle_equivalence");
  const int bad = Count(suite.failed, "solver_oracle_equivalence");

  const LinearPlant plant(Eigen::MatrixXd::Ones(1, 1),
                          Eigen::MatrixXd::Ones(1, 1));
  OcpProblem problem{
      2,
      {Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(1, 1)},
      CompositeModel(plant.AsDynamics(), 1, 1, FeatureKind::kFirstState, {0},
                     KinkyModel(HolderSpec{}, 1, 1)),
      {Eigen::VectorXd::Constant(1, -10.0), Eigen::VectorXd::Constant(1, 10.0)},
      {}};
  const OcpSolution sol = Solve(problem, Eigen::VectorXd::Ones(1));
  const double u0 = sol.inputs(0, 0);
  const bool analytic =
      std::abs(sol.value - 1.5) <= 1e-6 && std::abs(u0 + 0.5) <= 1e-4;
  return {ok == 50 && bad == 0 && analytic,
          Format("grid oracle %g/50 within 1e-4, analytic V = %.9f u0 = %.7f",
                 ok, sol.value, u0)};
}

Outcome ForcedFirstStep(const Runs& runs) {
  Outcome out{true, ""};
  for (int horizon : {5, 10, 20}) {
    const auto it = runs.traces.find({horizon, true});
    if (it == runs.traces.end()) {
      out.pass = false;
      out.detail += "N=" + std::to_string(horizon) + " aborted; ";
      continue;
    }
    const SimTrace& trace = it->second;
    const double u0 = trace.steps[0].u[0];
    const Eigen::VectorXd& x1 = trace.steps[1].x;
    const bool ok = u0 == -2.0 && std::abs(x1[0] - 3.0) <= 1e-6 &&
                    std::abs(x1[1] + 0.665575) <= 1e-6;
    out.pass = out.pass && ok;
    out.detail += "N=" + std::to_string(horizon) +
                  Format(" u0 = %.6f x1 = (%.6f, %.6f); ", u0, x1[0], x1[1]);
  }
  return out;
}

Outcome QualitativeEndpoints(const Runs& runs) {
  const auto on = runs.traces.find({kDefaultHorizon, true});
  const auto off = runs.traces.find({kDefaultHorizon, false});
  if (on == runs.traces.end() || off == runs.traces.end()) {
    return {false, "preset run aborted"};
  }
  const ConvergenceReport learn = MakeConvergenceReport(on->second);
  const ConvergenceReport base = MakeConvergenceReport(off->second);
  const bool pass = learn.final_state_norm <= 1e-2 &&
                    learn.final_width <= 0.05 && base.mean_x1_last10 >= 1.0 &&
                    base.mean_x1_last10 <= 1.4 && runs.preset_seconds < 60.0;
  return {pass, Format("|x_50|_inf = %.3e, final h = %.3e, baseline x1 "
                       "mean = %.4f, %.2f s",
                       learn.final_state_norm, learn.final_width,
                       base.mean_x1_last10, runs.preset_seconds)};
}

Outcome IssLimit(const Runs& runs) {
  int zero_steps = 0;
  int violations = 0;
  double worst = -INFINITY;
  std::string where;
  for (const auto& [key, trace] : runs.traces) {
    for (const StepRecord& rec : trace.steps) {
      if (rec.width > kZeroWidth) continue;
      ++zero_steps;
      if (rec.iss_residual > worst) {
        worst = rec.iss_residual;
        where = RunName(key) + " t=" + std::to_string(rec.t);
      }
      if (rec.iss_residual > 1e-6) ++violations;
    }
  }
  return {violations == 0 && runs.errors.empty(),
          Format("%g zero-width steps, %g above 1e-6, worst residual %.3e",
                 zero_steps, violations, worst) +
              (where.empty() ? "" : " at " + where)};
}

Outcome Determinism() {
  const SimConfig config = Preset(kDefaultHorizon, true);
  const std::string first = Csv(RunClosedLoop(config));
  const std::string second = Csv(RunClosedLoop(config));
  return {first == second,
          first == second ? "identical traces" : "traces differ"};
}

}  // namespace

int main() {
  const Runs runs = RunAll();
  for (const auto& [key, what] : runs.errors) {
    std::printf("note: %s aborted: %s\n", RunName(key).c_str(), what.c_str());
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 envelope properties", EnvelopeSuite},
      {"2 single-update deviation bound", UpdateBound},
      {"3 uncertainty size", [&] { return UncertaintySize(runs); }},
      {"4 solver oracle equivalence", SolverOracle},
      {"5 forced first step", [&] { return ForcedFirstStep(runs); }},
      {"6 qualitative endpoints", [&] { return QualitativeEndpoints(runs); }},
      {"7 ISS zero-width limit", [&] { return IssLimit(runs); }},
      {"8 determinism", Determinism},
  };

  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome out;
    try {
      out = check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.pass) ++failed;
    std::printf("%s criterion %s: %s\n", out.pass ? "PASS" : "FAIL",
                name.c_str(), out.detail.c_str());
  }
  std::printf("%d of %zu criteria passed\n",
              static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
