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

#include "kinky_mpc/property_suite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "kinky_mpc/dataset_io.hpp"

namespace kinky_mpc::verify {
namespace {

using nlohmann::json;

json ToJson(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd RandomPoint(Rng& rng, int d, double half_width) {
  Eigen::VectorXd z(d);
  for (int k = 0; k < d; ++k) z[k] = rng.Uniform(-half_width, half_width);
  return z;
}

std::uint64_t CaseSeed(std::uint64_t seed, int index, std::uint64_t stream) {
  Rng mix(seed ^ (stream * 0xD1B54A32D192ED03ull));
  for (int i = 0; i <= index % 7; ++i) mix.Next();
  return mix.Next() + static_cast<std::uint64_t>(index) * 0x9E3779B97F4A7C15ull;
}

// Plain rollout used by the grid oracle; independent of ocp_solver.
double LinearCost(const LinearInstance& inst, const Eigen::VectorXd& inputs) {
  Eigen::VectorXd x = inst.x0;
  double cost = 0.0;
  for (int k = 0; k < inst.horizon; ++k) {
    const double u = inputs[k];
    cost += x.dot(inst.q * x) + u * inst.r(0, 0) * u;
    x = inst.a * x + inst.b.col(0) * u;
  }
  return cost;
}

struct CaseOutcome {
  std::vector<std::string> checked;
  std::vector<PropertyFailure> failures;
  json instance;
};

CaseOutcome RunHolderCase(std::uint64_t seed, int index) {
  Rng rng(CaseSeed(seed, index, 1));
  CaseOutcome out;
  const HolderInstance inst = MakeHolderInstance(rng);
  out.failures = CheckEnvelopeProperties(inst, rng, &out.checked);
  if (!out.failures.empty()) out.instance = DatasetToJson(inst.model);
  return out;
}

CaseOutcome RunSolverCase(std::uint64_t seed, int index) {
  Rng rng(CaseSeed(seed, index, 2));
  CaseOutcome out;
  out.checked.push_back("solver_oracle_equivalence");
  const LinearInstance inst = MakeLinearInstance(rng);
  const OcpSolution sol = Solve(inst.ToProblem(), inst.x0);
  const double oracle = GridSearchValue(inst);
  if (std::abs(sol.value - oracle) > 1e-4) {
    out.failures.push_back({"solver_oracle_equivalence",
                            {{"solver_value", sol.value},
                             {"grid_value", oracle},
                             {"solver_inputs", ToJson(sol.inputs.col(0))}}});
    out.instance = inst.ToJson();
  }
  return out;
}

void Merge(SuiteResult& result, const CaseOutcome& outcome, int index,
           std::uint64_t seed) {
  for (const std::string& name : outcome.checked) {
    const bool failed = std::any_of(
        outcome.failures.begin(), outcome.failures.end(),
        [&](const PropertyFailure& f) { return f.property == name; });
    ++(failed ? result.failed : result.passed)[name];
  }
  if (!outcome.failures.empty() && !result.counterexample) {
    const PropertyFailure& f = outcome.failures.front();
    result.counterexample = json{{"property", f.property},
                                 {"case", index},
                                 {"seed", seed},
                                 {"details", f.details},
                                 {"instance", outcome.instance}};
  }
}

}  // namespace

std::uint64_t Rng::Next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double Rng::Uniform(double lo, double hi) {
  const double unit = static_cast<double>(Next() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

int Rng::Integer(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<int>(Next() % span);
}

Eigen::VectorXd GroundTruth::operator()(const Eigen::VectorXd& z) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(centers.size()));
  for (std::size_t i = 0; i < centers.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < centers[i].size(); ++k) {
      best = std::min(best, offsets[i][k] + spec.Cone(z, centers[i][k]));
    }
    out[static_cast<Eigen::Index>(i)] = best;
  }
  return out - shift;
}

HolderInstance MakeHolderInstance(Rng& rng) {
  HolderSpec spec;
  spec.q = rng.Uniform(0.5, 3.0);
  spec.lambda = rng.Integer(0, 1) == 0 ? 0.5 : 1.0;
  spec.norm = rng.Integer(0, 1) == 0 ? Norm::kEuclidean : Norm::kChebyshev;
  const int d_in = rng.Integer(1, 3);
  const int d_out = rng.Integer(1, 2);
  const double domain = 2.0;

  GroundTruth truth;
  truth.spec = spec;
  truth.spec.q = spec.q * rng.Uniform(0.3, 1.0);
  truth.centers.resize(d_out);
  truth.offsets.resize(d_out);
  for (int i = 0; i < d_out; ++i) {
    const int anchors = rng.Integer(1, 8);
    for (int k = 0; k < anchors; ++k) {
      truth.centers[i].push_back(RandomPoint(rng, d_in, domain));
      truth.offsets[i].push_back(rng.Uniform(-1.0, 1.0));
    }
  }
  truth.shift = Eigen::VectorXd::Zero(d_out);
  truth.shift = truth(Eigen::VectorXd::Zero(d_in));

  KinkyModel model(spec, d_in, d_out);
  const int points = rng.Integer(1, 50);
  for (int j = 1; j < points; ++j) {
    const Eigen::VectorXd z = RandomPoint(rng, d_in, domain);
    model = model.Observe({z, truth(z)});
  }
  const Eigen::VectorXd z_next = RandomPoint(rng, d_in, domain);
  return {truth, model, {z_next, truth(z_next)}, domain};
}

std::vector<PropertyFailure> CheckEnvelopeProperties(
    const HolderInstance& inst, Rng& rng, std::vector<std::string>* names) {
  std::vector<PropertyFailure> failures;
  const KinkyModel& model = inst.model;
  const int d = model.d_in();
  const double reach = inst.domain * 1.25;
  const HolderSpec& spec = model.spec();
  auto record = [&](const char* name) {
    if (names) names->push_back(name);
  };

  record("containment");
  for (int i = 0; i < 1000; ++i) {
    const Eigen::VectorXd z = RandomPoint(rng, d, reach);
    const Eigen::VectorXd truth = inst.truth(z);
    const Eigen::VectorXd hi = model.EnvelopeMax(z);
    const Eigen::VectorXd lo = model.EnvelopeMin(z);
    if (((lo - truth).array() > kTightSlack).any() ||
        ((truth - hi).array() > kTightSlack).any()) {
      failures.push_back({"containment",
                          {{"z", ToJson(z)},
                           {"truth", ToJson(truth)},
                           {"lower", ToJson(lo)},
                           {"upper", ToJson(hi)}}});
      break;
    }
  }

  record("interpolation");
  for (const Observation& obs : model.data()) {
    const double err = std::max(
        {(model.EnvelopeMax(obs.z) - obs.y).lpNorm<Eigen::Infinity>(),
         (model.EnvelopeMin(obs.z) - obs.y).lpNorm<Eigen::Infinity>(),
         (model.Predict(obs.z) - obs.y).lpNorm<Eigen::Infinity>()});
    if (err > kPropertySlack) {
      failures.push_back(
          {"interpolation", {{"z", ToJson(obs.z)}, {"error", err}}});
      break;
    }
  }

  const KinkyModel updated = model.Observe(inst.next);
  record("monotone_refinement");
  record("symmetry");
  bool refinement_ok = true, symmetry_ok = true;
  std::vector<Eigen::VectorXd> grid;
  for (int i = 0; i < 200; ++i) grid.push_back(RandomPoint(rng, d, reach));
  grid.push_back(inst.next.z);
  for (const Eigen::VectorXd& z : grid) {
    if (refinement_ok &&
        (((updated.EnvelopeMax(z) - model.EnvelopeMax(z)).array() >
          kTightSlack).any() ||
         ((model.EnvelopeMin(z) - updated.EnvelopeMin(z)).array() >
          kTightSlack).any() ||
         updated.Width(z) > model.Width(z) + kTightSlack)) {
      refinement_ok = false;
      failures.push_back({"monotone_refinement", {{"z", ToJson(z)}}});
    }
    const UncertaintyInterval iv = model.Interval(z);
    if (symmetry_ok &&
        (iv.lo + iv.hi).lpNorm<Eigen::Infinity>() > kPropertySlack) {
      symmetry_ok = false;
      failures.push_back({"symmetry", {{"z", ToJson(z)}}});
    }
  }

  record("predict_holder");
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd a = RandomPoint(rng, d, reach);
    const Eigen::VectorXd b = RandomPoint(rng, d, reach);
    const double change =
        (model.Predict(a) - model.Predict(b)).lpNorm<Eigen::Infinity>();
    if (change > spec.Cone(a, b) + kPropertySlack) {
      failures.push_back({"predict_holder",
                          {{"a", ToJson(a)},
                           {"b", ToJson(b)},
                           {"change", change},
                           {"bound", spec.Cone(a, b)}}});
      break;
    }
  }

  record("update_bound");
  const double bound = model.Width(inst.next.z);
  double worst = 0.0;
  for (const Eigen::VectorXd& z : grid) {
    worst = std::max(worst, ModelUpdateDeviation(model, updated, z));
  }
  if (worst > bound + kTightSlack) {
    failures.push_back({"update_bound",
                        {{"observed_z", ToJson(inst.next.z)},
                         {"deviation", worst},
                         {"bound", bound}}});
  }
  return failures;
}

OcpProblem LinearInstance::ToProblem() const {
  const LinearPlant plant(a, b);
  const auto n = static_cast<int>(a.rows());
  // The learner is present but never updated, so it predicts zero.
  CompositeModel model(plant.AsDynamics(), n, 1, FeatureKind::kFirstState,
                       {0}, KinkyModel(HolderSpec{}, 1, 1));
  return OcpProblem{horizon, StageCost{q, r}, std::move(model), box, {}};
}

json LinearInstance::ToJson() const {
  auto flat = [](const Eigen::MatrixXd& mat) {
    std::vector<double> out;
    for (Eigen::Index r = 0; r < mat.rows(); ++r) {
      for (Eigen::Index c = 0; c < mat.cols(); ++c) out.push_back(mat(r, c));
    }
    return out;
  };
  return json{{"A", flat(a)},          {"B", flat(b)},
              {"Q", flat(q)},          {"R", flat(r)},
              {"u_lo", box.lo[0]},     {"u_hi", box.hi[0]},
              {"N", horizon},          {"x0", verify::ToJson(x0)}};
}

LinearInstance MakeLinearInstance(Rng& rng) {
  LinearInstance inst;
  const int n = rng.Integer(1, 2);
  inst.horizon = rng.Integer(1, 3);
  inst.a.resize(n, n);
  inst.b.resize(n, 1);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) inst.a(r, c) = rng.Uniform(-1.2, 1.2);
    const double mag = rng.Uniform(0.2, 1.0);
    inst.b(r, 0) = rng.Integer(0, 1) == 0 ? mag : -mag;
  }
  Eigen::MatrixXd m(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) m(r, c) = rng.Uniform(-1.0, 1.0);
  }
  inst.q = m * m.transpose() + 0.2 * Eigen::MatrixXd::Identity(n, n);
  inst.r = Eigen::MatrixXd::Constant(1, 1, rng.Uniform(0.1, 2.0));
  inst.box.lo = Eigen::VectorXd::Constant(1, -rng.Uniform(0.2, 2.0));
  inst.box.hi = Eigen::VectorXd::Constant(1, rng.Uniform(0.2, 2.0));
  inst.x0 = RandomPoint(rng, n, 3.0);
  return inst;
}

double GridSearchValue(const LinearInstance& inst) {
  constexpr int kPoints = 21;
  const int dims = inst.horizon;
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(dims, inst.box.lo[0]);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(dims, inst.box.hi[0]);
  Eigen::VectorXd best_u = Eigen::VectorXd::Zero(dims);
  double best = LinearCost(inst, best_u);
  for (int level = 0; level < 80; ++level) {
    const Eigen::VectorXd spacing = (hi - lo) / (kPoints - 1);
    std::vector<int> index(dims, 0);
    Eigen::VectorXd u(dims);
    while (true) {
      for (int k = 0; k < dims; ++k) u[k] = lo[k] + spacing[k] * index[k];
      const double c = LinearCost(inst, u);
      if (c < best) {
        best = c;
        best_u = u;
      }
      int k = 0;
      while (k < dims && ++index[k] == kPoints) index[k++] = 0;
      if (k == dims) break;
    }
    if (spacing.maxCoeff() < 1e-10) break;
    for (int k = 0; k < dims; ++k) {
      lo[k] = std::max(inst.box.lo[0], best_u[k] - 2.0 * spacing[k]);
      hi[k] = std::min(inst.box.hi[0], best_u[k] + 2.0 * spacing[k]);
    }
  }
  return best;
}

SuiteResult RunPropertySuite(std::uint64_t seed, int cases, int threads) {
  if (cases < 1) throw InputError("verify needs at least one case");
  const int solver_cases = std::min(cases, 50);
  const int total = cases + solver_cases;
  std::vector<CaseOutcome> outcomes(total);
  auto work = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      outcomes[i] = i < cases ? RunHolderCase(seed, i)
                              : RunSolverCase(seed, i - cases);
    }
  };
  threads = std::clamp(threads, 1, total);
  if (threads == 1) {
    work(0, total);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (total + threads - 1) / threads;
    for (int begin = 0; begin < total; begin += chunk) {
      pool.emplace_back(work, begin, std::min(total, begin + chunk));
    }
    for (std::thread& th : pool) th.join();
  }
  SuiteResult result;
  for (int i = 0; i < total; ++i) {
    Merge(result, outcomes[i], i < cases ? i : i - cases, seed);
  }
  return result;
}

SuiteResult VerifyDataset(const json& dataset) {
  SuiteResult result;
  CaseOutcome outcome;
  outcome.checked.push_back("holder_consistency");
  try {
    const KinkyModel model = DatasetFromJson(dataset);
    outcome.checked.push_back("interpolation");
    for (std::size_t i = 0; i < model.data().size(); ++i) {
      const Observation& obs = model.data()[i];
      const double err =
          (model.Predict(obs.z) - obs.y).lpNorm<Eigen::Infinity>();
      if (err > kPropertySlack) {
        outcome.failures.push_back(
            {"interpolation", {{"index", i}, {"error", err}}});
        break;
      }
    }
  } catch (const HolderViolation& e) {
    outcome.failures.push_back(
        {"holder_consistency",
         {{"pair", {e.first(), e.second()}},
          {"implied_q", e.implied_q()},
          {"configured_q", dataset.value("q", 0.0)},
          {"message", e.what()}}});
  }
  outcome.instance = dataset;
  Merge(result, outcome, 0, 0);
  return result;
}

}  // namespace kinky_mpc::verify
