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

#include "kinky_mpc/run_config.hpp"

#include "kinky_mpc/dataset_io.hpp"

namespace kinky_mpc {
namespace {

using nlohmann::json;

// Merges `user` into `defaults`, rejecting keys the defaults do not have.
// plant.params is free-form and validated by the plant registry.
void MergeStrict(json& defaults, const json& user, const std::string& path) {
  if (!user.is_object()) {
    throw ConfigError("config block '" + path + "' must be an object");
  }
  for (const auto& [key, value] : user.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (!defaults.contains(key)) {
      throw ConfigError("unknown config key '" + here + "'");
    }
    if (here == "plant.params") {
      if (value.is_object() && defaults[key].is_object()) {
        defaults[key].update(value);
      } else {
        defaults[key] = value;
      }
    } else if (defaults[key].is_object()) {
      MergeStrict(defaults[key], value, here);
    } else {
      defaults[key] = value;
    }
  }
}

const json& At(const json& doc, const char* block, const char* key) {
  return doc.at(block).at(key);
}

double Number(const json& doc, const char* block, const char* key) {
  const json& v = At(doc, block, key);
  if (!v.is_number()) {
    throw ConfigError(std::string(block) + "." + key + " must be a number");
  }
  return v.get<double>();
}

int Integer(const json& doc, const char* block, const char* key) {
  const json& v = At(doc, block, key);
  if (!v.is_number_integer()) {
    throw ConfigError(std::string(block) + "." + key + " must be an integer");
  }
  return v.get<int>();
}

Eigen::VectorXd Vector(const json& v, const std::string& name,
                       Eigen::Index expected) {
  if (!v.is_array() || (expected >= 0 &&
                        static_cast<Eigen::Index>(v.size()) != expected)) {
    throw ConfigError(name + " must be an array of " +
                      std::to_string(expected) + " numbers");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(name + " must contain numbers");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

Eigen::MatrixXd RowMajor(const json& v, const std::string& name, int dim) {
  const Eigen::VectorXd flat = Vector(v, name, dim * dim);
  Eigen::MatrixXd out(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) out(r, c) = flat[r * dim + c];
  }
  return out;
}

}  // namespace

json ExamplePreset() {
  return json{
      {"plant", {{"name", "example_2d"}, {"params", json::object()}}},
      {"learner",
       {{"q", 1.5},
        {"lambda", 1.0},
        {"norm", "euclidean"},
        {"feature", "x1"},
        {"selector", {2}}}},
      {"ocp",
       {{"N", kDefaultHorizon},
        {"Q", {1.0, 0.0, 0.0, 1.0}},
        {"R", {1.0}},
        {"u_lo", {-2.0}},
        {"u_hi", {2.0}}}},
      {"sim",
       {{"x0", {3.0, 0.0}},
        {"T", 50},
        {"learning", true},
        {"c_box", {{-0.5, 3.5}}},
        {"c_grid", 400},
        {"record_every", 1}}},
      {"solver",
       {{"k_max", 500},
        {"tol_grad", 1e-8},
        {"tol_cost", 1e-12},
        {"fd_step", 1e-6}}},
      {"output", {{"trace_path", "trace.csv"}, {"report_path", "report.json"}}},
  };
}

json PresetDocument(const std::string& name) {
  if (name == "paper_example") return ExamplePreset();
  throw ConfigError("unknown preset '" + name + "'");
}

json CompleteConfig(const json& user) {
  json doc = ExamplePreset();
  MergeStrict(doc, user, "");
  return doc;
}

json ParseConfigText(const std::string& text) {
  json user;
  try {
    user = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config JSON: ") + e.what());
  }
  return CompleteConfig(user);
}

void ApplyOverride(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not KEY=VALUE");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  // Build a nested patch and merge it strictly so unknown keys are caught.
  json patch = value;
  std::string rest = key;
  std::vector<std::string> parts;
  for (std::size_t pos; (pos = rest.find('.')) != std::string::npos;) {
    parts.push_back(rest.substr(0, pos));
    rest = rest.substr(pos + 1);
  }
  parts.push_back(rest);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    if (it->empty()) throw ConfigError("override key '" + key + "' is empty");
    patch = json{{*it, patch}};
  }
  MergeStrict(doc, patch, "");
}

RunConfig BuildRunConfig(const json& doc) {
  RunConfig rc;
  SimConfig& sim = rc.sim;
  try {
    const json& plant = doc.at("plant");
    if (!plant.at("name").is_string()) {
      throw ConfigError("plant.name must be a string");
    }
    sim.plant = MakePlant(plant.at("name").get<std::string>(),
                          plant.at("params"));
    const int n = sim.plant.plant->state_dim();
    const int m = sim.plant.plant->input_dim();

    sim.holder.q = Number(doc, "learner", "q");
    sim.holder.lambda = Number(doc, "learner", "lambda");
    sim.holder.norm =
        ParseNorm(At(doc, "learner", "norm").get<std::string>());
    sim.feature =
        ParseFeature(At(doc, "learner", "feature").get<std::string>());
    const json& selector = At(doc, "learner", "selector");
    if (!selector.is_array() || selector.empty()) {
      throw ConfigError("learner.selector must be a non-empty array");
    }
    for (const json& s : selector) {
      if (!s.is_number_integer() || s.get<int>() < 1 || s.get<int>() > n) {
        throw ConfigError("learner.selector entries are 1-based state indices");
      }
      sim.selector.push_back(s.get<int>() - 1);
    }

    sim.horizon = Integer(doc, "ocp", "N");
    rc.horizon_is_default = sim.horizon == kDefaultHorizon;
    sim.cost.q = RowMajor(At(doc, "ocp", "Q"), "ocp.Q", n);
    sim.cost.r = RowMajor(At(doc, "ocp", "R"), "ocp.R", m);
    sim.input_box.lo = Vector(At(doc, "ocp", "u_lo"), "ocp.u_lo", m);
    sim.input_box.hi = Vector(At(doc, "ocp", "u_hi"), "ocp.u_hi", m);

    sim.x0 = Vector(At(doc, "sim", "x0"), "sim.x0", n);
    sim.steps = Integer(doc, "sim", "T");
    if (!At(doc, "sim", "learning").is_boolean()) {
      throw ConfigError("sim.learning must be a boolean");
    }
    sim.learning_enabled = At(doc, "sim", "learning").get<bool>();
    const int d_in = FeatureDim(sim.feature, n, m);
    const json& c_box = At(doc, "sim", "c_box");
    if (!c_box.is_array() || static_cast<int>(c_box.size()) != d_in) {
      throw ConfigError("sim.c_box needs one [lo, hi] pair per feature axis");
    }
    sim.uncertainty_box.lo.resize(d_in);
    sim.uncertainty_box.hi.resize(d_in);
    for (int k = 0; k < d_in; ++k) {
      const Eigen::VectorXd pair = Vector(c_box[k], "sim.c_box entry", 2);
      sim.uncertainty_box.lo[k] = pair[0];
      sim.uncertainty_box.hi[k] = pair[1];
    }
    sim.uncertainty_grid = Integer(doc, "sim", "c_grid");
    sim.record_every = Integer(doc, "sim", "record_every");

    sim.solver.k_max = Integer(doc, "solver", "k_max");
    sim.solver.tol_grad = Number(doc, "solver", "tol_grad");
    sim.solver.tol_cost = Number(doc, "solver", "tol_cost");
    sim.solver.fd_step = Number(doc, "solver", "fd_step");

    rc.trace_path = At(doc, "output", "trace_path").get<std::string>();
    rc.report_path = At(doc, "output", "report_path").get<std::string>();
    sim.Validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return rc;
}

}  // namespace kinky_mpc
