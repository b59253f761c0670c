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

#include "kinky_mpc/dataset_io.hpp"

#include <set>

namespace kinky_mpc {
namespace {

nlohmann::json VectorToJson(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd VectorFromJson(const nlohmann::json& j, int expected,
                               const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != expected) {
    throw InputError(std::string("dataset field '") + what +
                     "' must be an array of length " +
                     std::to_string(expected));
  }
  Eigen::VectorXd v(expected);
  for (int i = 0; i < expected; ++i) {
    if (!j[i].is_number()) {
      throw InputError(std::string("dataset field '") + what +
                       "' must contain numbers");
    }
    v[i] = j[i].get<double>();
  }
  return v;
}

}  // namespace

std::string NormName(Norm norm) {
  return norm == Norm::kChebyshev ? "chebyshev" : "euclidean";
}

Norm ParseNorm(const std::string& name) {
  if (name == "euclidean") return Norm::kEuclidean;
  if (name == "chebyshev") return Norm::kChebyshev;
  throw InputError("unknown norm '" + name + "'");
}

nlohmann::json DatasetToJson(const KinkyModel& model) {
  nlohmann::json doc;
  doc["q"] = model.spec().q;
  doc["lambda"] = model.spec().lambda;
  doc["norm"] = NormName(model.spec().norm);
  doc["d_in"] = model.d_in();
  doc["d_out"] = model.d_out();
  nlohmann::json data = nlohmann::json::array();
  for (const Observation& obs : model.data()) {
    data.push_back({{"z", VectorToJson(obs.z)}, {"y", VectorToJson(obs.y)}});
  }
  doc["data"] = std::move(data);
  return doc;
}

KinkyModel DatasetFromJson(const nlohmann::json& doc) {
  static const std::set<std::string> kKeys = {"q",    "lambda", "norm",
                                              "d_in", "d_out",  "data"};
  if (!doc.is_object()) throw InputError("dataset must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!kKeys.count(key)) throw InputError("unknown dataset key '" + key + "'");
  }
  for (const auto& key : kKeys) {
    if (!doc.contains(key)) {
      throw InputError("dataset is missing key '" + key + "'");
    }
  }
  try {
    HolderSpec spec;
    spec.q = doc.at("q").get<double>();
    spec.lambda = doc.at("lambda").get<double>();
    spec.norm = ParseNorm(doc.at("norm").get<std::string>());
    const int d_in = doc.at("d_in").get<int>();
    const int d_out = doc.at("d_out").get<int>();
    if (d_in <= 0 || d_out <= 0) {
      throw InputError("dataset dimensions must be positive");
    }
    std::vector<Observation> data;
    for (const auto& entry : doc.at("data")) {
      if (!entry.is_object() || !entry.contains("z") || !entry.contains("y")) {
        throw InputError("dataset entries need 'z' and 'y'");
      }
      data.push_back({VectorFromJson(entry.at("z"), d_in, "z"),
                      VectorFromJson(entry.at("y"), d_out, "y")});
    }
    return KinkyModel::FromObservations(spec, d_in, d_out, data);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed dataset: ") + e.what());
  }
}

}  // namespace kinky_mpc
