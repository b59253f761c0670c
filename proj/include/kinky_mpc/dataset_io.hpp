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

#include <string>

#include "json.hpp"
#include "kinky_mpc/kinky_model.hpp"

namespace kinky_mpc {

/// {"q", "lambda", "norm", "d_in", "d_out", "data": [{"z": [...], "y": [...]}]}
nlohmann::json DatasetToJson(const KinkyModel& model);

/// Inverse of DatasetToJson. Throws InputError on schema problems and
/// HolderViolation when the stored data is inconsistent.
KinkyModel DatasetFromJson(const nlohmann::json& doc);

std::string NormName(Norm norm);
Norm ParseNorm(const std::string& name);

}  // namespace kinky_mpc
