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
#include "kinky_mpc/closed_loop.hpp"

namespace kinky_mpc {

/// Invalid or malformed run configuration.
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

inline constexpr int kDefaultHorizon = 10;

/// The fully defaulted configuration of the two-state example, also used as
/// the default for every missing key.
nlohmann::json ExamplePreset();

/// Named preset lookup; throws ConfigError for unknown names.
nlohmann::json PresetDocument(const std::string& name);

/// Parses and validates a JSON config text against the schema, filling
/// missing keys from the defaults. Unknown keys are rejected.
nlohmann::json CompleteConfig(const nlohmann::json& user);
nlohmann::json ParseConfigText(const std::string& text);

/// Applies `block.key=value`. The value is parsed as JSON when possible and
/// taken as a string otherwise. The key must exist in the schema.
void ApplyOverride(nlohmann::json& doc, const std::string& assignment);

struct RunConfig {
  SimConfig sim;
  std::string trace_path;
  std::string report_path;
  bool horizon_is_default = true;
};

/// Builds the simulation from a completed document.
RunConfig BuildRunConfig(const nlohmann::json& doc);

}  // namespace kinky_mpc
