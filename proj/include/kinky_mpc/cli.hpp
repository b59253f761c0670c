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

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "kinky_mpc/closed_loop.hpp"
#include "kinky_mpc/run_config.hpp"

namespace kinky_mpc::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kRunAborted = 3,
  kVerifyFailed = 4,
};

/// `kinky-mpc run|compare|verify ...`; args excludes the program name.
int Main(const std::vector<std::string>& args, std::ostream& out,
         std::ostream& err);

/// Machine-readable summary of one run.
nlohmann::json MakeRunReport(const SimTrace& trace, const RunConfig& config);

/// Writes `contents` to a sibling temporary file and renames it into place.
void WriteFileAtomic(const std::string& path, const std::string& contents);

/// KINKY_MPC_THREADS if set and positive, else the number of cores.
int ThreadBudget();

}  // namespace kinky_mpc::cli
