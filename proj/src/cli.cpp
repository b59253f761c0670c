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

#include "kinky_mpc/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "kinky_mpc/property_suite.hpp"

namespace kinky_mpc::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonOptions {
  std::string preset;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = ".";
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json LoadDocument(const CommonOptions& opts) {
  if (!opts.preset.empty() && !opts.config_path.empty()) {
    throw ConfigError("--preset and --config are mutually exclusive");
  }
  json doc = !opts.config_path.empty()
                 ? ParseConfigText(ReadFile(opts.config_path))
                 : PresetDocument(opts.preset.empty() ? "paper_example"
                                                      : opts.preset);
  for (const std::string& assignment : opts.overrides) {
    ApplyOverride(doc, assignment);
  }
  return doc;
}

std::string Resolve(const std::string& out_dir, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? p.string() : (fs::path(out_dir) / p).string();
}

std::string WithSuffix(const std::string& path, const std::string& suffix) {
  const fs::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix + p.extension().string()))
      .string();
}

std::string TraceCsv(const SimTrace& trace) {
  std::ostringstream os;
  WriteTraceCsv(trace, os);
  return os.str();
}

double ClosedLoopCost(const SimTrace& trace) {
  double sum = 0.0;
  for (const StepRecord& rec : trace.steps) sum += rec.stage_cost;
  return sum;
}

template <typename Fn>
int Guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const HolderViolation& e) {
    err << "aborted: " << e.what() << '\n';
    return kRunAborted;
  } catch (const NumericError& e) {
    err << "aborted: " << e.what() << '\n';
    return kRunAborted;
  } catch (const InvariantViolation& e) {
    err << "aborted: " << e.what() << '\n';
    return kRunAborted;
  } catch (const InputError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "aborted: " << e.what() << '\n';
    return kRunAborted;
  }
}

int CmdRun(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    const json doc = LoadDocument(opts);
    const RunConfig config = BuildRunConfig(doc);
    const SimTrace trace = RunClosedLoop(config.sim);
    const json report = MakeRunReport(trace, config);
    WriteFileAtomic(Resolve(opts.out_dir, config.trace_path), TraceCsv(trace));
    WriteFileAtomic(Resolve(opts.out_dir, config.report_path),
                    report.dump(2) + "\n");
    out << "final |x|_inf = " << report["final_state_inf_norm"].get<double>()
        << ", final h = " << report["final_h"].get<double>() << '\n';
    return static_cast<int>(kOk);
  });
}

int CmdCompare(const CommonOptions& opts, std::ostream& out,
               std::ostream& err) {
  return Guarded(err, [&] {
    json on_doc = LoadDocument(opts);
    json off_doc = on_doc;
    on_doc["sim"]["learning"] = true;
    off_doc["sim"]["learning"] = false;
    const RunConfig on_cfg = BuildRunConfig(on_doc);
    const RunConfig off_cfg = BuildRunConfig(off_doc);

    std::optional<SimTrace> on, off;
    if (ThreadBudget() >= 2) {
      auto future = std::async(std::launch::async,
                               [&] { return RunClosedLoop(off_cfg.sim); });
      on = RunClosedLoop(on_cfg.sim);
      off = future.get();
    } else {
      on = RunClosedLoop(on_cfg.sim);
      off = RunClosedLoop(off_cfg.sim);
    }

    const std::string trace = Resolve(opts.out_dir, on_cfg.trace_path);
    const std::string report = Resolve(opts.out_dir, on_cfg.report_path);
    WriteFileAtomic(WithSuffix(trace, "_learning"), TraceCsv(*on));
    WriteFileAtomic(WithSuffix(trace, "_baseline"), TraceCsv(*off));
    const json on_report = MakeRunReport(*on, on_cfg);
    const json off_report = MakeRunReport(*off, off_cfg);
    WriteFileAtomic(WithSuffix(report, "_learning"), on_report.dump(2) + "\n");
    WriteFileAtomic(WithSuffix(report, "_baseline"), off_report.dump(2) + "\n");

    auto side = [](const SimTrace& t) {
      return json{{"final_state_inf_norm",
                   t.final_state.lpNorm<Eigen::Infinity>()},
                  {"closed_loop_cost", ClosedLoopCost(t)},
                  {"final_C", t.final_uncertainty_size}};
    };
    json summary{{"learning", side(*on)}, {"baseline", side(*off)}};
    summary["learning_reaches_smaller_state"] =
        summary["learning"]["final_state_inf_norm"].get<double>() <
        summary["baseline"]["final_state_inf_norm"].get<double>();
    summary["learning_has_lower_cost"] =
        summary["learning"]["closed_loop_cost"].get<double>() <=
        summary["baseline"]["closed_loop_cost"].get<double>();
    WriteFileAtomic(WithSuffix(report, "_compare"), summary.dump(2) + "\n");
    out << "learning: final |x|_inf = "
        << summary["learning"]["final_state_inf_norm"].get<double>()
        << ", baseline: final |x|_inf = "
        << summary["baseline"]["final_state_inf_norm"].get<double>() << '\n';
    return static_cast<int>(kOk);
  });
}

int CmdVerify(const CommonOptions& opts, std::uint64_t seed, int cases,
              const std::string& dataset, std::ostream& out,
              std::ostream& err) {
  return Guarded(err, [&]() -> int {
    if (cases < 1) throw ConfigError("--cases must be at least 1");
    verify::SuiteResult result;
    if (!dataset.empty()) {
      json doc;
      try {
        doc = json::parse(ReadFile(dataset));
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed dataset JSON: ") + e.what());
      }
      result = verify::VerifyDataset(doc);
    } else {
      result = verify::RunPropertySuite(seed, cases, ThreadBudget());
    }
    for (const auto& [name, passed] : result.passed) {
      const auto it = result.failed.find(name);
      out << name << ": " << passed << " passed, "
          << (it == result.failed.end() ? 0 : it->second) << " failed\n";
    }
    for (const auto& [name, failed] : result.failed) {
      if (!result.passed.count(name)) {
        out << name << ": 0 passed, " << failed << " failed\n";
      }
    }
    if (result.ok()) return kOk;
    const std::string path = Resolve(opts.out_dir, "counterexample.json");
    WriteFileAtomic(path, result.counterexample->dump(2) + "\n");
    err << "property '" << (*result.counterexample)["property"].get<std::string>()
        << "' failed; counterexample written to " << path << '\n';
    return kVerifyFailed;
  });
}

}  // namespace

int ThreadBudget() {
  if (const char* env = std::getenv("KINKY_MPC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  const unsigned cores = std::thread::hardware_concurrency();
  return cores == 0 ? 1 : static_cast<int>(cores);
}

void WriteFileAtomic(const std::string& path, const std::string& contents) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    os << contents;
    if (!os.flush()) {
      throw std::runtime_error("cannot write '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, target);
}

json MakeRunReport(const SimTrace& trace, const RunConfig& config) {
  const IssReport iss = MakeIssReport(trace);
  json report;
  report["learning"] = config.sim.learning_enabled;
  report["steps"] = trace.steps.size();
  report["horizon"] = {
      {"N", config.sim.horizon},
      {"source", config.horizon_is_default ? "default" : "config"}};
  report["final_state"] = std::vector<double>(
      trace.final_state.data(),
      trace.final_state.data() + trace.final_state.size());
  report["final_state_inf_norm"] = trace.final_state.lpNorm<Eigen::Infinity>();
  report["final_h"] = trace.steps.back().width;
  report["C_first"] = trace.steps.front().uncertainty_size;
  report["C_last"] = trace.final_uncertainty_size;
  report["closed_loop_cost"] = ClosedLoopCost(trace);
  int nonconverged = 0;
  for (const StepRecord& rec : trace.steps) nonconverged += !rec.converged;
  report["solver_nonconverged_steps"] = nonconverged;
  report["iss"] = {
      {"zero_h_steps", iss.zero_width_steps},
      {"zero_h_violations", iss.zero_width_violations},
      {"max_residual_at_zero_h", iss.max_residual_at_zero_width},
      {"positive_residual_steps", iss.positive_residual_steps},
      {"spearman_r_h", iss.spearman},
      {"holds", iss.holds()}};
  if (trace.steps.size() >= 20) {
    const ConvergenceReport conv = MakeConvergenceReport(trace);
    report["convergence"] = {
        {"state_converged", conv.state_converged},
        {"plateau_detected", conv.plateau_detected},
        {"mean_x1_last10", conv.mean_x1_last10},
        {"C_monotone", conv.uncertainty_monotone},
        {"h_sum", conv.width_partial_sums.back()}};
  }
  return report;
}

int Main(const std::vector<std::string>& args, std::ostream& out,
         std::ostream& err) {
  CLI::App app{"Adaptive MPC with kinky-inference learning", "kinky-mpc"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::uint64_t seed = 1;
  int cases = 200;
  std::string dataset;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--preset", opts.preset, "Named configuration preset");
    sub->add_option("--config", opts.config_path, "JSON run configuration");
    sub->add_option("--set", opts.overrides, "Override block.key=value")
        ->allow_extra_args(false);
    sub->add_option("--out", opts.out_dir, "Output directory");
  };
  CLI::App* run = app.add_subcommand("run", "Closed-loop simulation");
  add_common(run);
  CLI::App* compare =
      app.add_subcommand("compare", "Learning on versus learning off");
  add_common(compare);
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "Randomized property suite");
  add_common(verify_cmd);
  verify_cmd->add_option("--seed", seed, "Random seed");
  verify_cmd->add_option("--cases", cases, "Number of random instances");
  verify_cmd->add_option("--dataset", dataset,
                         "Check a serialized dataset instead");

  std::vector<std::string> argv;
  argv.reserve(args.size());
  for (auto it = args.rbegin(); it != args.rend(); ++it) argv.push_back(*it);
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kConfigError;
  }

  if (*run) return CmdRun(opts, out, err);
  if (*compare) return CmdCompare(opts, out, err);
  return CmdVerify(opts, seed, cases, dataset, out, err);
}

}  // namespace kinky_mpc::cli
