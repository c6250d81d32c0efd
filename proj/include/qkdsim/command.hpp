// Copyright 2026 The qkdsim Authors
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

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qkdsim/config.hpp"
#include "qkdsim/pipeline.hpp"
#include "qkdsim/report.hpp"

namespace qkdsim {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitRuntimeError = 3,
};

/// Entry point of the `qkdsim` tool. `args` excludes the program name.
/// Data goes to --output (or the config's output_path), else to `out`; the
/// one-line summary goes to `out`, or to `err` when data is on `out`.
inline int RunCommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo E91 QKD link-budget simulator", "qkdsim"};

  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<double> eve_prob;
  std::optional<std::uint64_t> key_length;
  std::optional<std::string> output;
  std::optional<std::string> format;
  unsigned jobs = 1;
  bool strict = false;

  auto* config_opt = app.add_option("--config", config_path, "Scenario config file (JSON)");
  app.add_option("--preset", preset, "Bundled scenario: paper-noneve or paper-eve30")
      ->excludes(config_opt);
  app.add_option("--seed", seed, "Base seed; trial i uses seed + i (falls back to $QKDSIM_SEED)");
  app.add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--eve-prob", eve_prob, "Override source.eve_prob")->check(CLI::Range(0.0, 1.0));
  app.add_option("--key-length", key_length, "Override desired_key_length")
      ->check(CLI::PositiveNumber);
  app.add_option("--output", output, "Output file (default: stdout)");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--strict", strict, "Exit 3 if any trial fails");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  ScenarioConfig scenario;
  RunConfig run;
  try {
    if (!config_path.empty()) {
      scenario = LoadConfig(config_path);
    } else if (!preset.empty()) {
      auto p = FindPreset(preset);
      if (!p) throw ConfigError("--preset", "unknown preset '" + preset + "'");
      scenario = *p;
    } else {
      throw ConfigError("--config", "one of --config or --preset is required");
    }
    if (seed) scenario.seed = *seed;
    if (trials) scenario.trials = *trials;
    if (eve_prob) scenario.source.eve_prob = *eve_prob;
    if (key_length) scenario.desired_key_length = *key_length;
    if (output) scenario.output_path = *output;
    if (format) scenario.output_format = *ParseFormat(*format);
    run = Resolve(scenario);
  } catch (const ConfigError& e) {
    err << "qkdsim: " << e.what() << '\n';
    return kExitConfigError;
  }

  const EnsembleSummary summary = RunEnsemble(run, scenario.trials, jobs);

  std::ostringstream data;
  if (scenario.output_format == OutputFormat::kCsv) {
    WriteCsv(data, summary);
  } else {
    WriteJson(data, scenario, run, summary);
  }

  std::ostream* human = &out;
  if (scenario.output_path.empty()) {
    out << data.str();
    human = &err;
  } else {
    std::ofstream file(scenario.output_path, std::ios::binary | std::ios::trunc);
    file << data.str();
    file.close();
    if (!file) {
      err << "qkdsim: cannot write " << scenario.output_path << '\n';
      return kExitRuntimeError;
    }
  }

  const StatSummary& s = summary.stat("s_value");
  const StatSummary& q = summary.stat("raw_qber");
  *human << scenario.scenario_name << ": " << summary.completed << '/' << summary.trials.size()
         << " trials ok, mean S " << std::setprecision(4) << s.mean << ", mean raw QBER " << q.mean
         << ", eve detected in " << std::setprecision(3) << 100.0 * summary.eve_detection_rate
         << "% of trials";
  if (!scenario.output_path.empty()) *human << ", wrote " << scenario.output_path;
  *human << '\n';

  for (const auto& t : summary.trials) {
    if (!t.ok()) err << "qkdsim: trial " << t.index << " failed: " << t.error->message << '\n';
  }
  return strict && summary.failed > 0 ? kExitRuntimeError : kExitOk;
}

}  // namespace qkdsim
