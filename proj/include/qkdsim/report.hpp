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

// Ensemble output: CSV (header + one row per trial + summary block) and a
// schema-versioned JSON envelope. Doubles use the shortest representation
// that round-trips, so output is byte-stable for a given ensemble.

#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

#include "json.hpp"
#include "qkdsim/config.hpp"
#include "qkdsim/pipeline.hpp"
#include "qkdsim/random_stream.hpp"

namespace qkdsim {

inline constexpr int kJsonSchemaVersion = 1;

inline constexpr std::array<std::string_view, 11> kCsvColumns{
    "trial_index",        "seed",
    "s_value",            "raw_qber",
    "reconciled_corrected_qber", "reconciled_uncorrected_qber",
    "raw_key_rate",       "reconciled_key_rate",
    "secret_key_rate",    "elapsed_time",
    "eve_detected"};

inline std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

inline void WriteCsv(std::ostream& os, const EnsembleSummary& summary) {
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) os << (i ? "," : "") << kCsvColumns[i];
  os << '\n';
  for (const auto& t : summary.trials) {
    if (!t.ok()) {
      // Errors may contain commas; keep them out of the data rows.
      os << "# trial " << t.index << " (seed " << t.seed << ") failed: " << t.error->message << '\n';
      continue;
    }
    const LinkBudget& b = *t.budget;
    os << t.index << ',' << t.seed;
    for (const auto& f : kStatisticFields) os << ',' << FormatDouble(b.*f.member);
    os << ',' << (b.eve_detected ? "true" : "false") << '\n';
  }
  os << "\n# summary\nstatistic,count,mean,stddev,min,max\n";
  for (std::size_t i = 0; i < kStatisticFields.size(); ++i) {
    const StatSummary& s = summary.stats[i];
    os << kStatisticFields[i].name << ',' << s.count << ',' << FormatDouble(s.mean) << ','
       << FormatDouble(s.stddev) << ',' << FormatDouble(s.min) << ',' << FormatDouble(s.max) << '\n';
  }
  os << "eve_detection_rate," << summary.completed << ',' << FormatDouble(summary.eve_detection_rate)
     << ",,,\n";
  os << "failed_trials," << summary.failed << ",,,,\n";
}

inline nlohmann::ordered_json BudgetJson(const LinkBudget& b) {
  nlohmann::ordered_json j;
  for (const auto& f : kStatisticFields) j[std::string(f.name)] = b.*f.member;
  j["eve_detected"] = b.eve_detected;
  j["discard_recommended"] = b.discard_recommended;
  j["leakage_exceeds_budget"] = b.leakage_exceeds_budget;
  j["secret_keys_match"] = b.secret_keys_match;
  j["raw_key_length"] = b.raw_key_length;
  j["secret_key_length"] = b.secret_key_length;
  j["leaked_bits"] = b.leaked_bits;
  j["leaked_parities"] = b.leaked_parities;
  j["corrected_errors"] = b.corrected_errors;
  j["residual_errors"] = b.residual_errors;
  j["pump_count"] = b.pump_count;
  j["coincidence_count"] = b.coincidence_count;
  j["same_basis_count"] = b.same_basis_count;
  return j;
}

inline nlohmann::ordered_json EnsembleJson(const ScenarioConfig& scenario, const RunConfig& run,
                                           const EnsembleSummary& summary) {
  nlohmann::ordered_json j;
  j["schema"] = "qkdsim.ensemble";
  j["schema_version"] = kJsonSchemaVersion;
  j["rng"] = RandomStream::kAlgorithm;
  ScenarioConfig resolved = scenario;
  resolved.seed = run.seed;
  resolved.desired_key_length = run.desired_key_length;
  j["config"] = ToJson(resolved);

  auto trials = nlohmann::ordered_json::array();
  for (const auto& t : summary.trials) {
    nlohmann::ordered_json row;
    row["trial_index"] = t.index;
    row["seed"] = t.seed;
    row["ok"] = t.ok();
    if (t.ok()) {
      row["link_budget"] = BudgetJson(*t.budget);
    } else {
      row["error"] = {{"stage", StageName(t.error->stage)}, {"message", t.error->message}};
    }
    trials.push_back(std::move(row));
  }
  j["trials"] = std::move(trials);

  nlohmann::ordered_json s;
  for (std::size_t i = 0; i < kStatisticFields.size(); ++i) {
    const StatSummary& st = summary.stats[i];
    s[std::string(kStatisticFields[i].name)] = {
        {"count", st.count}, {"mean", st.mean}, {"stddev", st.stddev},
        {"min", st.min},     {"max", st.max}};
  }
  s["eve_detection_rate"] = summary.eve_detection_rate;
  s["completed_trials"] = summary.completed;
  s["failed_trials"] = summary.failed;
  j["summary"] = std::move(s);
  return j;
}

inline void WriteJson(std::ostream& os, const ScenarioConfig& scenario, const RunConfig& run,
                      const EnsembleSummary& summary) {
  os << EnsembleJson(scenario, run, summary).dump(2) << '\n';
}

}  // namespace qkdsim
