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

// Bit generation -> Cascade -> ParityHash for one trial, and seeded
// ensembles of trials.

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "qkdsim/bitgen_e91.hpp"
#include "qkdsim/cascade.hpp"
#include "qkdsim/core.hpp"
#include "qkdsim/parity_hash.hpp"
#include "qkdsim/random_stream.hpp"

namespace qkdsim {

struct LinkBudget {
  double s_value = 0.0;
  double raw_qber = 0.0;
  double reconciled_corrected_qber = 0.0;    // corrected bits / total bits
  double reconciled_uncorrected_qber = 0.0;  // remaining errors / total bits
  double raw_key_rate = 0.0;                 // sifted coincidences / s
  double reconciled_key_rate = 0.0;          // uncompromised bits / s
  double secret_key_rate = 0.0;              // secret bits / s
  double elapsed_time = 0.0;                 // s
  bool eve_detected = false;                 // |S| <= 2
  std::uint64_t trial_seed = 0;

  // Diagnostics.
  bool discard_recommended = false;
  // Reconciliation leaked more bits than privacy amplification removes.
  bool leakage_exceeds_budget = false;
  bool secret_keys_match = false;
  std::uint64_t raw_key_length = 0;
  std::uint64_t secret_key_length = 0;
  std::uint64_t leaked_bits = 0;
  std::uint64_t leaked_parities = 0;
  std::uint64_t corrected_errors = 0;
  std::uint64_t residual_errors = 0;
  std::uint64_t pump_count = 0;
  std::uint64_t coincidence_count = 0;
  std::uint64_t same_basis_count = 0;
};

inline bool EveDetected(double s_value) { return std::abs(s_value) <= kClassicalLimit; }

/// Runs all three stages on one RandomStream seeded with cfg.seed. A run in
/// which Eve is detected still completes every stage and is flagged
/// discard_recommended. Stage failures propagate as qkdsim::Error.
inline LinkBudget RunTrial(const RunConfig& cfg) {
  Validate(cfg);
  RandomStream stream(cfg.seed);

  BitGenResult raw = RunBitGeneration(cfg, stream);
  const std::size_t n = raw.alice_raw_key.size();
  CascadeResult rec = RunCascade(std::move(raw.alice_raw_key), std::move(raw.bob_raw_key),
                                 cfg.cascade_iterations, raw.raw_qber, stream);
  const auto d = static_cast<std::size_t>(cfg.desired_key_length);
  SecretKeyResult secret =
      RunPrivacyAmplification(rec.alice_key, rec.bob_key, d, raw.elapsed_time);

  LinkBudget lb;
  lb.trial_seed = cfg.seed;
  lb.s_value = raw.s_value;
  lb.raw_qber = raw.raw_qber;
  lb.reconciled_corrected_qber = static_cast<double>(rec.corrected_errors) / n;
  lb.reconciled_uncorrected_qber = static_cast<double>(rec.residual_errors) / n;
  lb.raw_key_rate = raw.raw_key_rate;
  const std::uint64_t uncompromised = rec.leaked_bits >= n ? 0 : n - rec.leaked_bits;
  lb.reconciled_key_rate = static_cast<double>(uncompromised) / raw.elapsed_time;
  lb.secret_key_rate = secret.secret_key_rate;
  lb.elapsed_time = raw.elapsed_time;
  lb.eve_detected = EveDetected(raw.s_value);
  lb.leakage_exceeds_budget = uncompromised < d;
  lb.discard_recommended = lb.eve_detected || lb.leakage_exceeds_budget;
  lb.secret_keys_match = secret.alice_secret == secret.bob_secret;
  lb.raw_key_length = n;
  lb.secret_key_length = secret.alice_secret.size();
  lb.leaked_bits = rec.leaked_bits;
  lb.leaked_parities = rec.leaked_parities;
  lb.corrected_errors = rec.corrected_errors;
  lb.residual_errors = rec.residual_errors;
  lb.pump_count = raw.pump_count;
  lb.coincidence_count = raw.coincidence_count;
  lb.same_basis_count = raw.same_basis_count;
  return lb;
}

struct TrialError {
  Stage stage = Stage::kBitGeneration;
  std::string message;
};

struct TrialOutcome {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  std::optional<LinkBudget> budget;
  std::optional<TrialError> error;

  bool ok() const { return budget.has_value(); }
};

struct StatSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1); 0 for fewer than two values
  double min = 0.0;
  double max = 0.0;
};

inline StatSummary Summarize(std::span<const double> values) {
  StatSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

/// Names and accessors of the summarised LinkBudget statistics, in output order.
struct StatisticField {
  std::string_view name;
  double LinkBudget::*member;
};

inline constexpr std::array<StatisticField, 8> kStatisticFields{{
    {"s_value", &LinkBudget::s_value},
    {"raw_qber", &LinkBudget::raw_qber},
    {"reconciled_corrected_qber", &LinkBudget::reconciled_corrected_qber},
    {"reconciled_uncorrected_qber", &LinkBudget::reconciled_uncorrected_qber},
    {"raw_key_rate", &LinkBudget::raw_key_rate},
    {"reconciled_key_rate", &LinkBudget::reconciled_key_rate},
    {"secret_key_rate", &LinkBudget::secret_key_rate},
    {"elapsed_time", &LinkBudget::elapsed_time},
}};

struct EnsembleSummary {
  std::vector<TrialOutcome> trials;
  std::array<StatSummary, kStatisticFields.size()> stats{};
  double eve_detection_rate = 0.0;  // over completed trials
  std::size_t completed = 0;
  std::size_t failed = 0;

  const StatSummary& stat(std::string_view name) const {
    for (std::size_t i = 0; i < kStatisticFields.size(); ++i) {
      if (kStatisticFields[i].name == name) return stats[i];
    }
    throw std::out_of_range("unknown statistic: " + std::string(name));
  }
};

/// Recomputes every aggregate from `trials`.
inline void Aggregate(EnsembleSummary& summary) {
  std::vector<double> values;
  summary.completed = 0;
  summary.failed = 0;
  std::size_t detected = 0;
  for (const auto& t : summary.trials) {
    if (t.ok()) {
      ++summary.completed;
      detected += t.budget->eve_detected;
    } else {
      ++summary.failed;
    }
  }
  for (std::size_t f = 0; f < kStatisticFields.size(); ++f) {
    values.clear();
    for (const auto& t : summary.trials) {
      if (t.ok()) values.push_back((*t.budget).*kStatisticFields[f].member);
    }
    summary.stats[f] = Summarize(values);
  }
  summary.eve_detection_rate =
      summary.completed == 0 ? 0.0
                             : static_cast<double>(detected) / static_cast<double>(summary.completed);
}

inline TrialOutcome RunTrialOutcome(const RunConfig& cfg, std::uint64_t index) {
  TrialOutcome out;
  out.index = index;
  out.seed = cfg.seed + index;
  RunConfig child = cfg;
  child.seed = out.seed;
  try {
    out.budget = RunTrial(child);
  } catch (const Error& e) {
    out.error = TrialError{e.stage(), e.what()};
  }
  return out;
}

/// Runs `trials` trials with seeds cfg.seed + i on up to `jobs` threads.
/// Results are ordered by trial index, so the summary does not depend on
/// scheduling. Failed trials are kept with their error.
inline EnsembleSummary RunEnsemble(const RunConfig& cfg, std::uint64_t trials,
                                   unsigned jobs = 1) {
  if (trials < 1) throw ConfigError("trials", "must be >= 1");
  Validate(cfg);

  EnsembleSummary summary;
  summary.trials.resize(trials);
  jobs = std::clamp<unsigned>(jobs, 1, static_cast<unsigned>(std::min<std::uint64_t>(trials, 256)));

  if (jobs == 1) {
    for (std::uint64_t i = 0; i < trials; ++i) summary.trials[i] = RunTrialOutcome(cfg, i);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::jthread> workers;
    workers.reserve(jobs);
    for (unsigned w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::uint64_t i = next++; i < trials; i = next++) {
          summary.trials[i] = RunTrialOutcome(cfg, i);
        }
      });
    }
  }
  Aggregate(summary);
  return summary;
}

}  // namespace qkdsim
