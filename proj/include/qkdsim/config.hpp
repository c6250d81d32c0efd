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

// Scenario config files (JSON). See README.md for the schema.

#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"
#include "qkdsim/core.hpp"

namespace qkdsim {

enum class OutputFormat { kCsv, kJson };

inline std::string_view FormatName(OutputFormat f) { return f == OutputFormat::kCsv ? "csv" : "json"; }

inline std::optional<OutputFormat> ParseFormat(std::string_view s) {
  if (s == "csv") return OutputFormat::kCsv;
  if (s == "json") return OutputFormat::kJson;
  return std::nullopt;
}

inline constexpr std::uint64_t kDefaultTrials = 50;
inline constexpr std::uint64_t kDefaultNonEveKeyLength = 300;
inline constexpr std::uint64_t kDefaultEveKeyLength = 48;
inline constexpr const char* kSeedEnvVar = "QKDSIM_SEED";

/// A RunConfig plus ensemble and output settings. `seed` and
/// `desired_key_length` stay unset when the file omits them; Resolve()
/// applies the fallbacks.
struct ScenarioConfig {
  std::string scenario_name = "unnamed";
  std::uint64_t trials = kDefaultTrials;
  std::string output_path;  // empty: stdout
  OutputFormat output_format = OutputFormat::kCsv;

  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> desired_key_length;
  double excess_bit_factor = 2.0;
  std::uint32_t cascade_iterations = 4;
  std::uint64_t max_pump_count = kDefaultMaxPumpCount;
  SourceParams source;
  DetectorParams detector;
  std::optional<DetectorParams> bob_detector;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

namespace detail {

using Json = nlohmann::json;

inline std::string Join(std::string_view prefix, std::string_view key) {
  return prefix.empty() ? std::string(key) : std::string(prefix) + "." + std::string(key);
}

inline void RejectUnknown(const Json& obj, std::string_view prefix,
                          std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ConfigError(Join(prefix, key), "unknown field");
  }
}

inline const Json& RequireObject(const Json& obj, std::string_view prefix, std::string_view key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(Join(prefix, key), "missing required field");
  if (!it->is_object()) throw ConfigError(Join(prefix, key), "must be an object");
  return *it;
}

inline double GetNumber(const Json& obj, std::string_view prefix, std::string_view key,
                        std::optional<double> fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (!fallback) throw ConfigError(Join(prefix, key), "missing required field");
    return *fallback;
  }
  if (!it->is_number()) throw ConfigError(Join(prefix, key), "must be a number");
  return it->get<double>();
}

inline std::optional<std::uint64_t> GetUnsigned(const Json& obj, std::string_view key) {
  auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  if (!it->is_number_unsigned()) throw ConfigError(std::string(key), "must be a non-negative integer");
  return it->get<std::uint64_t>();
}

inline DetectorParams ParseDetector(const Json& obj, std::string_view prefix) {
  RejectUnknown(obj, prefix, {"eta_d", "v_d", "rho_d"});
  DetectorParams d;
  d.eta_d = GetNumber(obj, prefix, "eta_d", std::nullopt);
  d.v_d = GetNumber(obj, prefix, "v_d", std::nullopt);
  d.rho_d = GetNumber(obj, prefix, "rho_d", std::nullopt);
  return d;
}

inline Json DetectorJson(const DetectorParams& d) {
  return Json{{"eta_d", d.eta_d}, {"v_d", d.v_d}, {"rho_d", d.rho_d}};
}

// 1-based line and column of a byte offset.
inline std::string Position(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

/// Parses and validates config text. `origin` names the source in errors.
inline ScenarioConfig ParseConfig(std::string_view text, std::string_view origin = "<config>") {
  detail::Json j;
  try {
    j = detail::Json::parse(text);
  } catch (const detail::Json::parse_error& e) {
    // nlohmann reports the offset one past the offending byte.
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    throw ConfigError("", std::string(origin) + ": parse error at " + detail::Position(text, at));
  }
  if (!j.is_object()) throw ConfigError("", std::string(origin) + ": top level must be an object");

  detail::RejectUnknown(j, "",
                        {"scenario_name", "trials", "output_path", "output_format", "seed",
                         "desired_key_length", "excess_bit_factor", "cascade_iterations",
                         "max_pump_count", "source", "detector", "detector_bob"});

  ScenarioConfig c;
  if (auto it = j.find("scenario_name"); it != j.end()) {
    if (!it->is_string()) throw ConfigError("scenario_name", "must be a string");
    c.scenario_name = it->get<std::string>();
  }
  if (auto it = j.find("output_path"); it != j.end()) {
    if (!it->is_string()) throw ConfigError("output_path", "must be a string");
    c.output_path = it->get<std::string>();
  }
  if (auto it = j.find("output_format"); it != j.end()) {
    auto f = it->is_string() ? ParseFormat(it->get<std::string>()) : std::nullopt;
    if (!f) throw ConfigError("output_format", "must be \"csv\" or \"json\"");
    c.output_format = *f;
  }
  if (auto v = detail::GetUnsigned(j, "trials")) c.trials = *v;
  c.seed = detail::GetUnsigned(j, "seed");
  c.desired_key_length = detail::GetUnsigned(j, "desired_key_length");
  if (auto v = detail::GetUnsigned(j, "cascade_iterations")) {
    if (*v > UINT32_MAX) throw ConfigError("cascade_iterations", "out of range");
    c.cascade_iterations = static_cast<std::uint32_t>(*v);
  }
  if (auto v = detail::GetUnsigned(j, "max_pump_count")) c.max_pump_count = *v;
  c.excess_bit_factor = detail::GetNumber(j, "", "excess_bit_factor", 2.0);

  const auto& src = detail::RequireObject(j, "", "source");
  detail::RejectUnknown(src, "source", {"pump_rate", "first_pair_prob", "second_pair_prob", "eve_prob"});
  c.source.pump_rate = detail::GetNumber(src, "source", "pump_rate", std::nullopt);
  c.source.first_pair_prob = detail::GetNumber(src, "source", "first_pair_prob", std::nullopt);
  c.source.second_pair_prob = detail::GetNumber(src, "source", "second_pair_prob", 0.0);
  c.source.eve_prob = detail::GetNumber(src, "source", "eve_prob", 0.0);

  c.detector = detail::ParseDetector(detail::RequireObject(j, "", "detector"), "detector");
  if (j.contains("detector_bob")) {
    c.bob_detector = detail::ParseDetector(detail::RequireObject(j, "", "detector_bob"), "detector_bob");
  }
  return c;
}

inline ScenarioConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str(), path);
}

inline nlohmann::ordered_json ToJson(const ScenarioConfig& c) {
  nlohmann::ordered_json j;
  j["scenario_name"] = c.scenario_name;
  j["trials"] = c.trials;
  if (!c.output_path.empty()) j["output_path"] = c.output_path;
  j["output_format"] = FormatName(c.output_format);
  if (c.seed) j["seed"] = *c.seed;
  if (c.desired_key_length) j["desired_key_length"] = *c.desired_key_length;
  j["excess_bit_factor"] = c.excess_bit_factor;
  j["cascade_iterations"] = c.cascade_iterations;
  j["max_pump_count"] = c.max_pump_count;
  j["source"] = {{"pump_rate", c.source.pump_rate},
                 {"first_pair_prob", c.source.first_pair_prob},
                 {"second_pair_prob", c.source.second_pair_prob},
                 {"eve_prob", c.source.eve_prob}};
  j["detector"] = detail::DetectorJson(c.detector);
  if (c.bob_detector) j["detector_bob"] = detail::DetectorJson(*c.bob_detector);
  return j;
}

/// Parses a QKDSIM_SEED style value; nullopt when unset, throws when malformed.
inline std::optional<std::uint64_t> ParseSeedEnv(const char* value) {
  if (value == nullptr || *value == '\0') return std::nullopt;
  std::string_view s(value);
  std::uint64_t out = 0;
  for (char ch : s) {
    if (ch < '0' || ch > '9') throw ConfigError(kSeedEnvVar, "must be an unsigned integer");
    const std::uint64_t digit = static_cast<std::uint64_t>(ch - '0');
    if (out > (UINT64_MAX - digit) / 10) throw ConfigError(kSeedEnvVar, "out of range");
    out = out * 10 + digit;
  }
  return out;
}

/// Builds the validated RunConfig. Seed: file, then QKDSIM_SEED, then 0.
/// Key length: file, else 300 without Eve and 48 with Eve.
inline RunConfig Resolve(const ScenarioConfig& c) {
  RunConfig r;
  if (c.seed) {
    r.seed = *c.seed;
  } else {
    r.seed = ParseSeedEnv(std::getenv(kSeedEnvVar)).value_or(0);
  }
  r.desired_key_length = c.desired_key_length.value_or(
      c.source.eve_prob > 0.0 ? kDefaultEveKeyLength : kDefaultNonEveKeyLength);
  r.excess_bit_factor = c.excess_bit_factor;
  r.cascade_iterations = c.cascade_iterations;
  r.max_pump_count = c.max_pump_count;
  r.source = c.source;
  r.detector = c.detector;
  r.bob_detector = c.bob_detector;
  if (c.trials < 1) throw ConfigError("trials", "must be >= 1");
  Validate(r);
  return r;
}

// Bundled scenarios. configs/paper-*.json hold the same values.

inline ScenarioConfig PaperNonEvePreset() {
  ScenarioConfig c;
  c.scenario_name = "paper-noneve";
  c.trials = 50;
  c.seed = 1;
  c.desired_key_length = 300;
  c.source = {1e9, 4e-6, 1.0 / 3.0, 0.0};
  c.detector = {0.8, 2e-4, 0.8};
  return c;
}

inline ScenarioConfig PaperEve30Preset() {
  ScenarioConfig c = PaperNonEvePreset();
  c.scenario_name = "paper-eve30";
  c.desired_key_length = 48;
  c.source.eve_prob = 0.3;
  return c;
}

inline std::optional<ScenarioConfig> FindPreset(std::string_view name) {
  if (name == "paper-noneve") return PaperNonEvePreset();
  if (name == "paper-eve30") return PaperEve30Preset();
  return std::nullopt;
}

}  // namespace qkdsim
