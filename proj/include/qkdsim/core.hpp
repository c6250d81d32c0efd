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

// Domain types shared by every stage of the simulator: measurement bases,
// source/detector parameters, run configuration and the error hierarchy.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qkdsim {

using Bit = std::uint8_t;
using BitString = std::vector<Bit>;

inline constexpr double kTsirelsonBound = 2.0 * std::numbers::sqrt2;
inline constexpr double kClassicalLimit = 2.0;

// ---------------------------------------------------------------------------
// Errors

/// Pipeline stage an error originated in.
enum class Stage { kConfig, kBitGeneration, kReconciliation, kPrivacyAmplification };

inline std::string_view StageName(Stage stage) {
  switch (stage) {
    case Stage::kConfig: return "config";
    case Stage::kBitGeneration: return "bit_generation";
    case Stage::kReconciliation: return "reconciliation";
    case Stage::kPrivacyAmplification: return "privacy_amplification";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Stage stage, const std::string& what)
      : std::runtime_error(std::string(StageName(stage)) + ": " + what), stage_(stage) {}

  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

/// A CHSH cell had no coincidences, so S cannot be estimated.
class InsufficientStatistics : public Error {
 public:
  explicit InsufficientStatistics(const std::string& what)
      : Error(Stage::kBitGeneration, "insufficient statistics: " + what) {}
};

/// The pump-count ceiling was hit before the sifted-bit target was reached.
class NonTermination : public Error {
 public:
  explicit NonTermination(const std::string& what) : Error(Stage::kBitGeneration, what) {}
};

class KeyTooShort : public Error {
 public:
  explicit KeyTooShort(const std::string& what)
      : Error(Stage::kPrivacyAmplification, "reconciled key too short: " + what) {}
};

/// Invalid configuration. `field()` is the dotted path of the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(Stage::kConfig, field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// ---------------------------------------------------------------------------
// Bases

enum class BasisLabel : std::uint8_t { kA1, kA2, kA3, kB1, kB2, kB3 };
enum class Side : std::uint8_t { kAlice, kBob };

inline std::string_view LabelName(BasisLabel label) {
  constexpr std::array<std::string_view, 6> kNames = {"A1", "A2", "A3", "B1", "B2", "B3"};
  return kNames[static_cast<std::size_t>(label)];
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
};

/// A polarization basis: azimuthal angle of its |0> state from horizontal, in
/// [0, pi). Identity is carried by `label`; never compare angles for equality.
struct MeasurementBasis {
  double angle = 0.0;
  BasisLabel label = BasisLabel::kA1;

  friend bool operator==(const MeasurementBasis& a, const MeasurementBasis& b) {
    return a.label == b.label;
  }
};

inline Vec2 UnitVector(const MeasurementBasis& basis) {
  return {std::cos(basis.angle), std::sin(basis.angle)};
}

/// The E91 polarization bases. Alice: 0, pi/4, pi/2. Bob: pi/4, pi/2, 3pi/4.
struct BasisSet {
  std::array<MeasurementBasis, 3> alice{{
      {0.0, BasisLabel::kA1},
      {std::numbers::pi / 4, BasisLabel::kA2},
      {std::numbers::pi / 2, BasisLabel::kA3},
  }};
  std::array<MeasurementBasis, 3> bob{{
      {std::numbers::pi / 4, BasisLabel::kB1},
      {std::numbers::pi / 2, BasisLabel::kB2},
      {3 * std::numbers::pi / 4, BasisLabel::kB3},
  }};

  const std::array<MeasurementBasis, 3>& side(Side s) const {
    return s == Side::kAlice ? alice : bob;
  }

  const MeasurementBasis& get(BasisLabel label) const {
    auto i = static_cast<std::size_t>(label);
    return i < 3 ? alice[i] : bob[i - 3];
  }
};

/// Key-material pairs: (A2, B1) and (A3, B2).
inline bool IsSameBasisPair(BasisLabel a, BasisLabel b) {
  return (a == BasisLabel::kA2 && b == BasisLabel::kB1) ||
         (a == BasisLabel::kA3 && b == BasisLabel::kB2);
}

// ---------------------------------------------------------------------------
// Parameters

struct SourceParams {
  double pump_rate = 1e9;         // pumps per second
  double first_pair_prob = 4e-6;  // per pump
  double second_pair_prob = 0.0;  // given a first pair
  double eve_prob = 0.0;          // per transmitted pair

  friend bool operator==(const SourceParams&, const SourceParams&) = default;
};

struct DetectorParams {
  double eta_d = 1.0;  // detection efficiency
  double v_d = 0.0;    // noise count probability
  double rho_d = 1.0;  // photon-number resolution, 0 none .. 1 ideal

  friend bool operator==(const DetectorParams&, const DetectorParams&) = default;
};

inline constexpr std::uint64_t kDefaultMaxPumpCount = 10'000'000'000ULL;

struct RunConfig {
  std::uint64_t desired_key_length = 300;
  double excess_bit_factor = 2.0;
  std::uint32_t cascade_iterations = 4;
  SourceParams source;
  DetectorParams detector;
  // Bob's detector when it differs from Alice's.
  std::optional<DetectorParams> bob_detector;
  std::uint64_t seed = 0;
  std::uint64_t max_pump_count = kDefaultMaxPumpCount;

  const DetectorParams& detector_for(Side side) const {
    return side == Side::kBob && bob_detector ? *bob_detector : detector;
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline void CheckProbability(double p, const std::string& field) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(field, "must be in [0, 1], got " + std::to_string(p));
  }
}

inline void ValidateDetector(const DetectorParams& d, const std::string& prefix) {
  CheckProbability(d.eta_d, prefix + ".eta_d");
  CheckProbability(d.v_d, prefix + ".v_d");
  CheckProbability(d.rho_d, prefix + ".rho_d");
}

}  // namespace detail

/// Throws ConfigError naming the first field that violates its constraint.
inline void Validate(const RunConfig& cfg) {
  if (cfg.desired_key_length < 1) throw ConfigError("desired_key_length", "must be >= 1");
  if (!(cfg.excess_bit_factor >= 1.0) || !std::isfinite(cfg.excess_bit_factor)) {
    throw ConfigError("excess_bit_factor", "must be a finite value >= 1");
  }
  if (cfg.cascade_iterations < 1) throw ConfigError("cascade_iterations", "must be >= 1");
  if (!(cfg.source.pump_rate > 0.0) || !std::isfinite(cfg.source.pump_rate)) {
    throw ConfigError("source.pump_rate", "must be a finite value > 0");
  }
  detail::CheckProbability(cfg.source.first_pair_prob, "source.first_pair_prob");
  detail::CheckProbability(cfg.source.second_pair_prob, "source.second_pair_prob");
  detail::CheckProbability(cfg.source.eve_prob, "source.eve_prob");
  detail::ValidateDetector(cfg.detector, "detector");
  if (cfg.bob_detector) detail::ValidateDetector(*cfg.bob_detector, "detector_bob");
  if (cfg.max_pump_count < 1) throw ConfigError("max_pump_count", "must be >= 1");
}

inline std::size_t HammingDistance(const BitString& a, const BitString& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) n += (a[i] != b[i]);
  return n;
}

}  // namespace qkdsim
