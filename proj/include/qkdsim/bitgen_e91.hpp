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

// E91 bit generation: pair creation, state collapse (optionally through an
// intercept-resend eavesdropper), detection, sifting and the CHSH estimate.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qkdsim/core.hpp"
#include "qkdsim/detector.hpp"
#include "qkdsim/random_stream.hpp"

namespace qkdsim {

/// Coincident measurements needed per sifted bit, 1 / (2/9).
inline constexpr double kExpectedMeasurementsPerSiftedBit = 9.0 / 2.0;

enum class EventClass : std::uint8_t {
  kNoPair,
  kLost,
  kSameBasisCoincidence,
  kDiffBasisCoincidence,
};

struct PumpEventRecord {
  MeasurementBasis alice_basis;
  MeasurementBasis bob_basis;
  std::optional<Bit> alice_bit;
  std::optional<Bit> bob_bit;
  bool eve_intercepted = false;
  std::uint32_t photon_count_alice = 0;
  std::uint32_t photon_count_bob = 0;
  EventClass classification = EventClass::kNoPair;
};

struct BitGenResult {
  BitString alice_raw_key;
  BitString bob_raw_key;  // already inverted into Alice's convention
  std::vector<PumpEventRecord> diff_basis_records;
  double raw_key_rate = 0.0;  // sifted coincidences per second
  double raw_qber = 0.0;
  double s_value = 0.0;      // after Tsirelson capping
  double s_uncapped = 0.0;
  double elapsed_time = 0.0;  // seconds
  std::uint64_t pump_count = 0;
  std::uint64_t pair_count = 0;
  std::uint64_t coincidence_count = 0;
  std::uint64_t same_basis_count = 0;
  std::uint64_t eve_intercept_count = 0;
};

/// Probability that the receiver's bit equals the incoming bit,
/// (1 - a.b) / 2. Identical bases give 0: the pair is anti-correlated.
inline double SameBitProbability(const MeasurementBasis& a, const MeasurementBasis& b) {
  // Coincident angles are matched by label so the flip is exact.
  if (a.label == b.label || IsSameBasisPair(a.label, b.label) ||
      IsSameBasisPair(b.label, a.label)) {
    return 0.0;
  }
  const double p = 0.5 * (1.0 - UnitVector(a).dot(UnitVector(b)));
  return std::clamp(p, 0.0, 1.0);
}

inline Bit CollapseMeasure(RandomStream& stream, Bit incoming_bit,
                           const MeasurementBasis& incoming_basis,
                           const MeasurementBasis& measuring_basis) {
  const double same = SameBitProbability(incoming_basis, measuring_basis);
  return stream.bernoulli(same) ? incoming_bit : static_cast<Bit>(incoming_bit ^ 1U);
}

struct EveOutcome {
  Bit bit;
  MeasurementBasis basis;
};

/// Intercept in a uniformly drawn Bob basis. The returned state is what Bob
/// receives in place of Alice's.
inline EveOutcome EveCollapse(RandomStream& stream, Bit incoming_bit,
                              const MeasurementBasis& incoming_basis, const BasisSet& set) {
  const MeasurementBasis eve_basis = SampleUniformBasis(stream, Side::kBob, set);
  return {CollapseMeasure(stream, incoming_bit, incoming_basis, eve_basis), eve_basis};
}

namespace detail {

// Bit registered by one side. Photon 0 carries the signal; later photons
// belong to the second pair and noise counts carry no signal, so both of
// those register a fresh uniform bit.
inline std::optional<Bit> RegisterSide(RandomStream& stream, Bit signal_bit, std::uint32_t photons,
                                       const DetectorParams& d) {
  const Registration reg = SampleRegistration(stream, photons, d);
  if (!reg.detected()) return std::nullopt;
  Bit bit = signal_bit;
  if (reg.source == Registration::Source::kNoise || reg.photon > 0) bit = stream.bit();
  return ApplyNoiseFlip(stream, bit, d);
}

inline void ProcessPair(RandomStream& stream, const RunConfig& cfg, const BasisSet& set,
                        PumpEventRecord& rec) {
  rec.alice_basis = SampleUniformBasis(stream, Side::kAlice, set);
  const Bit alice_state = stream.bit();
  rec.bob_basis = SampleUniformBasis(stream, Side::kBob, set);

  const std::uint32_t photons = stream.bernoulli(cfg.source.second_pair_prob) ? 2 : 1;
  rec.photon_count_alice = photons;
  rec.photon_count_bob = photons;

  Bit bob_state;
  rec.eve_intercepted = stream.bernoulli(cfg.source.eve_prob);
  if (rec.eve_intercepted) {
    const EveOutcome eve = EveCollapse(stream, alice_state, rec.alice_basis, set);
    bob_state = CollapseMeasure(stream, eve.bit, eve.basis, rec.bob_basis);
  } else {
    bob_state = CollapseMeasure(stream, alice_state, rec.alice_basis, rec.bob_basis);
  }

  rec.alice_bit = RegisterSide(stream, alice_state, photons, cfg.detector_for(Side::kAlice));
  rec.bob_bit = RegisterSide(stream, bob_state, photons, cfg.detector_for(Side::kBob));

  if (!rec.alice_bit || !rec.bob_bit) {
    rec.classification = EventClass::kLost;
  } else if (IsSameBasisPair(rec.alice_basis.label, rec.bob_basis.label)) {
    rec.classification = EventClass::kSameBasisCoincidence;
  } else {
    rec.classification = EventClass::kDiffBasisCoincidence;
  }
}

}  // namespace detail

/// One pump slot.
inline PumpEventRecord SimulatePumpEvent(RandomStream& stream, const RunConfig& cfg,
                                         const BasisSet& set) {
  PumpEventRecord rec;
  if (!stream.bernoulli(cfg.source.first_pair_prob)) return rec;
  detail::ProcessPair(stream, cfg, set, rec);
  return rec;
}

/// Empirical P11 + P00 - P10 - P01 over coincidences measured in (a, b).
/// Throws InsufficientStatistics when there are none.
inline double EstimateCorrelation(std::span<const PumpEventRecord> records,
                                  const MeasurementBasis& a, const MeasurementBasis& b) {
  std::uint64_t same = 0;
  std::uint64_t total = 0;
  for (const auto& r : records) {
    if (r.alice_basis.label != a.label || r.bob_basis.label != b.label) continue;
    if (!r.alice_bit || !r.bob_bit) continue;
    ++total;
    same += (*r.alice_bit == *r.bob_bit);
  }
  if (total == 0) {
    throw InsufficientStatistics("no coincidences for basis pair (" +
                                 std::string(LabelName(a.label)) + ", " +
                                 std::string(LabelName(b.label)) + ")");
  }
  return (2.0 * static_cast<double>(same) - static_cast<double>(total)) /
         static_cast<double>(total);
}

inline double CapToTsirelson(double s) {
  return std::clamp(s, -kTsirelsonBound, kTsirelsonBound);
}

/// E(a1,b1) - E(a1,b3) + E(a3,b1) + E(a3,b3) without capping.
inline double EstimateSUncapped(std::span<const PumpEventRecord> records,
                                const BasisSet& set = {}) {
  const auto& a1 = set.alice[0];
  const auto& a3 = set.alice[2];
  const auto& b1 = set.bob[0];
  const auto& b3 = set.bob[2];
  return EstimateCorrelation(records, a1, b1) - EstimateCorrelation(records, a1, b3) +
         EstimateCorrelation(records, a3, b1) + EstimateCorrelation(records, a3, b3);
}

inline double EstimateS(std::span<const PumpEventRecord> records, const BasisSet& set = {}) {
  return CapToTsirelson(EstimateSUncapped(records, set));
}

/// Sifted bits to collect: ceil(desired * excess).
inline std::uint64_t RequiredPumpTarget(std::uint64_t desired_key_length,
                                        double excess_bit_factor) {
  return static_cast<std::uint64_t>(
      std::ceil(static_cast<double>(desired_key_length) * excess_bit_factor));
}

/// Repeats pump events until the sifted-key target is met.
///
/// Slots without a pair are not materialised one at a time: the gap to the
/// next pair is drawn from the geometric distribution, which is equivalent
/// to running SimulatePumpEvent on every slot and makes GHz pump rates with
/// ~1e-6 pair probabilities tractable. Throws NonTermination when the pump
/// count passes cfg.max_pump_count first.
inline BitGenResult RunBitGeneration(const RunConfig& cfg, RandomStream& stream,
                                     const BasisSet& set = {}) {
  Validate(cfg);
  const std::uint64_t target = RequiredPumpTarget(cfg.desired_key_length, cfg.excess_bit_factor);
  const double pair_prob = cfg.source.first_pair_prob;

  BitGenResult out;
  out.alice_raw_key.reserve(target);
  out.bob_raw_key.reserve(target);

  auto ceiling_hit = [&] {
    return NonTermination("pump count exceeded " + std::to_string(cfg.max_pump_count) +
                          " before collecting " + std::to_string(target) + " sifted bits (have " +
                          std::to_string(out.alice_raw_key.size()) + ")");
  };
  if (pair_prob <= 0.0) throw ceiling_hit();

  while (out.alice_raw_key.size() < target) {
    const std::uint64_t gap = stream.geometric(pair_prob);
    if (gap >= cfg.max_pump_count - out.pump_count) throw ceiling_hit();
    out.pump_count += gap + 1;

    PumpEventRecord rec;
    detail::ProcessPair(stream, cfg, set, rec);
    ++out.pair_count;
    out.eve_intercept_count += rec.eve_intercepted;

    if (rec.classification == EventClass::kLost) continue;
    ++out.coincidence_count;
    if (rec.classification == EventClass::kSameBasisCoincidence) {
      ++out.same_basis_count;
      out.alice_raw_key.push_back(*rec.alice_bit);
      out.bob_raw_key.push_back(static_cast<Bit>(*rec.bob_bit ^ 1U));
    } else {
      out.diff_basis_records.push_back(rec);
    }
  }

  out.elapsed_time = static_cast<double>(out.pump_count) / cfg.source.pump_rate;
  out.raw_key_rate = static_cast<double>(out.alice_raw_key.size()) / out.elapsed_time;
  out.raw_qber = static_cast<double>(HammingDistance(out.alice_raw_key, out.bob_raw_key)) /
                 static_cast<double>(out.alice_raw_key.size());
  out.s_uncapped = EstimateSUncapped(out.diff_basis_records, set);
  out.s_value = CapToTsirelson(out.s_uncapped);
  return out;
}

}  // namespace qkdsim
