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

// Threshold/PNR detector response model.
//
// The POVM gives the probability of registering k photons given n incident:
//
//   P(0|n) = (1 - v) (1 - eta)^n
//   P(1|n) = v (1 - rho eta)^n
//          + (1 - v) sum_{k=0}^{n-1} eta (1 - eta)^k (1 - rho eta)^(n-1-k)
//
// Sampling walks the incident photons in order; the first photon that is
// detected (probability eta each) owns the registration. If none is, the
// detector still fires on a noise count with probability v. This reproduces
// P(0|n) exactly and orders attribution the way the k-sum above does.

#pragma once

#include <cmath>
#include <cstdint>

#include "qkdsim/core.hpp"
#include "qkdsim/random_stream.hpp"

namespace qkdsim {

inline double ProbNoClick(std::uint32_t n, const DetectorParams& d) {
  return (1.0 - d.v_d) * std::pow(1.0 - d.eta_d, n);
}

inline double ProbSingleClick(std::uint32_t n, const DetectorParams& d) {
  const double unresolved = 1.0 - d.rho_d * d.eta_d;
  double sum = 0.0;
  for (std::uint32_t k = 0; k < n; ++k) {
    sum += d.eta_d * std::pow(1.0 - d.eta_d, k) * std::pow(unresolved, n - 1 - k);
  }
  return d.v_d * std::pow(unresolved, n) + (1.0 - d.v_d) * sum;
}

/// Which source produced a registration.
struct Registration {
  enum class Source : std::uint8_t { kNone, kPhoton, kNoise };

  Source source = Source::kNone;
  std::uint32_t photon = 0;  // index of the registering photon when kPhoton

  bool detected() const { return source != Source::kNone; }
};

inline Registration SampleRegistration(RandomStream& stream, std::uint32_t n,
                                       const DetectorParams& d) {
  for (std::uint32_t k = 0; k < n; ++k) {
    if (stream.bernoulli(d.eta_d)) return {Registration::Source::kPhoton, k};
  }
  if (stream.bernoulli(d.v_d)) return {Registration::Source::kNoise, 0};
  return {};
}

/// False with probability P(0|n).
inline bool DetectorRegisters(RandomStream& stream, std::uint32_t n, const DetectorParams& d) {
  return SampleRegistration(stream, n, d).detected();
}

/// Flips a registered bit with probability v_d.
inline Bit ApplyNoiseFlip(RandomStream& stream, Bit bit, const DetectorParams& d) {
  return stream.bernoulli(d.v_d) ? static_cast<Bit>(bit ^ 1U) : bit;
}

}  // namespace qkdsim
