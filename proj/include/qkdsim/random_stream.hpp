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

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "qkdsim/core.hpp"

namespace qkdsim {

/// Deterministic pseudorandom stream for one trial.
///
/// Backed by std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Every derived draw below is computed from raw engine words
/// rather than std:: distributions (those are implementation-defined), so a
/// seed reproduces the same trial on any conforming toolchain.
///
/// Single-threaded: move it between threads, never share it.
class RandomStream {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/v1";

  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  RandomStream(const RandomStream&) = delete;
  RandomStream& operator=(const RandomStream&) = delete;
  RandomStream(RandomStream&&) noexcept = default;
  RandomStream& operator=(RandomStream&&) noexcept = default;

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// True with probability p.
  bool bernoulli(double p) { return uniform() < p; }

  Bit bit() { return static_cast<Bit>(engine_() >> 63); }

  /// Uniform integer in [0, n). Lemire's multiply-shift with rejection.
  std::uint64_t index(std::uint64_t n) {
    if (n <= 1) return 0;
    __uint128_t m = static_cast<__uint128_t>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<__uint128_t>(engine_()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Number of failures before the first success of a Bernoulli(p) process,
  /// by inversion. Requires 0 < p <= 1.
  std::uint64_t geometric(double p) {
    if (p >= 1.0) return 0;
    // 1 - uniform() is in (0, 1], so the log is finite.
    const double k = std::floor(std::log(1.0 - uniform()) / std::log1p(-p));
    if (!(k < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(k);
  }

  /// Fisher-Yates permutation of [0, n).
  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i) {
      std::swap(p[i - 1], p[index(i)]);
    }
    return p;
  }

 private:
  std::mt19937_64 engine_;
};

/// One of the three bases on `side`, each with probability 1/3.
inline MeasurementBasis SampleUniformBasis(RandomStream& stream, Side side, const BasisSet& set) {
  return set.side(side)[stream.index(3)];
}

}  // namespace qkdsim
