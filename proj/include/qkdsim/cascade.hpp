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

// Cascade information reconciliation.
//
// Each pass splits the keys into consecutive blocks, compares block parities
// and bisects every mismatching block down to the single differing bit. The
// first pass uses a block size of 0.73 / QBER; every later pass shuffles
// both keys with the same permutation and doubles the block size. There is
// no back-propagation into earlier passes, so a block holding an even
// number of errors stays uncorrected in that pass.

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>

#include "qkdsim/core.hpp"
#include "qkdsim/random_stream.hpp"

namespace qkdsim {

struct CascadeResult {
  BitString alice_key;
  BitString bob_key;
  std::uint64_t leaked_bits = 0;      // two per correction
  std::uint64_t leaked_parities = 0;  // one per parity exchanged
  std::uint64_t corrected_errors = 0;
  std::uint64_t residual_errors = 0;
  std::uint32_t iterations_run = 0;
};

/// round(0.73 / qber), at least 2, at most key_length. qber == 0 gives the
/// whole key as one block.
inline std::size_t InitialBlockSize(double qber, std::size_t key_length) {
  if (!(qber > 0.0)) return key_length;
  const double raw = std::floor(0.73 / qber + 0.5);
  std::size_t size = raw >= static_cast<double>(key_length) ? key_length
                                                            : static_cast<std::size_t>(raw);
  size = std::max<std::size_t>(size, 2);
  return std::min(size, key_length);
}

inline std::size_t NextBlockSize(std::size_t previous, std::size_t key_length) {
  return std::min(2 * previous, key_length);
}

inline Bit Parity(std::span<const Bit> bits) {
  Bit p = 0;
  for (Bit b : bits) p ^= b;
  return p;
}

struct BlockCorrection {
  std::uint64_t corrections = 0;
  std::uint64_t parities = 0;
};

/// Compares the parity of the block and, if it differs, bisects (left half
/// gets the extra bit on odd lengths) until one bit is left and flips it in
/// `bob`. Only the left half's parity is exchanged at each level; the right
/// half's follows from it.
inline BlockCorrection BinaryParityCorrect(std::span<const Bit> alice, std::span<Bit> bob) {
  assert(alice.size() == bob.size());
  BlockCorrection out;
  if (alice.empty()) return out;
  ++out.parities;
  if (Parity(alice) == Parity(bob)) return out;

  std::size_t lo = 0;
  std::size_t hi = alice.size();
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo + 1) / 2;
    ++out.parities;
    if (Parity(alice.subspan(lo, mid - lo)) != Parity(bob.subspan(lo, mid - lo))) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  bob[lo] ^= 1U;
  out.corrections = 1;
  return out;
}

/// One pass over consecutive blocks of `block_size` (last block may be short).
inline BlockCorrection CascadeIteration(std::span<const Bit> alice, std::span<Bit> bob,
                                        std::size_t block_size) {
  assert(alice.size() == bob.size());
  block_size = std::max<std::size_t>(block_size, 1);
  BlockCorrection total;
  for (std::size_t start = 0; start < alice.size(); start += block_size) {
    const std::size_t len = std::min(block_size, alice.size() - start);
    const auto r = BinaryParityCorrect(alice.subspan(start, len), bob.subspan(start, len));
    total.corrections += r.corrections;
    total.parities += r.parities;
  }
  return total;
}

/// Applies one uniformly random permutation to both keys.
inline void ShuffleInUnison(RandomStream& stream, BitString& alice, BitString& bob) {
  assert(alice.size() == bob.size());
  const auto perm = stream.permutation(alice.size());
  BitString a(alice.size());
  BitString b(bob.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    a[i] = alice[perm[i]];
    b[i] = bob[perm[i]];
  }
  alice = std::move(a);
  bob = std::move(b);
}

inline CascadeResult RunCascade(BitString alice_key, BitString bob_key, std::uint32_t iterations,
                                double initial_qber, RandomStream& stream) {
  if (alice_key.size() != bob_key.size()) {
    throw Error(Stage::kReconciliation, "key length mismatch: " +
                                            std::to_string(alice_key.size()) + " vs " +
                                            std::to_string(bob_key.size()));
  }
  if (iterations < 1) throw Error(Stage::kReconciliation, "iterations must be >= 1");

  const std::size_t n = alice_key.size();
  const std::uint64_t initial_errors = HammingDistance(alice_key, bob_key);

  CascadeResult out;
  std::size_t block = InitialBlockSize(initial_qber, n);
  for (std::uint32_t it = 0; it < iterations && n > 0; ++it) {
    if (it > 0) {
      ShuffleInUnison(stream, alice_key, bob_key);
      block = NextBlockSize(block, n);
    }
    const auto r = CascadeIteration(alice_key, bob_key, block);
    out.corrected_errors += r.corrections;
    out.leaked_parities += r.parities;
    ++out.iterations_run;
  }
  out.leaked_bits = 2 * out.corrected_errors;
  out.residual_errors = HammingDistance(alice_key, bob_key);
  assert(out.corrected_errors + out.residual_errors == initial_errors);
  (void)initial_errors;
  out.alice_key = std::move(alice_key);
  out.bob_key = std::move(bob_key);
  return out;
}

}  // namespace qkdsim
