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

// ParityHash privacy amplification: compress a reconciled key to d bits by
// taking the parity of d blocks. The first d-1 blocks hold floor(n/d) bits
// and the last block takes whatever remains.

#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>

#include "qkdsim/core.hpp"

namespace qkdsim {

struct SecretKeyResult {
  BitString alice_secret;
  BitString bob_secret;
  double secret_key_rate = 0.0;  // bits per second
};

inline std::size_t PaBlockSize(std::size_t n, std::size_t d) {
  if (d < 1) throw KeyTooShort("desired length must be >= 1");
  if (n < d) {
    throw KeyTooShort(std::to_string(n) + " bits available, " + std::to_string(d) + " requested");
  }
  return n / d;
}

inline BitString ParityHash(std::span<const Bit> key, std::size_t d) {
  const std::size_t block = PaBlockSize(key.size(), d);
  BitString out(d, 0);
  for (std::size_t i = 0; i < key.size(); ++i) {
    const std::size_t b = std::min(i / block, d - 1);
    out[b] ^= key[i];
  }
  return out;
}

inline SecretKeyResult RunPrivacyAmplification(std::span<const Bit> alice_key,
                                               std::span<const Bit> bob_key, std::size_t d,
                                               double elapsed_time) {
  if (alice_key.size() != bob_key.size()) {
    throw Error(Stage::kPrivacyAmplification, "key length mismatch");
  }
  if (!(elapsed_time > 0.0)) {
    throw Error(Stage::kPrivacyAmplification, "elapsed time must be > 0");
  }
  SecretKeyResult out;
  out.alice_secret = ParityHash(alice_key, d);
  out.bob_secret = ParityHash(bob_key, d);
  out.secret_key_rate = static_cast<double>(d) / elapsed_time;
  return out;
}

}  // namespace qkdsim
