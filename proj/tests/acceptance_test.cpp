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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qkdsim/command.hpp"
#include "qkdsim/qkdsim.hpp"

namespace qkdsim {
namespace {

// Tolerances and sizes.
constexpr std::uint64_t kIdealTrials = 20;
constexpr double kIdealSTolerance = 0.05;
constexpr double kIdealMaxSeconds = 10.0;
constexpr std::uint64_t kReferenceTrials = 50;
constexpr double kNonEveAbsSLow = 2.3;
constexpr double kNonEveAbsSHigh = 2.83;
constexpr double kNonEveMaxSeconds = 300.0;
constexpr double kEveProb = 0.3;
constexpr std::uint64_t kEveKeyLength = 48;
constexpr double kEveMinDetected = 0.80;
constexpr double kEveQberLow = 0.20;
constexpr double kEveQberHigh = 0.50;
constexpr double kEveMinInQberBand = 0.80;
constexpr double kNonEveQberLow = 0.005;
constexpr double kNonEveQberHigh = 0.10;
constexpr double kPovmTolerance = 1e-12;
constexpr std::uint64_t kSiftMinCoincidences = 10'000;
constexpr std::size_t kCascadeKeyLength = 600;
constexpr std::size_t kCascadeErrors = 18;  // QBER 3%
constexpr std::uint32_t kCascadeIterations = 4;
constexpr int kCascadeTrials = 100;
constexpr int kCascadeMinClean = 95;
constexpr int kParityHashOracleCases = 1000;
constexpr double kRateMagnitude = 10.0;
constexpr std::uint64_t kDeterminismSeed = 7;

int failures = 0;

void Report(const char* id, const char* title, bool pass, const std::string& detail) {
  std::printf("[%s] %s %s: %s\n", pass ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <typename... Args>
std::string Fmt(const char* fmt, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

RunConfig ReferenceRun(double eve_prob, std::uint64_t key_length) {
  RunConfig cfg;
  cfg.desired_key_length = key_length;
  cfg.source = {1e9, 4e-6, 1.0 / 3.0, eve_prob};
  cfg.detector = {0.8, 2e-4, 0.8};
  cfg.seed = 1;
  return cfg;
}

std::vector<const LinkBudget*> Completed(const EnsembleSummary& s) {
  std::vector<const LinkBudget*> out;
  for (const auto& t : s.trials) {
    if (t.ok()) out.push_back(&*t.budget);
  }
  return out;
}

void IdealChsh() {
  RunConfig cfg;
  cfg.desired_key_length = 300;
  cfg.source = {1e9, 4e-6, 0.0, 0.0};
  cfg.detector = {1.0, 0.0, 1.0};
  cfg.seed = 1;
  const auto start = std::chrono::steady_clock::now();
  const EnsembleSummary s = RunEnsemble(cfg, kIdealTrials);
  const double secs = Seconds(start);
  const double mean = s.stat("s_value").mean;
  const bool pass = s.failed == 0 && std::abs(mean + kTsirelsonBound) <= kIdealSTolerance &&
                    secs < kIdealMaxSeconds;
  Report("AC1", "ideal-channel CHSH", pass,
         Fmt("mean S = %.4f (target %.4f +/- %.2f), %llu trials in %.2f s (< %.0f s)", mean,
             -kTsirelsonBound, kIdealSTolerance, static_cast<unsigned long long>(kIdealTrials), secs,
             kIdealMaxSeconds));
}

void NonEveChsh(const EnsembleSummary& s, double secs) {
  double sum_abs = 0.0;
  double max_abs = 0.0;
  const auto done = Completed(s);
  for (const LinkBudget* b : done) {
    sum_abs += std::abs(b->s_value);
    max_abs = std::max(max_abs, std::abs(b->s_value));
  }
  const double mean_abs = done.empty() ? 0.0 : sum_abs / done.size();
  const bool pass = done.size() == kReferenceTrials && mean_abs >= kNonEveAbsSLow &&
                    mean_abs <= kNonEveAbsSHigh && max_abs <= kTsirelsonBound &&
                    secs < kNonEveMaxSeconds;
  Report("AC2", "non-Eve CHSH violation", pass,
         Fmt("mean |S| = %.4f in [%.2f, %.2f], max |S| = %.4f (<= %.4f), %zu/%llu trials in %.1f s",
             mean_abs, kNonEveAbsSLow, kNonEveAbsSHigh, max_abs, kTsirelsonBound, done.size(),
             static_cast<unsigned long long>(kReferenceTrials), secs));
}

void EveScenario() {
  const EnsembleSummary s = RunEnsemble(ReferenceRun(kEveProb, kEveKeyLength), kReferenceTrials);
  int detected = 0;
  int in_band = 0;
  for (const LinkBudget* b : Completed(s)) {
    detected += std::abs(b->s_value) <= kClassicalLimit;
    in_band += b->raw_qber >= kEveQberLow && b->raw_qber <= kEveQberHigh;
  }
  const double n = static_cast<double>(kReferenceTrials);
  const bool pass = detected / n >= kEveMinDetected && in_band / n >= kEveMinInQberBand;
  Report("AC3", "Eve detection", pass,
         Fmt("|S| <= 2 in %d/%llu (>= %.0f%%), raw QBER in [%.2f, %.2f] in %d/%llu (>= %.0f%%), "
             "mean S = %.4f, mean QBER = %.4f",
             detected, static_cast<unsigned long long>(kReferenceTrials), 100 * kEveMinDetected,
             kEveQberLow, kEveQberHigh, in_band, static_cast<unsigned long long>(kReferenceTrials),
             100 * kEveMinInQberBand, s.stat("s_value").mean, s.stat("raw_qber").mean));
}

void NonEveQber(const EnsembleSummary& s) {
  const double mean = s.stat("raw_qber").mean;
  const bool pass = s.failed == 0 && mean >= kNonEveQberLow && mean <= kNonEveQberHigh;
  Report("AC4", "non-Eve raw QBER", pass,
         Fmt("mean raw QBER = %.4f in [%.3f, %.2f] over %llu trials", mean, kNonEveQberLow,
             kNonEveQberHigh, static_cast<unsigned long long>(s.completed)));
}

void PovmClosure() {
  const double grid[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  int cases = 0;
  int bad = 0;
  double worst = 0.0;
  for (double eta : grid) {
    for (double v : grid) {
      for (double rho : grid) {
        const DetectorParams d{eta, v, rho};
        for (std::uint32_t n = 0; n <= 10; ++n) {
          ++cases;
          const double total = ProbNoClick(n, d) + ProbSingleClick(n, d);
          const bool ok = total <= 1.0 + kPovmTolerance &&
                          (rho != 0.0 || std::abs(total - 1.0) <= kPovmTolerance);
          if (rho == 0.0) worst = std::max(worst, std::abs(total - 1.0));
          bad += !ok;
        }
      }
    }
  }
  Report("AC5", "POVM closure", bad == 0,
         Fmt("%d/%d grid points ok, max |sum - 1| at rho_d = 0: %.3g (tol %.0e)", cases - bad, cases,
             worst, kPovmTolerance));
}

void SiftFraction() {
  RunConfig cfg = ReferenceRun(0.0, 3000);
  RandomStream stream(cfg.seed);
  const BitGenResult r = RunBitGeneration(cfg, stream);
  const double n = static_cast<double>(r.coincidence_count);
  const double p = 2.0 / 9.0;
  const double sigma = std::sqrt(n * p * (1 - p));
  const double dev = std::abs(static_cast<double>(r.same_basis_count) - n * p);
  const bool pass = r.coincidence_count >= kSiftMinCoincidences && dev <= 3 * sigma;
  Report("AC6", "sift fraction", pass,
         Fmt("%llu/%llu same-basis = %.5f (2/9 = %.5f), deviation %.2f sigma (<= 3)",
             static_cast<unsigned long long>(r.same_basis_count),
             static_cast<unsigned long long>(r.coincidence_count), r.same_basis_count / n, p,
             dev / sigma));
}

BitString SeededBits(RandomStream& s, std::size_t n) {
  BitString out(n);
  for (auto& b : out) b = s.bit();
  return out;
}

void CascadeSuite() {
  // (a) every single error in every block size is located and fixed.
  int a_cases = 0;
  int a_bad = 0;
  RandomStream bits(2024);
  for (std::size_t size = 2; size <= 64; ++size) {
    const BitString alice = SeededBits(bits, size);
    for (std::size_t pos = 0; pos < size; ++pos) {
      BitString bob = alice;
      bob[pos] ^= 1U;
      const BlockCorrection c = BinaryParityCorrect(alice, bob);
      ++a_cases;
      a_bad += !(bob == alice && c.corrections == 1);
    }
  }
  Report("AC7a", "Cascade single-error correction", a_bad == 0,
         Fmt("%d/%d (block size, position) cases corrected, sizes 2..64", a_cases - a_bad, a_cases));

  // (b) and (c) share the seeded trials.
  int clean = 0;
  int identity_bad = 0;
  std::size_t worst_residual = 0;
  for (int t = 0; t < kCascadeTrials; ++t) {
    RandomStream s(static_cast<std::uint64_t>(t));
    const BitString alice = SeededBits(s, kCascadeKeyLength);
    BitString bob = alice;
    const auto order = s.permutation(kCascadeKeyLength);
    for (std::size_t i = 0; i < kCascadeErrors; ++i) bob[order[i]] ^= 1U;
    const double qber = static_cast<double>(kCascadeErrors) / kCascadeKeyLength;
    const CascadeResult r = RunCascade(alice, bob, kCascadeIterations, qber, s);
    clean += r.residual_errors == 0;
    worst_residual = std::max<std::size_t>(worst_residual, r.residual_errors);
    identity_bad += r.corrected_errors + r.residual_errors != kCascadeErrors;
  }
  Report("AC7b", "Cascade convergence", clean >= kCascadeMinClean,
         Fmt("%d/%d trials with zero residual errors (>= %d), %zu-bit keys, %zu errors, %u "
             "iterations, worst residual %zu",
             clean, kCascadeTrials, kCascadeMinClean, kCascadeKeyLength, kCascadeErrors,
             kCascadeIterations, worst_residual));
  Report("AC7c", "Cascade accounting identity", identity_bad == 0,
         Fmt("corrected + residual = initial errors in %d/%d trials", kCascadeTrials - identity_bad,
             kCascadeTrials));
}

void ParityHashSuite() {
  std::mt19937_64 rng(8);
  auto random_bits = [&](std::size_t n) {
    BitString out(n);
    for (auto& b : out) b = static_cast<Bit>(rng() & 1U);
    return out;
  };
  long exhaustive = 0;
  long exhaustive_bad = 0;
  for (std::size_t d = 1; d <= 64; ++d) {
    for (std::size_t n = d; n <= 4 * d; ++n) {
      const BitString key = random_bits(n);
      const BitString base = ParityHash(key, d);
      ++exhaustive;
      bool ok = base.size() == d;
      for (std::size_t i = 0; ok && i < n; ++i) {
        BitString flipped = key;
        flipped[i] ^= 1U;
        ok = HammingDistance(base, ParityHash(flipped, d)) == 1;
      }
      exhaustive_bad += !ok;
    }
  }
  int oracle_bad = 0;
  for (int c = 0; c < kParityHashOracleCases; ++c) {
    const std::size_t d = 1 + rng() % 300;
    const std::size_t n = d + rng() % (3 * d + 1);
    const BitString key = random_bits(n);
    const std::size_t size = n / d;
    BitString want(d, 0);
    for (std::size_t i = 0; i < n; ++i) want[std::min(i / size, d - 1)] ^= key[i];
    oracle_bad += ParityHash(key, d) != want;
  }
  Report("AC8", "ParityHash", exhaustive_bad == 0 && oracle_bad == 0,
         Fmt("%ld/%ld (d, n) pairs pass length and single-bit checks, %d/%d hand-XOR cases agree",
             exhaustive - exhaustive_bad, exhaustive, kParityHashOracleCases - oracle_bad,
             kParityHashOracleCases));
}

void KeyRates(const EnsembleSummary& s) {
  const RunConfig cfg = ReferenceRun(0.0, 300);
  // Back-of-envelope: pairs per second times the chance both sides click.
  const double p2 = cfg.source.second_pair_prob;
  auto both_click = [&](std::uint32_t n) {
    const double a = 1.0 - ProbNoClick(n, cfg.detector);
    return a * a;
  };
  const double efficiency = (1 - p2) * both_click(1) + p2 * both_click(2);
  const double envelope = cfg.source.first_pair_prob * cfg.source.pump_rate * efficiency;

  int ordered = 0;
  const auto done = Completed(s);
  for (const LinkBudget* b : done) ordered += b->secret_key_rate <= b->reconciled_key_rate;
  bool magnitude = true;
  std::string rates;
  for (const char* name : {"raw_key_rate", "reconciled_key_rate", "secret_key_rate"}) {
    const double ratio = s.stat(name).mean / envelope;
    magnitude = magnitude && ratio >= 1.0 / kRateMagnitude && ratio <= kRateMagnitude;
    rates += Fmt(", %s %.1f/s (x%.3f)", name, s.stat(name).mean, ratio);
  }
  const bool pass = !done.empty() && ordered == static_cast<int>(done.size()) && magnitude;
  Report("AC9", "key-rate ordering and magnitude", pass,
         Fmt("secret <= reconciled in %d/%zu trials, envelope %.1f/s", ordered, done.size(),
             envelope) +
             rates + Fmt(" (each within %.0fx)", kRateMagnitude));
}

void Determinism() {
  const std::vector<std::string> args{"--config", std::string(QKDSIM_CONFIG_DIR) + "/paper-noneve.json",
                                      "--seed", std::to_string(kDeterminismSeed), "--trials", "50",
                                      "--format", "csv"};
  std::ostringstream out1, err1, out2, err2;
  const int c1 = RunCommand(args, out1, err1);
  const int c2 = RunCommand(args, out2, err2);
  const bool pass = c1 == 0 && c2 == 0 && !out1.str().empty() && out1.str() == out2.str();
  Report("AC10", "determinism", pass,
         Fmt("exit codes %d/%d, %zu vs %zu bytes, identical: %s", c1, c2, out1.str().size(),
             out2.str().size(), out1.str() == out2.str() ? "yes" : "no"));
}

}  // namespace
}  // namespace qkdsim

int main() {
  using namespace qkdsim;
  IdealChsh();

  const auto start = std::chrono::steady_clock::now();
  const EnsembleSummary non_eve = RunEnsemble(ReferenceRun(0.0, 300), kReferenceTrials);
  const double secs = Seconds(start);
  NonEveChsh(non_eve, secs);
  EveScenario();
  NonEveQber(non_eve);
  PovmClosure();
  SiftFraction();
  CascadeSuite();
  ParityHashSuite();
  KeyRates(non_eve);
  Determinism();

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
