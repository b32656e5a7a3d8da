// Copyright 2026 The BPE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "bpe/circuit.hpp"
#include "bpe/ensemble.hpp"
#include "bpe/oracle.hpp"
#include "bpe/tableau_dense.hpp"

namespace bpe {
namespace {

Tableau ghz(std::size_t L) {
  Tableau t(L);
  t.apply(gates::hadamard1(), 0, 1);
  for (std::size_t q = 1; q < L; ++q) t.apply(gates::cnot(), 0, q);
  return t;
}

Tableau bell_pair(std::size_t L, std::size_t a, std::size_t b) {
  Tableau t(L);
  t.apply(gates::hadamard1(), a, b);
  t.apply(gates::cnot(), a, b);
  return t;
}

Tableau random_clifford_state(std::size_t L, double p, int steps, std::uint64_t seed,
                              Boundary boundary = Boundary::periodic) {
  CircuitConfig cfg;
  cfg.L = L;
  cfg.p = p;
  cfg.boundary = boundary;
  Tableau t(L);
  RandomStream rng = make_stream(seed);
  for (int s = 0; s < steps; ++s) {
    step(t, cfg, Parity::even, rng);
    step(t, cfg, Parity::odd, rng);
  }
  return t;
}

TEST(Bpe, GhzHasNoPairEntanglement) {
  const auto t = ghz(6);
  const auto psi = to_statevector(t);
  RandomStream rng = make_stream(61);
  for (std::size_t a = 0; a < 6; ++a)
    for (std::size_t b = 0; b < 6; ++b) {
      if (a == b) continue;
      EXPECT_EQ(bpe_entropy_stabilizer(t, a, b, rng), 0.0);
      EXPECT_NEAR(eae_exact_statevector(psi, a, b), 0.0, 1e-12);
    }
}

TEST(Bpe, BellPairCarriesLn2) {
  const auto t = bell_pair(6, 1, 4);
  RandomStream rng = make_stream(62);
  EXPECT_DOUBLE_EQ(bpe_entropy_stabilizer(t, 1, 4, rng), kLn2);
  EXPECT_DOUBLE_EQ(bpe_entropy_stabilizer(t, 4, 1, rng), kLn2);
  EXPECT_EQ(bpe_entropy_stabilizer(t, 1, 3, rng), 0.0);
  EXPECT_NEAR(eae_exact_statevector(to_statevector(t), 1, 4), kLn2, 1e-12);
  EXPECT_THROW(bpe_entropy_stabilizer(t, 2, 2, rng), ContractViolation);
  EXPECT_THROW(bpe_entropy_stabilizer(t, 2, 6, rng), ContractViolation);
}

TEST(Bpe, BackendsAgreeOnRandomCliffordStates) {
  for (std::size_t L : {4u, 6u, 8u, 10u}) {
    for (double p : {0.0, 0.15, 0.4}) {
      const auto t = random_clifford_state(L, p, static_cast<int>(L), 1000 + L + static_cast<std::uint64_t>(100 * p));
      const auto psi = to_statevector(t);
      for (std::size_t a = 0; a < L; ++a) {
        std::vector<std::size_t> bs;
        for (std::size_t b = 0; b < L; ++b)
          if (b != a) bs.push_back(b);
        const auto fast = pair_entropies(t, a, bs);
        for (std::size_t i = 0; i < bs.size(); ++i) {
          EXPECT_NEAR(fast[i], eae_exact_statevector(psi, a, bs[i]), 1e-9) << "L=" << L << " a=" << a << " b=" << bs[i];
        }
      }
    }
  }
}

TEST(Bpe, EntropyIsOutcomeIndependent) {
  // With signs tracked the outcomes are random; the entropy must not care.
  const auto t = random_clifford_state(12, 0.1, 12, 63);
  for (std::size_t b = 1; b < 12; ++b) {
    RandomStream ignored = make_stream(1);
    const double ref = bpe_entropy_stabilizer(t, 0, b, ignored);
    for (std::uint64_t s = 0; s < 8; ++s) {
      RandomStream rng = make_stream(100 + s);
      EXPECT_EQ(bpe_entropy_stabilizer(t, 0, b, rng, SignMode::tracked), ref);
    }
  }
}

TEST(Bpe, WStateAndProductState) {
  // |W> = (|001> + |010> + |100>) / sqrt 3.
  std::vector<Complex> w(8, 0.0);
  w[1] = w[2] = w[4] = 1.0 / std::sqrt(3.0);
  const auto psi = Statevector::from_amplitudes(w);
  for (auto [a, b] : {std::pair{0, 1}, {1, 2}, {0, 2}}) {
    EXPECT_NEAR(eae_exact_statevector(psi, a, b), 2.0 / 3.0 * kLn2, 1e-12);
  }
  // Random product state.
  RandomStream rng = make_stream(64);
  std::vector<Complex> prod{1.0};
  for (int q = 0; q < 5; ++q) {
    const Complex c0(standard_normal(rng), standard_normal(rng)), c1(standard_normal(rng), standard_normal(rng));
    std::vector<Complex> next(prod.size() * 2);
    for (std::size_t i = 0; i < prod.size(); ++i) {
      next[i] = prod[i] * c0;
      next[i + prod.size()] = prod[i] * c1;
    }
    prod = std::move(next);
  }
  auto pp = Statevector::from_amplitudes(prod);
  pp.normalize();
  EXPECT_NEAR(eae_exact_statevector(pp, 0, 3), 0.0, 1e-12);
  EXPECT_NEAR(eae_exact_statevector(pp, 4, 2), 0.0, 1e-12);
  Statevector unnormalized = Statevector::from_amplitudes({1.0, 1.0});
  EXPECT_THROW(eae_exact_statevector(unnormalized, 0, 0), ContractViolation);
}

TEST(Bpe, HaarStateIsNearPageValue) {
  // Each post-measurement pair state is Haar on C^4: mean entropy 1/3 nats.
  RandomStream rng = make_stream(65);
  const std::size_t L = 12;
  std::vector<Complex> amps(std::size_t{1} << L);
  for (auto &a : amps) a = Complex(standard_normal(rng), standard_normal(rng));
  auto psi = Statevector::from_amplitudes(amps);
  psi.normalize();
  double sum = 0;
  int n = 0;
  for (std::size_t a = 0; a < L; a += 3)
    for (std::size_t b = a + 1; b < L; b += 2) {
      sum += eae_exact_statevector(psi, a, b);
      ++n;
    }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 1.0 / 3.0, 0.01);
  EXPECT_NEAR(mean, kLn2 / 2.0, 0.02);
}

TEST(Profile, BellPairPeriodic) {
  CircuitConfig cfg;
  cfg.L = 8;
  RandomStream rng = make_stream(66);
  const auto prof = eae_profile(bell_pair(8, 0, 3), cfg, rng);
  ASSERT_EQ(prof.size(), 7u);
  for (std::size_t i = 0; i < prof.size(); ++i) {
    EXPECT_EQ(prof.mean[i], prof.separation(i) == 3 ? kLn2 : 0.0) << i;
  }
  EXPECT_DOUBLE_EQ(integrated_eae(prof), kLn2 / 8.0);

  cfg.positions_mode = PositionsMode::translation_average;
  const auto avg = eae_profile(bell_pair(8, 0, 3), cfg, rng);
  // Only (0, 3) at r = 3 and (3, 0) at r = 5 carry entanglement, out of 8 origins.
  for (std::size_t i = 0; i < avg.size(); ++i) {
    const int r = avg.separation(i);
    EXPECT_DOUBLE_EQ(avg.mean[i], (r == 3 || r == 5) ? kLn2 / 8.0 : 0.0) << r;
  }
}

TEST(Profile, OpenChainCentersThePair) {
  CircuitConfig cfg;
  cfg.L = 8;
  cfg.boundary = Boundary::open;
  RandomStream rng = make_stream(67);
  // r = 3 places A at (8 - 1 - 3) / 2 = 2.
  const auto prof = eae_profile(bell_pair(8, 2, 5), cfg, rng);
  EXPECT_EQ(prof.mean[2], kLn2);
  EXPECT_EQ(std::accumulate(prof.mean.begin(), prof.mean.end(), 0.0), kLn2);
}

TEST(Profile, DenseAndStabilizerProfilesAgree) {
  for (auto boundary : {Boundary::periodic, Boundary::open})
    for (auto mode : {PositionsMode::fixed_origin, PositionsMode::translation_average}) {
      const auto t = random_clifford_state(8, 0.1, 6, 68, boundary);
      const auto fast = eae_values(t, boundary, mode);
      const auto slow = eae_values(to_statevector(t), boundary, mode);
      for (std::size_t i = 0; i < fast.size(); ++i) EXPECT_NEAR(fast[i], slow[i], 1e-9);
    }
}

TEST(Moments, ConstantProfile) {
  const double c = 0.37;
  for (std::size_t L : {8u, 64u, 1000u}) {
    std::vector<double> e(L - 1, c);
    const double Ld = static_cast<double>(L);
    EXPECT_NEAR(moment_eae(e, L, 0), c * (Ld - 1) / Ld, 1e-14);
    EXPECT_NEAR(moment_eae(e, L, 1), c * (Ld - 1) / (2 * Ld), 1e-14);
    EXPECT_NEAR(moment_eae(e, L, 2), c * (Ld - 1) * (2 * Ld - 1) / (6 * Ld * Ld), 1e-14);
  }
  EXPECT_THROW(moment_eae(std::vector<double>{1.0}, 2, -1), ContractViolation);
}

TEST(Moments, PeriodicChainUsesRingDistance) {
  // Symmetric profile on a ring: r and L - r sit at the same distance.
  const std::size_t L = 8;
  std::vector<double> e(L - 1, 1.0);
  // d = 1,2,3,4,3,2,1
  EXPECT_NEAR(moment_eae(e, L, 1, Boundary::periodic), 16.0 / 64.0, 1e-15);
  EXPECT_NEAR(moment_eae(e, L, 2, Boundary::periodic), 44.0 / 512.0, 1e-15);
  EXPECT_NEAR(moment_eae(e, L, 0, Boundary::periodic), moment_eae(e, L, 0, Boundary::open), 1e-15);
}

TEST(Moments, PowerLawProfileMatchesDirectSum) {
  const std::size_t L = 256;
  std::vector<double> e(L - 1);
  for (std::size_t r = 1; r < L; ++r) e[r - 1] = std::pow(static_cast<double>(r), -0.71);
  for (int k = 0; k <= 3; ++k) {
    // Summed smallest-first in plain double as an independent reference.
    double ref = 0;
    for (std::size_t r = L - 1; r >= 1; --r) ref += std::pow(static_cast<double>(r), k - 0.71) / std::pow(256.0, k + 1);
    EXPECT_NEAR(moment_eae(e, L, k), ref, 1e-12 * std::abs(ref)) << k;
  }
}

TEST(Surface, EdgeBellPair) {
  const std::size_t L = 10;
  RandomStream rng = make_stream(69);
  const auto s = surface_profiles(bell_pair(L, 0, L - 1), Boundary::open, rng);
  ASSERT_EQ(s.perp.size(), L - 1);
  EXPECT_EQ(s.parallel, kLn2);
  for (std::size_t i = 0; i + 1 < s.perp.size(); ++i) EXPECT_EQ(s.perp[i], 0.0);
  const auto s2 = surface_profiles(bell_pair(L, 0, 4), Boundary::open, rng);
  EXPECT_EQ(s2.perp[3], kLn2);
  EXPECT_EQ(s2.parallel, 0.0);
  EXPECT_THROW(surface_profiles(bell_pair(L, 0, 4), Boundary::periodic, rng), ContractViolation);
  EXPECT_THROW(surface_profiles(Statevector(4), Boundary::periodic), ContractViolation);
}

TEST(Surface, DenseAgrees) {
  const auto t = random_clifford_state(8, 0.2, 5, 70, Boundary::open);
  RandomStream rng = make_stream(71);
  const auto a = surface_profiles(t, Boundary::open, rng);
  const auto b = surface_profiles(to_statevector(t), Boundary::open);
  for (std::size_t i = 0; i < a.perp.size(); ++i) EXPECT_NEAR(a.perp[i], b.perp[i], 1e-9);
  EXPECT_NEAR(a.parallel, b.parallel, 1e-9);
}

TEST(Sweep, MatchesOneMeasurementPassPerPair) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const std::size_t L = 20 + 10 * (seed % 3);
    const auto t = random_clifford_state(L, 0.05 * seed, 10, 72 + seed);
    RandomStream rng = make_stream(seed);
    const std::size_t a = seed % L;
    std::vector<std::size_t> bs;
    for (std::size_t b = 0; b < L; ++b)
      if (b != a) bs.push_back(b);
    const auto fast = pair_entropies(t, a, bs);
    for (std::size_t i = 0; i < bs.size(); ++i) EXPECT_EQ(fast[i], bpe_entropy_stabilizer(t, a, bs[i], rng));
  }
}

TEST(Sweep, RejectsBadSites) {
  const auto t = ghz(4);
  const std::vector<std::size_t> dup{1, 1}, self{0}, far{9};
  EXPECT_THROW(pair_entropies(t, 0, dup), ContractViolation);
  EXPECT_THROW(pair_entropies(t, 0, self), ContractViolation);
  EXPECT_THROW(pair_entropies(t, 0, far), ContractViolation);
  EXPECT_TRUE(pair_entropies(t, 0, {}).empty());
}

}  // namespace
}  // namespace bpe
