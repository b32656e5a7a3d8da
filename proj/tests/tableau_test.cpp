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
#include <map>

#include <gtest/gtest.h>

#include "bpe/oracle.hpp"
#include "bpe/tableau.hpp"
#include "bpe/tableau_dense.hpp"

namespace bpe {
namespace {

Tableau random_clifford_state(std::size_t n, int gates, RandomStream &rng) {
  Tableau t(n);
  for (int i = 0; i < gates; ++i) {
    const auto j = uniform_below(rng, n);
    auto k = uniform_below(rng, n - 1);
    if (k >= j) ++k;
    t.apply(sample_clifford2(rng), j, k);
  }
  return t;
}

Tableau bell_pair(std::size_t n, std::size_t j, std::size_t k) {
  Tableau t(n);
  t.apply(gates::hadamard1(), j, k);
  t.apply(gates::cnot(), j, k);
  return t;
}

TEST(Tableau, ZeroState) {
  auto t1 = new_zero_state(1);
  EXPECT_EQ(t1.stabilizer(0), PauliString::parse("+Z"));
  EXPECT_EQ(t1.destabilizer(0), PauliString::parse("+X"));
  auto t3 = new_zero_state(3);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(t3.entanglement_entropy(Region{j}), 0.0);
  const auto v = to_statevector(new_zero_state(2));
  EXPECT_NEAR(std::abs(v[0] - Complex(1, 0)), 0.0, 1e-12);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_NEAR(std::abs(v[i]), 0.0, 1e-12);
  EXPECT_THROW(new_zero_state(0), ContractViolation);
  EXPECT_TRUE(t3.check_invariants().empty());
}

TEST(Tableau, IdentityGateLeavesStateUnchanged) {
  RandomStream rng = make_stream(31);
  auto t = random_clifford_state(6, 20, rng);
  auto copy = t;
  t.apply(CliffordGate2::identity(), 1, 4);
  EXPECT_EQ(t, copy);
}

TEST(Tableau, BellPair) {
  auto t = bell_pair(2, 0, 1);
  EXPECT_NEAR(t.entanglement_entropy(Region{0}), kLn2, 1e-15);
  const auto v = to_statevector(t);
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(v[0] - Complex(s, 0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(v[3] - Complex(s, 0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(v[1]) + std::abs(v[2]), 0.0, 1e-12);
}

TEST(Tableau, ApplyRejectsBadSites) {
  Tableau t(4);
  EXPECT_THROW(t.apply(gates::cnot(), 1, 1), ContractViolation);
  EXPECT_THROW(t.apply(gates::cnot(), 0, 4), ContractViolation);
  RandomStream rng = make_stream(1);
  EXPECT_THROW(t.measure_z(4, rng), ContractViolation);
}

TEST(Tableau, GatesMatchDenseConjugation) {
  RandomStream rng = make_stream(32);
  for (int trial = 0; trial < 50; ++trial) {
    auto t = random_clifford_state(6, 15, rng);
    auto psi = to_statevector(t);
    const auto g = sample_clifford2(rng);
    const auto j = uniform_below(rng, 6);
    auto k = uniform_below(rng, 5);
    if (k >= j) ++k;
    t.apply(g, j, k);
    apply_unitary2(psi, clifford_unitary(g), j, k);
    EXPECT_NEAR(oracle::fidelity(to_statevector(t), psi), 1.0, 1e-10);
    EXPECT_TRUE(t.check_invariants().empty());
  }
}

TEST(Tableau, StatevectorIsStabilized) {
  RandomStream rng = make_stream(33);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = random_clifford_state(6, 30, rng);
    const auto v = to_statevector(t);
    EXPECT_NEAR(v.norm(), 1.0, 1e-12);
    Eigen::VectorXcd vec(64);
    for (int i = 0; i < 64; ++i) vec(i) = v[i];
    for (std::size_t g = 0; g < 6; ++g) {
      EXPECT_LT((oracle::dense_pauli(t.stabilizer(g)) * vec - vec).norm(), 1e-10);
    }
  }
  EXPECT_THROW(to_statevector(Tableau(15)), CapacityError);
}

TEST(Tableau, MeasureDeterministicZero) {
  Tableau t(1);
  RandomStream rng = make_stream(34);
  const auto before = t;
  EXPECT_EQ(t.measure_z(0, rng), 1);
  EXPECT_EQ(t, before);
}

TEST(Tableau, MeasurePlusIsFair) {
  RandomStream rng = make_stream(35);
  const int n = 20000;
  int minus = 0;
  for (int i = 0; i < n; ++i) {
    Tableau t(2);
    t.apply(gates::hadamard1(), 0, 1);
    minus += t.measure_z(0, rng) == -1;
  }
  EXPECT_LT(std::abs(minus - n / 2.0), 4 * std::sqrt(n / 4.0));
}

TEST(Tableau, BornStatisticsOfPlusStates) {
  // |+>^L measured on every site: each bit-string has frequency 2^-L.
  RandomStream rng = make_stream(36);
  const std::size_t L = 4;
  const int shots = 32000;
  std::map<unsigned, int> hist;
  for (int s = 0; s < shots; ++s) {
    Tableau t(L);
    for (std::size_t j = 0; j < L; j += 2) {
      t.apply(gates::hadamard1(), j, j + 1);
      t.apply(gates::hadamard1(), j + 1, j);
    }
    unsigned bits = 0;
    for (std::size_t j = 0; j < L; ++j) bits |= (t.measure_z(j, rng) == -1) << j;
    ++hist[bits];
  }
  const double pexp = 1.0 / 16.0;
  const double mean = shots * pexp, sigma = std::sqrt(shots * pexp * (1 - pexp));
  EXPECT_EQ(hist.size(), 16u);
  for (const auto &[bits, count] : hist) EXPECT_LT(std::abs(count - mean), 4 * sigma) << bits;
}

TEST(Tableau, BellOutcomesAreCorrelated) {
  RandomStream rng = make_stream(37);
  int ones = 0;
  for (int i = 0; i < 200; ++i) {
    auto t = bell_pair(3, 0, 2);
    const int a = t.measure_z(0, rng);
    const int b = t.measure_z(2, rng);
    EXPECT_EQ(a, b);
    EXPECT_EQ(t.measure_z(1, rng), 1);
    ones += a == -1;
  }
  EXPECT_GT(ones, 50);
  EXPECT_LT(ones, 150);
}

TEST(Tableau, MeasurementMatchesDenseProjection) {
  RandomStream rng = make_stream(38);
  for (int trial = 0; trial < 100; ++trial) {
    auto t = random_clifford_state(5, 12, rng);
    auto psi = to_statevector(t);
    const auto q = uniform_below(rng, 5);
    const double p0 = prob_zero(psi, q);
    const int outcome = t.measure_z(q, rng);
    if (std::abs(p0 - 0.5) > 1e-9) {
      // Deterministic: the outcome must be the certain one.
      ASSERT_NEAR(p0, outcome == 1 ? 1.0 : 0.0, 1e-9);
    }
    project_z(psi, q, outcome);
    EXPECT_NEAR(oracle::fidelity(to_statevector(t), psi), 1.0, 1e-10);
    EXPECT_TRUE(t.check_invariants().empty()) << t.check_invariants();
  }
}

TEST(Tableau, EntropyMatchesDensePartialTrace) {
  RandomStream rng = make_stream(39);
  for (int trial = 0; trial < 30; ++trial) {
    const auto t = random_clifford_state(8, 40, rng);
    const auto psi = to_statevector(t);
    for (const auto &r : {Region{0, 1, 2}, Region{3}, Region{0, 4, 7}, Region{1, 2, 3, 4, 5}}) {
      EXPECT_NEAR(t.entanglement_entropy(r), oracle::region_entropy(psi, r), 1e-9);
    }
  }
}

TEST(Tableau, EntropyPurityAndGeneratorInvariance) {
  RandomStream rng = make_stream(40);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = random_clifford_state(10, 60, rng);
    for (std::size_t mask = 1; mask < (1u << 10) - 1; mask += 37) {
      std::vector<std::size_t> sites;
      for (std::size_t q = 0; q < 10; ++q)
        if (mask >> q & 1) sites.push_back(q);
      Region r(sites);
      EXPECT_DOUBLE_EQ(t.entanglement_entropy(r), t.entanglement_entropy(r.complement(10)));
      EXPECT_GE(t.entanglement_entropy(r), 0.0);
    }
    EXPECT_EQ(t.entanglement_entropy(Region::interval(0, 10)), 0.0);
  }
}

TEST(Tableau, EntropyIndependentOfGeneratingSet) {
  RandomStream rng = make_stream(41);
  for (int trial = 0; trial < 30; ++trial) {
    auto a = random_clifford_state(9, 50, rng);
    auto b = a;
    for (int k = 0; k < 20; ++k) {
      const auto dst = uniform_below(rng, 9);
      auto src = uniform_below(rng, 8);
      if (src >= dst) ++src;
      b.rebase_generators(dst, src);
    }
    ASSERT_TRUE(b.check_invariants().empty()) << b.check_invariants();
    EXPECT_NEAR(oracle::fidelity(to_statevector(a), to_statevector(b)), 1.0, 1e-10);
    for (const auto &r : {Region{0}, Region{1, 2}, Region{0, 3, 8}, Region::interval(2, 7)}) {
      EXPECT_EQ(a.entanglement_entropy(r), b.entanglement_entropy(r));
    }
  }
}

TEST(Tableau, SignModeDoesNotChangeSupports) {
  RandomStream rng = make_stream(44), rng2 = make_stream(99);
  for (int trial = 0; trial < 30; ++trial) {
    auto a = random_clifford_state(9, 50, rng);
    auto b = a;
    for (std::size_t q : {2u, 5u, 7u}) {
      a.measure_z(q, rng, SignMode::tracked);
      b.measure_z(q, rng2, SignMode::ignored);
    }
    for (std::size_t s = 0; s < 9; ++s) {
      EXPECT_EQ(a.stabilizer(s).xs()[0], b.stabilizer(s).xs()[0]);
      EXPECT_EQ(a.stabilizer(s).zs()[0], b.stabilizer(s).zs()[0]);
    }
  }
}

TEST(Tableau, InvariantsHoldAlongRandomCircuits) {
  RandomStream rng = make_stream(42);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + uniform_below(rng, 70);
    Tableau t(n);
    for (int op = 0; op < 200; ++op) {
      if (uniform01(rng) < 0.3) {
        t.measure_z(uniform_below(rng, n), rng, coin(rng) ? SignMode::tracked : SignMode::ignored);
      } else {
        const auto j = uniform_below(rng, n);
        auto k = uniform_below(rng, n - 1);
        if (k >= j) ++k;
        t.apply(sample_clifford2(rng), j, k);
      }
    }
    ASSERT_TRUE(t.check_invariants().empty()) << t.check_invariants();
  }
}

TEST(StabilizerSupport, SiteEntropyMatchesTableau) {
  RandomStream rng = make_stream(43);
  for (int trial = 0; trial < 50; ++trial) {
    auto t = random_clifford_state(12, 80, rng);
    StabilizerSupport s(t);
    for (std::size_t q : {0u, 3u, 4u, 9u}) {
      s.collapse_z(q);
      t.measure_z(q, rng, SignMode::ignored);
    }
    for (std::size_t q = 0; q < 12; ++q) EXPECT_EQ(s.site_entropy(q), t.entanglement_entropy(Region{q}));
  }
}

}  // namespace
}  // namespace bpe
