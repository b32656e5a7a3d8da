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

// Bridges between the stabilizer and dense representations.

#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "bpe/clifford2.hpp"
#include "bpe/statevector.hpp"
#include "bpe/tableau.hpp"

namespace bpe {

inline constexpr std::size_t kMaxStatevectorExport = 14;

/// The state stabilized by every generator of `t`, with the global phase fixed so
/// that the largest-magnitude amplitude (lowest index on ties) is real and positive.
inline Statevector to_statevector(const Tableau &t) {
  const auto n = t.num_qubits();
  if (n > kMaxStatevectorExport) {
    throw CapacityError("to_statevector: " + std::to_string(n) + " qubits exceeds the limit of " +
                        std::to_string(kMaxStatevectorExport));
  }
  // Project a generic vector with prod_i (1 + g_i)/2.
  RandomStream rng = make_stream(0x5EED5EEDull);
  std::vector<Complex> w(std::size_t{1} << n);
  for (auto &a : w) a = Complex(standard_normal(rng), standard_normal(rng));
  auto psi = Statevector::from_amplitudes(std::move(w));
  for (std::size_t i = 0; i < n; ++i) {
    Statevector gpsi = psi;
    apply_pauli(gpsi, t.stabilizer(i));
    auto &a = psi.amplitudes();
    const auto &b = gpsi.amplitudes();
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = 0.5 * (a[k] + b[k]);
  }
  psi.normalize();
  auto &a = psi.amplitudes();
  std::size_t best = 0;
  for (std::size_t k = 1; k < a.size(); ++k) {
    if (std::abs(a[k]) > std::abs(a[best]) + 1e-12) best = k;
  }
  const Complex phase = std::conj(a[best]) / std::abs(a[best]);
  for (auto &x : a) x *= phase;
  return psi;
}

/// Dense 4x4 matrix of a two-qubit Clifford, built from its generator images:
/// U|00> spans the joint +1 eigenspace of the Z images and U|b1 b2> = X1'^b1 X2'^b2 U|00>.
inline Unitary4 clifford_unitary(const CliffordGate2 &g) {
  auto local = [](const PauliString &p, const Statevector &v) {
    Statevector out = v;
    apply_pauli(out, p);
    return out;
  };
  // The joint eigenspace is one-dimensional, so some basis vector keeps >= 1/4 of its weight.
  Statevector v(2);
  double best = -1;
  for (std::size_t e = 0; e < 4; ++e) {
    std::vector<Complex> basis(4);
    basis[e] = 1.0;
    auto cand = Statevector::from_amplitudes(basis);
    for (int gen : {1, 3}) {
      const auto pv = local(g.image(gen), cand);
      for (std::size_t k = 0; k < 4; ++k) cand.amplitudes()[k] = 0.5 * (cand[k] + pv[k]);
    }
    if (cand.norm() > best + 1e-12) {
      best = cand.norm();
      v = cand;
    }
  }
  v.normalize();
  Unitary4 u;
  for (int b = 0; b < 4; ++b) {
    Statevector col = v;
    if (b & 1) col = local(g.image(0), col);
    if (b & 2) col = local(g.image(2), col);
    for (int r = 0; r < 4; ++r) u(r, b) = col[r];
  }
  return u;
}

}  // namespace bpe
