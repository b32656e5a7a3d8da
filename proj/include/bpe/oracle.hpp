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

// Dense reference computations used to cross-check the stabilizer code paths.
// Nothing here shares code with the tableau kernels: entropies come from singular
// values of the reshaped amplitude array and gates from explicit 4x4 matrices.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bpe/circuit.hpp"
#include "bpe/statevector.hpp"
#include "bpe/tableau.hpp"
#include "bpe/tableau_dense.hpp"

namespace bpe::oracle {

/// 2^n x 2^n matrix of a signed Pauli string, built as a Kronecker product.
inline Eigen::MatrixXcd dense_pauli(const PauliString &p) {
  Eigen::Matrix2cd I, X, Y, Z;
  I << 1, 0, 0, 1;
  X << 0, 1, 1, 0;
  Y << 0, Complex(0, -1), Complex(0, 1), 0;
  Z << 1, 0, 0, -1;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
  // Qubit 0 is the least significant index bit, so it is the rightmost factor.
  for (std::size_t q = 0; q < p.size(); ++q) {
    const Eigen::Matrix2cd &f = p.x(q) ? (p.z(q) ? Y : X) : (p.z(q) ? Z : I);
    Eigen::MatrixXcd next(m.rows() * 2, m.cols() * 2);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) next.block(r * m.rows(), c * m.cols(), m.rows(), m.cols()) = f(r, c) * m;
    }
    m = next;
  }
  return static_cast<double>(p.phase()) * m;
}

/// Von Neumann entropy (nats) of `region` from the Schmidt spectrum of psi.
inline double region_entropy(const Statevector &psi, const Region &region) {
  const auto n = psi.num_qubits();
  const auto m = region.size();
  if (m == 0 || m == n) return 0.0;
  std::vector<std::size_t> rest;
  for (std::size_t q = 0; q < n; ++q) {
    if (std::find(region.sites().begin(), region.sites().end(), q) == region.sites().end()) rest.push_back(q);
  }
  Eigen::MatrixXcd mat = Eigen::MatrixXcd::Zero(Eigen::Index{1} << m, Eigen::Index{1} << (n - m));
  for (std::size_t i = 0; i < psi.dim(); ++i) {
    std::size_t r = 0, c = 0;
    for (std::size_t b = 0; b < m; ++b) r |= ((i >> region.sites()[b]) & 1) << b;
    for (std::size_t b = 0; b < rest.size(); ++b) c |= ((i >> rest[b]) & 1) << b;
    mat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = psi[i];
  }
  // Spectrum of the smaller reduced density matrix. Eigen 3.4's BDCSVD returns
  // wrong singular values for some highly degenerate complex spectra.
  const Eigen::MatrixXcd rho = m <= n - m ? Eigen::MatrixXcd(mat * mat.adjoint()) : Eigen::MatrixXcd(mat.adjoint() * mat);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) {
    const double lam = eig.eigenvalues()(k);
    if (lam > 1e-15) s -= lam * std::log(lam);
  }
  return s;
}

/// Overlap-based fidelity |<a|b>|.
inline double fidelity(const Statevector &a, const Statevector &b) {
  Complex acc = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) acc += std::conj(a[i]) * b[i];
  return std::abs(acc);
}

/// Rank over GF(2) by plain row reduction on 0/1 integers.
inline std::size_t naive_rank(std::vector<std::vector<int>> rows) {
  std::size_t rank = 0;
  const std::size_t cols = rows.empty() ? 0 : rows[0].size();
  for (std::size_t c = 0; c < cols; ++c) {
    std::size_t piv = rank;
    while (piv < rows.size() && rows[piv][c] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[rank]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r != rank && rows[r][c]) {
        for (std::size_t k = 0; k < cols; ++k) rows[r][k] ^= rows[rank][k];
      }
    }
    ++rank;
  }
  return rank;
}

/// Result of driving the tableau and dense backends through one random circuit.
struct EquivalenceReport {
  std::size_t checks = 0;
  double max_entropy_error = 0.0;
  double min_fidelity = 1.0;
  std::string first_failure;
};

/// Runs a random hybrid Clifford circuit on both backends. The tableau draws gates
/// and outcomes; the dense state receives the same gates as explicit unitaries and
/// is projected onto the tableau's outcomes. After every layer every contiguous
/// region (and a few scattered ones) is compared.
inline EquivalenceReport check_circuit_equivalence(std::size_t L, double p, int steps, std::uint64_t seed,
                                                   Boundary boundary = Boundary::periodic) {
  CircuitConfig cfg;
  cfg.L = L;
  cfg.p = p;
  cfg.boundary = boundary;
  cfg.t_max = steps;
  cfg.record_times = {steps};
  Tableau tab(L);
  Statevector dense(L);
  RandomStream rng = make_stream(seed);
  StepObserver obs;
  obs.on_gate = [&](const CliffordGate2 &g, std::size_t j, std::size_t k) {
    apply_unitary2(dense, clifford_unitary(g), j, k);
  };
  obs.on_measure = [&](std::size_t q, int outcome) { project_z(dense, q, outcome); };
  EquivalenceReport rep;
  std::vector<Region> regions;
  for (std::size_t a = 0; a < L; ++a) {
    for (std::size_t b = a + 1; b <= L; ++b) regions.push_back(Region::interval(a, b));
  }
  if (L >= 4) regions.push_back(Region{0, 2});
  if (L >= 6) regions.push_back(Region{1, 3, 5});
  for (int layer = 0; layer < 2 * steps; ++layer) {
    step(tab, cfg, layer % 2 ? Parity::odd : Parity::even, rng, &obs);
    for (const auto &r : regions) {
      const double e1 = tab.entanglement_entropy(r);
      const double e2 = region_entropy(dense, r);
      ++rep.checks;
      const double err = std::abs(e1 - e2);
      if (err > rep.max_entropy_error) rep.max_entropy_error = err;
      if (err > 1e-9 && rep.first_failure.empty()) {
        rep.first_failure = "layer " + std::to_string(layer) + " region size " + std::to_string(r.size()) +
                            ": tableau " + std::to_string(e1) + " dense " + std::to_string(e2);
      }
    }
    const double f = fidelity(to_statevector(tab), dense);
    rep.min_fidelity = std::min(rep.min_fidelity, f);
  }
  return rep;
}

}  // namespace bpe::oracle
