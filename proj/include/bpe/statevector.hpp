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

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "bpe/errors.hpp"
#include "bpe/pauli.hpp"
#include "bpe/rng.hpp"

namespace bpe {

using Complex = std::complex<double>;
using Unitary4 = Eigen::Matrix4cd;

/// Dense L-qubit pure state. Qubit j is bit j of the amplitude index.
class Statevector {
 public:
  static constexpr std::size_t kMaxQubits = 24;

  explicit Statevector(std::size_t n) : n_(n) {
    detail::require(n >= 1, "Statevector: need at least one qubit");
    if (n > kMaxQubits) throw CapacityError("Statevector: " + std::to_string(n) + " qubits exceeds the dense limit");
    amps_.assign(std::size_t{1} << n, Complex{});
    amps_[0] = 1.0;
  }

  /// Takes ownership of amplitudes; the length must be a power of two.
  static Statevector from_amplitudes(std::vector<Complex> amps) {
    std::size_t n = 0;
    while ((std::size_t{1} << n) < amps.size()) ++n;
    detail::require(amps.size() >= 2 && (std::size_t{1} << n) == amps.size(),
                    "Statevector::from_amplitudes: length must be a power of two >= 2");
    Statevector s(n);
    s.amps_ = std::move(amps);
    return s;
  }

  std::size_t num_qubits() const { return n_; }
  std::size_t dim() const { return amps_.size(); }
  const std::vector<Complex> &amplitudes() const { return amps_; }
  std::vector<Complex> &amplitudes() { return amps_; }
  Complex operator[](std::size_t i) const { return amps_[i]; }

  double norm() const {
    double s = 0;
    for (const auto &a : amps_) s += std::norm(a);
    return std::sqrt(s);
  }

  void normalize() {
    const double nrm = norm();
    if (nrm < 1e-300) throw InternalInvariantError("Statevector::normalize: zero vector");
    for (auto &a : amps_) a /= nrm;
  }

 private:
  std::size_t n_;
  std::vector<Complex> amps_;
};

/// Applies a 4x4 unitary to sites (j, k). The local basis index is bit_j + 2*bit_k.
inline void apply_unitary2(Statevector &psi, const Unitary4 &u, std::size_t j, std::size_t k) {
  const auto n = psi.num_qubits();
  detail::require(j < n && k < n && j != k, "apply_unitary2: sites must be distinct and in range");
  const std::size_t mj = std::size_t{1} << j, mk = std::size_t{1} << k;
  auto &a = psi.amplitudes();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i & (mj | mk)) continue;
    const std::size_t idx[4] = {i, i | mj, i | mk, i | mj | mk};
    const Complex v[4] = {a[idx[0]], a[idx[1]], a[idx[2]], a[idx[3]]};
    for (int r = 0; r < 4; ++r) {
      a[idx[r]] = u(r, 0) * v[0] + u(r, 1) * v[1] + u(r, 2) * v[2] + u(r, 3) * v[3];
    }
  }
}

/// Probability that site j reads bit 0 (Z = +1).
inline double prob_zero(const Statevector &psi, std::size_t j) {
  detail::require(j < psi.num_qubits(), "prob_zero: site out of range");
  const std::size_t mj = std::size_t{1} << j;
  double p0 = 0;
  const auto &a = psi.amplitudes();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(i & mj)) p0 += std::norm(a[i]);
  }
  return p0;
}

/// Projects site j onto the Z eigenvalue `outcome` (+1 or -1) and renormalizes.
inline void project_z(Statevector &psi, std::size_t j, int outcome) {
  detail::require(j < psi.num_qubits(), "project_z: site out of range");
  detail::require(outcome == 1 || outcome == -1, "project_z: outcome must be +1 or -1");
  const std::size_t mj = std::size_t{1} << j;
  const bool keep_one = outcome == -1;
  auto &a = psi.amplitudes();
  double kept = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (static_cast<bool>(i & mj) == keep_one) {
      kept += std::norm(a[i]);
    } else {
      a[i] = 0;
    }
  }
  if (kept < 1e-14) throw InternalInvariantError("project_z: selected branch has vanishing probability");
  const double s = 1.0 / std::sqrt(kept);
  for (auto &x : a) x *= s;
}

/// Born-rule Z measurement; returns +1 or -1.
inline int measure_z_statevector(Statevector &psi, std::size_t j, RandomStream &rng) {
  const double p0 = prob_zero(psi, j);
  const int outcome = uniform01(rng) < p0 ? 1 : -1;
  project_z(psi, j, outcome);
  return outcome;
}

/// Multiplies psi by the (signed, Hermitian) Pauli string p.
inline void apply_pauli(Statevector &psi, const PauliString &p) {
  detail::require(p.size() == psi.num_qubits(), "apply_pauli: length mismatch");
  std::size_t xmask = 0, zmask = 0;
  int ycount = 0;
  for (std::size_t q = 0; q < p.size(); ++q) {
    if (p.x(q)) xmask |= std::size_t{1} << q;
    if (p.z(q)) zmask |= std::size_t{1} << q;
    ycount += p.x(q) && p.z(q);
  }
  // P = sign * i^{#Y} X^x Z^z ; acting on |b>: Z^z gives (-1)^{b.z}, then X^x flips.
  static constexpr Complex ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const Complex pre = ipow[ycount % 4] * static_cast<double>(p.phase());
  auto &a = psi.amplitudes();
  std::vector<Complex> out(a.size());
  for (std::size_t b = 0; b < a.size(); ++b) {
    const double s = (std::popcount(b & zmask) & 1) ? -1.0 : 1.0;
    out[b ^ xmask] = pre * s * a[b];
  }
  a.swap(out);
}

/// Haar-random 4x4 unitary: QR of a complex Ginibre matrix with the phases of R's
/// diagonal moved into Q.
inline Unitary4 sample_haar_unitary4(RandomStream &rng) {
  Unitary4 g;
  const double s = 1.0 / std::sqrt(2.0);
  for (int c = 0; c < 4; ++c) {
    for (int r = 0; r < 4; ++r) {
      const double re = standard_normal(rng);
      const double im = standard_normal(rng);
      g(r, c) = Complex(re * s, im * s);
    }
  }
  Eigen::HouseholderQR<Unitary4> qr(g);
  Unitary4 q = qr.householderQ();
  const Unitary4 r = qr.matrixQR();
  for (int i = 0; i < 4; ++i) {
    const Complex d = r(i, i);
    q.col(i) *= d / std::abs(d);
  }
  return q;
}

}  // namespace bpe
