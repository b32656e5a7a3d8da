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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "bpe/clifford2.hpp"
#include "bpe/gf2.hpp"
#include "bpe/pauli.hpp"
#include "bpe/rng.hpp"

namespace bpe {

inline constexpr double kLn2 = std::numbers::ln2;

/// Ordered set of distinct qubit indices.
class Region {
 public:
  Region() = default;
  Region(std::initializer_list<std::size_t> sites) : Region(std::vector<std::size_t>(sites)) {}
  explicit Region(std::vector<std::size_t> sites) : sites_(std::move(sites)) {
    std::sort(sites_.begin(), sites_.end());
    detail::require(std::adjacent_find(sites_.begin(), sites_.end()) == sites_.end(), "Region: duplicate site");
  }

  static Region interval(std::size_t begin, std::size_t end) {
    std::vector<std::size_t> s;
    for (auto i = begin; i < end; ++i) s.push_back(i);
    return Region(std::move(s));
  }

  Region complement(std::size_t n) const {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::binary_search(sites_.begin(), sites_.end(), i)) s.push_back(i);
    }
    return Region(std::move(s));
  }

  std::span<const std::size_t> sites() const { return sites_; }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }

 private:
  std::vector<std::size_t> sites_;
};

/// Measurement sign handling for measure_z.
enum class SignMode {
  /// Full Aaronson-Gottesman sign bookkeeping; outcomes are Born-rule samples.
  tracked,
  /// Random-outcome branch always installs +Z_j and deterministic outcomes are
  /// reported as +1. Stabilizer supports (and hence every entropy) are exact.
  ignored,
};

/// Stabilizer/destabilizer tableau of an L-qubit pure state. Rows 0..L-1 are the
/// destabilizers, rows L..2L-1 the stabilizers; each row stores x words then z words.
class Tableau {
 public:
  static constexpr std::size_t kMaxQubits = 1u << 16;

  /// |0...0>: stabilizers +Z_j, destabilizers +X_j.
  explicit Tableau(std::size_t n) : n_(n), w_(words_for(n)), bits_(2 * n * 2 * words_for(n), 0), neg_(2 * n, 0) {
    detail::require(n >= 1, "Tableau: need at least one qubit");
    if (n > kMaxQubits) throw CapacityError("Tableau: too many qubits");
    for (std::size_t j = 0; j < n; ++j) {
      kernels::set_bit(xs(j), j, true);
      kernels::set_bit(zs(n + j), j, true);
    }
  }

  std::size_t num_qubits() const { return n_; }

  PauliString stabilizer(std::size_t i) const { return row_string(n_ + i); }
  PauliString destabilizer(std::size_t i) const { return row_string(i); }

  std::span<const Word> stabilizer_xs(std::size_t i) const { return xs(n_ + i); }
  std::span<const Word> stabilizer_zs(std::size_t i) const { return zs(n_ + i); }

  /// Conjugates every row by `g` acting on (j, k) with j as the gate's qubit 1.
  void apply(const CliffordGate2 &g, std::size_t j, std::size_t k) {
    detail::require(j < n_ && k < n_ && j != k, "Tableau::apply: sites must be distinct and in range");
    const std::size_t wj = j / kWordBits, wk = k / kWordBits;
    const unsigned bj = j % kWordBits, bk = k % kWordBits;
    const std::size_t stride = 2 * w_;
    Word *base = bits_.data();
    for (std::size_t r = 0; r < 2 * n_; ++r) {
      Word *x = base + r * stride;
      Word *z = x + w_;
      const unsigned in = ((x[wj] >> bj) & 1) | (((z[wj] >> bj) & 1) << 1) | (((x[wk] >> bk) & 1) << 2) |
                          (((z[wk] >> bk) & 1) << 3);
      if (in == 0) continue;
      const auto &e = g.table(static_cast<std::uint8_t>(in));
      x[wj] = (x[wj] & ~(Word{1} << bj)) | (Word{e.bits & 1u} << bj);
      z[wj] = (z[wj] & ~(Word{1} << bj)) | (Word{(e.bits >> 1) & 1u} << bj);
      x[wk] = (x[wk] & ~(Word{1} << bk)) | (Word{(e.bits >> 2) & 1u} << bk);
      z[wk] = (z[wk] & ~(Word{1} << bk)) | (Word{(e.bits >> 3) & 1u} << bk);
      neg_[r] ^= e.flip;
    }
  }

  /// Projective Z measurement of site j; returns +1 or -1.
  int measure_z(std::size_t j, RandomStream &rng, SignMode signs = SignMode::tracked) {
    detail::require(j < n_, "Tableau::measure_z: site out of range");
    const std::size_t wj = j / kWordBits;
    const Word mj = Word{1} << (j % kWordBits);
    std::size_t pivot = 2 * n_;
    for (std::size_t r = n_; r < 2 * n_; ++r) {
      if (xs(r)[wj] & mj) {
        pivot = r;
        break;
      }
    }
    if (pivot < 2 * n_) {
      for (std::size_t r = 0; r < 2 * n_; ++r) {
        if (r != pivot && (xs(r)[wj] & mj)) {
          row_mul(r, pivot, signs == SignMode::tracked);
        }
      }
      copy_row(pivot - n_, pivot);
      std::fill(xs(pivot).begin(), xs(pivot).end(), 0);
      std::fill(zs(pivot).begin(), zs(pivot).end(), 0);
      zs(pivot)[wj] = mj;
      const bool negative = signs == SignMode::tracked && coin(rng);
      neg_[pivot] = negative;
      return negative ? -1 : 1;
    }
    if (signs == SignMode::ignored) return 1;
    // Z_j lies in the stabilizer group: it is the product of the stabilizers whose
    // destabilizer partners anticommute with Z_j.
    std::vector<Word> sx(w_, 0), sz(w_, 0);
    unsigned log_i = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (xs(i)[wj] & mj) {
        log_i += kernels::mul_log_i(sx, sz, xs(n_ + i), zs(n_ + i)) + 2u * neg_[n_ + i];
      }
    }
    log_i &= 3u;
    if (log_i & 1u) throw InternalInvariantError("Tableau::measure_z: imaginary deterministic outcome");
    return log_i == 2 ? -1 : 1;
  }

  /// Von Neumann entropy (nats) of `region`: (rank of the stabilizer rows restricted
  /// to the region) minus |region|, times ln 2.
  double entanglement_entropy(const Region &region) const {
    for (auto s : region.sites()) detail::require(s < n_, "entanglement_entropy: site out of range");
    if (region.empty() || region.size() == n_) return 0.0;
    const std::size_t m = region.size();
    Gf2Matrix mat(n_, 2 * m);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t c = 0; c < m; ++c) {
        const auto s = region.sites()[c];
        if (kernels::get_bit(xs(n_ + i), s)) mat.set(i, 2 * c, true);
        if (kernels::get_bit(zs(n_ + i), s)) mat.set(i, 2 * c + 1, true);
      }
    }
    const auto rank = gf2_rank(std::move(mat));
    return static_cast<double>(rank - m) * kLn2;
  }

  /// Changes the generating set without changing the state: g_dst <- g_dst g_src,
  /// with d_src <- d_src d_dst keeping the destabilizer pairing intact.
  void rebase_generators(std::size_t dst, std::size_t src) {
    detail::require(dst < n_ && src < n_ && dst != src, "rebase_generators: indices must be distinct and in range");
    row_mul(n_ + dst, n_ + src, true);
    row_mul(src, dst, true);
  }

  /// Checks the structural invariants; returns an empty string when they all hold.
  std::string check_invariants() const {
    for (std::size_t a = 0; a < n_; ++a) {
      if (neg_[n_ + a] > 1) return "stabilizer sign out of range";
      for (std::size_t b = 0; b < n_; ++b) {
        if (kernels::anticommutes(xs(n_ + a), zs(n_ + a), xs(n_ + b), zs(n_ + b))) {
          return "stabilizers " + std::to_string(a) + "," + std::to_string(b) + " anticommute";
        }
        const bool db = kernels::anticommutes(xs(a), zs(a), xs(n_ + b), zs(n_ + b));
        if (db != (a == b)) return "destabilizer/stabilizer pairing broken at " + std::to_string(a) + "," + std::to_string(b);
        if (a != b && kernels::anticommutes(xs(a), zs(a), xs(b), zs(b))) {
          return "destabilizers " + std::to_string(a) + "," + std::to_string(b) + " anticommute";
        }
      }
    }
    Gf2Matrix m(n_, 2 * n_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t s = 0; s < n_; ++s) {
        m.set(i, s, kernels::get_bit(xs(n_ + i), s));
        m.set(i, n_ + s, kernels::get_bit(zs(n_ + i), s));
      }
    }
    if (gf2_rank(std::move(m)) != n_) return "stabilizer rows are linearly dependent";
    return {};
  }

  friend bool operator==(const Tableau &, const Tableau &) = default;

 private:
  std::span<Word> xs(std::size_t r) { return {bits_.data() + r * 2 * w_, w_}; }
  std::span<Word> zs(std::size_t r) { return {bits_.data() + r * 2 * w_ + w_, w_}; }
  std::span<const Word> xs(std::size_t r) const { return {bits_.data() + r * 2 * w_, w_}; }
  std::span<const Word> zs(std::size_t r) const { return {bits_.data() + r * 2 * w_ + w_, w_}; }

  PauliString row_string(std::size_t r) const {
    PauliString p(n_);
    std::copy(xs(r).begin(), xs(r).end(), p.xs().begin());
    std::copy(zs(r).begin(), zs(r).end(), p.zs().begin());
    p.set_negative(neg_[r]);
    return p;
  }

  void copy_row(std::size_t dst, std::size_t src) {
    std::copy_n(bits_.data() + src * 2 * w_, 2 * w_, bits_.data() + dst * 2 * w_);
    neg_[dst] = neg_[src];
  }

  // row dst <- row dst * row src.
  void row_mul(std::size_t dst, std::size_t src, bool with_sign) {
    if (!with_sign) {
      kernels::xor_into({bits_.data() + dst * 2 * w_, 2 * w_}, {bits_.data() + src * 2 * w_, 2 * w_});
      return;
    }
    unsigned log_i = kernels::mul_log_i(xs(dst), zs(dst), xs(src), zs(src));
    log_i += 2u * (neg_[dst] + neg_[src]);
    neg_[dst] = (log_i & 3u) >= 2;
  }

  std::size_t n_;
  std::size_t w_;
  std::vector<Word> bits_;
  std::vector<std::uint8_t> neg_;
};

inline Tableau new_zero_state(std::size_t n) { return Tableau(n); }

/// Stabilizer supports only (no signs, no destabilizers). Enough to follow the
/// entropies of a state through Z measurements, at half the row work of a Tableau.
class StabilizerSupport {
 public:
  explicit StabilizerSupport(const Tableau &t) : n_(t.num_qubits()), w_(words_for(n_)), bits_(n_ * 2 * w_) {
    for (std::size_t i = 0; i < n_; ++i) {
      std::copy(t.stabilizer_xs(i).begin(), t.stabilizer_xs(i).end(), bits_.begin() + i * 2 * w_);
      std::copy(t.stabilizer_zs(i).begin(), t.stabilizer_zs(i).end(), bits_.begin() + i * 2 * w_ + w_);
    }
  }

  std::size_t num_qubits() const { return n_; }

  /// Collapses onto a Z_j eigenstate (outcome irrelevant for supports).
  void collapse_z(std::size_t j) {
    const std::size_t wj = j / kWordBits;
    const Word mj = Word{1} << (j % kWordBits);
    const std::size_t stride = 2 * w_;
    Word *base = bits_.data();
    std::size_t pivot = n_;
    for (std::size_t r = 0; r < n_; ++r) {
      if (base[r * stride + wj] & mj) {
        pivot = r;
        break;
      }
    }
    if (pivot == n_) return;
    const Word *p = base + pivot * stride;
    for (std::size_t r = pivot + 1; r < n_; ++r) {
      Word *row = base + r * stride;
      if (row[wj] & mj) {
        for (std::size_t w = 0; w < stride; ++w) row[w] ^= p[w];
      }
    }
    Word *prow = base + pivot * stride;
    std::fill(prow, prow + stride, 0);
    prow[w_ + wj] = mj;
  }

  /// Entropy (nats) of a single site: ln 2 iff the restricted stabilizer rows span
  /// two dimensions at that site.
  double site_entropy(std::size_t a) const {
    const std::size_t wa = a / kWordBits;
    const unsigned ba = a % kWordBits;
    unsigned seen = 0;  // bit (v-1) set when local pattern v in {1,2,3} occurs
    for (std::size_t r = 0; r < n_; ++r) {
      const Word *row = bits_.data() + r * 2 * w_;
      const unsigned v = ((row[wa] >> ba) & 1) | (((row[w_ + wa] >> ba) & 1) << 1);
      if (v) seen |= 1u << (v - 1);
      if (std::popcount(seen) >= 2) return kLn2;
    }
    return 0.0;
  }

 private:
  std::size_t n_;
  std::size_t w_;
  std::vector<Word> bits_;
};

}  // namespace bpe
