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
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bpe/pauli.hpp"
#include "bpe/rng.hpp"

namespace bpe {

/// Two-qubit Pauli with a real sign, packed as bits (x1, z1, x2, z2) = bits 0..3.
struct SignedPauli2 {
  std::uint8_t bits = 0;
  bool negative = false;

  friend bool operator==(const SignedPauli2 &, const SignedPauli2 &) = default;
};

namespace detail {

/// Exponent of i from the single-site product P(x1,z1) * P(x2,z2).
constexpr int site_log_i(unsigned x1, unsigned z1, unsigned x2, unsigned z2) {
  if (x1 && z1) return static_cast<int>(z2) - static_cast<int>(x2);
  if (x1) return z2 ? (x2 ? 1 : -1) : 0;
  if (z1) return x2 ? (z2 ? -1 : 1) : 0;
  return 0;
}

/// Unsigned two-qubit product; returns the bits of a*b and adds the i-exponent to log_i.
constexpr std::uint8_t mul2(std::uint8_t a, std::uint8_t b, int &log_i) {
  log_i += site_log_i(a & 1, (a >> 1) & 1, b & 1, (b >> 1) & 1);
  log_i += site_log_i((a >> 2) & 1, (a >> 3) & 1, (b >> 2) & 1, (b >> 3) & 1);
  return a ^ b;
}

constexpr unsigned symplectic2(unsigned u, unsigned v) {
  const unsigned s = ((u & 1) & (v >> 1)) ^ ((u >> 1) & v) ^ ((u >> 2) & (v >> 3)) ^ ((u >> 3) & (v >> 2));
  return s & 1u;
}

}  // namespace detail

/// Two-qubit Clifford modulo global phase, stored as the conjugation images of
/// X1, Z1, X2, Z2 (qubit 1 is the first site the gate is applied to).
class CliffordGate2 {
 public:
  /// Row-update entry: new local bits and whether the row sign flips.
  struct TableEntry {
    std::uint8_t bits;
    bool flip;
  };

  CliffordGate2() : CliffordGate2({{{0b0001, false}, {0b0010, false}, {0b0100, false}, {0b1000, false}}}) {}

  explicit CliffordGate2(std::array<SignedPauli2, 4> images) : images_(images) {
    detail::require(is_symplectic(images_), "CliffordGate2: images do not preserve the symplectic form");
    build_table();
  }

  static CliffordGate2 identity() { return CliffordGate2(); }

  /// Images of X1, Z1, X2, Z2 in that order.
  const std::array<SignedPauli2, 4> &images() const { return images_; }

  PauliString image(int generator) const {
    detail::require(generator >= 0 && generator < 4, "CliffordGate2::image: generator index must be in [0,4)");
    const auto &im = images_[generator];
    PauliString out(2);
    out.set(0, im.bits & 1, (im.bits >> 1) & 1);
    out.set(1, (im.bits >> 2) & 1, (im.bits >> 3) & 1);
    out.set_negative(im.negative);
    return out;
  }

  /// U P U^dagger for a signed two-qubit Pauli P.
  SignedPauli2 conjugate(SignedPauli2 p) const {
    const auto &e = table_[p.bits];
    return {e.bits, static_cast<bool>(p.negative ^ e.flip)};
  }

  const TableEntry &table(std::uint8_t local_bits) const { return table_[local_bits]; }

  /// 20-bit key: image bits in nibbles 0..3, image signs in bits 16..19.
  std::uint32_t canonical_key() const {
    std::uint32_t key = 0;
    for (int i = 0; i < 4; ++i) {
      key |= static_cast<std::uint32_t>(images_[i].bits) << (4 * i);
      key |= static_cast<std::uint32_t>(images_[i].negative) << (16 + i);
    }
    return key;
  }

  static bool is_symplectic(const std::array<SignedPauli2, 4> &im) {
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        const unsigned expected = (i == 0 && j == 1) || (i == 2 && j == 3);
        if (detail::symplectic2(im[i].bits, im[j].bits) != expected) {
          return false;
        }
      }
    }
    return true;
  }

  std::string str() const {
    static constexpr const char *names[] = {"X1", "Z1", "X2", "Z2"};
    std::string s;
    for (int i = 0; i < 4; ++i) {
      s += std::string(names[i]) + "->" + image(i).str() + (i < 3 ? " " : "");
    }
    return s;
  }

  friend bool operator==(const CliffordGate2 &a, const CliffordGate2 &b) { return a.images_ == b.images_; }

 private:
  void build_table() {
    for (unsigned in = 0; in < 16; ++in) {
      // P = i^{x1 z1 + x2 z2} X1^x1 Z1^z1 X2^x2 Z2^z2, conjugated factor by factor.
      int log_i = static_cast<int>((in & 1) & ((in >> 1) & 1)) + static_cast<int>(((in >> 2) & 1) & ((in >> 3) & 1));
      std::uint8_t acc = 0;
      for (int g = 0; g < 4; ++g) {
        if ((in >> g) & 1) {
          acc = detail::mul2(acc, images_[g].bits, log_i);
          log_i += 2 * images_[g].negative;
        }
      }
      log_i = ((log_i % 4) + 4) % 4;
      if (log_i & 1) {
        throw InternalInvariantError("CliffordGate2: conjugated Pauli is not Hermitian");
      }
      table_[in] = {acc, log_i == 2};
    }
  }

  std::array<SignedPauli2, 4> images_;
  std::array<TableEntry, 16> table_{};
};

/// Gate equal to applying `first` and then `second`.
inline CliffordGate2 compose(const CliffordGate2 &first, const CliffordGate2 &second) {
  std::array<SignedPauli2, 4> im;
  for (int g = 0; g < 4; ++g) {
    im[g] = second.conjugate(first.images()[g]);
  }
  return CliffordGate2(im);
}

/// Uniform draw from the 11520-element two-qubit Clifford group mod phase.
/// The symplectic part is built as a uniformly random symplectic basis, one pair
/// at a time (15 * 8 choices for the X1/Z1 images, 3 * 2 for X2/Z2 in their
/// symplectic complement), then the four image signs are drawn independently.
inline CliffordGate2 sample_clifford2(RandomStream &rng) {
  std::array<std::uint8_t, 4> v{};
  std::array<std::uint8_t, 16> cand{};
  auto pick = [&](auto &&accept) {
    std::size_t n = 0;
    for (std::uint8_t u = 1; u < 16; ++u) {
      if (accept(u)) cand[n++] = u;
    }
    return cand[uniform_below(rng, n)];
  };
  using detail::symplectic2;
  v[0] = pick([](std::uint8_t) { return true; });
  v[1] = pick([&](std::uint8_t u) { return symplectic2(v[0], u) == 1; });
  v[2] = pick([&](std::uint8_t u) { return symplectic2(v[0], u) == 0 && symplectic2(v[1], u) == 0; });
  v[3] = pick([&](std::uint8_t u) {
    return symplectic2(v[0], u) == 0 && symplectic2(v[1], u) == 0 && symplectic2(v[2], u) == 1;
  });
  const auto signs = rng();
  std::array<SignedPauli2, 4> im;
  for (int g = 0; g < 4; ++g) {
    im[g] = {v[g], static_cast<bool>((signs >> (60 + g)) & 1)};
  }
  return CliffordGate2(im);
}

/// Every two-qubit Clifford mod phase, sorted by canonical_key().
inline std::vector<CliffordGate2> enumerate_clifford2() {
  std::vector<CliffordGate2> out;
  out.reserve(11520);
  for (unsigned key = 0; key < (1u << 16); ++key) {
    std::array<SignedPauli2, 4> im;
    for (int g = 0; g < 4; ++g) {
      im[g].bits = static_cast<std::uint8_t>((key >> (4 * g)) & 0xF);
    }
    if (!CliffordGate2::is_symplectic(im)) {
      continue;
    }
    for (unsigned s = 0; s < 16; ++s) {
      for (int g = 0; g < 4; ++g) {
        im[g].negative = (s >> g) & 1;
      }
      out.emplace_back(im);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const CliffordGate2 &a, const CliffordGate2 &b) { return a.canonical_key() < b.canonical_key(); });
  return out;
}

namespace gates {

inline CliffordGate2 cnot() {
  // control qubit 1, target qubit 2: X1 -> X1 X2, Z2 -> Z1 Z2.
  return CliffordGate2({{{0b0101, false}, {0b0010, false}, {0b0100, false}, {0b1010, false}}});
}

inline CliffordGate2 hadamard1() { return CliffordGate2({{{0b0010, false}, {0b0001, false}, {0b0100, false}, {0b1000, false}}}); }

inline CliffordGate2 swap() { return CliffordGate2({{{0b0100, false}, {0b1000, false}, {0b0001, false}, {0b0010, false}}}); }

}  // namespace gates

}  // namespace bpe
