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

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bpe/errors.hpp"

namespace bpe {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for(std::size_t bits) { return (bits + kWordBits - 1) / kWordBits; }

namespace kernels {

inline bool get_bit(std::span<const Word> w, std::size_t i) { return (w[i / kWordBits] >> (i % kWordBits)) & 1u; }

inline void set_bit(std::span<Word> w, std::size_t i, bool v) {
  const Word m = Word{1} << (i % kWordBits);
  if (v) {
    w[i / kWordBits] |= m;
  } else {
    w[i / kWordBits] &= ~m;
  }
}

/// Parity of the symplectic product <(x1,z1),(x2,z2)>.
inline bool anticommutes(std::span<const Word> x1, std::span<const Word> z1, std::span<const Word> x2,
                         std::span<const Word> z2) {
  Word acc = 0;
  for (std::size_t w = 0; w < x1.size(); ++w) {
    acc ^= (x1[w] & z2[w]) ^ (z1[w] & x2[w]);
  }
  return std::popcount(acc) & 1;
}

/// In-place left product (x1,z1) <- (x1,z1) * (x2,z2) on sign-free Pauli strings,
/// returning the exponent of i (mod 4) picked up by the product. Each site uses the
/// Hermitian convention P(x,z) = i^{xz} X^x Z^z, so (1,1) is Y.
inline unsigned mul_log_i(std::span<Word> x1, std::span<Word> z1, std::span<const Word> x2,
                          std::span<const Word> z2) {
  int plus = 0;
  int minus = 0;
  for (std::size_t w = 0; w < x1.size(); ++w) {
    const Word a = x1[w], b = z1[w], c = x2[w], d = z2[w];
    // Y*Z, X*Y, Z*X contribute +i; Y*X, X*Z, Z*Y contribute -i.
    const Word p = (a & b & ~c & d) | (a & ~b & c & d) | (~a & b & c & ~d);
    const Word m = (a & b & c & ~d) | (a & ~b & ~c & d) | (~a & b & c & d);
    plus += std::popcount(p);
    minus += std::popcount(m);
    x1[w] = a ^ c;
    z1[w] = b ^ d;
  }
  return static_cast<unsigned>(((plus - minus) % 4 + 4) % 4);
}

inline void xor_into(std::span<Word> dst, std::span<const Word> src) {
  for (std::size_t w = 0; w < dst.size(); ++w) {
    dst[w] ^= src[w];
  }
}

}  // namespace kernels

/// Hermitian Pauli string with a real sign. Site i holds I, X, Y or Z according to
/// the bits (x_i, z_i) = (0,0), (1,0), (1,1), (0,1).
class PauliString {
 public:
  explicit PauliString(std::size_t n) : n_(n), x_(words_for(n), 0), z_(words_for(n), 0) {
    detail::require(n >= 1, "PauliString: length must be >= 1");
  }

  /// Parses e.g. "+XZ_Y", "-IZ", "YY". '_' and 'I' are identity.
  static PauliString parse(std::string_view text) {
    bool negative = false;
    if (!text.empty() && (text.front() == '+' || text.front() == '-')) {
      negative = text.front() == '-';
      text.remove_prefix(1);
    }
    PauliString out(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
      switch (text[i]) {
        case 'I':
        case '_':
          break;
        case 'X':
          out.set(i, true, false);
          break;
        case 'Y':
          out.set(i, true, true);
          break;
        case 'Z':
          out.set(i, false, true);
          break;
        default:
          throw ContractViolation("PauliString::parse: bad character '" + std::string(1, text[i]) + "'");
      }
    }
    out.negative_ = negative;
    return out;
  }

  std::size_t size() const { return n_; }
  bool x(std::size_t i) const { return kernels::get_bit(x_, i); }
  bool z(std::size_t i) const { return kernels::get_bit(z_, i); }
  void set(std::size_t i, bool xbit, bool zbit) {
    detail::require(i < n_, "PauliString::set: index out of range");
    kernels::set_bit(x_, i, xbit);
    kernels::set_bit(z_, i, zbit);
  }

  bool negative() const { return negative_; }
  void set_negative(bool v) { negative_ = v; }
  /// +1 or -1.
  int phase() const { return negative_ ? -1 : 1; }

  std::span<const Word> xs() const { return x_; }
  std::span<const Word> zs() const { return z_; }
  std::span<Word> xs() { return x_; }
  std::span<Word> zs() { return z_; }

  bool is_identity() const {
    for (std::size_t w = 0; w < x_.size(); ++w) {
      if (x_[w] | z_[w]) {
        return false;
      }
    }
    return true;
  }

  std::string str() const {
    std::string s(1, negative_ ? '-' : '+');
    for (std::size_t i = 0; i < n_; ++i) {
      s += "IXZY"[x(i) + 2 * z(i)];
    }
    return s;
  }

  friend bool operator==(const PauliString &, const PauliString &) = default;

 private:
  std::size_t n_;
  std::vector<Word> x_;
  std::vector<Word> z_;
  bool negative_ = false;
};

inline bool commutes(const PauliString &a, const PauliString &b) {
  detail::require(a.size() == b.size(), "commutes: length mismatch");
  return !kernels::anticommutes(a.xs(), a.zs(), b.xs(), b.zs());
}

/// Operator product a*b. The result must be Hermitian (a and b commute); an
/// imaginary overall phase raises ContractViolation.
inline PauliString multiply(const PauliString &a, const PauliString &b) {
  detail::require(a.size() == b.size(), "multiply: length mismatch");
  PauliString out = a;
  unsigned log_i = kernels::mul_log_i(out.xs(), out.zs(), b.xs(), b.zs());
  log_i += 2u * (a.negative() + b.negative());
  log_i &= 3u;
  if (log_i & 1u) {
    throw ContractViolation("multiply: product " + a.str() + " * " + b.str() + " has an imaginary phase");
  }
  out.set_negative(log_i == 2);
  return out;
}

}  // namespace bpe
