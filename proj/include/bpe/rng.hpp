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
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace bpe {

/// Every simulator draws from this engine. Distributions built on top of it are
/// written out by hand (uniform01, bernoulli) so that trajectories do not depend
/// on the standard library's distribution implementations.
using RandomStream = std::mt19937_64;

/// splitmix64 finalizer; used as the mixing step of stream derivation.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x6A09E667F3BCC909ull;
  for (auto w : words) {
    h = mix64(h ^ mix64(w));
  }
  return h;
}

constexpr std::uint64_t hash_string(std::string_view s) {
  // FNV-1a, then mixed.
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h = (h ^ c) * 0x100000001B3ull;
  }
  return mix64(h);
}

inline std::uint64_t hash_double(double x) { return mix64(std::bit_cast<std::uint64_t>(x)); }

/// Builds an engine whose full state is filled from a 64-bit key.
inline RandomStream make_stream(std::uint64_t key) {
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                    static_cast<std::uint32_t>(mix64(key)), static_cast<std::uint32_t>(mix64(key) >> 32)};
  return RandomStream(seq);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(RandomStream &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool bernoulli(RandomStream &rng, double p) { return uniform01(rng) < p; }

inline bool coin(RandomStream &rng) { return (rng() >> 63) != 0; }

/// Uniform integer in [0, n) by rejection, n > 0.
inline std::uint64_t uniform_below(RandomStream &rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

/// Standard normal via Box-Muller (one value per call; deterministic given the engine).
inline double standard_normal(RandomStream &rng) {
  double u1;
  do {
    u1 = uniform01(rng);
  } while (u1 <= 0.0);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace bpe
