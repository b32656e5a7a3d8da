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

// Bipartite projected ensembles: every site outside {A, B} is measured in the Z
// basis and the entanglement between A and B is averaged over the outcomes with
// their Born weights. For stabilizer states every outcome branch has the same
// entropy, so a single measurement sweep gives the exact ensemble average.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bpe/circuit_config.hpp"
#include "bpe/statevector.hpp"
#include "bpe/tableau.hpp"

namespace bpe {

/// Mergeable count / sum / sum-of-squares statistics.
struct RunningStats {
  std::uint64_t count = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x) {
    ++count;
    sum += x;
    sum_sq += x * x;
  }
  void merge(const RunningStats &o) {
    count += o.count;
    sum += o.sum;
    sum_sq += o.sum_sq;
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  /// Standard error of the mean; 0 for fewer than two samples.
  double stderr_of_mean() const {
    if (count < 2) return 0.0;
    const double n = static_cast<double>(count);
    const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
    return std::sqrt(var / n);
  }

  friend bool operator==(const RunningStats &, const RunningStats &) = default;
};

/// Ē(r) for r = 1 .. L-1 (entry i holds r = i + 1).
struct EaeProfile {
  std::size_t L = 0;
  double p = 0.0;
  int t = 0;
  Boundary boundary = Boundary::periodic;
  PositionsMode positions_mode = PositionsMode::fixed_origin;
  std::vector<double> mean;
  std::vector<double> stderr_of_mean;
  std::vector<std::uint64_t> count;

  std::size_t size() const { return mean.size(); }
  int separation(std::size_t i) const { return static_cast<int>(i) + 1; }
};

/// Edge observables of an open chain: Ē_⊥(r) with A = site 0, B = site r, and
/// Ē_∥ with A and B the two edges.
struct SurfaceObservables {
  std::vector<double> perp;  ///< entry i holds r = i + 1
  double parallel = 0.0;
};

namespace detail {

/// Fills out[i] with the A-entropy after measuring everything except {a, bs[i]}.
/// `s` must already have every site outside {a} ∪ bs collapsed. Measurements are
/// shared between branches by halving the candidate list, so the sweep costs
/// O(|bs| log |bs|) collapses instead of O(|bs| L).
inline void sweep_pairs(StabilizerSupport s, std::size_t a, std::span<const std::size_t> bs, std::span<double> out) {
  if (bs.size() == 1) {
    out[0] = s.site_entropy(a);
    return;
  }
  const std::size_t mid = bs.size() / 2;
  {
    StabilizerSupport left = s;
    for (auto b : bs.subspan(mid)) left.collapse_z(b);
    sweep_pairs(std::move(left), a, bs.first(mid), out.first(mid));
  }
  for (auto b : bs.first(mid)) s.collapse_z(b);
  sweep_pairs(std::move(s), a, bs.subspan(mid), out.subspan(mid));
}

}  // namespace detail

/// Exact EAE between sites a and b for each b in `bs`, in nats.
inline std::vector<double> pair_entropies(const Tableau &t, std::size_t a, std::span<const std::size_t> bs) {
  const auto n = t.num_qubits();
  detail::require(a < n, "pair_entropies: site a out of range");
  std::vector<char> keep(n, 0);
  keep[a] = 1;
  for (auto b : bs) {
    detail::require(b < n && b != a, "pair_entropies: sites must be distinct and in range");
    detail::require(!keep[b], "pair_entropies: duplicate b site");
    keep[b] = 1;
  }
  std::vector<double> out(bs.size(), 0.0);
  if (bs.empty()) return out;
  StabilizerSupport s(t);
  for (std::size_t q = 0; q < n; ++q) {
    if (!keep[q]) s.collapse_z(q);
  }
  detail::sweep_pairs(std::move(s), a, bs, out);
  return out;
}

/// EAE of the (a, b) projected ensemble of a stabilizer state: measure Z on every
/// other site of a scratch copy, then read off S_A. No outcome averaging is needed
/// because the post-measurement entropy does not depend on the outcomes.
inline double bpe_entropy_stabilizer(const Tableau &t, std::size_t a, std::size_t b, RandomStream &rng,
                                     SignMode signs = SignMode::ignored) {
  const auto n = t.num_qubits();
  detail::require(a < n && b < n && a != b, "bpe_entropy_stabilizer: sites must be distinct and in range");
  Tableau scratch = t;
  for (std::size_t q = 0; q < n; ++q) {
    if (q != a && q != b) scratch.measure_z(q, rng, signs);
  }
  return scratch.entanglement_entropy(Region{a});
}

/// The (a, b) pairs sampled for separation r under the given boundary and mode.
inline std::vector<std::size_t> origins_for_separation(std::size_t L, Boundary boundary, PositionsMode mode,
                                                       std::size_t r) {
  std::vector<std::size_t> out;
  if (mode == PositionsMode::translation_average) {
    const std::size_t last = boundary == Boundary::periodic ? L : L - r;
    for (std::size_t a = 0; a < last; ++a) out.push_back(a);
  } else if (boundary == Boundary::periodic) {
    out.push_back(0);
  } else {
    out.push_back((L - 1 - r) / 2);
  }
  return out;
}

/// Per-state separation profile (entry i holds r = i + 1), averaged over the
/// configured A positions.
inline std::vector<double> eae_values(const Tableau &t, Boundary boundary, PositionsMode mode) {
  const std::size_t L = t.num_qubits();
  detail::require(L >= 2, "eae_values: need at least two qubits");
  std::vector<double> sum(L - 1, 0.0);
  std::vector<double> cnt(L - 1, 0.0);
  // Group the requested (a, b) pairs by a so each a costs one sweep.
  std::vector<std::vector<std::size_t>> bs_by_a(L);
  std::vector<std::vector<std::size_t>> r_by_a(L);
  for (std::size_t r = 1; r < L; ++r) {
    for (auto a : origins_for_separation(L, boundary, mode, r)) {
      bs_by_a[a].push_back((a + r) % L);
      r_by_a[a].push_back(r);
    }
  }
  for (std::size_t a = 0; a < L; ++a) {
    if (bs_by_a[a].empty()) continue;
    const auto e = pair_entropies(t, a, bs_by_a[a]);
    for (std::size_t i = 0; i < e.size(); ++i) {
      sum[r_by_a[a][i] - 1] += e[i];
      cnt[r_by_a[a][i] - 1] += 1.0;
    }
  }
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] /= cnt[i];
  return sum;
}

inline EaeProfile single_state_profile(std::vector<double> values, const CircuitConfig &cfg, int t) {
  EaeProfile prof;
  prof.L = cfg.L;
  prof.p = cfg.p;
  prof.t = t;
  prof.boundary = cfg.boundary;
  prof.positions_mode = cfg.positions_mode;
  prof.count.assign(values.size(), 1);
  prof.stderr_of_mean.assign(values.size(), 0.0);
  prof.mean = std::move(values);
  return prof;
}

/// Separation profile of one stabilizer state. The observable pass never draws
/// outcomes (sign bookkeeping is off), so `rng` is left untouched.
inline EaeProfile eae_profile(const Tableau &t, const CircuitConfig &cfg, [[maybe_unused]] RandomStream &rng) {
  detail::require(t.num_qubits() == cfg.L, "eae_profile: tableau size does not match the configuration");
  return single_state_profile(eae_values(t, cfg.boundary, cfg.positions_mode), cfg, 0);
}

/// ϱ^(k) = L^-(k+1) Σ_r d(r)^k Ē(r) over r = 1 .. L-1 (entry i holds r = i + 1),
/// where d(r) = r on an open chain and the ring distance min(r, L - r) on a periodic one.
inline double moment_eae(std::span<const double> eae, std::size_t L, int k, Boundary boundary = Boundary::open) {
  detail::require(k >= 0, "moment_eae: k must be >= 0");
  long double acc = 0;
  for (std::size_t i = 0; i < eae.size(); ++i) {
    const std::size_t r = i + 1;
    const std::size_t d = boundary == Boundary::periodic ? std::min(r, L - r) : r;
    acc += std::pow(static_cast<long double>(d), k) * eae[i];
  }
  return static_cast<double>(acc / std::pow(static_cast<long double>(L), k + 1));
}

inline double moment_eae(const EaeProfile &prof, int k) { return moment_eae(prof.mean, prof.L, k, prof.boundary); }

/// ϱ = (1/L) Σ_{r=1}^{L-1} Ē(r).
inline double integrated_eae(const EaeProfile &prof) { return moment_eae(prof, 0); }

/// Edge-to-bulk and edge-to-edge EAE; rejects periodic chains.
inline SurfaceObservables surface_profiles(const Tableau &t, Boundary boundary,
                                           [[maybe_unused]] RandomStream &rng) {
  if (boundary != Boundary::open) {
    throw ContractViolation("surface_profiles: surface exponents need open boundaries");
  }
  const auto L = t.num_qubits();
  std::vector<std::size_t> bs;
  for (std::size_t b = 1; b < L; ++b) bs.push_back(b);
  SurfaceObservables out;
  out.perp = pair_entropies(t, 0, bs);
  out.parallel = out.perp.back();
  return out;
}

// ---------------------------------------------------------------------------
// Dense backend

inline constexpr std::size_t kMaxExactEaeQubits = 16;

/// Binary entropy-like term -x ln x with 0 ln 0 = 0.
inline double xlogx_neg(double x) { return x > 0.0 ? -x * std::log(x) : 0.0; }

/// Exact EAE by enumerating all 2^(L-2) outcomes on the complement of {a, b}.
inline double eae_exact_statevector(const Statevector &psi, std::size_t a, std::size_t b) {
  const auto L = psi.num_qubits();
  detail::require(a < L && b < L && a != b, "eae_exact_statevector: sites must be distinct and in range");
  if (L > kMaxExactEaeQubits) throw CapacityError("eae_exact_statevector: at most 16 qubits");
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw ContractViolation("eae_exact_statevector: state is not normalized");
  const std::size_t ma = std::size_t{1} << a, mb = std::size_t{1} << b;
  const auto &amp = psi.amplitudes();
  double total = 0.0;
  for (std::size_t i = 0; i < amp.size(); ++i) {
    if (i & (ma | mb)) continue;
    const Complex c00 = amp[i], c10 = amp[i | ma], c01 = amp[i | mb], c11 = amp[i | ma | mb];
    const double pr = std::norm(c00) + std::norm(c10) + std::norm(c01) + std::norm(c11);
    if (pr < 1e-14) continue;
    // Eigenvalues of the 2x2 reduced density matrix of A: (1 ± sqrt(1 - 4 det)) / 2.
    const double det = std::norm(c00 * c11 - c01 * c10) / (pr * pr);
    const double disc = std::sqrt(std::max(0.0, 1.0 - 4.0 * det));
    const double lo = 0.5 * (1.0 - disc), hi = 0.5 * (1.0 + disc);
    total += pr * (xlogx_neg(lo) + xlogx_neg(hi));
  }
  return total;
}

/// Dense analogue of eae_values.
inline std::vector<double> eae_values(const Statevector &psi, Boundary boundary, PositionsMode mode) {
  const std::size_t L = psi.num_qubits();
  std::vector<double> out(L - 1, 0.0);
  for (std::size_t r = 1; r < L; ++r) {
    const auto origins = origins_for_separation(L, boundary, mode, r);
    double s = 0.0;
    for (auto a : origins) s += eae_exact_statevector(psi, a, (a + r) % L);
    out[r - 1] = s / static_cast<double>(origins.size());
  }
  return out;
}

inline SurfaceObservables surface_profiles(const Statevector &psi, Boundary boundary) {
  if (boundary != Boundary::open) {
    throw ContractViolation("surface_profiles: surface exponents need open boundaries");
  }
  SurfaceObservables out;
  for (std::size_t b = 1; b < psi.num_qubits(); ++b) out.perp.push_back(eae_exact_statevector(psi, 0, b));
  out.parallel = out.perp.back();
  return out;
}

}  // namespace bpe
