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

// Property checks shared by `bpe validate` and the acceptance runner.

#pragma once

#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bpe/circuit.hpp"
#include "bpe/ensemble.hpp"
#include "bpe/oracle.hpp"
#include "bpe/scaling.hpp"
#include "bpe/synthetic.hpp"

namespace bpe::selfcheck {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

inline bool all_pass(const std::vector<Check> &checks) {
  for (const auto &c : checks)
    if (!c.pass) return false;
  return true;
}

/// Stabilizer state after `steps` brickwork time steps at measurement rate p.
inline Tableau random_circuit_state(std::size_t L, double p, int steps, std::uint64_t seed,
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

/// Tableau vs dense equivalence over `n_circuits` random hybrid circuits with
/// L in {2, 4, 6, 8}, p uniform in [0, 1], both boundaries, 1..6 time steps.
inline Check oracle_equivalence(std::size_t n_circuits, std::uint64_t seed, double tol = 1e-9) {
  RandomStream meta = make_stream(hash_words({seed, 0x0ac1e}));
  std::size_t checks = 0;
  double worst = 0.0, min_fid = 1.0;
  std::string failure;
  for (std::size_t c = 0; c < n_circuits; ++c) {
    const std::size_t L = 2 * (1 + uniform_below(meta, 4));
    const double p = uniform01(meta);
    const int steps = 1 + static_cast<int>(uniform_below(meta, 6));
    const auto boundary = coin(meta) ? Boundary::open : Boundary::periodic;
    const auto rep = oracle::check_circuit_equivalence(L, p, steps, hash_words({seed, c}), boundary);
    checks += rep.checks;
    worst = std::max(worst, rep.max_entropy_error);
    min_fid = std::min(min_fid, rep.min_fidelity);
    if (failure.empty() && !rep.first_failure.empty()) failure = "circuit " + std::to_string(c) + ": " + rep.first_failure;
  }
  std::ostringstream d;
  d << n_circuits << " circuits, " << checks << " entropy checks, max |dS| = " << worst
    << ", min fidelity = " << min_fid;
  if (!failure.empty()) d << "; " << failure;
  return {"oracle_equivalence", worst <= tol && min_fid >= 1.0 - 1e-9, d.str()};
}

/// The pair entropy after measuring the complement, with random outcome signs,
/// must be bit-identical across `n_streams` streams for each of `n_states` states.
inline Check outcome_independence(std::size_t n_states, std::size_t n_streams, std::uint64_t seed, std::size_t L = 16) {
  RandomStream meta = make_stream(hash_words({seed, 0x0de9}));
  std::size_t mismatches = 0, nonzero = 0;
  for (std::size_t s = 0; s < n_states; ++s) {
    const double p = 0.3 * uniform01(meta);
    const auto state = random_circuit_state(L, p, static_cast<int>(L), hash_words({seed, s}));
    // Nearby pairs, where the pair entropy is usually nonzero.
    const std::size_t a = uniform_below(meta, L);
    const std::size_t b = (a + 1 + uniform_below(meta, 3)) % L;
    RandomStream ref_rng = make_stream(0);
    const double ref = bpe_entropy_stabilizer(state, a, b, ref_rng, SignMode::ignored);
    if (ref != 0.0) ++nonzero;
    for (std::size_t k = 0; k < n_streams; ++k) {
      RandomStream rng = make_stream(hash_words({seed, s, k, 0x5eed}));
      if (bpe_entropy_stabilizer(state, a, b, rng, SignMode::tracked) != ref) ++mismatches;
    }
  }
  std::ostringstream d;
  d << n_states << " states x " << n_streams << " streams, " << mismatches << " mismatches, " << nonzero
    << " states with nonzero pair entropy";
  return {"outcome_independence", mismatches == 0, d.str()};
}

/// The two-qubit Clifford enumeration is complete and the sampler stays in it.
inline Check clifford_group(std::size_t draws, std::uint64_t seed) {
  const auto all = enumerate_clifford2();
  std::set<std::uint32_t> set;
  for (const auto &g : all) set.insert(g.canonical_key());
  RandomStream rng = make_stream(seed);
  std::size_t outside = 0;
  for (std::size_t i = 0; i < draws; ++i) outside += set.count(sample_clifford2(rng).canonical_key()) == 0;
  std::ostringstream d;
  d << all.size() << " enumerated, " << set.size() << " distinct, " << outside << " of " << draws
    << " samples outside";
  return {"clifford_group", all.size() == 11520 && set.size() == 11520 && outside == 0, d.str()};
}

namespace detail {

inline Check within(const std::string &name, double value, double truth, double tol) {
  std::ostringstream d;
  d << "got " << value << ", expected " << truth << " +/- " << tol;
  return {name, std::isfinite(value) && std::abs(value - truth) <= tol, d.str()};
}

}  // namespace detail

/// Synthetic-recovery checks of the analysis routines.
inline std::vector<Check> analysis_self_tests(bool with_bootstrap = true) {
  std::vector<Check> out;
  const BootstrapOptions no_boot{0, 0};

  {
    std::vector<double> xs, ys, flat;
    for (int r = 1; r <= 64; ++r) {
      xs.push_back(r);
      ys.push_back(std::pow(r, -0.71));
      flat.push_back(0.3);
    }
    out.push_back(detail::within("powerlaw_exact", fit_power_law(xs, ys, {2, 32}, no_boot).value("exponent"), 0.71,
                                 1e-10));
    out.push_back(detail::within("powerlaw_constant", fit_power_law(xs, flat, {2, 32}, no_boot).value("exponent"), 0.0,
                                 1e-10));
  }
  {
    const CollapseParams truth{0.16, 1.24, 0.71};
    std::vector<double> ps;
    for (int i = 0; i <= 8; ++i) ps.push_back(0.08 + 0.02 * i);
    const auto data = synthetic::collapse_datasets(truth, {16, 32, 64, 128}, ps);
    std::span<const CollapseDataset> sp(data);
    const double c0 = collapse_objective(sp, truth);
    bool truth_min = true;
    for (int i = 0; i < 3; ++i)
      for (double f : {0.8, 1.2}) {
        auto a = truth.array();
        a[i] = a[i] == 0 ? f - 1.0 : a[i] * f;
        truth_min = truth_min && collapse_objective(sp, CollapseParams::from(a)) > c0;
      }
    out.push_back({"collapse_truth_is_minimum", truth_min, "cost at truth " + std::to_string(c0)});
    CollapseOptions opt;
    opt.bootstrap = no_boot;
    const auto fit = fit_collapse(sp, {0.15, 1.0, 0.5}, CollapseBounds{}, opt);
    out.push_back(detail::within("collapse_pc", fit.value("pc"), truth.pc, 0.003));
    out.push_back(detail::within("collapse_nu", fit.value("nu"), truth.nu, 0.05));
    out.push_back(detail::within("collapse_eta", fit.value("eta"), truth.eta, 0.01));

    std::vector<CollapseDataset> flat = data;
    for (auto &d : flat)
      for (auto &y : d.y) y = 0.2;
    const auto ff = fit_collapse(std::span<const CollapseDataset>(flat), {0.16, 1.2, 0.5}, CollapseBounds{}, opt);
    out.push_back({"collapse_flat_unidentifiable", ff.flagged("unidentifiable"), ""});
  }
  {
    std::vector<double> ts;
    for (int t = 4; t <= 32; ++t) ts.push_back(t);
    const auto fit = fit_dynamic_exponents(synthetic::moment_series(0.38, 1.01, 3, ts), {4, 32});
    out.push_back(detail::within("dynamic_theta", fit.value("theta"), 0.38, 1e-8));
    out.push_back(detail::within("dynamic_z", fit.value("z"), 1.01, 1e-8));
    double worst = 0.0;
    for (double th = 0.1; th <= 1.0 + 1e-12; th += 0.3)
      for (double z = 0.5; z <= 2.0 + 1e-12; z += 0.5) {
        const auto f = fit_dynamic_exponents(synthetic::moment_series(th, z, 3, ts), {4, 32});
        worst = std::max({worst, std::abs(f.value("theta") - th), std::abs(f.value("z") - z)});
      }
    out.push_back({"dynamic_parameter_box", worst <= 1e-6, "max error " + std::to_string(worst)});
  }
  {
    std::vector<double> rs, perp, Ls{32, 64, 128}, par;
    for (int r = 1; r <= 32; ++r) {
      rs.push_back(r);
      perp.push_back(0.5 * std::pow(r, -1.02));
    }
    for (double L : Ls) par.push_back(2.0 * std::pow(L, -1.34));
    const auto f = surface_exponents(rs, perp, {2, 32}, Ls, par, 0.71, no_boot);
    out.push_back(detail::within("surface_eta_perp", f.value("eta_perp"), 1.02, 1e-10));
    out.push_back(detail::within("surface_eta_parallel", f.value("eta_parallel"), 1.34, 1e-10));
    out.push_back(detail::within("surface_relation", f.value("relation_residual"), -0.005, 1e-10));
  }
  if (with_bootstrap) {
    // Trajectory-bootstrap error of η from noisy profiles should shrink like 1/sqrt(N).
    auto se = [](std::size_t n) {
      const auto profiles = synthetic::noisy_profiles(0.71, 64, n, 0.3, 96 + n);
      std::vector<double> rs;
      for (int r = 1; r < 64; ++r) rs.push_back(r);
      const auto v = bootstrap_std({200, 0}, [&](RandomStream &rng) {
        const auto idx = resample_indices(profiles.size(), rng);
        std::vector<double> mean(rs.size(), 0.0);
        for (auto i : idx)
          for (std::size_t r = 0; r < rs.size(); ++r) mean[r] += profiles[i][r] / static_cast<double>(idx.size());
        return std::vector<double>{fit_power_law(rs, mean, {2, 16}, {0, 0}).value("exponent")};
      });
      return v.at(0);
    };
    const double ratio = se(100) / se(400);
    std::ostringstream d;
    d << "SE(100)/SE(400) = " << ratio << ", expected 2 within a factor of 2";
    out.push_back({"bootstrap_scaling", ratio > 1.0 && ratio < 4.0, d.str()});
  }
  return out;
}

}  // namespace bpe::selfcheck
