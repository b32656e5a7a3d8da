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

// Data planted from known scaling forms, for checking the analysis routines.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "bpe/rng.hpp"
#include "bpe/scaling.hpp"

namespace bpe::synthetic {

/// Smooth decreasing scaling function used for planted collapses.
inline double master_curve(double x) { return 0.05 + 0.4 / (1.0 + std::exp(1.5 * x)); }

inline double collapse_value(const CollapseParams &par, std::size_t L, double p) {
  const double Ld = static_cast<double>(L);
  return std::pow(Ld, -par.eta) * master_curve((p - par.pc) * std::pow(Ld, 1.0 / par.nu));
}

/// Exact ansatz data (rel_noise = 0) or data with independent Gaussian relative
/// noise and matching error bars.
inline std::vector<CollapseDataset> collapse_datasets(const CollapseParams &par, const std::vector<std::size_t> &Ls,
                                                      const std::vector<double> &ps, double rel_noise = 0.0,
                                                      std::uint64_t seed = 0) {
  RandomStream rng = make_stream(seed);
  std::vector<CollapseDataset> out;
  for (auto L : Ls) {
    CollapseDataset d;
    d.L = L;
    d.p = ps;
    for (double p : ps) {
      const double y = collapse_value(par, L, p);
      d.y.push_back(y * (1.0 + rel_noise * standard_normal(rng)));
      d.sigma.push_back(rel_noise * y);
    }
    out.push_back(std::move(d));
  }
  return out;
}

/// Per-trajectory samples y (1 + rel_noise N(0,1)) around the ansatz.
inline std::vector<CollapseSamples> collapse_samples(const CollapseParams &par, const std::vector<std::size_t> &Ls,
                                                     const std::vector<double> &ps, std::size_t n, double rel_noise,
                                                     std::uint64_t seed) {
  RandomStream rng = make_stream(seed);
  std::vector<CollapseSamples> out;
  for (auto L : Ls) {
    CollapseSamples s;
    s.L = L;
    s.p = ps;
    for (double p : ps) {
      const double y = collapse_value(par, L, p);
      std::vector<double> v(n);
      for (auto &x : v) x = y * (1.0 + rel_noise * standard_normal(rng));
      s.samples.push_back(std::move(v));
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// ϱ^(k)(t) = t^(θ + k/z) / (k + 1) for k = 0..K.
inline std::vector<MomentSeries> moment_series(double theta, double z, int K, const std::vector<double> &ts) {
  std::vector<MomentSeries> out;
  for (int k = 0; k <= K; ++k) {
    MomentSeries s;
    s.k = k;
    s.t = ts;
    for (double t : ts) s.value.push_back(std::pow(t, theta + k / z) / (k + 1));
    out.push_back(std::move(s));
  }
  return out;
}

/// ϱ^(k)(t, p) = t^(θ + k/z) G[(p - pc) t^(1/νz)] with G(x) = exp(-x) / (1 + x^2).
inline std::vector<DynamicsCurve> off_critical_curves(const DynamicsExponents &ex, int k, const std::vector<double> &ps,
                                                      const std::vector<double> &ts) {
  std::vector<DynamicsCurve> out;
  for (double p : ps) {
    DynamicsCurve c;
    c.L = 0;
    c.p = p;
    c.t = ts;
    for (double t : ts) {
      const double x = (p - ex.pc) * std::pow(t, 1.0 / (ex.nu * ex.z));
      c.value.push_back(std::pow(t, ex.theta + k / ex.z) * std::exp(-x) / (1.0 + x * x));
    }
    c.sigma.assign(ts.size(), 0.0);
    out.push_back(std::move(c));
  }
  return out;
}

/// ϱ^(k)(t, L) = L^a G(t L^-z) with G(u) = u^(θ + k/z) / (1 + u^2), for t = 1..L.
inline std::vector<DynamicsCurve> finite_size_curves(const DynamicsExponents &ex, int k, const std::vector<std::size_t> &Ls,
                                                     SizeExponent se) {
  const double growth = ex.theta + k / ex.z;
  const double a = se == SizeExponent::growth ? growth : ex.z * ex.theta - 1.0;
  std::vector<DynamicsCurve> out;
  for (auto L : Ls) {
    DynamicsCurve c;
    c.L = L;
    const double Ld = static_cast<double>(L);
    for (std::size_t t = 1; t <= L; ++t) {
      const double u = static_cast<double>(t) * std::pow(Ld, -ex.z);
      c.t.push_back(static_cast<double>(t));
      c.value.push_back(std::pow(Ld, a) * std::pow(u, growth) / (1.0 + u * u));
    }
    c.sigma.assign(c.t.size(), 0.0);
    out.push_back(std::move(c));
  }
  return out;
}

/// n profiles r^-eta (1 + rel_noise N(0,1)) for r = 1..L-1.
inline std::vector<std::vector<double>> noisy_profiles(double eta, std::size_t L, std::size_t n, double rel_noise,
                                                       std::uint64_t seed) {
  RandomStream rng = make_stream(seed);
  std::vector<std::vector<double>> out(n, std::vector<double>(L - 1));
  for (auto &prof : out)
    for (std::size_t r = 1; r < L; ++r) {
      prof[r - 1] = std::pow(static_cast<double>(r), -eta) * (1.0 + rel_noise * standard_normal(rng));
    }
  return out;
}

}  // namespace bpe::synthetic
