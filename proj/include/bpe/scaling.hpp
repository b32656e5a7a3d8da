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

// Exponent extraction from ensemble data: power laws, finite-size data collapse,
// early-time dynamic scaling and surface exponents.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_fit.h>
#include <gsl/gsl_multimin.h>

#include "bpe/errors.hpp"
#include "bpe/rng.hpp"

namespace bpe {

/// Closed interval of the fit variable (r, t or L).
struct Window {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double x) const { return x >= lo && x <= hi; }
};

struct ScalingFit {
  std::string kind;
  std::map<std::string, double> values;
  std::map<std::string, double> errors;  ///< bootstrap or regression standard errors
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::string window_variable;
  Window window;
  std::size_t n_points = 0;
  std::vector<std::string> flags;

  double value(std::string_view name) const {
    const auto it = values.find(std::string(name));
    if (it == values.end()) throw ContractViolation("ScalingFit: no parameter named " + std::string(name));
    return it->second;
  }
  double error(std::string_view name) const {
    const auto it = errors.find(std::string(name));
    return it == errors.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
  }
  bool flagged(std::string_view flag) const {
    return std::any_of(flags.begin(), flags.end(), [&](const std::string &f) { return f.rfind(flag, 0) == 0; });
  }
};

struct BootstrapOptions {
  int resamples = 200;
  std::uint64_t seed = 0xB007;
};

/// Standard deviation of each component of `estimate(rng)` over independent
/// resamples. Resample i draws from its own stream, so results do not depend on
/// evaluation order. Resamples for which the estimator throws DiagnosticError or
/// ContractViolation (degenerate draws) are skipped.
template <class Estimate>
std::vector<double> bootstrap_std(const BootstrapOptions &opt, Estimate &&estimate) {
  std::vector<std::vector<double>> draws;
  for (int i = 0; i < opt.resamples; ++i) {
    RandomStream rng = make_stream(hash_words({opt.seed, static_cast<std::uint64_t>(i)}));
    try {
      draws.push_back(estimate(rng));
    } catch (const DiagnosticError &) {
    } catch (const ContractViolation &) {
    }
  }
  if (draws.size() < 2) return {};
  const std::size_t m = draws[0].size();
  std::vector<double> out(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double mean = 0;
    for (const auto &d : draws) mean += d[j];
    mean /= static_cast<double>(draws.size());
    double var = 0;
    for (const auto &d : draws) var += (d[j] - mean) * (d[j] - mean);
    out[j] = std::sqrt(var / static_cast<double>(draws.size() - 1));
  }
  return out;
}

/// Indices 0..n-1 drawn with replacement.
inline std::vector<std::size_t> resample_indices(std::size_t n, RandomStream &rng) {
  std::vector<std::size_t> idx(n);
  for (auto &i : idx) i = uniform_below(rng, n);
  return idx;
}

namespace detail {

struct LineFit {
  double intercept = 0, slope = 0;
  double se_intercept = 0, se_slope = 0;
  double sse = 0, r_squared = 1;
};

inline LineFit ols(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "ols: need at least two points");
  LineFit f;
  double c00, c01, c11;
  gsl_fit_linear(x.data(), 1, y.data(), 1, x.size(), &f.intercept, &f.slope, &c00, &c01, &c11, &f.sse);
  if (!std::isfinite(f.slope)) throw DiagnosticError("ols: degenerate abscissae");
  f.se_intercept = std::sqrt(c00);
  f.se_slope = std::sqrt(c11);
  double my = 0;
  for (double v : y) my += v;
  my /= static_cast<double>(y.size());
  double sst = 0;
  for (double v : y) sst += (v - my) * (v - my);
  f.r_squared = sst > 0 ? 1.0 - f.sse / sst : 1.0;
  return f;
}

struct LogLogPoints {
  std::vector<double> lx, ly;
};

inline LogLogPoints loglog_points(std::span<const double> xs, std::span<const double> ys, const Window &w,
                                  std::size_t min_points, std::string_view who) {
  require(xs.size() == ys.size(), std::string(who) + ": xs and ys differ in length");
  LogLogPoints pts;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!w.contains(xs[i])) continue;
    require(xs[i] > 0 && ys[i] > 0 && std::isfinite(ys[i]),
            std::string(who) + ": nonpositive value in fit window at x = " + std::to_string(xs[i]));
    pts.lx.push_back(std::log(xs[i]));
    pts.ly.push_back(std::log(ys[i]));
  }
  require(pts.lx.size() >= min_points, std::string(who) + ": need at least " + std::to_string(min_points) +
                                           " points in the fit window, have " + std::to_string(pts.lx.size()));
  return pts;
}

inline ScalingFit power_law_fit(std::span<const double> xs, std::span<const double> ys, const Window &w,
                                std::size_t min_points, const BootstrapOptions &boot) {
  const auto pts = loglog_points(xs, ys, w, min_points, "fit_power_law");
  const auto line = ols(pts.lx, pts.ly);
  ScalingFit fit;
  fit.kind = "power_law";
  fit.values["exponent"] = -line.slope;
  fit.values["amplitude"] = std::exp(line.intercept);
  fit.values["r_squared"] = line.r_squared;
  fit.objective = line.sse;
  fit.window_variable = "x";
  fit.window = w;
  fit.n_points = pts.lx.size();
  const auto se = bootstrap_std(boot, [&](RandomStream &rng) {
    const auto idx = resample_indices(pts.lx.size(), rng);
    std::vector<double> bx, by;
    for (auto i : idx) {
      bx.push_back(pts.lx[i]);
      by.push_back(pts.ly[i]);
    }
    if (std::all_of(bx.begin(), bx.end(), [&](double v) { return v == bx[0]; })) {
      throw DiagnosticError("resample has a single abscissa");
    }
    const auto l = ols(bx, by);
    return std::vector<double>{-l.slope, std::exp(l.intercept)};
  });
  if (se.size() == 2) {
    fit.errors["exponent"] = se[0];
    fit.errors["amplitude"] = se[1];
  }
  return fit;
}

}  // namespace detail

/// y = A x^-exponent by least squares on (log x, log y) over the in-window points.
inline ScalingFit fit_power_law(std::span<const double> xs, std::span<const double> ys, Window window = {},
                                const BootstrapOptions &boot = {}) {
  return detail::power_law_fit(xs, ys, window, 4, boot);
}

/// Gaussian log-likelihoods of a power law and of an exponential decay fitted to
/// the same positive in-window points (weighted least squares in log y).
struct DecayComparison {
  double loglik_power = 0;
  double loglik_exponential = 0;
  double power_exponent = 0;
  double correlation_length = 0;
  std::size_t n_points = 0;

  bool exponential_preferred() const { return loglik_exponential > loglik_power; }
};

inline DecayComparison compare_decay_models(std::span<const double> xs, std::span<const double> ys,
                                            std::span<const double> sigmas, Window window = {}) {
  detail::require(xs.size() == ys.size() && xs.size() == sigmas.size(), "compare_decay_models: length mismatch");
  std::vector<double> x, lx, ly, w;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!window.contains(xs[i]) || !(ys[i] > 0) || !(xs[i] > 0)) continue;
    const double rel = std::max(sigmas[i] / ys[i], 1e-6);
    x.push_back(xs[i]);
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
    w.push_back(1.0 / (rel * rel));
  }
  detail::require(x.size() >= 3, "compare_decay_models: need at least three positive points");
  auto loglik = [&](const std::vector<double> &abscissa, double &slope) {
    double c0, c1, c00, c01, c11, chisq;
    gsl_fit_wlinear(abscissa.data(), 1, w.data(), 1, ly.data(), 1, abscissa.size(), &c0, &c1, &c00, &c01, &c11,
                    &chisq);
    slope = c1;
    double norm = 0;
    for (double wi : w) norm += std::log(wi / (2 * std::numbers::pi));
    return -0.5 * chisq + 0.5 * norm;
  };
  DecayComparison out;
  double s_pow, s_exp;
  out.loglik_power = loglik(lx, s_pow);
  out.loglik_exponential = loglik(x, s_exp);
  out.power_exponent = -s_pow;
  out.correlation_length = s_exp < 0 ? -1.0 / s_exp : std::numeric_limits<double>::infinity();
  out.n_points = x.size();
  return out;
}

// ---------------------------------------------------------------------------
// Master-curve collapse

namespace detail {

struct ScaledPoint {
  double x, y, s;
  std::size_t label;

  friend bool operator==(const ScaledPoint &, const ScaledPoint &) = default;
};

/// Mean squared deviation of each point from a local linear fit through the
/// points of those other curves whose x range covers it. The tricube kernel's
/// window (full width) is the larger of the span of the 8 nearest pooled points
/// and 5% of the pooled x span. Points with fewer than two other-curve points
/// inside their window are skipped. With per-point
/// errors the deviations are normalized by s_i^2 plus the smoother variance;
/// without errors the result is relative to the mean squared master-curve value.
inline double master_curve_cost(std::vector<ScaledPoint> pts) {
  // Sorting makes the result independent of input order; exact duplicates (the
  // same curve supplied twice) carry no new information.
  std::sort(pts.begin(), pts.end(), [](const ScaledPoint &a, const ScaledPoint &b) {
    return std::tie(a.label, a.x, a.y, a.s) < std::tie(b.label, b.x, b.y, b.s);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  for (const auto &p : pts) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DiagnosticError("collapse: non-finite scaled point");
  }
  const bool weighted = std::all_of(pts.begin(), pts.end(), [](const ScaledPoint &p) { return p.s > 0; });
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  // Per-curve x ranges; points are grouped by label after the sort.
  struct Curve {
    std::size_t label, begin, end;
    double lo, hi;
  };
  std::vector<Curve> curves;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    xmin = std::min(xmin, pts[i].x);
    xmax = std::max(xmax, pts[i].x);
    if (curves.empty() || curves.back().label != pts[i].label) curves.push_back({pts[i].label, i, i, pts[i].x, pts[i].x});
    auto &c = curves.back();
    c.end = i + 1;
    c.lo = std::min(c.lo, pts[i].x);
    c.hi = std::max(c.hi, pts[i].x);
  }
  const double span = xmax - xmin;

  double total = 0, level = 0;
  std::size_t used = 0;
  std::vector<const ScaledPoint *> others;
  std::vector<double> dist;
  for (const auto &pi : pts) {
    others.clear();
    for (const auto &c : curves) {
      if (c.label == pi.label || pi.x < c.lo || pi.x > c.hi) continue;
      for (std::size_t j = c.begin; j < c.end; ++j) others.push_back(&pts[j]);
    }
    if (others.size() < 2) continue;
    dist.clear();
    for (const auto &pj : pts) {
      if (&pj != &pi) dist.push_back(std::abs(pj.x - pi.x));
    }
    const std::size_t kth = std::min<std::size_t>(8, dist.size()) - 1;
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kth), dist.end());
    double h = std::max(dist[kth], 0.05 * span);
    if (!(h > 0)) h = 1.0;
    h *= 1.0 + 1e-9;  // keep the 8th neighbour inside the kernel support
    auto kernel = [h](double d) {
      const double u = std::abs(d) / h;
      if (u >= 1) return 0.0;
      const double v = 1 - u * u * u;
      return v * v * v;
    };
    double s0 = 0, s1 = 0, s2 = 0;
    int support = 0;
    for (auto *pj : others) {
      const double d = pj->x - pi.x, w = kernel(d);
      s0 += w;
      s1 += w * d;
      s2 += w * d * d;
      support += w > 0;
    }
    if (support < 2) continue;
    const double den = s0 * s2 - s1 * s1;
    const bool linear = den > 1e-12 * s0 * s2;
    double yhat = 0, var = 0;
    for (auto *pj : others) {
      const double d = pj->x - pi.x, w = kernel(d);
      const double l = linear ? w * (s2 - d * s1) / den : w / s0;
      yhat += l * pj->y;
      var += l * l * pj->s * pj->s;
    }
    const double r = pi.y - yhat;
    total += weighted ? r * r / (pi.s * pi.s + var) : r * r;
    level += yhat * yhat;
    ++used;
  }
  if (used == 0) throw DiagnosticError("collapse: scaled x ranges of the curves have no overlap");
  const double n = static_cast<double>(used);
  if (weighted) return total / n;
  return level > 0 ? total / level : total / n;
}

}  // namespace detail

/// ϱ(p) for one system size.
struct CollapseDataset {
  std::size_t L = 0;
  std::vector<double> p;
  std::vector<double> y;
  std::vector<double> sigma;  ///< standard errors; all zero for exact data
};

/// Per-trajectory ϱ samples for one system size: samples[i] belongs to p[i].
struct CollapseSamples {
  std::size_t L = 0;
  std::vector<double> p;
  std::vector<std::vector<double>> samples;
};

struct CollapseParams {
  double pc = 0.16, nu = 1.0, eta = 0.5;

  std::array<double, 3> array() const { return {pc, nu, eta}; }
  static CollapseParams from(const std::array<double, 3> &a) { return {a[0], a[1], a[2]}; }
};

struct CollapseBounds {
  CollapseParams lo{0.0, 0.3, -1.0};
  CollapseParams hi{0.5, 4.0, 2.0};
};

/// Cost of the ansatz y = L^-eta F[(p - pc) L^(1/nu)]: each point is mapped to
/// ((p - pc) L^(1/nu), y L^eta) and scored against a master curve estimated from
/// the other sizes.
inline double collapse_objective(std::span<const CollapseDataset> datasets, const CollapseParams &par) {
  std::vector<std::size_t> sizes;
  for (const auto &d : datasets) {
    detail::require(d.p.size() == d.y.size() && d.p.size() == d.sigma.size(),
                    "collapse_objective: p, y, sigma differ in length");
    sizes.push_back(d.L);
  }
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  detail::require(sizes.size() >= 3, "collapse_objective: need at least three distinct system sizes");
  detail::require(par.nu > 0, "collapse_objective: nu must be positive");
  std::vector<detail::ScaledPoint> pts;
  for (const auto &d : datasets) {
    const double Ld = static_cast<double>(d.L);
    const double xs = std::pow(Ld, 1.0 / par.nu), ys = std::pow(Ld, par.eta);
    for (std::size_t i = 0; i < d.p.size(); ++i) {
      pts.push_back({(d.p[i] - par.pc) * xs, d.y[i] * ys, d.sigma[i] * ys, d.L});
    }
  }
  return detail::master_curve_cost(std::move(pts));
}

inline std::vector<CollapseDataset> datasets_from_samples(std::span<const CollapseSamples> samples) {
  std::vector<CollapseDataset> out;
  for (const auto &s : samples) {
    detail::require(s.p.size() == s.samples.size(), "datasets_from_samples: p and samples differ in length");
    CollapseDataset d;
    d.L = s.L;
    d.p = s.p;
    for (const auto &v : s.samples) {
      detail::require(!v.empty(), "datasets_from_samples: empty sample set");
      double m = 0;
      for (double x : v) m += x;
      m /= static_cast<double>(v.size());
      double var = 0;
      for (double x : v) var += (x - m) * (x - m);
      const double n = static_cast<double>(v.size());
      d.y.push_back(m);
      d.sigma.push_back(v.size() > 1 ? std::sqrt(var / (n - 1) / n) : 0.0);
    }
    out.push_back(std::move(d));
  }
  return out;
}

struct CollapseOptions {
  int grid_points = 13;  ///< per parameter
  int max_iterations = 4000;
  /// Relative cost change under a ±20% parameter perturbation below which the
  /// fit is flagged unidentifiable.
  double identifiability_tol = 1e-3;
  BootstrapOptions bootstrap;
};

namespace detail {

inline constexpr std::array<const char *, 3> kCollapseNames = {"pc", "nu", "eta"};

inline double bounded_cost(std::span<const CollapseDataset> data, const std::array<double, 3> &v,
                           const CollapseBounds &b) {
  const auto lo = b.lo.array(), hi = b.hi.array();
  double outside = 0;
  for (int i = 0; i < 3; ++i) outside += std::max(0.0, lo[i] - v[i]) + std::max(0.0, v[i] - hi[i]);
  if (outside > 0 || v[1] <= 0) return 1e100 * (1 + outside);
  try {
    return collapse_objective(data, CollapseParams::from(v));
  } catch (const DiagnosticError &) {
    return 1e100;
  }
}

struct SimplexContext {
  std::span<const CollapseDataset> data;
  const CollapseBounds *bounds;
};

inline double simplex_f(const gsl_vector *x, void *params) {
  auto *ctx = static_cast<SimplexContext *>(params);
  return bounded_cost(ctx->data, {gsl_vector_get(x, 0), gsl_vector_get(x, 1), gsl_vector_get(x, 2)}, *ctx->bounds);
}

inline std::array<double, 3> simplex_refine(std::span<const CollapseDataset> data, std::array<double, 3> start,
                                            const CollapseBounds &b, int max_iter) {
  SimplexContext ctx{data, &b};
  gsl_multimin_function fn{&simplex_f, 3, &ctx};
  gsl_vector *x = gsl_vector_alloc(3), *step = gsl_vector_alloc(3);
  const auto lo = b.lo.array(), hi = b.hi.array();
  for (int i = 0; i < 3; ++i) {
    gsl_vector_set(x, i, start[i]);
    gsl_vector_set(step, i, 0.05 * (hi[i] - lo[i]));
  }
  gsl_multimin_fminimizer *m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3);
  gsl_multimin_fminimizer_set(m, &fn, x, step);
  for (int it = 0; it < max_iter; ++it) {
    if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), 1e-7) == GSL_SUCCESS) break;
  }
  std::array<double, 3> out;
  for (int i = 0; i < 3; ++i) out[i] = gsl_vector_get(m->x, i);
  gsl_multimin_fminimizer_free(m);
  gsl_vector_free(x);
  gsl_vector_free(step);
  return out;
}

}  // namespace detail

/// Coarse grid search over the bounds (plus `init`), then Nelder-Mead refinement.
/// Flags "hit_bounds:<name>" and "unidentifiable:<name>" instead of failing.
inline ScalingFit fit_collapse(std::span<const CollapseDataset> datasets, const CollapseParams &init,
                               const CollapseBounds &bounds, const CollapseOptions &opt = {}) {
  const auto lo = bounds.lo.array(), hi = bounds.hi.array();
  for (int i = 0; i < 3; ++i) detail::require(lo[i] < hi[i], "fit_collapse: empty bounds");
  detail::require(opt.grid_points >= 2, "fit_collapse: grid_points must be >= 2");
  // Validates sizes and lengths up front.
  (void)collapse_objective(datasets, init.nu > 0 ? init : CollapseParams{init.pc, 1.0, init.eta});

  std::array<double, 3> best = init.array();
  double best_cost = detail::bounded_cost(datasets, best, bounds);
  const int g = opt.grid_points;
  for (int a = 0; a < g; ++a)
    for (int b = 0; b < g; ++b)
      for (int c = 0; c < g; ++c) {
        const std::array<double, 3> v = {lo[0] + (hi[0] - lo[0]) * a / (g - 1), lo[1] + (hi[1] - lo[1]) * b / (g - 1),
                                         lo[2] + (hi[2] - lo[2]) * c / (g - 1)};
        const double cost = detail::bounded_cost(datasets, v, bounds);
        if (cost < best_cost) {
          best_cost = cost;
          best = v;
        }
      }
  if (best_cost >= 1e100) throw DiagnosticError("fit_collapse: no parameter point in bounds gives overlapping curves");
  auto refined = detail::simplex_refine(datasets, best, bounds, opt.max_iterations);
  const double refined_cost = detail::bounded_cost(datasets, refined, bounds);
  if (refined_cost <= best_cost) {
    best = refined;
    best_cost = refined_cost;
  }

  ScalingFit fit;
  fit.kind = "collapse";
  fit.objective = best_cost;
  fit.window_variable = "p";
  fit.window = {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto &d : datasets) {
    fit.n_points += d.p.size();
    for (double p : d.p) {
      fit.window.lo = std::min(fit.window.lo, p);
      fit.window.hi = std::max(fit.window.hi, p);
    }
  }
  for (int i = 0; i < 3; ++i) {
    fit.values[detail::kCollapseNames[i]] = best[i];
    const double tol = 1e-3 * (hi[i] - lo[i]);
    if (best[i] - lo[i] < tol || hi[i] - best[i] < tol) {
      fit.flags.push_back(std::string("hit_bounds:") + detail::kCollapseNames[i]);
    }
    const double delta = std::abs(best[i]) > 1e-3 * (hi[i] - lo[i]) ? 0.2 * std::abs(best[i]) : 0.1 * (hi[i] - lo[i]);
    double worst = -std::numeric_limits<double>::infinity();
    for (double sgn : {-1.0, 1.0}) {
      auto v = best;
      v[i] += sgn * delta;
      if (i == 1 && v[i] <= 0) continue;
      try {
        worst = std::max(worst, collapse_objective(datasets, CollapseParams::from(v)));
      } catch (const DiagnosticError &) {
        // Curves no longer overlap: says nothing about sensitivity.
      }
    }
    if (worst - best_cost <= opt.identifiability_tol * std::max(best_cost, 1e-12)) {
      fit.flags.push_back(std::string("unidentifiable:") + detail::kCollapseNames[i]);
    }
  }
  return fit;
}

/// As above, with standard errors from resampling trajectories at every (L, p).
inline ScalingFit fit_collapse(std::span<const CollapseSamples> samples, const CollapseParams &init,
                               const CollapseBounds &bounds, const CollapseOptions &opt = {}) {
  const auto data = datasets_from_samples(samples);
  auto fit = fit_collapse(std::span<const CollapseDataset>(data), init, bounds, opt);
  const std::array<double, 3> center = {fit.value("pc"), fit.value("nu"), fit.value("eta")};
  const auto se = bootstrap_std(opt.bootstrap, [&](RandomStream &rng) {
    std::vector<CollapseSamples> re(samples.begin(), samples.end());
    for (auto &s : re)
      for (auto &v : s.samples) {
        const auto idx = resample_indices(v.size(), rng);
        std::vector<double> nv;
        nv.reserve(v.size());
        for (auto i : idx) nv.push_back(v[i]);
        v = std::move(nv);
      }
    const auto d = datasets_from_samples(re);
    const auto v = detail::simplex_refine(d, center, bounds, opt.max_iterations);
    return std::vector<double>(v.begin(), v.end());
  });
  if (se.size() == 3) {
    for (int i = 0; i < 3; ++i) fit.errors[detail::kCollapseNames[i]] = se[i];
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Dynamics

/// ϱ^(k)(t) at one (L, p).
struct MomentSeries {
  int k = 0;
  std::vector<double> t;
  std::vector<double> value;
};

/// Early-time slopes s_k of ϱ^(k)(t) ~ t^(θ + k/z), then s_k = θ + k/z by least
/// squares across k.
inline ScalingFit fit_dynamic_exponents(std::span<const MomentSeries> series, Window early_window) {
  std::vector<double> ks, slopes;
  ScalingFit fit;
  fit.kind = "dynamic_exponents";
  fit.window_variable = "t";
  fit.window = early_window;
  for (const auto &s : series) {
    const auto pl = detail::power_law_fit(s.t, s.value, early_window, 4, {0, 0});
    const double slope = -pl.value("exponent");
    ks.push_back(static_cast<double>(s.k));
    slopes.push_back(slope);
    fit.values["slope_k" + std::to_string(s.k)] = slope;
    fit.n_points += pl.n_points;
    double prev = -std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      if (!early_window.contains(s.t[i])) continue;
      monotone = monotone && s.value[i] > prev;
      prev = s.value[i];
    }
    if (!monotone) fit.flags.push_back("non_monotone:k" + std::to_string(s.k));
  }
  auto sorted = ks;
  std::sort(sorted.begin(), sorted.end());
  const bool distinct = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
  detail::require(distinct && sorted.size() >= 3 && sorted.back() >= 2,
                  "fit_dynamic_exponents: need distinct moments k = 0..K with K >= 2");
  const auto line = detail::ols(ks, slopes);
  fit.values["theta"] = line.intercept;
  fit.values["inv_z"] = line.slope;
  fit.errors["theta"] = line.se_intercept;
  fit.errors["inv_z"] = line.se_slope;
  fit.objective = line.sse;
  if (line.slope > 0) {
    fit.values["z"] = 1.0 / line.slope;
    fit.errors["z"] = line.se_slope / (line.slope * line.slope);
  } else {
    fit.values["z"] = std::numeric_limits<double>::quiet_NaN();
    fit.flags.push_back("nonpositive_inverse_z");
  }
  return fit;
}

enum class DynamicsCollapseMode { off_critical, finite_size };

/// Size prefactor in the finite-size form ϱ^(k)(t) = L^a G(t L^-z).
enum class SizeExponent {
  growth,              ///< a = θ + k/z
  normalized_moment,   ///< a = zθ - 1, matching the L^-(k+1) normalization of ϱ^(k)
};

/// ϱ^(k)(t) at one (L, p), with standard errors (zero for exact data).
struct DynamicsCurve {
  std::size_t L = 0;
  double p = 0;
  std::vector<double> t;
  std::vector<double> value;
  std::vector<double> sigma;
};

struct DynamicsExponents {
  double theta = std::numeric_limits<double>::quiet_NaN();
  double z = std::numeric_limits<double>::quiet_NaN();
  double nu = std::numeric_limits<double>::quiet_NaN();
  double pc = std::numeric_limits<double>::quiet_NaN();
};

/// Master-curve cost of moment dynamics. off_critical: curves labelled by p, mapped
/// to ((p - pc) t^(1/νz), ϱ^(k) t^-(θ + k/z)). finite_size: curves labelled by L,
/// mapped to (t L^-z, ϱ^(k) L^-a).
inline ScalingFit collapse_dynamics(std::span<const DynamicsCurve> curves, int k, DynamicsCollapseMode mode,
                                    const DynamicsExponents &ex, SizeExponent size_exponent = SizeExponent::growth) {
  detail::require(std::isfinite(ex.theta) && std::isfinite(ex.z) && ex.z > 0,
                  "collapse_dynamics: theta and a positive z are required");
  if (mode == DynamicsCollapseMode::off_critical) {
    detail::require(std::isfinite(ex.nu) && ex.nu > 0 && std::isfinite(ex.pc),
                    "collapse_dynamics: off_critical mode requires nu and pc");
  }
  const double growth = ex.theta + k / ex.z;
  std::vector<double> labels;
  for (const auto &c : curves) labels.push_back(mode == DynamicsCollapseMode::off_critical ? c.p : static_cast<double>(c.L));
  auto uniq = labels;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  detail::require(uniq.size() >= 2, "collapse_dynamics: need at least two distinct curves");

  std::vector<detail::ScaledPoint> pts;
  ScalingFit fit;
  fit.kind = mode == DynamicsCollapseMode::off_critical ? "dynamics_off_critical" : "dynamics_finite_size";
  fit.window_variable = "t";
  fit.window = {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const auto &c = curves[ci];
    detail::require(c.t.size() == c.value.size() && c.t.size() == c.sigma.size(),
                    "collapse_dynamics: t, value, sigma differ in length");
    const std::size_t label =
        static_cast<std::size_t>(std::lower_bound(uniq.begin(), uniq.end(), labels[ci]) - uniq.begin());
    for (std::size_t i = 0; i < c.t.size(); ++i) {
      detail::require(c.t[i] > 0, "collapse_dynamics: times must be positive");
      double x, scale;
      if (mode == DynamicsCollapseMode::off_critical) {
        x = (c.p - ex.pc) * std::pow(c.t[i], 1.0 / (ex.nu * ex.z));
        scale = std::pow(c.t[i], -growth);
      } else {
        const double Ld = static_cast<double>(c.L);
        const double a = size_exponent == SizeExponent::growth ? growth : ex.z * ex.theta - 1.0;
        x = c.t[i] * std::pow(Ld, -ex.z);
        scale = std::pow(Ld, -a);
      }
      pts.push_back({x, c.value[i] * scale, c.sigma[i] * scale, label});
      fit.window.lo = std::min(fit.window.lo, c.t[i]);
      fit.window.hi = std::max(fit.window.hi, c.t[i]);
    }
  }
  fit.n_points = pts.size();
  fit.objective = detail::master_curve_cost(std::move(pts));
  fit.values["theta"] = ex.theta;
  fit.values["z"] = ex.z;
  fit.values["k"] = k;
  if (mode == DynamicsCollapseMode::off_critical) {
    fit.values["nu"] = ex.nu;
    fit.values["pc"] = ex.pc;
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Surface

/// η_⊥ from Ē_⊥(r) over `perp_window`, η_∥ from Ē_∥(L) over all sizes (at least
/// three), and the residual η_⊥ - (η + η_∥)/2 for the supplied bulk η.
inline ScalingFit surface_exponents(std::span<const double> perp_r, std::span<const double> perp_values,
                                    Window perp_window, std::span<const double> sizes,
                                    std::span<const double> parallel_values, double bulk_eta,
                                    const BootstrapOptions &boot = {}) {
  detail::require(sizes.size() >= 3, "surface_exponents: need at least three system sizes for the parallel fit");
  const auto perp = detail::power_law_fit(perp_r, perp_values, perp_window, 4, boot);
  const auto par = detail::power_law_fit(sizes, parallel_values, {}, 3, boot);
  ScalingFit fit;
  fit.kind = "surface_exponents";
  fit.window_variable = "r";
  fit.window = perp_window;
  fit.n_points = perp.n_points + par.n_points;
  fit.objective = perp.objective + par.objective;
  fit.values["eta_perp"] = perp.value("exponent");
  fit.values["eta_parallel"] = par.value("exponent");
  fit.values["bulk_eta"] = bulk_eta;
  fit.values["relation_residual"] = fit.values["eta_perp"] - 0.5 * (bulk_eta + fit.values["eta_parallel"]);
  fit.errors["eta_perp"] = perp.error("exponent");
  fit.errors["eta_parallel"] = par.error("exponent");
  return fit;
}

}  // namespace bpe
