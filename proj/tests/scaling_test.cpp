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

#include <cmath>

#include <gtest/gtest.h>

#include "bpe/scaling.hpp"
#include "bpe/synthetic.hpp"

namespace bpe {
namespace {

std::vector<double> range(double lo, double hi, double step) {
  std::vector<double> out;
  for (double x = lo; x <= hi + 1e-9; x += step) out.push_back(x);
  return out;
}

TEST(PowerLaw, ExactLaw) {
  const auto xs = range(1, 64, 1);
  std::vector<double> ys;
  for (double x : xs) ys.push_back(2.5 * std::pow(x, -0.71));
  const auto fit = fit_power_law(xs, ys, {2, 16});
  EXPECT_NEAR(fit.value("exponent"), 0.71, 1e-10);
  EXPECT_NEAR(fit.value("amplitude"), 2.5, 1e-10);
  EXPECT_NEAR(fit.value("r_squared"), 1.0, 1e-12);
  EXPECT_EQ(fit.n_points, 15u);
  EXPECT_LT(fit.error("exponent"), 1e-10);
}

TEST(PowerLaw, ConstantData) {
  const auto xs = range(1, 20, 1);
  const std::vector<double> ys(xs.size(), 0.3);
  EXPECT_NEAR(fit_power_law(xs, ys).value("exponent"), 0.0, 1e-10);
}

TEST(PowerLaw, ScaleEquivariance) {
  RandomStream rng = make_stream(91);
  const auto xs = range(1, 40, 1);
  std::vector<double> ys, scaled;
  for (double x : xs) {
    ys.push_back(std::pow(x, -1.1) * std::exp(0.1 * standard_normal(rng)));
    scaled.push_back(ys.back() * 37.0);
  }
  const auto a = fit_power_law(xs, ys, {2, 30}), b = fit_power_law(xs, scaled, {2, 30});
  EXPECT_NEAR(a.value("exponent"), b.value("exponent"), 1e-12);
  EXPECT_NEAR(b.value("amplitude") / a.value("amplitude"), 37.0, 1e-9);
}

TEST(PowerLaw, Preconditions) {
  const std::vector<double> xs{1, 2, 3, 4, 5}, ys{1, 0.5, 0.0, 0.2, 0.1};
  EXPECT_THROW(fit_power_law(xs, ys), ContractViolation);
  EXPECT_THROW(fit_power_law(xs, ys, {3.5, 5}), ContractViolation);  // two points
  EXPECT_NO_THROW(fit_power_law(std::vector<double>{1, 2, 4, 5}, std::vector<double>{1, .5, .2, .1}));
}

TEST(PowerLaw, TooFewPoints) {
  const std::vector<double> xs{1, 2, 3}, ys{1, 0.5, 0.3};
  EXPECT_THROW(fit_power_law(xs, ys), ContractViolation);
}

TEST(DecayModels, DistinguishesExponentialFromPowerLaw) {
  const auto xs = range(1, 40, 1);
  std::vector<double> e, pw, sig_e, sig_p;
  for (double x : xs) {
    e.push_back(std::exp(-x / 4.0));
    sig_e.push_back(0.02 * e.back());
    pw.push_back(std::pow(x, -0.7));
    sig_p.push_back(0.02 * pw.back());
  }
  EXPECT_TRUE(compare_decay_models(xs, e, sig_e, {2, 30}).exponential_preferred());
  const auto cp = compare_decay_models(xs, pw, sig_p, {2, 30});
  EXPECT_FALSE(cp.exponential_preferred());
  EXPECT_NEAR(cp.power_exponent, 0.7, 1e-9);
}

TEST(Collapse, ObjectiveMinimalAtTruth) {
  const CollapseParams truth{0.16, 1.24, 0.71};
  const auto data = synthetic::collapse_datasets(truth, {16, 32, 64, 128}, range(0.08, 0.24, 0.02));
  const double at_truth = collapse_objective(data, truth);
  for (int i = 0; i < 3; ++i)
    for (double f : {0.8, 1.2}) {
      auto v = truth.array();
      v[i] *= f;
      EXPECT_LT(at_truth, collapse_objective(data, CollapseParams::from(v))) << i << " " << f;
    }
}

TEST(Collapse, Preconditions) {
  const auto data = synthetic::collapse_datasets({0.16, 1.24, 0.71}, {16, 32}, range(0.08, 0.24, 0.02));
  EXPECT_THROW(collapse_objective(data, {0.16, 1.24, 0.71}), ContractViolation);
  const auto one = synthetic::collapse_datasets({0.16, 1.24, 0.71}, {16}, range(0.08, 0.24, 0.02));
  EXPECT_THROW(collapse_objective(one, {0.16, 1.24, 0.71}), ContractViolation);

  // Disjoint p ranges per size cannot overlap near pc = 0 with nu small.
  std::vector<CollapseDataset> apart;
  for (std::size_t L : {8u, 16u, 32u}) {
    CollapseDataset d;
    d.L = L;
    d.p = {0.1 * L, 0.1 * L + 0.01};
    d.y = {1, 1};
    d.sigma = {0, 0};
    apart.push_back(d);
  }
  EXPECT_THROW(collapse_objective(apart, {0.0, 0.5, 0.0}), DiagnosticError);
}

TEST(Collapse, InvariantUnderRelabelingAndDuplication) {
  const CollapseParams truth{0.16, 1.24, 0.71};
  auto data = synthetic::collapse_datasets(truth, {16, 32, 64}, range(0.08, 0.24, 0.02), 0.01, 92);
  const CollapseParams probe{0.17, 1.1, 0.6};
  const double base = collapse_objective(data, probe);
  std::vector<CollapseDataset> reordered{data[2], data[0], data[1]};
  EXPECT_EQ(collapse_objective(reordered, probe), base);
  reordered.push_back(data[1]);
  EXPECT_EQ(collapse_objective(reordered, probe), base);
}

TEST(Collapse, RecoversPlantedParametersExactData) {
  const CollapseParams truth{0.16, 1.24, 0.71};
  const auto data = synthetic::collapse_datasets(truth, {16, 32, 64, 128}, range(0.08, 0.24, 0.02));
  const auto fit = fit_collapse(std::span<const CollapseDataset>(data), {0.15, 1.0, 0.5}, {});
  EXPECT_NEAR(fit.value("pc"), 0.16, 0.003);
  EXPECT_NEAR(fit.value("nu"), 1.24, 0.05);
  EXPECT_NEAR(fit.value("eta"), 0.71, 0.01);
  EXPECT_FALSE(fit.flagged("hit_bounds"));
  EXPECT_FALSE(fit.flagged("unidentifiable"));
}

TEST(Collapse, RecoversPlantedParametersWithinBootstrapError) {
  const CollapseParams truth{0.16, 1.24, 0.71};
  const auto samples = synthetic::collapse_samples(truth, {16, 32, 64}, range(0.08, 0.24, 0.02), 400, 0.5, 93);
  CollapseOptions opt;
  opt.bootstrap.resamples = 60;
  const auto fit = fit_collapse(std::span<const CollapseSamples>(samples), {0.15, 1.0, 0.5}, {}, opt);
  for (const char *name : {"pc", "nu", "eta"}) {
    const double planted = name[0] == 'p' ? truth.pc : name[0] == 'n' ? truth.nu : truth.eta;
    EXPECT_GT(fit.error(name), 0.0) << name;
    EXPECT_LT(std::abs(fit.value(name) - planted), 3.5 * fit.error(name)) << name << " " << fit.value(name);
  }
}

TEST(Collapse, FlatDataIsUnidentifiable) {
  std::vector<CollapseDataset> flat;
  for (std::size_t L : {16u, 32u, 64u}) {
    CollapseDataset d;
    d.L = L;
    d.p = range(0.08, 0.24, 0.02);
    d.y.assign(d.p.size(), 0.2);
    d.sigma.assign(d.p.size(), 0.0);
    flat.push_back(d);
  }
  const auto fit = fit_collapse(std::span<const CollapseDataset>(flat), {0.16, 1.0, 0.5}, {});
  EXPECT_TRUE(fit.flagged("unidentifiable:pc"));
  EXPECT_TRUE(fit.flagged("unidentifiable:nu"));
}

TEST(Collapse, BoundsAreFlagged) {
  const CollapseParams truth{0.16, 1.24, 0.71};
  const auto data = synthetic::collapse_datasets(truth, {16, 32, 64}, range(0.08, 0.24, 0.02));
  CollapseBounds tight;
  tight.lo = {0.05, 0.3, -1.0};
  tight.hi = {0.12, 4.0, 2.0};
  const auto fit = fit_collapse(std::span<const CollapseDataset>(data), {0.1, 1.0, 0.5}, tight);
  EXPECT_TRUE(fit.flagged("hit_bounds:pc"));
}

TEST(Dynamics, RecoversExactExponents) {
  const auto series = synthetic::moment_series(0.38, 1.01, 3, range(1, 64, 1));
  const auto fit = fit_dynamic_exponents(series, {4, 32});
  EXPECT_NEAR(fit.value("theta"), 0.38, 1e-8);
  EXPECT_NEAR(fit.value("z"), 1.01, 1e-8);
  EXPECT_TRUE(fit.flags.empty());
}

TEST(Dynamics, RecoversAcrossParameterBox) {
  RandomStream rng = make_stream(94);
  for (int i = 0; i < 50; ++i) {
    const double theta = 0.1 + 0.9 * uniform01(rng), z = 0.5 + 1.5 * uniform01(rng);
    const auto fit = fit_dynamic_exponents(synthetic::moment_series(theta, z, 3, range(1, 64, 1)), {4, 32});
    EXPECT_NEAR(fit.value("theta"), theta, 1e-6);
    EXPECT_NEAR(fit.value("z"), z, 1e-6);
  }
}

TEST(Dynamics, Preconditions) {
  const auto series = synthetic::moment_series(0.38, 1.01, 1, range(1, 64, 1));
  EXPECT_THROW(fit_dynamic_exponents(series, {4, 32}), ContractViolation);
  auto bumpy = synthetic::moment_series(0.38, 1.01, 3, range(1, 64, 1));
  bumpy[1].value[7] *= 0.5;  // t = 8
  EXPECT_TRUE(fit_dynamic_exponents(bumpy, {4, 32}).flagged("non_monotone:k1"));
}

TEST(Dynamics, OffCriticalCollapse) {
  const DynamicsExponents ex{0.38, 1.01, 1.24, 0.16};
  const auto curves = synthetic::off_critical_curves(ex, 1, range(0.18, 0.3, 0.02), range(1, 60, 1));
  const auto truth = collapse_dynamics(curves, 1, DynamicsCollapseMode::off_critical, ex);
  EXPECT_LT(truth.objective, 1e-4);

  // Negative control: the same values attached to the wrong (t, p) points.
  auto shuffled = curves;
  RandomStream rng = make_stream(95);
  std::vector<double *> vals;
  for (auto &c : shuffled)
    for (auto &v : c.value) vals.push_back(&v);
  for (std::size_t i = vals.size() - 1; i > 0; --i) std::swap(*vals[i], *vals[uniform_below(rng, i + 1)]);
  const auto bad = collapse_dynamics(shuffled, 1, DynamicsCollapseMode::off_critical, ex);
  EXPECT_GT(bad.objective, 10 * truth.objective);

  DynamicsExponents missing = ex;
  missing.nu = std::nan("");
  EXPECT_THROW(collapse_dynamics(curves, 1, DynamicsCollapseMode::off_critical, missing), ContractViolation);
}

TEST(Dynamics, FiniteSizeCollapse) {
  const DynamicsExponents ex{0.38, 1.01};
  for (auto se : {SizeExponent::growth, SizeExponent::normalized_moment}) {
    const auto curves = synthetic::finite_size_curves(ex, 1, {32, 64, 128}, se);
    const auto truth = collapse_dynamics(curves, 1, DynamicsCollapseMode::finite_size, ex, se);
    EXPECT_LT(truth.objective, 1e-5);
    DynamicsExponents wrong = ex;
    wrong.z = 1.4;
    EXPECT_GT(collapse_dynamics(curves, 1, DynamicsCollapseMode::finite_size, wrong, se).objective,
              10 * truth.objective);
  }
}

TEST(Surface, ExactRecoveryAndRelation) {
  const auto rs = range(1, 63, 1);
  std::vector<double> perp;
  for (double r : rs) perp.push_back(0.3 * std::pow(r, -1.02));
  const std::vector<double> Ls{32, 64, 128};
  std::vector<double> par;
  for (double L : Ls) par.push_back(2.0 * std::pow(L, -1.34));
  const auto fit = surface_exponents(rs, perp, {2, 16}, Ls, par, 0.71);
  EXPECT_NEAR(fit.value("eta_perp"), 1.02, 1e-10);
  EXPECT_NEAR(fit.value("eta_parallel"), 1.34, 1e-10);
  EXPECT_NEAR(fit.value("relation_residual"), -0.005, 1e-10);
  const std::vector<double> two{32, 64}, par2{0.1, 0.05};
  EXPECT_THROW(surface_exponents(rs, perp, {2, 16}, two, par2, 0.71), ContractViolation);
}

TEST(Bootstrap, ErrorShrinksWithTrajectoryCount) {
  // Per-trajectory noisy power-law profiles; fit the mean profile.
  auto se_for = [](std::size_t n) {
    const auto profiles = synthetic::noisy_profiles(0.71, 64, n, 0.3, 96 + n);
    const auto rs = range(1, 63, 1);
    BootstrapOptions opt;
    opt.resamples = 200;
    const auto se = bootstrap_std(opt, [&](RandomStream &rng) {
      const auto idx = resample_indices(profiles.size(), rng);
      std::vector<double> mean(rs.size(), 0.0);
      for (auto i : idx)
        for (std::size_t r = 0; r < rs.size(); ++r) mean[r] += profiles[i][r] / static_cast<double>(idx.size());
      return std::vector<double>{fit_power_law(rs, mean, {2, 16}, {0, 0}).value("exponent")};
    });
    return se.at(0);
  };
  const double small = se_for(100), large = se_for(400);
  const double ratio = small / large;  // ideal 2
  EXPECT_GT(ratio, 1.0);
  EXPECT_LT(ratio, 4.0);
}

}  // namespace
}  // namespace bpe
