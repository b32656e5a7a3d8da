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

// bpe: command-line driver. Exit codes: 0 success, 1 usage, 2 validation
// failure, 3 capacity.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bpe/experiment.hpp"
#include "bpe/selfcheck.hpp"

namespace {

using namespace bpe;
namespace fs = std::filesystem;

constexpr int kExitOk = 0, kExitUsage = 1, kExitValidation = 2, kExitCapacity = 3;

struct SimArgs {
  std::string config;
  std::vector<std::string> sets;
  std::string output;
  int workers = 0;
  bool resume = false;
  bool quiet = false;
  std::string times;  // profile only
};

void add_sim_options(CLI::App *cmd, SimArgs &a) {
  cmd->add_option("-c,--config", a.config, "Spec file (key = value lines)")->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", a.sets, "Override a spec key: KEY=VALUE (repeatable)");
  cmd->add_option("-o,--output", a.output, "Output directory");
  cmd->add_option("-j,--workers", a.workers, "Worker threads (overrides BPE_WORKERS and the spec)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--resume", a.resume, "Reuse completed points recorded in an existing manifest");
  cmd->add_flag("-q,--quiet", a.quiet, "No progress output");
}

ExperimentSpec build_spec(const SimArgs &a, ExperimentSpec defaults) {
  ExperimentSpec spec = a.config.empty() ? defaults : parse_spec(io::read_file(a.config), defaults);
  for (const auto &kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected KEY=VALUE, got '" + kv + "'");
    apply_setting(spec, config_detail::trim(kv.substr(0, eq)), config_detail::trim(kv.substr(eq + 1)));
  }
  if (!a.times.empty()) apply_setting(spec, "record_times", a.times);
  if (!a.output.empty()) spec.output = a.output;
  return spec;
}

int simulate(const SimArgs &a, const ExperimentSpec &defaults) {
  const auto spec = build_spec(a, defaults);
  RunOptions opt;
  opt.resume = a.resume;
  opt.workers = a.workers;
  if (!a.quiet) {
    opt.on_point = [](const PointResult &pr, double secs) {
      std::cerr << "L=" << pr.L << " p=" << io::num(pr.p) << " n=" << pr.final_rho.size() << " (" << secs << " s)\n";
    };
  }
  const auto sum = run_experiment(spec, opt);
  for (const auto &f : sum.files) std::cout << (fs::path(spec.output) / f).string() << "\n";
  if (!sum.fits.is_null() && !sum.fits.empty()) std::cout << sum.fits.dump(2) << "\n";
  return kExitOk;
}

void emit(const nlohmann::json &report, const std::string &out) {
  const auto text = report.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    io::write_file(out, text);
  }
}

Window parse_window(const std::string &s, std::size_t L) {
  const auto parts = config_detail::split(s, ':');
  detail::require(parts.size() == 2, "--window: expected lo:hi");
  return {config_detail::size_expr(parts[0], "window").value(L), config_detail::size_expr(parts[1], "window").value(L)};
}

/// Rows grouped by (L, p) in order of first appearance.
std::vector<std::pair<std::pair<std::size_t, double>, std::vector<std::size_t>>> group_rows(const io::Table &t) {
  std::vector<std::pair<std::pair<std::size_t, double>, std::vector<std::size_t>>> groups;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::pair<std::size_t, double> key{static_cast<std::size_t>(t.number(i, "L")), t.number(i, "p")};
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto &g) { return g.first == key; });
    if (it == groups.end()) {
      groups.push_back({key, {}});
      it = groups.end() - 1;
    }
    it->second.push_back(i);
  }
  return groups;
}

int fit_powerlaw_cmd(const std::string &input, const std::string &window, int boot, std::uint64_t seed,
                     std::optional<double> at_t, const std::string &out) {
  const auto table = io::parse_csv(io::read_file(input));
  const BootstrapOptions bo{boot, seed};
  if (table.has("x") && table.has("y")) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      xs.push_back(table.number(i, "x"));
      ys.push_back(table.number(i, "y"));
    }
    const Window w = window.empty() ? Window{} : parse_window(window, 0);
    emit(io::fit_json(fit_power_law(xs, ys, w, bo)), out);
    return kExitOk;
  }
  auto reports = nlohmann::json::array();
  for (const auto &[key, rows] : group_rows(table)) {
    double t = at_t.value_or(-1);
    if (!at_t) {
      for (auto i : rows) t = std::max(t, table.number(i, "t"));
    }
    std::vector<double> xs, ys;
    for (auto i : rows) {
      if (table.number(i, "t") != t) continue;
      xs.push_back(table.number(i, "r"));
      ys.push_back(table.number(i, "eae_mean"));
    }
    auto rep = io::fit_json(fit_power_law(xs, ys, parse_window(window.empty() ? "2:L/4" : window, key.first), bo));
    rep["L"] = key.first;
    rep["p"] = key.second;
    rep["t"] = t;
    reports.push_back(rep);
  }
  emit(reports, out);
  return kExitOk;
}

int fit_collapse_cmd(const std::string &input, const std::vector<double> &init, const std::string &pc,
                     const std::string &nu, const std::string &eta, int boot, std::uint64_t seed,
                     const std::string &out) {
  ExperimentSpec bounds;
  apply_setting(bounds, "collapse_init", init.empty() ? "0.16, 1.2, 0.5"
                                                      : io::num(init.at(0)) + "," + io::num(init.at(1)) + "," +
                                                            io::num(init.at(2)));
  if (!pc.empty()) apply_setting(bounds, "collapse_pc", pc);
  if (!nu.empty()) apply_setting(bounds, "collapse_nu", nu);
  if (!eta.empty()) apply_setting(bounds, "collapse_eta", eta);
  CollapseOptions opt;
  opt.bootstrap = {boot, seed};

  fs::path traj = input, moments = input;
  if (fs::is_directory(input)) {
    traj = fs::path(input) / "trajectories.csv";
    moments = fs::path(input) / "moments.csv";
  }
  const auto table = io::parse_csv(io::read_file(fs::exists(traj) ? traj : moments));
  ScalingFit fit;
  if (table.has("rho")) {
    std::map<std::size_t, CollapseSamples> by_L;
    for (const auto &[key, rows] : group_rows(table)) {
      auto &s = by_L[key.first];
      s.L = key.first;
      s.p.push_back(key.second);
      std::vector<double> v;
      for (auto i : rows) v.push_back(table.number(i, "rho"));
      s.samples.push_back(std::move(v));
    }
    std::vector<CollapseSamples> samples;
    for (auto &[L, s] : by_L) samples.push_back(std::move(s));
    fit = fit_collapse(std::span<const CollapseSamples>(samples), bounds.collapse_init, bounds.collapse_bounds, opt);
  } else {
    std::map<std::size_t, CollapseDataset> by_L;
    for (const auto &[key, rows] : group_rows(table)) {
      double t = -1;
      for (auto i : rows) t = std::max(t, table.number(i, "t"));
      for (auto i : rows) {
        if (table.number(i, "t") != t || table.number(i, "k") != 0) continue;
        auto &d = by_L[key.first];
        d.L = key.first;
        d.p.push_back(key.second);
        d.y.push_back(table.number(i, "value"));
        d.sigma.push_back(table.number(i, "stderr"));
      }
    }
    std::vector<CollapseDataset> data;
    for (auto &[L, d] : by_L) data.push_back(std::move(d));
    fit = fit_collapse(std::span<const CollapseDataset>(data), bounds.collapse_init, bounds.collapse_bounds, opt);
  }
  emit(io::fit_json(fit), out);
  return kExitOk;
}

int fit_dynamic_cmd(const std::string &input, const std::string &window, const std::string &out) {
  const fs::path path = fs::is_directory(input) ? fs::path(input) / "moments.csv" : fs::path(input);
  const auto table = io::parse_csv(io::read_file(path));
  auto reports = nlohmann::json::array();
  for (const auto &[key, rows] : group_rows(table)) {
    std::map<int, MomentSeries> by_k;
    for (auto i : rows) {
      const int k = static_cast<int>(table.number(i, "k"));
      auto &s = by_k[k];
      s.k = k;
      s.t.push_back(table.number(i, "t"));
      s.value.push_back(table.number(i, "value"));
    }
    std::vector<MomentSeries> series;
    for (auto &[k, s] : by_k) series.push_back(std::move(s));
    auto rep = io::fit_json(fit_dynamic_exponents(series, parse_window(window, key.first)));
    rep["L"] = key.first;
    rep["p"] = key.second;
    reports.push_back(rep);
  }
  emit(reports, out);
  return kExitOk;
}

int validate_cmd(std::size_t circuits, std::size_t states, std::size_t streams, std::uint64_t seed) {
  std::vector<selfcheck::Check> checks;
  checks.push_back(selfcheck::oracle_equivalence(circuits, seed));
  checks.push_back(selfcheck::outcome_independence(states, streams, seed));
  checks.push_back(selfcheck::clifford_group(20000, seed));
  for (auto &c : selfcheck::analysis_self_tests(true)) checks.push_back(std::move(c));
  for (const auto &c : checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
  }
  const bool ok = selfcheck::all_pass(checks);
  std::cout << (ok ? "all checks passed" : "some checks failed") << "\n";
  return ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Bipartite projected ensembles of monitored random circuits"};
  app.set_version_flag("--version", std::string(bpe::kVersion));
  app.require_subcommand(1);

  SimArgs run_a, prof_a, dyn_a, surf_a;
  auto *run = app.add_subcommand("run", "Simulate a sweep and aggregate profiles and moments");
  add_sim_options(run, run_a);
  auto *profile = app.add_subcommand("profile", "EAE profiles at chosen times");
  add_sim_options(profile, prof_a);
  profile->add_option("--times", prof_a.times, "Recorded times: final, all, or a list (e.g. 0:256:32)");
  auto *dynamics = app.add_subcommand("dynamics", "Moment time series (every time step recorded)");
  add_sim_options(dynamics, dyn_a);
  auto *surface = app.add_subcommand("surface", "Open-boundary edge observables");
  add_sim_options(surface, surf_a);

  std::string fp_in, fp_window, fp_out;
  int fp_boot = 200;
  std::uint64_t fp_seed = 7;
  std::optional<double> fp_t;
  auto *fitp = app.add_subcommand("fit-powerlaw", "Power-law fit of an x,y table or of profiles.csv");
  fitp->add_option("-i,--input", fp_in, "CSV file")->required()->check(CLI::ExistingFile);
  fitp->add_option("-w,--window", fp_window, "Fit window lo:hi; sizes may use L (default 2:L/4 for profiles)");
  fitp->add_option("-t,--time", fp_t, "Profile time (default: last recorded)");
  fitp->add_option("--bootstrap", fp_boot, "Bootstrap resamples")->check(CLI::NonNegativeNumber);
  fitp->add_option("--seed", fp_seed, "Bootstrap seed");
  fitp->add_option("-o,--output", fp_out, "Write the report here instead of stdout");

  std::string fc_in, fc_pc, fc_nu, fc_eta, fc_out;
  std::vector<double> fc_init;
  int fc_boot = 200;
  std::uint64_t fc_seed = 7;
  auto *fitc = app.add_subcommand("fit-collapse", "Finite-size collapse of the integrated EAE");
  fitc->add_option("-i,--input", fc_in, "Run directory, trajectories.csv or moments.csv")->required()->check(
      CLI::ExistingPath);
  fitc->add_option("--init", fc_init, "Starting pc nu eta")->expected(3)->delimiter(',');
  fitc->add_option("--pc", fc_pc, "pc bounds lo:hi");
  fitc->add_option("--nu", fc_nu, "nu bounds lo:hi");
  fitc->add_option("--eta", fc_eta, "eta bounds lo:hi");
  fitc->add_option("--bootstrap", fc_boot, "Bootstrap resamples over trajectories")->check(CLI::NonNegativeNumber);
  fitc->add_option("--seed", fc_seed, "Bootstrap seed");
  fitc->add_option("-o,--output", fc_out, "Write the report here instead of stdout");

  std::string fd_in, fd_window = "4:L/4", fd_out;
  auto *fitd = app.add_subcommand("fit-dynamic", "Dynamic exponents from moments.csv");
  fitd->add_option("-i,--input", fd_in, "Run directory or moments.csv")->required()->check(CLI::ExistingPath);
  fitd->add_option("-w,--window", fd_window, "Early-time window lo:hi; sizes may use L")->capture_default_str();
  fitd->add_option("-o,--output", fd_out, "Write the report here instead of stdout");

  std::size_t v_circuits = 300, v_states = 100, v_streams = 20;
  std::uint64_t v_seed = 2026;
  auto *validate = app.add_subcommand("validate", "Oracle-equivalence and self-test suite");
  validate->add_option("--circuits", v_circuits, "Random hybrid circuits checked against the dense backend")
      ->capture_default_str();
  validate->add_option("--states", v_states, "States for the outcome-independence check")->capture_default_str();
  validate->add_option("--streams", v_streams, "Random streams per state")->capture_default_str();
  validate->add_option("--seed", v_seed, "Seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return simulate(run_a, {});
    if (*profile) return simulate(prof_a, {});
    if (*dynamics) {
      ExperimentSpec d;
      d.record_mode = RecordMode::all;
      d.fits = {"dynamic"};
      return simulate(dyn_a, d);
    }
    if (*surface) {
      ExperimentSpec d;
      d.surface = true;
      d.boundary = Boundary::open;
      d.fits = {"surface"};
      return simulate(surf_a, d);
    }
    if (*fitp) return fit_powerlaw_cmd(fp_in, fp_window, fp_boot, fp_seed, fp_t, fp_out);
    if (*fitc) return fit_collapse_cmd(fc_in, fc_init, fc_pc, fc_nu, fc_eta, fc_boot, fc_seed, fc_out);
    if (*fitd) return fit_dynamic_cmd(fd_in, fd_window, fd_out);
    if (*validate) return validate_cmd(v_circuits, v_states, v_streams, v_seed);
  } catch (const CLI::ValidationError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const bpe::CapacityError &e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const bpe::ContractViolation &e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const bpe::DiagnosticError &e) {
    std::cerr << "diagnostic error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}
