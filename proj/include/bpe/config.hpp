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

// Experiment specification and its flat `key = value` text format.
//
//   # comment
//   backend = clifford            # clifford | haar
//   L = 16, 32, 64
//   p = 0.08:0.24:0.02            # lo:hi:step ranges and comma lists mix freely
//   t_max = 2L                    # integer, or a multiple of L ("2L", "L/2")
//   record_times = final          # final | all | list of times / ranges
//
// See README.md for the full key list.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bpe/circuit.hpp"
#include "bpe/errors.hpp"
#include "bpe/scaling.hpp"

namespace bpe {

/// A quantity that may scale with the system size: value(L) = factor * L / div
/// when `per_L`, else factor / div.
struct SizeExpr {
  double factor = 0;
  double div = 1;
  bool per_L = false;

  double value(std::size_t L) const { return (per_L ? factor * static_cast<double>(L) : factor) / div; }
  std::string str() const;
};

enum class RecordMode { final, all, list };

struct ExperimentSpec {
  std::string backend = "clifford";
  std::vector<std::size_t> Ls = {8};
  std::vector<double> ps = {0.0};
  Boundary boundary = Boundary::periodic;
  SizeExpr t_max{2, 1, true};
  RecordMode record_mode = RecordMode::final;
  std::vector<int> record_list;
  std::uint64_t n_samples = 1;
  std::uint64_t seed = 1;
  PositionsMode positions_mode = PositionsMode::fixed_origin;
  MeasurementSchedule schedule = MeasurementSchedule::every_layer;
  int max_moment = 3;
  bool surface = false;
  int workers = 1;
  std::string output = "bpe_out";

  // Analysis directives.
  std::vector<std::string> fits;
  SizeExpr powerlaw_lo{2}, powerlaw_hi{1, 4, true};
  SizeExpr dynamic_lo{4}, dynamic_hi{1, 4, true};
  CollapseParams collapse_init{0.16, 1.2, 0.5};
  CollapseBounds collapse_bounds{{0.05, 0.5, -0.5}, {0.30, 3.0, 1.5}};
  int bootstrap = 200;
  std::uint64_t analysis_seed = 7;
  double bulk_eta = std::numeric_limits<double>::quiet_NaN();

  int t_max_for(std::size_t L) const { return static_cast<int>(std::lround(t_max.value(L))); }

  std::vector<int> record_times_for(std::size_t L) const {
    const int tm = t_max_for(L);
    std::vector<int> out;
    if (record_mode == RecordMode::final) return {tm};
    if (record_mode == RecordMode::all) {
      for (int t = 0; t <= tm; ++t) out.push_back(t);
      return out;
    }
    for (int t : record_list) {
      if (t <= tm) out.push_back(t);
    }
    return out;
  }

  CircuitConfig circuit(std::size_t L, double p) const {
    CircuitConfig cfg;
    cfg.L = L;
    cfg.p = p;
    cfg.boundary = boundary;
    cfg.t_max = t_max_for(L);
    cfg.record_times = record_times_for(L);
    cfg.seed = seed;
    cfg.positions_mode = positions_mode;
    cfg.schedule = schedule;
    cfg.max_moment = max_moment;
    cfg.surface = surface;
    return cfg;
  }

  /// Throws ContractViolation (named field) or CapacityError.
  void validate() const {
    detail::require(backend == "clifford" || backend == "haar", "spec.backend: must be clifford or haar");
    detail::require(!Ls.empty(), "spec.L: at least one system size is required");
    detail::require(!ps.empty(), "spec.p: at least one measurement rate is required");
    detail::require(n_samples >= 1, "spec.n_samples: must be >= 1");
    detail::require(workers >= 1, "spec.workers: must be >= 1");
    detail::require(bootstrap >= 0, "spec.bootstrap: must be >= 0");
    for (const auto &f : fits) {
      detail::require(f == "powerlaw" || f == "collapse" || f == "dynamic" || f == "surface",
                      "spec.fits: unknown fit '" + f + "'");
    }
    for (auto L : Ls) {
      const std::size_t cap = backend == "haar" ? kMaxHaarQubits : kMaxCliffordQubits;
      if (L > cap) {
        throw CapacityError("spec.L: " + std::to_string(L) + " exceeds the " + backend + " backend limit of " +
                            std::to_string(cap));
      }
      detail::require(!record_times_for(L).empty(), "spec.record_times: no recorded time within t_max for L = " +
                                                        std::to_string(L));
      for (double p : ps) circuit(L, p).validate();
    }
  }
};

namespace config_detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double to_double(const std::string &s, const std::string &key) {
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  detail::require(r.ec == std::errc() && r.ptr == s.data() + s.size() && !s.empty(),
                  "spec." + key + ": not a number: '" + s + "'");
  return v;
}

inline std::uint64_t to_uint(const std::string &s, const std::string &key) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  detail::require(r.ec == std::errc() && r.ptr == s.data() + s.size() && !s.empty(),
                  "spec." + key + ": not a non-negative integer: '" + s + "'");
  return v;
}

/// Round to 12 significant digits so that 0.08 + 3 * 0.02 prints and hashes as 0.14.
inline double tidy(double v) {
  if (v == 0) return 0;
  const double scale = std::pow(10.0, 11 - std::floor(std::log10(std::abs(v))));
  return std::round(v * scale) / scale;
}

/// Comma list whose items are numbers or lo:hi[:step] ranges (step defaults to 1).
inline std::vector<double> number_list(const std::string &value, const std::string &key) {
  std::vector<double> out;
  for (const auto &item : split(value, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() == 1) {
      out.push_back(to_double(parts[0], key));
      continue;
    }
    detail::require(parts.size() <= 3, "spec." + key + ": bad range '" + item + "'");
    const double lo = to_double(parts[0], key), hi = to_double(parts[1], key);
    const double step = parts.size() == 3 ? to_double(parts[2], key) : 1.0;
    detail::require(step > 0 && hi >= lo, "spec." + key + ": bad range '" + item + "'");
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(tidy(lo + static_cast<double>(i) * step));
  }
  return out;
}

inline SizeExpr size_expr(std::string s, const std::string &key) {
  SizeExpr e;
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    e.div = to_double(trim(s.substr(slash + 1)), key);
    detail::require(e.div > 0, "spec." + key + ": division by a nonpositive number");
    s = trim(s.substr(0, slash));
  }
  if (!s.empty() && s.back() == 'L') {
    e.per_L = true;
    s.pop_back();
    e.factor = s.empty() ? 1.0 : to_double(trim(s), key);
  } else {
    e.factor = to_double(s, key);
  }
  return e;
}

inline bool to_bool(const std::string &s, const std::string &key) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ContractViolation("spec." + key + ": expected true or false, got '" + s + "'");
}

inline std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace config_detail

inline std::string SizeExpr::str() const {
  using config_detail::fmt;
  std::string s = per_L ? (factor == 1 ? "L" : fmt(factor) + "L") : fmt(factor);
  if (div != 1) s += "/" + fmt(div);
  return s;
}

/// Applies one `key = value` setting.
inline void apply_setting(ExperimentSpec &spec, const std::string &key, const std::string &value) {
  using namespace config_detail;
  auto range_pair = [&](SizeExpr &lo, SizeExpr &hi) {
    const auto parts = split(value, ':');
    detail::require(parts.size() == 2, "spec." + key + ": expected lo:hi");
    lo = size_expr(parts[0], key);
    hi = size_expr(parts[1], key);
  };
  auto bound_pair = [&](double &lo, double &hi) {
    const auto parts = split(value, ':');
    detail::require(parts.size() == 2, "spec." + key + ": expected lo:hi");
    lo = to_double(parts[0], key);
    hi = to_double(parts[1], key);
    detail::require(lo < hi, "spec." + key + ": lo must be below hi");
  };
  if (key == "backend") {
    spec.backend = value;
  } else if (key == "L") {
    spec.Ls.clear();
    for (double v : number_list(value, key)) {
      detail::require(v >= 1 && v == std::floor(v), "spec.L: sizes must be positive integers");
      spec.Ls.push_back(static_cast<std::size_t>(v));
    }
  } else if (key == "p") {
    spec.ps = number_list(value, key);
  } else if (key == "boundary") {
    detail::require(value == "periodic" || value == "open", "spec.boundary: must be periodic or open");
    spec.boundary = value == "periodic" ? Boundary::periodic : Boundary::open;
  } else if (key == "t_max") {
    spec.t_max = size_expr(value, key);
  } else if (key == "record_times") {
    spec.record_list.clear();
    if (value == "final") {
      spec.record_mode = RecordMode::final;
    } else if (value == "all") {
      spec.record_mode = RecordMode::all;
    } else {
      spec.record_mode = RecordMode::list;
      for (double v : number_list(value, key)) {
        detail::require(v >= 0 && v == std::floor(v), "spec.record_times: times must be non-negative integers");
        spec.record_list.push_back(static_cast<int>(v));
      }
      std::sort(spec.record_list.begin(), spec.record_list.end());
      spec.record_list.erase(std::unique(spec.record_list.begin(), spec.record_list.end()), spec.record_list.end());
    }
  } else if (key == "n_samples") {
    spec.n_samples = to_uint(value, key);
  } else if (key == "seed") {
    spec.seed = to_uint(value, key);
  } else if (key == "positions") {
    detail::require(value == "fixed_origin" || value == "translation_average",
                    "spec.positions: must be fixed_origin or translation_average");
    spec.positions_mode = value == "fixed_origin" ? PositionsMode::fixed_origin : PositionsMode::translation_average;
  } else if (key == "schedule") {
    detail::require(value == "every_layer" || value == "every_step", "spec.schedule: must be every_layer or every_step");
    spec.schedule = value == "every_layer" ? MeasurementSchedule::every_layer : MeasurementSchedule::every_step;
  } else if (key == "max_moment") {
    spec.max_moment = static_cast<int>(to_uint(value, key));
  } else if (key == "surface") {
    spec.surface = to_bool(value, key);
  } else if (key == "workers") {
    spec.workers = static_cast<int>(to_uint(value, key));
  } else if (key == "output") {
    spec.output = value;
  } else if (key == "fits") {
    spec.fits.clear();
    if (!value.empty() && value != "none") {
      for (const auto &f : split(value, ',')) spec.fits.push_back(f);
    }
  } else if (key == "powerlaw_window") {
    range_pair(spec.powerlaw_lo, spec.powerlaw_hi);
  } else if (key == "dynamic_window") {
    range_pair(spec.dynamic_lo, spec.dynamic_hi);
  } else if (key == "collapse_init") {
    const auto v = number_list(value, key);
    detail::require(v.size() == 3, "spec.collapse_init: expected pc, nu, eta");
    spec.collapse_init = {v[0], v[1], v[2]};
  } else if (key == "collapse_pc") {
    bound_pair(spec.collapse_bounds.lo.pc, spec.collapse_bounds.hi.pc);
  } else if (key == "collapse_nu") {
    bound_pair(spec.collapse_bounds.lo.nu, spec.collapse_bounds.hi.nu);
  } else if (key == "collapse_eta") {
    bound_pair(spec.collapse_bounds.lo.eta, spec.collapse_bounds.hi.eta);
  } else if (key == "bootstrap") {
    spec.bootstrap = static_cast<int>(to_uint(value, key));
  } else if (key == "analysis_seed") {
    spec.analysis_seed = to_uint(value, key);
  } else if (key == "bulk_eta") {
    spec.bulk_eta = to_double(value, key);
  } else {
    throw ContractViolation("spec: unknown key '" + key + "'");
  }
}

/// Parses `key = value` lines (with `#` comments) on top of the defaults.
inline ExperimentSpec parse_spec(std::string_view text, ExperimentSpec spec = {}) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto body = config_detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ContractViolation("spec: line " + std::to_string(lineno) + ": expected key = value");
    }
    try {
      apply_setting(spec, config_detail::trim(body.substr(0, eq)), config_detail::trim(body.substr(eq + 1)));
    } catch (const ContractViolation &e) {
      throw ContractViolation(std::string(e.what()) + " (line " + std::to_string(lineno) + ")");
    }
  }
  return spec;
}

inline ExperimentSpec load_spec(const std::string &path) {
  std::ifstream f(path);
  if (!f) throw ContractViolation("spec: cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_spec(ss.str());
}

/// Canonical text form; parse_spec(spec_text(s)) reproduces s. Excludes the
/// output directory and worker count, which do not affect results.
inline std::string spec_text(const ExperimentSpec &s) {
  using config_detail::fmt;
  std::ostringstream o;
  auto list = [](const auto &v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(static_cast<double>(v[i]));
    return out;
  };
  o << "backend = " << s.backend << "\n";
  o << "L = " << list(s.Ls) << "\n";
  o << "p = " << list(s.ps) << "\n";
  o << "boundary = " << to_string(s.boundary) << "\n";
  o << "t_max = " << s.t_max.str() << "\n";
  o << "record_times = "
    << (s.record_mode == RecordMode::final ? "final" : s.record_mode == RecordMode::all ? "all" : list(s.record_list))
    << "\n";
  o << "n_samples = " << s.n_samples << "\n";
  o << "seed = " << s.seed << "\n";
  o << "positions = " << to_string(s.positions_mode) << "\n";
  o << "schedule = " << to_string(s.schedule) << "\n";
  o << "max_moment = " << s.max_moment << "\n";
  o << "surface = " << (s.surface ? "true" : "false") << "\n";
  std::string fits;
  for (std::size_t i = 0; i < s.fits.size(); ++i) fits += (i ? ", " : "") + s.fits[i];
  o << "fits = " << (fits.empty() ? "none" : fits) << "\n";
  o << "powerlaw_window = " << s.powerlaw_lo.str() << ":" << s.powerlaw_hi.str() << "\n";
  o << "dynamic_window = " << s.dynamic_lo.str() << ":" << s.dynamic_hi.str() << "\n";
  o << "collapse_init = " << fmt(s.collapse_init.pc) << ", " << fmt(s.collapse_init.nu) << ", "
    << fmt(s.collapse_init.eta) << "\n";
  o << "collapse_pc = " << fmt(s.collapse_bounds.lo.pc) << ":" << fmt(s.collapse_bounds.hi.pc) << "\n";
  o << "collapse_nu = " << fmt(s.collapse_bounds.lo.nu) << ":" << fmt(s.collapse_bounds.hi.nu) << "\n";
  o << "collapse_eta = " << fmt(s.collapse_bounds.lo.eta) << ":" << fmt(s.collapse_bounds.hi.eta) << "\n";
  o << "bootstrap = " << s.bootstrap << "\n";
  o << "analysis_seed = " << s.analysis_seed << "\n";
  if (std::isfinite(s.bulk_eta)) o << "bulk_eta = " << fmt(s.bulk_eta) << "\n";
  return o.str();
}

}  // namespace bpe
