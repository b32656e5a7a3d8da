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

// Trajectory farming, aggregation and file outputs for an ExperimentSpec.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "bpe/circuit.hpp"
#include "bpe/config.hpp"
#include "bpe/scaling.hpp"

namespace bpe {

inline constexpr const char *kVersion = "0.1.0";

/// Aggregated statistics of one sweep point (L, p).
struct PointResult {
  std::size_t L = 0;
  double p = 0;
  std::vector<int> times;
  std::vector<std::vector<RunningStats>> eae;      ///< [time][r - 1]
  std::vector<std::vector<RunningStats>> moments;  ///< [time][k]
  std::vector<std::vector<RunningStats>> perp;     ///< [time][r - 1], surface runs only
  std::vector<RunningStats> parallel;              ///< [time], surface runs only
  std::vector<double> final_rho;                   ///< per-trajectory ϱ at the last recorded time

  friend bool operator==(const PointResult &, const PointResult &) = default;
};

/// Worker count: the BPE_WORKERS environment variable overrides `configured`.
inline int effective_workers(int configured) {
  if (const char *env = std::getenv("BPE_WORKERS")) {
    char *end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  return std::max(1, configured);
}

/// Adds one trajectory to the running statistics.
inline void accumulate(PointResult &res, const TrajectoryRecord &rec) {
  if (res.times.empty()) {
    for (const auto &s : rec.slices) {
      res.times.push_back(s.t);
      res.eae.emplace_back(s.eae.size());
      res.moments.emplace_back(s.moments.size());
      res.perp.emplace_back(s.surface_perp.size());
      res.parallel.emplace_back();
    }
  }
  for (std::size_t i = 0; i < rec.slices.size(); ++i) {
    const auto &s = rec.slices[i];
    for (std::size_t r = 0; r < s.eae.size(); ++r) res.eae[i][r].add(s.eae[r]);
    for (std::size_t k = 0; k < s.moments.size(); ++k) res.moments[i][k].add(s.moments[k]);
    for (std::size_t r = 0; r < s.surface_perp.size(); ++r) res.perp[i][r].add(s.surface_perp[r]);
    if (!s.surface_perp.empty()) res.parallel[i].add(s.surface_parallel);
  }
  res.final_rho.push_back(rec.slices.back().moments.at(0));
}

/// Runs trajectories 0..n_samples-1 of one point. Trajectories are computed in
/// parallel batches and folded in index order, so the result is the same for
/// any worker count (and equal to a sequential fold).
inline PointResult run_point(const ExperimentSpec &spec, std::size_t L, double p, int workers) {
  const auto cfg = spec.circuit(L, p);
  cfg.validate();
  const bool haar = spec.backend == "haar";
  PointResult res;
  res.L = L;
  res.p = p;
  const std::uint64_t n = spec.n_samples;
  const std::uint64_t batch = static_cast<std::uint64_t>(workers) * 8;
  std::vector<TrajectoryRecord> recs;
  for (std::uint64_t start = 0; start < n; start += batch) {
    const std::uint64_t count = std::min(batch, n - start);
    recs.assign(count, {});
    std::atomic<std::uint64_t> next{0};
    auto work = [&] {
      for (std::uint64_t i; (i = next.fetch_add(1)) < count;) {
        recs[i] = haar ? run_trajectory_haar(cfg, start + i) : run_trajectory(cfg, start + i);
      }
    };
    if (workers == 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    for (const auto &r : recs) accumulate(res, r);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Serialization

namespace io {

inline std::string num(double v) { return config_detail::fmt(v); }

inline std::string sha256_hex(const std::string &data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream o;
  for (unsigned i = 0; i < len; ++i) o << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return o.str();
}

inline std::string read_file(const std::filesystem::path &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ContractViolation("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path &path, const std::string &data) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ContractViolation("cannot write " + tmp);
    f << data;
  }
  std::filesystem::rename(tmp, path);
}

inline nlohmann::json stats_json(const std::vector<RunningStats> &v) {
  auto a = nlohmann::json::array();
  for (const auto &s : v) a.push_back({s.count, s.sum, s.sum_sq});
  return a;
}

inline std::vector<RunningStats> stats_from(const nlohmann::json &a) {
  std::vector<RunningStats> v;
  for (const auto &e : a) v.push_back({e[0].get<std::uint64_t>(), e[1].get<double>(), e[2].get<double>()});
  return v;
}

inline nlohmann::json point_json(const PointResult &r) {
  nlohmann::json j;
  j["L"] = r.L;
  j["p"] = r.p;
  j["times"] = r.times;
  for (const auto *name : {"eae", "moments", "perp"}) j[name] = nlohmann::json::array();
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    j["eae"].push_back(stats_json(r.eae[i]));
    j["moments"].push_back(stats_json(r.moments[i]));
    j["perp"].push_back(stats_json(r.perp[i]));
  }
  j["parallel"] = stats_json(r.parallel);
  j["final_rho"] = r.final_rho;
  return j;
}

inline PointResult point_from(const nlohmann::json &j) {
  PointResult r;
  r.L = j["L"].get<std::size_t>();
  r.p = j["p"].get<double>();
  r.times = j["times"].get<std::vector<int>>();
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    r.eae.push_back(stats_from(j["eae"][i]));
    r.moments.push_back(stats_from(j["moments"][i]));
    r.perp.push_back(stats_from(j["perp"][i]));
  }
  r.parallel = stats_from(j["parallel"]);
  r.final_rho = j["final_rho"].get<std::vector<double>>();
  return r;
}

inline nlohmann::json fit_json(const ScalingFit &f) {
  auto finite = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["kind"] = f.kind;
  j["values"] = nlohmann::json::object();
  for (const auto &[k, v] : f.values) j["values"][k] = finite(v);
  j["errors"] = nlohmann::json::object();
  for (const auto &[k, v] : f.errors) j["errors"][k] = finite(v);
  j["objective"] = finite(f.objective);
  j["window"] = {{"variable", f.window_variable}, {"lo", finite(f.window.lo)}, {"hi", finite(f.window.hi)}};
  j["n_points"] = f.n_points;
  j["flags"] = f.flags;
  return j;
}

/// Minimal CSV table: header names plus string cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ContractViolation("csv: missing column '" + std::string(name) + "'");
  }
  bool has(std::string_view name) const { return std::find(header.begin(), header.end(), name) != header.end(); }
  double number(std::size_t row, std::string_view name) const {
    return config_detail::to_double(rows[row][col(name)], std::string(name));
  }
};

inline Table parse_csv(const std::string &text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (config_detail::trim(line).empty() || line[0] == '#') continue;
    auto cells = config_detail::split(line, ',');
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else {
      detail::require(cells.size() == t.header.size(), "csv: row width differs from the header");
      t.rows.push_back(std::move(cells));
    }
  }
  detail::require(!t.header.empty(), "csv: empty file");
  return t;
}

}  // namespace io

// ---------------------------------------------------------------------------
// Tables

inline std::string profiles_csv(const ExperimentSpec &spec, const std::vector<PointResult> &points) {
  std::ostringstream o;
  o << "backend,L,p,boundary,t,r,eae_mean,eae_stderr,n_samples\n";
  for (const auto &pr : points)
    for (std::size_t i = 0; i < pr.times.size(); ++i)
      for (std::size_t r = 0; r < pr.eae[i].size(); ++r) {
        const auto &s = pr.eae[i][r];
        o << spec.backend << ',' << pr.L << ',' << io::num(pr.p) << ',' << to_string(spec.boundary) << ','
          << pr.times[i] << ',' << r + 1 << ',' << io::num(s.mean()) << ',' << io::num(s.stderr_of_mean()) << ','
          << s.count << '\n';
      }
  return o.str();
}

inline std::string moments_csv(const ExperimentSpec &spec, const std::vector<PointResult> &points) {
  std::ostringstream o;
  o << "backend,L,p,t,k,value,stderr,n_samples\n";
  for (const auto &pr : points)
    for (std::size_t i = 0; i < pr.times.size(); ++i)
      for (std::size_t k = 0; k < pr.moments[i].size(); ++k) {
        const auto &s = pr.moments[i][k];
        o << spec.backend << ',' << pr.L << ',' << io::num(pr.p) << ',' << pr.times[i] << ',' << k << ','
          << io::num(s.mean()) << ',' << io::num(s.stderr_of_mean()) << ',' << s.count << '\n';
      }
  return o.str();
}

inline std::string surface_csv(const ExperimentSpec &spec, const std::vector<PointResult> &points) {
  std::ostringstream o;
  o << "backend,L,p,t,kind,r,eae_mean,eae_stderr,n_samples\n";
  for (const auto &pr : points)
    for (std::size_t i = 0; i < pr.times.size(); ++i) {
      auto row = [&](const char *kind, std::size_t r, const RunningStats &s) {
        o << spec.backend << ',' << pr.L << ',' << io::num(pr.p) << ',' << pr.times[i] << ',' << kind << ',' << r
          << ',' << io::num(s.mean()) << ',' << io::num(s.stderr_of_mean()) << ',' << s.count << '\n';
      };
      for (std::size_t r = 0; r < pr.perp[i].size(); ++r) row("perp", r + 1, pr.perp[i][r]);
      row("parallel", pr.L - 1, pr.parallel[i]);
    }
  return o.str();
}

inline std::string trajectories_csv(const ExperimentSpec &spec, const std::vector<PointResult> &points) {
  std::ostringstream o;
  o << "backend,L,p,t,traj,rho\n";
  for (const auto &pr : points)
    for (std::size_t j = 0; j < pr.final_rho.size(); ++j) {
      o << spec.backend << ',' << pr.L << ',' << io::num(pr.p) << ',' << pr.times.back() << ',' << j << ','
        << io::num(pr.final_rho[j]) << '\n';
    }
  return o.str();
}

// ---------------------------------------------------------------------------
// Fits on aggregated results

namespace detail {

inline std::vector<double> means(const std::vector<RunningStats> &v) {
  std::vector<double> out;
  for (const auto &s : v) out.push_back(s.mean());
  return out;
}

inline std::vector<double> stderrs(const std::vector<RunningStats> &v) {
  std::vector<double> out;
  for (const auto &s : v) out.push_back(s.stderr_of_mean());
  return out;
}

inline std::vector<double> iota_from(std::size_t n, double first) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = first + static_cast<double>(i);
  return out;
}

/// Runs `f`, storing either its report or the error message.
inline nlohmann::json guarded(const std::function<nlohmann::json()> &f) {
  try {
    return f();
  } catch (const ContractViolation &e) {
    return {{"error", e.what()}};
  } catch (const DiagnosticError &e) {
    return {{"error", e.what()}};
  }
}

}  // namespace detail

inline nlohmann::json run_fits(const ExperimentSpec &spec, const std::vector<PointResult> &points) {
  nlohmann::json out = nlohmann::json::object();
  const BootstrapOptions boot{spec.bootstrap, spec.analysis_seed};
  for (const auto &name : spec.fits) {
    if (name == "powerlaw") {
      auto arr = nlohmann::json::array();
      for (const auto &pr : points) {
        auto rep = detail::guarded([&] {
          const auto ys = detail::means(pr.eae.back());
          const auto xs = detail::iota_from(ys.size(), 1);
          return io::fit_json(
              fit_power_law(xs, ys, {spec.powerlaw_lo.value(pr.L), spec.powerlaw_hi.value(pr.L)}, boot));
        });
        rep["L"] = pr.L;
        rep["p"] = pr.p;
        rep["t"] = pr.times.back();
        arr.push_back(rep);
      }
      out["powerlaw"] = arr;
    } else if (name == "collapse") {
      out["collapse"] = detail::guarded([&] {
        std::map<std::size_t, CollapseSamples> by_L;
        for (const auto &pr : points) {
          auto &s = by_L[pr.L];
          s.L = pr.L;
          s.p.push_back(pr.p);
          s.samples.push_back(pr.final_rho);
        }
        std::vector<CollapseSamples> samples;
        for (auto &[L, s] : by_L) samples.push_back(s);
        CollapseOptions opt;
        opt.bootstrap = boot;
        return io::fit_json(
            fit_collapse(std::span<const CollapseSamples>(samples), spec.collapse_init, spec.collapse_bounds, opt));
      });
    } else if (name == "dynamic") {
      auto arr = nlohmann::json::array();
      for (const auto &pr : points) {
        auto rep = detail::guarded([&] {
          std::vector<MomentSeries> series;
          for (std::size_t k = 0; k < pr.moments.front().size(); ++k) {
            MomentSeries s;
            s.k = static_cast<int>(k);
            for (std::size_t i = 0; i < pr.times.size(); ++i) {
              s.t.push_back(pr.times[i]);
              s.value.push_back(pr.moments[i][k].mean());
            }
            series.push_back(std::move(s));
          }
          return io::fit_json(
              fit_dynamic_exponents(series, {spec.dynamic_lo.value(pr.L), spec.dynamic_hi.value(pr.L)}));
        });
        rep["L"] = pr.L;
        rep["p"] = pr.p;
        arr.push_back(rep);
      }
      out["dynamic"] = arr;
    } else if (name == "surface") {
      auto arr = nlohmann::json::array();
      for (double p : spec.ps) {
        auto rep = detail::guarded([&] {
          detail::require(spec.surface, "surface fit: the run did not record surface observables");
          std::vector<double> Ls, par;
          const PointResult *largest = nullptr;
          for (const auto &pr : points) {
            if (pr.p != p) continue;
            Ls.push_back(static_cast<double>(pr.L));
            par.push_back(pr.parallel.back().mean());
            if (!largest || pr.L > largest->L) largest = &pr;
          }
          detail::require(largest != nullptr, "surface fit: no data");
          const auto perp = detail::means(largest->perp.back());
          const auto rs = detail::iota_from(perp.size(), 1);
          return io::fit_json(surface_exponents(
              rs, perp, {spec.powerlaw_lo.value(largest->L), spec.powerlaw_hi.value(largest->L)}, Ls, par,
              spec.bulk_eta, boot));
        });
        rep["p"] = p;
        arr.push_back(rep);
      }
      out["surface"] = arr;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Driver

struct RunOptions {
  bool resume = false;
  int workers = 0;  ///< 0: take the spec's value (subject to BPE_WORKERS)
  std::function<void(const PointResult &, double seconds)> on_point;
};

struct RunSummary {
  std::vector<PointResult> points;
  std::vector<std::string> files;
  nlohmann::json fits;
  std::size_t resumed_points = 0;
};

namespace detail {

inline std::string point_file(std::size_t L, double p) { return "points/L" + std::to_string(L) + "_p" + io::num(p) + ".json"; }

inline void write_manifest(const std::filesystem::path &dir, const ExperimentSpec &spec,
                           const std::vector<std::pair<std::size_t, double>> &done, const std::vector<std::string> &files,
                           bool complete) {
  nlohmann::json m;
  m["tool"] = "bpe";
  m["version"] = kVersion;
  m["status"] = complete ? "complete" : "partial";
  m["seed"] = spec.seed;
  m["spec"] = spec_text(spec);
  m["completed_points"] = nlohmann::json::array();
  for (const auto &[L, p] : done) m["completed_points"].push_back({{"L", L}, {"p", p}});
  m["files"] = nlohmann::json::array();
  for (const auto &f : files) m["files"].push_back({{"name", f}, {"sha256", io::sha256_hex(io::read_file(dir / f))}});
  io::write_file(dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace detail

/// Simulates every (L, p) of the sweep and writes, under spec.output:
/// profiles.csv, moments.csv, trajectories.csv, surface.csv (surface runs),
/// fits.json (when fits are requested), points/*.json (per-point statistics used
/// for resuming), manifest.json (spec echo and SHA-256 of every file above) and
/// timing.json (wall times; the only file that varies between reruns).
inline RunSummary run_experiment(const ExperimentSpec &spec, const RunOptions &opt = {}) {
  spec.validate();
  namespace fs = std::filesystem;
  const fs::path dir = spec.output;
  fs::create_directories(dir / "points");
  const int workers = effective_workers(opt.workers > 0 ? opt.workers : spec.workers);

  std::map<std::string, bool> resumable;
  if (opt.resume && fs::exists(dir / "manifest.json")) {
    const auto m = nlohmann::json::parse(io::read_file(dir / "manifest.json"));
    detail::require(m.value("spec", "") == spec_text(spec),
                    "resume: the manifest in " + dir.string() + " was written for a different spec");
    for (const auto &f : m["files"]) {
      const auto name = f["name"].get<std::string>();
      if (name.rfind("points/", 0) == 0 && fs::exists(dir / name) &&
          io::sha256_hex(io::read_file(dir / name)) == f["sha256"].get<std::string>()) {
        resumable[name] = true;
      }
    }
  }

  RunSummary sum;
  std::vector<std::pair<std::size_t, double>> done;
  std::vector<std::string> point_files;
  nlohmann::json timing;
  const auto t_start = std::chrono::steady_clock::now();
  for (auto L : spec.Ls)
    for (double p : spec.ps) {
      const auto name = detail::point_file(L, p);
      const auto t0 = std::chrono::steady_clock::now();
      PointResult pr;
      if (resumable.count(name)) {
        pr = io::point_from(nlohmann::json::parse(io::read_file(dir / name)));
        ++sum.resumed_points;
      } else {
        pr = run_point(spec, L, p, workers);
        io::write_file(dir / name, io::point_json(pr).dump() + "\n");
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      timing["points"].push_back({{"L", L}, {"p", p}, {"seconds", secs}});
      done.emplace_back(L, p);
      point_files.push_back(name);
      detail::write_manifest(dir, spec, done, point_files, false);
      if (opt.on_point) opt.on_point(pr, secs);
      sum.points.push_back(std::move(pr));
    }

  std::vector<std::string> files = {"profiles.csv", "moments.csv", "trajectories.csv"};
  io::write_file(dir / "profiles.csv", profiles_csv(spec, sum.points));
  io::write_file(dir / "moments.csv", moments_csv(spec, sum.points));
  io::write_file(dir / "trajectories.csv", trajectories_csv(spec, sum.points));
  if (spec.surface) {
    io::write_file(dir / "surface.csv", surface_csv(spec, sum.points));
    files.push_back("surface.csv");
  }
  if (!spec.fits.empty()) {
    sum.fits = run_fits(spec, sum.points);
    io::write_file(dir / "fits.json", sum.fits.dump(2) + "\n");
    files.push_back("fits.json");
  }
  files.insert(files.end(), point_files.begin(), point_files.end());
  detail::write_manifest(dir, spec, done, files, true);
  timing["total_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  timing["workers"] = workers;
  io::write_file(dir / "timing.json", timing.dump(2) + "\n");
  sum.files = files;
  sum.files.push_back("manifest.json");
  return sum;
}

}  // namespace bpe
