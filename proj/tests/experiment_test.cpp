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

#include <cstdlib>
#include <filesystem>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include "bpe/experiment.hpp"

namespace {

using namespace bpe;
namespace fs = std::filesystem;

fs::path scratch(const std::string &name) {
  const auto dir = fs::temp_directory_path() / ("bpe_experiment_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  return dir;
}

ExperimentSpec small_spec(const fs::path &out) {
  auto spec = parse_spec(
      "L = 8, 10\n"
      "p = 0.1, 0.5\n"
      "t_max = L\n"
      "record_times = 0:12:3\n"
      "n_samples = 21\n"
      "seed = 5\n");
  spec.output = out.string();
  return spec;
}

std::map<std::string, std::string> snapshot(const fs::path &dir) {
  std::map<std::string, std::string> out;
  for (const auto &e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == "timing.json") continue;
    out[fs::relative(e.path(), dir).string()] = io::read_file(e.path());
  }
  return out;
}

TEST(Config, ParsesKeysListsAndComments) {
  const auto spec = parse_spec(
      "# sweep\n"
      "backend = haar\n"
      "L = 8, 10 ,12\n"
      "p = 0.08:0.24:0.04   # range\n"
      "boundary = open\n"
      "t_max = 2L\n"
      "record_times = all\n"
      "n_samples = 300\n"
      "positions = translation_average\n"
      "fits = powerlaw, collapse\n"
      "powerlaw_window = 2:L/4\n"
      "collapse_pc = 0.1:0.2\n");
  EXPECT_EQ(spec.backend, "haar");
  EXPECT_EQ(spec.Ls, (std::vector<std::size_t>{8, 10, 12}));
  ASSERT_EQ(spec.ps.size(), 5u);
  EXPECT_DOUBLE_EQ(spec.ps[0], 0.08);
  EXPECT_DOUBLE_EQ(spec.ps[4], 0.24);
  EXPECT_EQ(spec.boundary, Boundary::open);
  EXPECT_EQ(spec.t_max_for(12), 24);
  EXPECT_EQ(spec.record_times_for(4).size(), 9u);
  EXPECT_EQ(spec.n_samples, 300u);
  EXPECT_EQ(spec.positions_mode, PositionsMode::translation_average);
  EXPECT_EQ(spec.fits, (std::vector<std::string>{"powerlaw", "collapse"}));
  EXPECT_DOUBLE_EQ(spec.powerlaw_hi.value(64), 16.0);
  EXPECT_DOUBLE_EQ(spec.collapse_bounds.hi.pc, 0.2);
}

TEST(Config, CanonicalTextRoundTrips) {
  auto spec = small_spec("unused");
  spec.fits = {"dynamic"};
  spec.bulk_eta = 0.71;
  const auto text = spec_text(spec);
  EXPECT_EQ(spec_text(parse_spec(text)), text);
}

TEST(Config, ErrorsNameTheFieldAndLine) {
  try {
    parse_spec("L = 8\nnonsense = 3\n");
    FAIL();
  } catch (const ContractViolation &e) {
    EXPECT_NE(std::string(e.what()).find("nonsense"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse_spec("p = 0.1, x\n"), ContractViolation);
  EXPECT_THROW(parse_spec("L = 8\n no equals sign\n"), ContractViolation);
  try {
    parse_spec("n_samples = 0\n").validate();
    FAIL();
  } catch (const ContractViolation &e) {
    EXPECT_NE(std::string(e.what()).find("spec.n_samples"), std::string::npos);
  }
  EXPECT_THROW(parse_spec("L = 7\n").validate(), ContractViolation);
  EXPECT_THROW(parse_spec("p = 1.5\n").validate(), ContractViolation);
  EXPECT_THROW(parse_spec("fits = magic\n").validate(), ContractViolation);
  EXPECT_THROW(parse_spec("backend = haar\nL = 18\n").validate(), CapacityError);
  EXPECT_THROW(parse_spec("L = 4098\n").validate(), CapacityError);
  EXPECT_NO_THROW(parse_spec("backend = haar\nL = 16\nt_max = 1\n").validate());
}

TEST(Config, WorkerOverrideFromEnvironment) {
  ::unsetenv("BPE_WORKERS");
  EXPECT_EQ(effective_workers(3), 3);
  ::setenv("BPE_WORKERS", "5", 1);
  EXPECT_EQ(effective_workers(3), 5);
  ::setenv("BPE_WORKERS", "junk", 1);
  EXPECT_EQ(effective_workers(3), 3);
  ::unsetenv("BPE_WORKERS");
}

TEST(Io, Sha256KnownVectors) {
  EXPECT_EQ(io::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Io, CsvParsing) {
  const auto t = io::parse_csv("# comment\nx,y\n1,2.5\n\n3,4\n");
  EXPECT_EQ(t.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(t.number(1, "y"), 4.0);
  EXPECT_THROW(t.col("z"), ContractViolation);
  EXPECT_THROW(io::parse_csv("x,y\n1\n"), ContractViolation);
}

TEST(Experiment, RowCountsAndSampleCounts) {
  const auto dir = scratch("rows");
  auto spec = parse_spec("L = 8\np = 0.5\nn_samples = 2\nrecord_times = 0:16:4\n");
  spec.output = dir.string();
  run_experiment(spec);
  const auto prof = io::parse_csv(io::read_file(dir / "profiles.csv"));
  EXPECT_EQ(prof.header, (std::vector<std::string>{"backend", "L", "p", "boundary", "t", "r", "eae_mean",
                                                   "eae_stderr", "n_samples"}));
  EXPECT_EQ(prof.rows.size(), 5u * 7u);
  for (std::size_t i = 0; i < prof.rows.size(); ++i) EXPECT_EQ(prof.number(i, "n_samples"), 2.0);
  const auto mom = io::parse_csv(io::read_file(dir / "moments.csv"));
  EXPECT_EQ(mom.header,
            (std::vector<std::string>{"backend", "L", "p", "t", "k", "value", "stderr", "n_samples"}));
  EXPECT_EQ(mom.rows.size(), 5u * 4u);
  const auto traj = io::parse_csv(io::read_file(dir / "trajectories.csv"));
  EXPECT_EQ(traj.rows.size(), 2u);
  EXPECT_FALSE(fs::exists(dir / "surface.csv"));
}

TEST(Experiment, MergeEqualsSequentialReference) {
  const auto spec = small_spec("unused");
  const auto cfg = spec.circuit(10, 0.1);
  PointResult ref;
  ref.L = 10;
  ref.p = 0.1;
  for (std::uint64_t i = 0; i < spec.n_samples; ++i) accumulate(ref, run_trajectory(cfg, i));
  for (int w : {1, 3, 8}) EXPECT_EQ(run_point(spec, 10, 0.1, w), ref) << w;

  // Means and standard errors against a direct two-pass computation.
  std::vector<double> vals;
  for (std::uint64_t i = 0; i < spec.n_samples; ++i) vals.push_back(run_trajectory(cfg, i).slices.back().eae[2]);
  double mean = 0;
  for (double v : vals) mean += v / static_cast<double>(vals.size());
  double var = 0;
  for (double v : vals) var += (v - mean) * (v - mean) / static_cast<double>(vals.size() - 1);
  EXPECT_NEAR(ref.eae.back()[2].mean(), mean, 1e-14);
  EXPECT_NEAR(ref.eae.back()[2].stderr_of_mean(), std::sqrt(var / static_cast<double>(vals.size())), 1e-12);
}

TEST(Experiment, OutputBytesIndependentOfWorkerCount) {
  const auto w1 = scratch("w1");
  auto spec = small_spec(w1);
  spec.fits = {"powerlaw", "dynamic"};
  spec.bootstrap = 10;
  RunOptions one;
  one.workers = 1;
  run_experiment(spec, one);
  spec.output = scratch("w8").string();
  RunOptions eight;
  eight.workers = 8;
  run_experiment(spec, eight);
  const auto a = snapshot(w1), b = snapshot(spec.output);
  EXPECT_EQ(a.size(), b.size());
  EXPECT_TRUE(a == b);
  // Reruns are byte-identical as well.
  run_experiment(spec, eight);
  EXPECT_TRUE(snapshot(spec.output) == b);
}

TEST(Experiment, ManifestListsEveryFileWithItsHash) {
  const auto dir = scratch("manifest");
  auto spec = small_spec(dir);
  spec.surface = true;
  spec.boundary = Boundary::open;
  spec.fits = {"surface"};
  spec.bootstrap = 5;
  const auto sum = run_experiment(spec);
  const auto m = nlohmann::json::parse(io::read_file(dir / "manifest.json"));
  EXPECT_EQ(m["status"], "complete");
  EXPECT_EQ(m["spec"], spec_text(spec));
  EXPECT_EQ(m["seed"], 5);
  EXPECT_EQ(m["version"], kVersion);
  std::set<std::string> listed;
  for (const auto &f : m["files"]) {
    listed.insert(f["name"].get<std::string>());
    EXPECT_EQ(io::sha256_hex(io::read_file(dir / f["name"].get<std::string>())), f["sha256"]);
  }
  for (const auto &[name, body] : snapshot(dir)) {
    if (name != "manifest.json") EXPECT_TRUE(listed.count(name)) << name;
  }
  EXPECT_TRUE(listed.count("surface.csv"));
  EXPECT_TRUE(fs::exists(dir / "timing.json"));
  const auto surf = io::parse_csv(io::read_file(dir / "surface.csv"));
  EXPECT_EQ(surf.header,
            (std::vector<std::string>{"backend", "L", "p", "t", "kind", "r", "eae_mean", "eae_stderr", "n_samples"}));
}

TEST(Experiment, InterruptedRunResumes) {
  const auto fresh = scratch("fresh"), resumed = scratch("resumed");
  auto spec = small_spec(fresh);
  run_experiment(spec);

  spec.output = resumed.string();
  RunOptions crash;
  int seen = 0;
  crash.on_point = [&](const PointResult &, double) {
    if (++seen == 3) throw std::runtime_error("interrupted");
  };
  EXPECT_THROW(run_experiment(spec, crash), std::runtime_error);
  const auto m = nlohmann::json::parse(io::read_file(resumed / "manifest.json"));
  EXPECT_EQ(m["status"], "partial");
  EXPECT_EQ(m["completed_points"].size(), 3u);

  RunOptions resume;
  resume.resume = true;
  const auto sum = run_experiment(spec, resume);
  EXPECT_EQ(sum.resumed_points, 3u);
  EXPECT_TRUE(snapshot(fresh) == snapshot(resumed));

  // A different spec must not reuse these points.
  auto other = spec;
  other.seed = 6;
  EXPECT_THROW(run_experiment(other, resume), ContractViolation);
}

TEST(Experiment, HaarBackend) {
  const auto dir = scratch("haar");
  auto spec = parse_spec("backend = haar\nL = 6\np = 0.2\nn_samples = 3\nt_max = 4\n");
  spec.output = dir.string();
  const auto sum = run_experiment(spec);
  ASSERT_EQ(sum.points.size(), 1u);
  EXPECT_EQ(sum.points[0].eae.back().size(), 5u);
  EXPECT_EQ(sum.points[0].eae.back()[0].count, 3u);
}

// ---------------------------------------------------------------------------
// Command-line driver

int cli(const std::string &args) {
  const std::string cmd = std::string(BPE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  EXPECT_EQ(cli("--help"), 0);
  EXPECT_EQ(cli(""), 1);
  EXPECT_EQ(cli("frobnicate"), 1);
  EXPECT_EQ(cli("run --no-such-flag"), 1);
  EXPECT_EQ(cli("run -q -s bogus=1 -o " + dir.string()), 2);
  EXPECT_EQ(cli("run -q -s L=7 -o " + dir.string()), 2);
  EXPECT_EQ(cli("run -q -s backend=haar -s L=20 -o " + dir.string()), 3);
  EXPECT_EQ(cli("run -q -s L=8 -s n_samples=2 -o " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  EXPECT_EQ(cli("validate --circuits 40 --states 10 --streams 4"), 0);
}

TEST(Cli, FitPowerlawOnFixture) {
  const auto out = scratch("fixture");
  fs::create_directories(out);
  ASSERT_EQ(cli(std::string("fit-powerlaw -i ") + BPE_FIXTURE_DIR + "/powerlaw_071.csv -o " +
                (out / "fit.json").string()),
            0);
  const auto j = nlohmann::json::parse(io::read_file(out / "fit.json"));
  EXPECT_NEAR(j["values"]["exponent"].get<double>(), 0.71, 1e-10);
}

TEST(Cli, FitCommandsReadRunOutputs) {
  const auto dir = scratch("fits");
  ASSERT_EQ(cli("dynamics -q -s L=32,48 -s p=0.16 -s n_samples=8 -s t_max=L/4 -s bootstrap=5 -o " + dir.string()), 0);
  EXPECT_EQ(cli("fit-dynamic -i " + dir.string() + " -o " + (dir / "dyn.json").string()), 0);
  const auto dyn = nlohmann::json::parse(io::read_file(dir / "dyn.json"));
  ASSERT_EQ(dyn.size(), 2u);
  EXPECT_TRUE(dyn[0]["values"].contains("theta"));
  // Collapse needs three sizes; two give a validation failure.
  EXPECT_EQ(cli("fit-collapse -i " + dir.string() + " --bootstrap 5"), 2);
}

TEST(Cli, FitPowerlawOnProfileTable) {
  const auto dir = scratch("profile_table");
  fs::create_directories(dir);
  std::string csv = "backend,L,p,boundary,t,r,eae_mean,eae_stderr,n_samples\n";
  for (int L : {32, 64})
    for (int t : {10, 20})
      for (int r = 1; r < L; ++r) {
        const double y = (t == 20 ? 0.3 : 0.1) * std::pow(r, L == 32 ? -0.5 : -0.9);
        csv += "clifford," + std::to_string(L) + ",0.16,periodic," + std::to_string(t) + "," + std::to_string(r) +
               "," + io::num(y) + ",0,1\n";
      }
  io::write_file(dir / "profiles.csv", csv);
  ASSERT_EQ(cli("fit-powerlaw --bootstrap 0 -i " + (dir / "profiles.csv").string() + " -o " +
                (dir / "fit.json").string()),
            0);
  const auto j = nlohmann::json::parse(io::read_file(dir / "fit.json"));
  ASSERT_EQ(j.size(), 2u);
  EXPECT_NEAR(j[0]["values"]["exponent"].get<double>(), 0.5, 1e-10);
  EXPECT_NEAR(j[0]["values"]["amplitude"].get<double>(), 0.3, 1e-10);  // last recorded time
  EXPECT_EQ(j[0]["window"]["hi"].get<double>(), 8.0);                  // default 2:L/4
  EXPECT_NEAR(j[1]["values"]["exponent"].get<double>(), 0.9, 1e-10);
}

}  // namespace
