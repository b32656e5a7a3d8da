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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "bpe/circuit_config.hpp"
#include "bpe/clifford2.hpp"
#include "bpe/ensemble.hpp"
#include "bpe/statevector.hpp"
#include "bpe/tableau.hpp"

namespace bpe {

inline constexpr std::size_t kMaxCliffordQubits = 4096;
inline constexpr std::size_t kMaxHaarQubits = 16;

/// Observables recorded at one time.
struct TimeSlice {
  int t = 0;
  std::vector<double> eae;      ///< Ē(r), entry i holds r = i + 1
  std::vector<double> moments;  ///< ϱ^(k) for k = 0 .. max_moment
  std::vector<double> surface_perp;
  double surface_parallel = 0.0;

  friend bool operator==(const TimeSlice &, const TimeSlice &) = default;
};

struct TrajectoryRecord {
  std::uint64_t traj_index = 0;
  std::uint64_t circuit_key = 0;
  std::uint64_t observable_key = 0;
  std::vector<TimeSlice> slices;

  friend bool operator==(const TrajectoryRecord &, const TrajectoryRecord &) = default;
};

/// Optional hooks that see every random choice a step makes.
struct StepObserver {
  std::function<void(const CliffordGate2 &, std::size_t, std::size_t)> on_gate;
  std::function<void(std::size_t, int)> on_measure;
};

/// Counts of what a layer did, for rate checks.
struct StepStats {
  std::uint64_t gates = 0;
  std::uint64_t measurements = 0;
};

/// One gate layer of the brickwork plus its measurement round. A full time step
/// is step(even) followed by step(odd).
inline StepStats step(Tableau &state, const CircuitConfig &cfg, Parity parity, RandomStream &rng,
                      const StepObserver *observer = nullptr) {
  StepStats stats;
  for_each_brick(cfg.L, cfg.boundary, parity, [&](std::size_t j, std::size_t k) {
    const auto g = sample_clifford2(rng);
    state.apply(g, j, k);
    ++stats.gates;
    if (observer && observer->on_gate) observer->on_gate(g, j, k);
  });
  if (!measures_after(cfg, parity)) return stats;
  for (std::size_t q = 0; q < cfg.L; ++q) {
    if (bernoulli(rng, cfg.p)) {
      const int outcome = state.measure_z(q, rng);
      ++stats.measurements;
      if (observer && observer->on_measure) observer->on_measure(q, outcome);
    }
  }
  return stats;
}

/// Haar-circuit layer with the same layout and measurement placement.
inline StepStats step(Statevector &state, const CircuitConfig &cfg, Parity parity, RandomStream &rng) {
  StepStats stats;
  for_each_brick(cfg.L, cfg.boundary, parity, [&](std::size_t j, std::size_t k) {
    apply_unitary2(state, sample_haar_unitary4(rng), j, k);
    ++stats.gates;
  });
  if (!measures_after(cfg, parity)) return stats;
  for (std::size_t q = 0; q < cfg.L; ++q) {
    if (bernoulli(rng, cfg.p)) {
      measure_z_statevector(state, q, rng);
      ++stats.measurements;
    }
  }
  return stats;
}

namespace detail {

inline TimeSlice make_slice(int t, std::vector<double> eae, const CircuitConfig &cfg) {
  TimeSlice s;
  s.t = t;
  for (int k = 0; k <= cfg.max_moment; ++k) s.moments.push_back(moment_eae(eae, cfg.L, k, cfg.boundary));
  s.eae = std::move(eae);
  return s;
}

template <class State, class Observe>
TrajectoryRecord run_brickwork(State state, const CircuitConfig &cfg, std::string_view backend,
                               std::uint64_t traj_index, Observe &&observe) {
  TrajectoryRecord rec;
  rec.traj_index = traj_index;
  rec.circuit_key = trajectory_key(cfg.seed, backend, cfg.L, cfg.p, traj_index, 0);
  rec.observable_key = trajectory_key(cfg.seed, backend, cfg.L, cfg.p, traj_index, 1);
  RandomStream rng = make_stream(rec.circuit_key);
  RandomStream obs_rng = make_stream(rec.observable_key);
  auto next = cfg.record_times.begin();
  for (int t = 0; t <= cfg.t_max && next != cfg.record_times.end(); ++t) {
    if (t > 0) {
      step(state, cfg, Parity::even, rng);
      step(state, cfg, Parity::odd, rng);
    }
    if (*next == t) {
      rec.slices.push_back(observe(state, t, obs_rng));
      ++next;
    }
  }
  return rec;
}

}  // namespace detail

/// Runs one Clifford trajectory from |0...0>. Deterministic in (cfg, traj_index);
/// observables are evaluated on scratch copies, leaving the trajectory untouched.
inline TrajectoryRecord run_trajectory(const CircuitConfig &cfg, std::uint64_t traj_index) {
  cfg.validate();
  if (cfg.L > kMaxCliffordQubits) throw CapacityError("run_trajectory: L exceeds the Clifford backend limit");
  return detail::run_brickwork(new_zero_state(cfg.L), cfg, "clifford", traj_index,
                               [&](const Tableau &state, int t, RandomStream &obs_rng) {
                                 auto slice =
                                     detail::make_slice(t, eae_values(state, cfg.boundary, cfg.positions_mode), cfg);
                                 if (cfg.surface) {
                                   auto s = surface_profiles(state, cfg.boundary, obs_rng);
                                   slice.surface_perp = std::move(s.perp);
                                   slice.surface_parallel = s.parallel;
                                 }
                                 return slice;
                               });
}

/// Haar-random brickwork with exact outcome enumeration for every EAE.
inline TrajectoryRecord run_trajectory_haar(const CircuitConfig &cfg, std::uint64_t traj_index) {
  cfg.validate();
  if (cfg.L > kMaxHaarQubits) throw CapacityError("run_trajectory_haar: L exceeds the dense backend limit of 16");
  return detail::run_brickwork(Statevector(cfg.L), cfg, "haar", traj_index,
                               [&](const Statevector &state, int t, RandomStream &) {
                                 auto slice =
                                     detail::make_slice(t, eae_values(state, cfg.boundary, cfg.positions_mode), cfg);
                                 if (cfg.surface) {
                                   auto s = surface_profiles(state, cfg.boundary);
                                   slice.surface_perp = std::move(s.perp);
                                   slice.surface_parallel = s.parallel;
                                 }
                                 return slice;
                               });
}

}  // namespace bpe
