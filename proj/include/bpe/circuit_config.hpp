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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bpe/errors.hpp"
#include "bpe/rng.hpp"

namespace bpe {

enum class Boundary { periodic, open };

/// Where the A site sits when building a separation profile.
enum class PositionsMode {
  /// PBC: A = site 0. OBC: A and B placed symmetrically about the chain center.
  fixed_origin,
  /// Average over every admissible position of A.
  translation_average,
};

/// When the probabilistic Z measurements happen.
enum class MeasurementSchedule {
  every_layer,  ///< after each of the two gate layers of a time step
  every_step,   ///< only after the second (odd) layer
};

enum class Parity { even, odd };

inline std::string_view to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "open"; }
inline std::string_view to_string(PositionsMode m) {
  return m == PositionsMode::fixed_origin ? "fixed_origin" : "translation_average";
}
inline std::string_view to_string(MeasurementSchedule m) {
  return m == MeasurementSchedule::every_layer ? "every_layer" : "every_step";
}

struct CircuitConfig {
  std::size_t L = 8;
  double p = 0.0;
  Boundary boundary = Boundary::periodic;
  int t_max = 16;
  /// Integer times in [0, t_max] at which observables are recorded (sorted, unique).
  std::vector<int> record_times = {16};
  std::uint64_t seed = 1;
  PositionsMode positions_mode = PositionsMode::fixed_origin;
  MeasurementSchedule schedule = MeasurementSchedule::every_layer;
  /// Highest moment order k recorded per time.
  int max_moment = 3;
  /// Also record edge observables (OBC only).
  bool surface = false;

  /// Throws ContractViolation naming the first offending field.
  void validate() const {
    detail::require(L >= 2 && L % 2 == 0, "CircuitConfig.L: must be even and >= 2");
    detail::require(p >= 0.0 && p <= 1.0, "CircuitConfig.p: must lie in [0, 1]");
    detail::require(t_max >= 1, "CircuitConfig.t_max: must be >= 1");
    detail::require(std::is_sorted(record_times.begin(), record_times.end()) &&
                        std::adjacent_find(record_times.begin(), record_times.end()) == record_times.end(),
                    "CircuitConfig.record_times: must be sorted and unique");
    for (int t : record_times) {
      detail::require(t >= 0 && t <= t_max, "CircuitConfig.record_times: times must lie in [0, t_max]");
    }
    detail::require(max_moment >= 0, "CircuitConfig.max_moment: must be >= 0");
    detail::require(!surface || boundary == Boundary::open, "CircuitConfig.surface: requires open boundaries");
  }
};

/// Calls f(j, k) for every brick of one gate layer. Even layers pair (2i, 2i+1);
/// odd layers pair (2i+1, 2i+2), with the wrap pair (L-1, 0) only under PBC.
template <class F>
void for_each_brick(std::size_t L, Boundary boundary, Parity parity, F &&f) {
  if (parity == Parity::even) {
    for (std::size_t j = 0; j + 1 < L; j += 2) f(j, j + 1);
    return;
  }
  for (std::size_t j = 1; j + 1 < L; j += 2) f(j, j + 1);
  if (boundary == Boundary::periodic && L > 2) f(L - 1, std::size_t{0});
}

inline bool measures_after(const CircuitConfig &cfg, Parity parity) {
  return cfg.schedule == MeasurementSchedule::every_layer || parity == Parity::odd;
}

/// Stream key for one trajectory of one sweep point. `stream` separates the
/// circuit randomness (0) from observable evaluation (1).
inline std::uint64_t trajectory_key(std::uint64_t master_seed, std::string_view backend, std::size_t L, double p,
                                    std::uint64_t traj_index, std::uint64_t stream) {
  return hash_words({master_seed, hash_string(backend), static_cast<std::uint64_t>(L), hash_double(p), traj_index,
                     stream});
}

}  // namespace bpe
