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
#include <span>
#include <utility>
#include <vector>

#include "bpe/pauli.hpp"

namespace bpe {

/// Dense bit matrix over GF(2), rows packed into 64-bit words.
class Gf2Matrix {
 public:
  Gf2Matrix() = default;
  Gf2Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), stride_(words_for(cols)), data_(rows * stride_, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  bool get(std::size_t r, std::size_t c) const { return kernels::get_bit(row(r), c); }
  void set(std::size_t r, std::size_t c, bool v) { kernels::set_bit(row(r), c, v); }

  std::span<Word> row(std::size_t r) { return {data_.data() + r * stride_, stride_}; }
  std::span<const Word> row(std::size_t r) const { return {data_.data() + r * stride_, stride_}; }

  /// Appends a row of the current width; `bits` must have words_for(cols()) words.
  void append_row(std::span<const Word> bits) {
    detail::require(bits.size() == stride_, "Gf2Matrix::append_row: width mismatch");
    data_.insert(data_.end(), bits.begin(), bits.end());
    ++rows_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t stride_ = 0;
  std::vector<Word> data_;
};

/// Rank by column-pivot Gaussian elimination on a scratch copy.
inline std::size_t gf2_rank(Gf2Matrix m) {
  std::size_t rank = 0;
  for (std::size_t c = 0; c < m.cols() && rank < m.rows(); ++c) {
    std::size_t pivot = rank;
    while (pivot < m.rows() && !m.get(pivot, c)) {
      ++pivot;
    }
    if (pivot == m.rows()) {
      continue;
    }
    if (pivot != rank) {
      auto a = m.row(pivot);
      auto b = m.row(rank);
      std::swap_ranges(a.begin(), a.end(), b.begin());
    }
    for (std::size_t r = rank + 1; r < m.rows(); ++r) {
      if (m.get(r, c)) {
        kernels::xor_into(m.row(r), m.row(rank));
      }
    }
    ++rank;
  }
  return rank;
}

}  // namespace bpe
