/*
 * Copyright 2026 The imtsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <string>

#include "imtsim/common.hpp"

namespace imtsim {

/// Bit-sliced placement of a rows x cols weight matrix on fixed-size arrays.
struct MatrixTiling {
  std::uint64_t slices = 0;     // cells holding one weight
  std::uint64_t grid_rows = 0;  // row blocks
  std::uint64_t grid_cols = 0;  // column blocks
  std::uint64_t total_crossbars = 0;

  std::uint64_t grid() const { return grid_rows * grid_cols; }
  bool operator==(const MatrixTiling&) const = default;
};

inline MatrixTiling tile_matrix(std::uint64_t rows, std::uint64_t cols, std::uint32_t weight_bits,
                                std::uint32_t cell_bits, std::uint32_t xbar_rows, std::uint32_t xbar_cols) {
  if (rows < 1 || cols < 1 || weight_bits < 1 || cell_bits < 1 || xbar_rows < 1 || xbar_cols < 1) {
    throw ValidationError("tile_matrix: all arguments must be >= 1");
  }
  if (weight_bits < cell_bits) {
    throw ValidationError("tile_matrix: weight_bits (" + std::to_string(weight_bits) + ") < cell_bits (" +
                          std::to_string(cell_bits) + ")");
  }
  MatrixTiling t;
  t.slices = ceil_div(weight_bits, cell_bits);
  t.grid_rows = ceil_div(rows, xbar_rows);
  t.grid_cols = ceil_div(cols, xbar_cols);
  t.total_crossbars = t.slices * t.grid_rows * t.grid_cols;
  return t;
}

/// Visits each distinct block shape of a tiled matrix once, with its
/// multiplicity: f(block_rows, block_cols, count). At most four shapes.
template <class F>
void for_each_block_shape(std::uint64_t rows, std::uint64_t cols, std::uint64_t block_rows,
                          std::uint64_t block_cols, F&& f) {
  const std::uint64_t full_r = rows / block_rows, rem_r = rows % block_rows;
  const std::uint64_t full_c = cols / block_cols, rem_c = cols % block_cols;
  const std::uint64_t rs[2][2] = {{block_rows, full_r}, {rem_r, rem_r ? 1u : 0u}};
  const std::uint64_t cs[2][2] = {{block_cols, full_c}, {rem_c, rem_c ? 1u : 0u}};
  for (const auto& r : rs) {
    for (const auto& c : cs) {
      if (r[1] && c[1]) f(r[0], c[0], r[1] * c[1]);
    }
  }
}

}  // namespace imtsim
