/*
 * Copyright 2026 The sparse-abft Authors
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

#include <algorithm>
#include <cstddef>
#include <vector>

#include "sabft/config.hpp"
#include "sabft/error.hpp"

namespace sabft {

/// Half-open index range [begin, end).
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  [[nodiscard]] std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct TileDescriptor {
  IndexRange a_rows;
  IndexRange k;
  IndexRange cols;
};

/// Tiles of the product in execution order. Every tile streams the full A row
/// range, interrupted every `flush_interval` rows for a checksum round.
struct TilePlan {
  std::vector<TileDescriptor> tiles;
  std::size_t flush_interval = 0;
  std::size_t k_chunk = 0;    // m * R
  std::size_t col_chunk = 0;  // C

  [[nodiscard]] std::vector<IndexRange> rounds(const TileDescriptor& tile) const {
    std::vector<IndexRange> out;
    for (std::size_t b = tile.a_rows.begin; b < tile.a_rows.end; b += flush_interval)
      out.push_back({b, std::min(tile.a_rows.end, b + flush_interval)});
    return out;
  }
};

[[nodiscard]] inline TilePlan tile_plan(std::size_t a_rows, std::size_t k, std::size_t cols,
                                        const ArrayConfig& cfg) {
  cfg.validate();
  if (a_rows == 0 || k == 0 || cols == 0) throw ShapeError("tile_plan needs non-empty dimensions");
  TilePlan plan;
  plan.flush_interval = static_cast<std::size_t>(cfg.flush_interval());
  plan.k_chunk = static_cast<std::size_t>(cfg.lanes());
  plan.col_chunk = static_cast<std::size_t>(cfg.cols);
  for (std::size_t c = 0; c < cols; c += plan.col_chunk)
    for (std::size_t kk = 0; kk < k; kk += plan.k_chunk)
      plan.tiles.push_back({{0, a_rows},
                            {kk, std::min(k, kk + plan.k_chunk)},
                            {c, std::min(cols, c + plan.col_chunk)}});
  return plan;
}

}  // namespace sabft
