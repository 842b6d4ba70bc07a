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
#include <cstdint>
#include <string>

#include "sabft/error.hpp"
#include "sabft/fixed_width.hpp"
#include "sabft/sparsity.hpp"

namespace sabft {

/// Geometry and datapath widths of the sparse tensor array and its checker.
/// Defaults are the 8x32 array with 8-bit operands, 24-bit column outputs,
/// 16-bit input accumulators, 24-bit output chain and 48-bit checksums.
struct ArrayConfig {
  int rows = 8;
  int cols = 32;
  SparsityPattern pattern{2, 4};
  int input_width = 8;
  int col_out_width = 24;
  int ic_width = 16;
  int oc_width = 24;
  int cksum_width = 48;
  /// Weight/index register pairs per TPE; 0 selects max(n, min(2, m)) so a
  /// 2:4 array can also run 1:4 with its second slot idle.
  int slots = 0;

  static constexpr int kMaxSlots = SparsityPattern::kMaxBlock;

  [[nodiscard]] int tpe_slots() const noexcept {
    return slots > 0 ? slots : std::max(pattern.n, std::min(2, pattern.m));
  }
  [[nodiscard]] int lanes_per_row() const noexcept { return pattern.m; }
  /// Input lanes ingested by the whole west edge per cycle (m * R).
  [[nodiscard]] int lanes() const noexcept { return pattern.m * rows; }
  [[nodiscard]] int index_width() const noexcept {
    return std::max(1, ceil_log2(static_cast<std::uint64_t>(pattern.m)));
  }
  /// Digits per checksum value: ic_width / input_width.
  [[nodiscard]] int digits() const noexcept { return ic_width / input_width; }
  /// Rows that can be accumulated without overflow: 2^ic_width / 2^input_width.
  [[nodiscard]] std::int64_t flush_interval() const noexcept {
    return std::int64_t{1} << (ic_width - input_width);
  }

  void validate() const {
    pattern.validate();
    if (rows < 1 || cols < 1) throw ConfigError("array needs at least one TPE row and column");
    auto width_ok = [](int w) { return w >= 1 && w <= 64; };
    if (!width_ok(input_width) || !width_ok(col_out_width) || !width_ok(ic_width) ||
        !width_ok(oc_width) || !width_ok(cksum_width))
      throw ConfigError("register widths must be in [1, 64]");
    if (ic_width < input_width || ic_width % input_width != 0)
      throw ConfigError("ic_width must be a multiple of input_width");
    if (ic_width - input_width > 40) throw ConfigError("flush interval too large");
    if (tpe_slots() < pattern.n || tpe_slots() > pattern.m || tpe_slots() > kMaxSlots)
      throw ConfigError("TPE slot count must lie in [n, m]");
  }

  friend bool operator==(const ArrayConfig&, const ArrayConfig&) = default;
};

}  // namespace sabft
