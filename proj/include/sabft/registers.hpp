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
#include <charconv>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sabft/config.hpp"
#include "sabft/error.hpp"

namespace sabft {

/// Stable index of one storage element of the array or checker.
struct RegisterId {
  std::uint32_t value = 0;
  friend auto operator<=>(const RegisterId&, const RegisterId&) = default;
};

enum class Owner : std::uint8_t { Array, Checker };

enum class RegisterKind : std::uint8_t {
  Weight,
  Index,
  InputPipe,
  Psum,
  IcAcc,
  OcReg,
  ActualAcc,
  PredictedAcc,
};

struct RegisterInfo {
  RegisterId id;
  RegisterKind kind = RegisterKind::Psum;
  Owner owner = Owner::Array;
  int width = 0;
  bool is_signed = true;
  int row = 0;   // TPE/IC row
  int col = 0;   // TPE/OC column
  int slot = 0;  // weight slot or input lane

  [[nodiscard]] std::string name() const {
    const auto tpe = "tpe[" + std::to_string(row) + "][" + std::to_string(col) + "]";
    switch (kind) {
      case RegisterKind::Weight: return tpe + ".weight[" + std::to_string(slot) + "]";
      case RegisterKind::Index: return tpe + ".index[" + std::to_string(slot) + "]";
      case RegisterKind::InputPipe: return tpe + ".pipe[" + std::to_string(slot) + "]";
      case RegisterKind::Psum: return tpe + ".psum";
      case RegisterKind::IcAcc: return "ic[" + std::to_string(row) + "].acc[" + std::to_string(slot) + "]";
      case RegisterKind::OcReg: return "oc[" + std::to_string(col) + "]";
      case RegisterKind::ActualAcc: return "cksum.actual";
      case RegisterKind::PredictedAcc: return "cksum.predicted";
    }
    return "?";
  }
};

/// Every fault-injectable register, array first (row-major TPEs), then the
/// checker (IC blocks, OC chain, the two checksum accumulators).
class RegisterMap {
 public:
  RegisterMap() = default;
  explicit RegisterMap(std::vector<RegisterInfo> regs) : regs_(std::move(regs)) {
    bit_offsets_.reserve(regs_.size() + 1);
    bit_offsets_.push_back(0);
    for (std::size_t i = 0; i < regs_.size(); ++i) {
      regs_[i].id = RegisterId{static_cast<std::uint32_t>(i)};
      const auto w = static_cast<std::uint64_t>(regs_[i].width);
      (regs_[i].owner == Owner::Array ? array_bits_ : checker_bits_) += w;
      bit_offsets_.push_back(bit_offsets_.back() + w);
      by_name_.emplace(regs_[i].name(), regs_[i].id);
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return regs_.size(); }
  [[nodiscard]] bool empty() const noexcept { return regs_.empty(); }
  [[nodiscard]] const std::vector<RegisterInfo>& registers() const noexcept { return regs_; }
  [[nodiscard]] const RegisterInfo& at(RegisterId id) const {
    if (id.value >= regs_.size()) throw ConfigError("unknown register id " + std::to_string(id.value));
    return regs_[id.value];
  }
  [[nodiscard]] std::uint64_t array_bits() const noexcept { return array_bits_; }
  [[nodiscard]] std::uint64_t checker_bits() const noexcept { return checker_bits_; }
  [[nodiscard]] std::uint64_t total_bits() const noexcept { return array_bits_ + checker_bits_; }

  /// Maps a flat bit index in [0, total_bits) to (register, bit).
  [[nodiscard]] std::pair<RegisterId, int> locate_bit(std::uint64_t flat) const {
    if (flat >= total_bits()) throw ConfigError("bit index beyond register population");
    const auto it = std::upper_bound(bit_offsets_.begin(), bit_offsets_.end(), flat);
    const auto idx = static_cast<std::size_t>(it - bit_offsets_.begin()) - 1;
    return {RegisterId{static_cast<std::uint32_t>(idx)}, static_cast<int>(flat - bit_offsets_[idx])};
  }

  /// Accepts a register name ("tpe[0][1].psum") or a numeric id.
  [[nodiscard]] std::optional<RegisterId> find(std::string_view key) const {
    if (auto it = by_name_.find(std::string(key)); it != by_name_.end()) return it->second;
    std::uint32_t v = 0;
    const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), v);
    if (ec == std::errc{} && ptr == key.data() + key.size() && !key.empty() && v < regs_.size())
      return RegisterId{v};
    return std::nullopt;
  }

 private:
  std::vector<RegisterInfo> regs_;
  std::vector<std::uint64_t> bit_offsets_;
  std::unordered_map<std::string, RegisterId> by_name_;
  std::uint64_t array_bits_ = 0;
  std::uint64_t checker_bits_ = 0;
};

/// Per-TPE register count: slots weights + slots indexes + m pipe lanes + psum.
[[nodiscard]] inline int registers_per_tpe(const ArrayConfig& cfg) noexcept {
  return 2 * cfg.tpe_slots() + cfg.pattern.m + 1;
}

[[nodiscard]] inline RegisterMap enumerate_registers(const ArrayConfig& cfg) {
  cfg.validate();
  std::vector<RegisterInfo> regs;
  const int slots = cfg.tpe_slots();
  const int m = cfg.pattern.m;
  regs.reserve(static_cast<std::size_t>(cfg.rows * cfg.cols * registers_per_tpe(cfg) + cfg.rows * m +
                                        cfg.cols + 2));
  auto add = [&](RegisterKind kind, Owner owner, int width, bool is_signed, int r, int c, int s) {
    regs.push_back({RegisterId{}, kind, owner, width, is_signed, r, c, s});
  };
  for (int r = 0; r < cfg.rows; ++r) {
    for (int c = 0; c < cfg.cols; ++c) {
      for (int s = 0; s < slots; ++s) add(RegisterKind::Weight, Owner::Array, cfg.input_width, true, r, c, s);
      for (int s = 0; s < slots; ++s) add(RegisterKind::Index, Owner::Array, cfg.index_width(), false, r, c, s);
      for (int j = 0; j < m; ++j) add(RegisterKind::InputPipe, Owner::Array, cfg.input_width, true, r, c, j);
      add(RegisterKind::Psum, Owner::Array, cfg.col_out_width, true, r, c, 0);
    }
  }
  for (int r = 0; r < cfg.rows; ++r)
    for (int j = 0; j < m; ++j) add(RegisterKind::IcAcc, Owner::Checker, cfg.ic_width, true, r, 0, j);
  for (int c = 0; c < cfg.cols; ++c) add(RegisterKind::OcReg, Owner::Checker, cfg.oc_width, true, 0, c, 0);
  add(RegisterKind::ActualAcc, Owner::Checker, cfg.cksum_width, true, 0, 0, 0);
  add(RegisterKind::PredictedAcc, Owner::Checker, cfg.cksum_width, true, 0, 0, 0);
  return RegisterMap(std::move(regs));
}

}  // namespace sabft
