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
#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sabft/checker.hpp"
#include "sabft/config.hpp"
#include "sabft/error.hpp"
#include "sabft/fixed_width.hpp"
#include "sabft/registers.hpp"
#include "sabft/sparsity.hpp"
#include "sabft/tiling.hpp"

// Cycle-accurate model of an R x C weight-stationary sparse tensor array with
// the checker at its periphery.
//
// Timing: the bundle of sequence element e entering TPE row r at step
// (enter_e + r) is latched in pipe(r,0); it moves one column east per cycle.
// psum(r,c) latches north psum + selected products one cycle after pipe(r,c)
// holds the bundle. Bottom psums feed the OC chain (one column per cycle) and
// the last OC register feeds the corner accumulators. Every register reads
// pre-edge values of its neighbours.

namespace sabft {

/// One bit flip: `bit` of `reg` is XOR-flipped right after clock edge `cycle`.
struct FaultSpec {
  std::uint64_t cycle = 0;
  RegisterId reg;
  int bit = 0;
  friend bool operator==(const FaultSpec&, const FaultSpec&) = default;
};

enum class WaveKind : std::uint8_t { Bubble, Data, Digit };

/// Simulation bookkeeping that travels with a wave; not architectural state.
struct WaveTag {
  WaveKind kind = WaveKind::Bubble;
  std::int32_t row = -1;    // A row within the tile (Data)
  std::int32_t round = -1;  // checksum round (Digit)
  std::int16_t digit = 0;
  bool last_digit = false;
};

struct WestInput {
  WaveTag tag;
  std::array<std::int64_t, SparsityPattern::kMaxBlock> values{};

  static WestInput bubble() { return {}; }
  static WestInput data(std::span<const std::int64_t> lanes, std::int32_t row) {
    WestInput in;
    in.tag.kind = WaveKind::Data;
    in.tag.row = row;
    std::copy(lanes.begin(), lanes.end(), in.values.begin());
    return in;
  }
  /// Digit waves take their values from the row's IC block at the edge.
  static WestInput digit(int k, bool last, int round) {
    WestInput in;
    in.tag.kind = WaveKind::Digit;
    in.tag.digit = static_cast<std::int16_t>(k);
    in.tag.last_digit = last;
    in.tag.round = round;
    return in;
  }
};

enum class PhaseKind : std::uint8_t { WeightLoad, Stream, ChecksumDigit, Drain, Idle };

struct Phase {
  PhaseKind kind = PhaseKind::Idle;
  int digit = 0;

  [[nodiscard]] std::string str() const {
    switch (kind) {
      case PhaseKind::WeightLoad: return "WeightLoad";
      case PhaseKind::Stream: return "Stream";
      case PhaseKind::ChecksumDigit: return "ChecksumDigit(" + std::to_string(digit) + ")";
      case PhaseKind::Drain: return "Drain";
      case PhaseKind::Idle: return "Idle";
    }
    return "?";
  }
};

struct TpeState {
  std::array<std::int64_t, ArrayConfig::kMaxSlots> weight{};
  std::array<std::int64_t, ArrayConfig::kMaxSlots> index{};
  std::array<std::int64_t, SparsityPattern::kMaxBlock> pipe{};
  std::int64_t psum = 0;
};

/// Combinational TPE datapath: north + sum over active slots of
/// pipe[index] * weight, wrapped at the column output width. An index that
/// points past the block selects zero.
[[nodiscard]] inline std::int64_t tpe_compute(const TpeState& t, std::int64_t north, int active_slots, int m,
                                              int out_width) noexcept {
  std::int64_t sum = north;
  for (int s = 0; s < active_slots; ++s) {
    const auto idx = t.index[static_cast<std::size_t>(s)];
    if (idx < m) sum += t.pipe[static_cast<std::size_t>(idx)] * t.weight[static_cast<std::size_t>(s)];
  }
  return wrap(sum, out_width);
}

struct TileResult;

class SimState {
 public:
  explicit SimState(ArrayConfig cfg)
      : cfg_(std::move(cfg)),
        regs_(std::make_shared<const RegisterMap>(enumerate_registers(cfg_))),
        tpes_(static_cast<std::size_t>(cfg_.rows * cfg_.cols)),
        checker_(cfg_),
        pipe_tags_(tpes_.size()),
        psum_tags_(tpes_.size()),
        oc_tags_(static_cast<std::size_t>(cfg_.cols)),
        row_queues_(static_cast<std::size_t>(cfg_.rows)) {}

  [[nodiscard]] const ArrayConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const RegisterMap& registers() const noexcept { return *regs_; }
  [[nodiscard]] std::uint64_t cycle() const noexcept { return cycle_; }
  [[nodiscard]] Phase phase() const noexcept { return phase_; }

  [[nodiscard]] TpeState& tpe(int r, int c) { return tpes_[static_cast<std::size_t>(r * cfg_.cols + c)]; }
  [[nodiscard]] const TpeState& tpe(int r, int c) const {
    return tpes_[static_cast<std::size_t>(r * cfg_.cols + c)];
  }
  [[nodiscard]] CheckerState& checker() noexcept { return checker_; }
  [[nodiscard]] const CheckerState& checker() const noexcept { return checker_; }

  /// Whether weight slot `s` takes part in computation under the configured
  /// pattern (slot 1 is idle in 1:4 mode).
  [[nodiscard]] bool slot_active(int s) const noexcept { return s < cfg_.pattern.n; }

  [[nodiscard]] std::int64_t& reg(RegisterId id) {
    const auto& info = regs_->at(id);
    const auto slot = static_cast<std::size_t>(info.slot);
    switch (info.kind) {
      case RegisterKind::Weight: return tpe(info.row, info.col).weight[slot];
      case RegisterKind::Index: return tpe(info.row, info.col).index[slot];
      case RegisterKind::InputPipe: return tpe(info.row, info.col).pipe[slot];
      case RegisterKind::Psum: return tpe(info.row, info.col).psum;
      case RegisterKind::IcAcc: return checker_.ic[static_cast<std::size_t>(info.row)].acc[slot];
      case RegisterKind::OcReg: return checker_.oc[static_cast<std::size_t>(info.col)];
      case RegisterKind::ActualAcc: return checker_.accums.actual;
      case RegisterKind::PredictedAcc: return checker_.accums.predicted;
    }
    throw ConfigError("unhandled register kind");
  }
  [[nodiscard]] std::int64_t reg_value(RegisterId id) const { return const_cast<SimState*>(this)->reg(id); }

  /// XOR-flips one bit of a register at its declared width.
  void flip(RegisterId id, int bit) {
    const auto& info = regs_->at(id);
    if (bit < 0 || bit >= info.width)
      throw ConfigError("bit " + std::to_string(bit) + " outside " + info.name() + " (" +
                        std::to_string(info.width) + " bits)");
    auto& v = reg(id);
    v = flip_bit(v, bit, info.width, info.is_signed);
  }

  /// Round results recorded by the corner comparator, in completion order.
  [[nodiscard]] const std::vector<ChecksumRoundResult>& round_results() const noexcept { return results_; }
  [[nodiscard]] const DenseMatrix& outputs() const noexcept { return outputs_; }

  /// Echo `cycle,phase,register_id,value` for the watched registers after
  /// every clock edge.
  void set_trace(std::ostream* out, std::vector<RegisterId> watch) {
    trace_ = out;
    watch_ = std::move(watch);
  }

  /// FNV-1a over every architectural register plus the cycle counter.
  [[nodiscard]] std::uint64_t digest() const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](std::int64_t v) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    };
    mix(static_cast<std::int64_t>(cycle_));
    for (const auto& t : tpes_) {
      for (auto v : t.weight) mix(v);
      for (auto v : t.index) mix(v);
      for (auto v : t.pipe) mix(v);
      mix(t.psum);
    }
    for (const auto& b : checker_.ic)
      for (auto v : b.acc) mix(v);
    for (auto v : checker_.oc) mix(v);
    mix(checker_.accums.actual);
    mix(checker_.accums.predicted);
    return h;
  }

 private:
  friend void load_weights(SimState&, const StructuredSparseMatrix&);
  friend void step(SimState&, std::span<const WestInput>);
  friend void schedule_faults(SimState&, std::span<const FaultSpec>);
  friend void enqueue_rows(SimState&, const DenseMatrix&, IndexRange);
  friend void enqueue_checksum(SimState&);
  friend void advance(SimState&);
  friend void drain(SimState&);
  friend ChecksumRoundResult checksum_round(SimState&);
  friend TileResult run_tile(SimState&, const DenseMatrix&, const StructuredSparseMatrix&,
                                    std::span<const FaultSpec>);

  struct Scheduled {
    std::uint64_t step = 0;
    WestInput input;
  };

  ArrayConfig cfg_;
  std::shared_ptr<const RegisterMap> regs_;
  std::uint64_t cycle_ = 0;
  Phase phase_{};
  std::vector<TpeState> tpes_;
  CheckerState checker_;

  // Bookkeeping (not fault-injectable).
  std::vector<WaveTag> pipe_tags_;
  std::vector<WaveTag> psum_tags_;
  std::vector<WaveTag> oc_tags_;
  DenseMatrix outputs_;
  std::vector<ChecksumRoundResult> results_;
  bool weights_loaded_ = false;

  // West-edge sequencer.
  std::vector<std::deque<Scheduled>> row_queues_;
  std::uint64_t next_enter_ = 0;
  std::size_t open_round_rows_ = 0;
  bool round_open_ = false;
  int next_round_ = 0;
  std::uint64_t waves_enqueued_ = 0;
  std::uint64_t waves_retired_ = 0;

  std::vector<FaultSpec> faults_;
  std::size_t next_fault_ = 0;

  std::ostream* trace_ = nullptr;
  std::vector<RegisterId> watch_;
};

/// Writes the tile's packed weights into the TPE registers: TPE (r, c) takes
/// block-row r of column c. Unused slots hold weight 0 at index 0.
inline void load_weights(SimState& s, const StructuredSparseMatrix& w_tile) {
  const auto& cfg = s.cfg_;
  if (w_tile.rows() != static_cast<std::size_t>(cfg.lanes()) ||
      w_tile.cols() != static_cast<std::size_t>(cfg.cols))
    throw ShapeError("weight tile is " + std::to_string(w_tile.rows()) + "x" + std::to_string(w_tile.cols()) +
                     ", array expects " + std::to_string(cfg.lanes()) + "x" + std::to_string(cfg.cols));
  if (w_tile.pattern().m != cfg.pattern.m || w_tile.pattern().n > cfg.pattern.n)
    throw ShapeError("weight tile pattern " + w_tile.pattern().str() + " does not fit array mode " +
                     cfg.pattern.str());
  for (int r = 0; r < cfg.rows; ++r) {
    for (int c = 0; c < cfg.cols; ++c) {
      auto& t = s.tpe(r, c);
      t.weight.fill(0);
      t.index.fill(0);
      const auto& blk = w_tile.block(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
      for (std::size_t k = 0; k < blk.values.size(); ++k) {
        t.weight[k] = blk.values[k];
        t.index[k] = blk.indexes[k];
      }
    }
  }
  s.weights_loaded_ = true;
  s.phase_ = {PhaseKind::WeightLoad, 0};
}

/// Replaces the pending fault list. Faults at or before the current cycle are
/// skipped; the rest are applied right after their clock edge.
inline void schedule_faults(SimState& s, std::span<const FaultSpec> faults) {
  for (const auto& f : faults) {
    const auto& info = s.registers().at(f.reg);
    if (f.bit < 0 || f.bit >= info.width) throw ConfigError("fault bit outside register " + info.name());
  }
  s.faults_.assign(faults.begin(), faults.end());
  s.next_fault_ = 0;
  std::stable_sort(s.faults_.begin(), s.faults_.end(),
                   [](const FaultSpec& a, const FaultSpec& b) { return a.cycle < b.cycle; });
  while (s.next_fault_ < s.faults_.size() && s.faults_[s.next_fault_].cycle <= s.cycle_) ++s.next_fault_;
}

/// One clock edge. `west` carries one input per TPE row.
inline void step(SimState& s, std::span<const WestInput> west) {
  const auto& cfg = s.cfg_;
  const int R = cfg.rows;
  const int C = cfg.cols;
  const int m = cfg.pattern.m;
  const int active = cfg.pattern.n;
  const auto uC = static_cast<std::size_t>(C);
  if (west.size() != static_cast<std::size_t>(R))
    throw ShapeError("step expects " + std::to_string(R) + " west inputs");
  const bool any_data =
      std::any_of(west.begin(), west.end(), [](const WestInput& in) { return in.tag.kind != WaveKind::Bubble; });
  if (s.phase_.kind == PhaseKind::WeightLoad && any_data)
    throw StateError("data presented while the array is in the weight-loading phase");

  switch (west[0].tag.kind) {
    case WaveKind::Data: s.phase_ = {PhaseKind::Stream, 0}; break;
    case WaveKind::Digit: s.phase_ = {PhaseKind::ChecksumDigit, west[0].tag.digit}; break;
    case WaveKind::Bubble: s.phase_ = {PhaseKind::Drain, 0}; break;
  }

  auto& chk = s.checker_;

  // South-east corner: consume the wave leaving the OC chain.
  const WaveTag top = s.oc_tags_[uC - 1];
  if (top.kind == WaveKind::Data) {
    chk.accums.actual_accumulate(chk.oc[uC - 1], cfg);
    ++s.waves_retired_;
  } else if (top.kind == WaveKind::Digit) {
    chk.accums.predicted_accumulate(chk.oc[uC - 1], top.digit, cfg);
    ++s.waves_retired_;
    if (top.last_digit) {
      s.results_.push_back(chk.accums.compare(top.round));
      chk.accums.clear();
    }
  }

  // OC chain and output capture from the bottom TPE row.
  const auto bottom = static_cast<std::size_t>(R - 1) * uC;
  for (std::size_t c = uC; c-- > 0;) {
    const auto psum = s.tpes_[bottom + c].psum;
    const auto& tag = s.psum_tags_[bottom + c];
    if (tag.kind == WaveKind::Data && static_cast<std::size_t>(tag.row) < s.outputs_.rows())
      s.outputs_(static_cast<std::size_t>(tag.row), c) = psum;
    chk.oc[c] = add_wrap(c == 0 ? 0 : chk.oc[c - 1], psum, cfg.oc_width);
    s.oc_tags_[c] = tag;
  }

  // Partial sums, bottom-up so each TPE still sees its north neighbour's old value.
  for (int r = R - 1; r >= 0; --r) {
    for (std::size_t c = 0; c < uC; ++c) {
      const auto at = static_cast<std::size_t>(r) * uC + c;
      const std::int64_t north = r == 0 ? 0 : s.tpes_[at - uC].psum;
      auto& t = s.tpes_[at];
      t.psum = s.pipe_tags_[at].kind == WaveKind::Bubble ? north
                                                          : tpe_compute(t, north, active, m, cfg.col_out_width);
      s.psum_tags_[at] = s.pipe_tags_[at];
    }
  }

  // Input bundles hop east; the west edge latches new bundles.
  const auto um = static_cast<std::size_t>(m);
  for (int r = 0; r < R; ++r) {
    const auto base = static_cast<std::size_t>(r) * uC;
    for (std::size_t c = uC - 1; c > 0; --c) {
      std::copy_n(s.tpes_[base + c - 1].pipe.begin(), um, s.tpes_[base + c].pipe.begin());
      s.pipe_tags_[base + c] = s.pipe_tags_[base + c - 1];
    }
    const auto& in = west[static_cast<std::size_t>(r)];
    auto& pipe = s.tpes_[base].pipe;
    auto& ic = chk.ic[static_cast<std::size_t>(r)];
    switch (in.tag.kind) {
      case WaveKind::Data:
        for (std::size_t j = 0; j < um; ++j) pipe[j] = wrap(in.values[j], cfg.input_width);
        ic.accumulate(pipe.data(), m, cfg.ic_width);
        break;
      case WaveKind::Digit:
        for (std::size_t j = 0; j < um; ++j)
          pipe[j] = hardware_digit(ic.acc[j], in.tag.digit, cfg.input_width, cfg.ic_width);
        if (in.tag.last_digit) ic.clear();
        break;
      case WaveKind::Bubble:
        std::fill_n(pipe.begin(), um, 0);
        break;
    }
    s.pipe_tags_[base] = in.tag;
  }

  ++s.cycle_;
  while (s.next_fault_ < s.faults_.size() && s.faults_[s.next_fault_].cycle == s.cycle_) {
    s.flip(s.faults_[s.next_fault_].reg, s.faults_[s.next_fault_].bit);
    ++s.next_fault_;
  }
  if (s.trace_ != nullptr) {
    for (const auto id : s.watch_)
      *s.trace_ << s.cycle_ << ',' << s.phase_.str() << ',' << id.value << ',' << s.reg_value(id) << '\n';
  }
}

/// Queues A rows for skewed streaming; a checksum round may not exceed the
/// flush interval.
inline void enqueue_rows(SimState& s, const DenseMatrix& a_tile, IndexRange rows) {
  const auto& cfg = s.cfg_;
  if (a_tile.cols() != static_cast<std::size_t>(cfg.lanes()))
    throw ShapeError("A tile has " + std::to_string(a_tile.cols()) + " columns, array ingests " +
                     std::to_string(cfg.lanes()));
  if (rows.end > a_tile.rows()) throw ShapeError("row range beyond A tile");
  const auto t = static_cast<std::size_t>(cfg.flush_interval());
  const auto m = static_cast<std::size_t>(cfg.pattern.m);
  for (std::size_t i = rows.begin; i < rows.end; ++i) {
    if (s.open_round_rows_ >= t)
      throw StateError("checksum round exceeds " + std::to_string(t) + " rows without a flush");
    const auto enter = std::max(s.next_enter_, s.cycle_);
    const auto row = a_tile.row(i);
    for (std::size_t r = 0; r < s.row_queues_.size(); ++r)
      s.row_queues_[r].push_back({enter + r, WestInput::data(row.subspan(r * m, m), static_cast<std::int32_t>(i))});
    s.next_enter_ = enter + 1;
    ++s.open_round_rows_;
    ++s.waves_enqueued_;
    s.round_open_ = true;
  }
  if (s.phase_.kind == PhaseKind::WeightLoad || s.phase_.kind == PhaseKind::Idle) s.phase_ = {PhaseKind::Stream, 0};
}

/// Queues the digit waves that close the open checksum round.
inline void enqueue_checksum(SimState& s) {
  if (!s.round_open_) throw StateError("no streamed rows to close with a checksum round");
  const int d = s.cfg_.digits();
  for (int k = 0; k < d; ++k) {
    const auto enter = std::max(s.next_enter_, s.cycle_);
    for (std::size_t r = 0; r < s.row_queues_.size(); ++r)
      s.row_queues_[r].push_back({enter + r, WestInput::digit(k, k == d - 1, s.next_round_)});
    s.next_enter_ = enter + 1;
    ++s.waves_enqueued_;
  }
  ++s.next_round_;
  s.open_round_rows_ = 0;
  s.round_open_ = false;
}

/// One clock edge driven by the sequencer queues.
inline void advance(SimState& s) {
  std::vector<WestInput> west(s.row_queues_.size());
  for (std::size_t r = 0; r < west.size(); ++r) {
    auto& q = s.row_queues_[r];
    if (!q.empty() && q.front().step <= s.cycle_) {
      west[r] = q.front().input;
      q.pop_front();
    }
  }
  step(s, west);
}

/// Steps until every queued wave has reached the corner accumulators.
inline void drain(SimState& s) {
  while (s.waves_retired_ < s.waves_enqueued_) advance(s);
  s.phase_ = {PhaseKind::Idle, 0};
}

/// Closes the open round: streams its digit waves and runs until the corner
/// comparator reports it.
inline ChecksumRoundResult checksum_round(SimState& s) {
  enqueue_checksum(s);
  const int round = s.next_round_ - 1;
  while (s.results_.empty() || s.results_.back().round != round) {
    if (s.waves_retired_ >= s.waves_enqueued_) throw StateError("round result never produced");
    advance(s);
  }
  if (s.waves_retired_ >= s.waves_enqueued_) s.phase_ = {PhaseKind::Idle, 0};
  return s.results_.back();
}

struct TileResult {
  DenseMatrix outputs;
  std::vector<ChecksumRoundResult> rounds;
  std::uint64_t first_cycle = 0;  // first clock edge of the tile
  std::uint64_t last_cycle = 0;
};

/// Cycles one tile occupies: its waves (rows plus d digits per round) plus
/// R + C + 1 cycles of skew, OC chain and corner latency.
[[nodiscard]] inline std::uint64_t tile_cycles(const ArrayConfig& cfg, std::size_t a_rows) noexcept {
  const auto t = static_cast<std::uint64_t>(cfg.flush_interval());
  const auto rounds = (a_rows + t - 1) / t;
  const auto waves = a_rows + rounds * static_cast<std::uint64_t>(cfg.digits());
  return waves + static_cast<std::uint64_t>(cfg.rows + cfg.cols + 1);
}

/// Streams every row of `a_tile` against the loaded weights, flushing a
/// checksum round every flush_interval() rows and at the end, then drains.
/// Faults whose cycle falls inside the tile are applied at their cycle.
inline TileResult run_tile(SimState& s, const DenseMatrix& a_tile, const StructuredSparseMatrix& w_tile,
                           std::span<const FaultSpec> faults = {}) {
  const auto& cfg = s.cfg_;
  if (!s.weights_loaded_) throw StateError("run_tile before load_weights");
  if (w_tile.rows() != static_cast<std::size_t>(cfg.lanes()) || w_tile.cols() != static_cast<std::size_t>(cfg.cols))
    throw ShapeError("weight tile shape does not match the array");
  if (a_tile.cols() != static_cast<std::size_t>(cfg.lanes()))
    throw ShapeError("A tile has " + std::to_string(a_tile.cols()) + " columns, array ingests " +
                     std::to_string(cfg.lanes()));
  if (a_tile.rows() == 0) throw ShapeError("A tile has no rows");
  schedule_faults(s, faults);
  TileResult out;
  out.first_cycle = s.cycle_ + 1;
  s.outputs_ = DenseMatrix(a_tile.rows(), static_cast<std::size_t>(cfg.cols));
  const auto first_result = s.results_.size();
  const auto t = static_cast<std::size_t>(cfg.flush_interval());
  for (std::size_t b = 0; b < a_tile.rows(); b += t) {
    enqueue_rows(s, a_tile, {b, std::min(a_tile.rows(), b + t)});
    enqueue_checksum(s);
  }
  drain(s);
  out.last_cycle = s.cycle_;
  out.outputs = s.outputs_;
  out.rounds.assign(s.results_.begin() + static_cast<std::ptrdiff_t>(first_result), s.results_.end());
  return out;
}

/// Column-padded copy of A restricted to `k` (zero-padded to `lanes` columns).
[[nodiscard]] inline DenseMatrix a_tile_of(const DenseMatrix& a, IndexRange k, std::size_t lanes) {
  DenseMatrix out(a.rows(), lanes);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < k.size(); ++j) out(i, j) = a(i, k.begin + j);
  return out;
}

struct MatmulResult {
  DenseMatrix product;
  std::vector<ChecksumRoundResult> rounds;
  std::uint64_t cycles = 0;
};

/// Total active cycles of a full multiplication under `plan`.
[[nodiscard]] inline std::uint64_t plan_cycles(const ArrayConfig& cfg, const TilePlan& plan) noexcept {
  std::uint64_t total = 0;
  for (const auto& tile : plan.tiles) total += tile_cycles(cfg, tile.a_rows.size());
  return total;
}

/// Runs C = A W tile by tile on one simulator. Partial products of k-tiles
/// are summed off-array at the column output width.
inline MatmulResult run_matmul(SimState& s, const DenseMatrix& a, const StructuredSparseMatrix& w,
                               std::span<const FaultSpec> faults = {}) {
  const auto& cfg = s.config();
  if (a.cols() != w.rows())
    throw ShapeError("A has " + std::to_string(a.cols()) + " columns but W has " + std::to_string(w.rows()) +
                     " rows");
  const auto plan = tile_plan(a.rows(), a.cols(), w.cols(), cfg);
  MatmulResult out;
  out.product = DenseMatrix(a.rows(), w.cols());
  const auto start = s.cycle();
  for (const auto& tile : plan.tiles) {
    const auto w_tile = w.slice(tile.k.begin, tile.cols.begin, plan.k_chunk, plan.col_chunk);
    load_weights(s, w_tile);
    const auto res = run_tile(s, a_tile_of(a, tile.k, plan.k_chunk), w_tile, faults);
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t c = 0; c < tile.cols.size(); ++c)
        out.product(i, tile.cols.begin + c) =
            add_wrap(out.product(i, tile.cols.begin + c), res.outputs(i, c), cfg.col_out_width);
    out.rounds.insert(out.rounds.end(), res.rounds.begin(), res.rounds.end());
  }
  out.cycles = s.cycle() - start;
  return out;
}

}  // namespace sabft
