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
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "sabft/config.hpp"
#include "sabft/error.hpp"
#include "sabft/oracle.hpp"
#include "sabft/registers.hpp"
#include "sabft/sparsity.hpp"
#include "sabft/systolic.hpp"
#include "sabft/tiling.hpp"

namespace sabft {

/// Inclusive cycle window faults may be placed in.
struct CycleWindow {
  std::uint64_t first = 1;
  std::uint64_t last = 0;
  [[nodiscard]] bool empty() const noexcept { return last < first; }
};

/// Flips one bit of the addressed register in the live simulator state.
inline void inject(SimState& state, const FaultSpec& spec) { state.flip(spec.reg, spec.bit); }

/// Draws `count` faults. Each picks a bit uniformly over the whole register
/// population, so a register is hit in proportion to its width, and a cycle
/// uniformly over `window`.
[[nodiscard]] inline std::vector<FaultSpec> sample_faults(std::uint64_t seed, const RegisterMap& regs,
                                                          std::size_t count, CycleWindow window) {
  if (regs.empty()) throw ConfigError("empty register map");
  if (window.empty()) throw ConfigError("empty active cycle window");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> bit_dist(0, regs.total_bits() - 1);
  std::uniform_int_distribution<std::uint64_t> cycle_dist(window.first, window.last);
  std::vector<FaultSpec> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto [reg, bit] = regs.locate_bit(bit_dist(rng));
    out.push_back({cycle_dist(rng), reg, bit});
  }
  return out;
}

enum class Category : std::uint8_t { Detected, Silent, FalsePositive, FalseNegative, Benign };

inline constexpr std::array<Category, 5> kCategories{Category::Detected, Category::Silent, Category::FalsePositive,
                                                     Category::FalseNegative, Category::Benign};

[[nodiscard]] inline std::string category_key(Category c) {
  switch (c) {
    case Category::Detected: return "detected";
    case Category::Silent: return "silent";
    case Category::FalsePositive: return "false_positive";
    case Category::FalseNegative: return "false_negative";
    case Category::Benign: return "benign";
  }
  return "?";
}

[[nodiscard]] inline std::string category_label(Category c) {
  switch (c) {
    case Category::Detected: return "Detected";
    case Category::Silent: return "Silent";
    case Category::FalsePositive: return "False Positive";
    case Category::FalseNegative: return "False Negative";
    case Category::Benign: return "Benign";
  }
  return "?";
}

/// Outcome taxonomy. A campaign with faults in both the array and the checker
/// counts as Detected when flagged; checker-only faults that raise no flag
/// (and fault-free runs) are Benign.
[[nodiscard]] inline Category classify(std::span<const FaultSpec> faults, const RegisterMap& regs,
                                       const std::vector<bool>& flag_history, bool /*output_corrupted*/ = false) {
  bool in_array = false;
  bool in_checker = false;
  for (const auto& f : faults) (regs.at(f.reg).owner == Owner::Array ? in_array : in_checker) = true;
  const bool flagged = std::any_of(flag_history.begin(), flag_history.end(), [](bool b) { return b; });
  if (in_array && in_checker) return flagged ? Category::Detected : Category::FalseNegative;
  if (in_array) return flagged ? Category::Detected : Category::Silent;
  if (in_checker) return flagged ? Category::FalsePositive : Category::Benign;
  return Category::Benign;
}

/// Random activations and weights pruned from a uniform dense matrix.
struct SyntheticWorkload {
  std::size_t a_rows_min = 128;
  std::size_t a_rows_max = 512;
  std::size_t k = 64;
  std::size_t cols = 32;
  std::int64_t value_min = -128;
  std::int64_t value_max = 127;
};

/// Fixed operands; campaigns then differ only in the faults.
struct ImportedWorkload {
  DenseMatrix a;
  DenseMatrix w;  // dense; pruned to the campaign pattern before use
};

using Workload = std::variant<SyntheticWorkload, ImportedWorkload>;

struct CampaignConfig {
  ArrayConfig array;
  std::size_t faults_min = 1;
  std::size_t faults_max = 1;
  std::size_t campaigns = 1;
  std::uint64_t seed = 1;
  Workload workload = SyntheticWorkload{};

  void validate() const {
    array.validate();
    if (faults_min > faults_max) throw ConfigError("fault range lo > hi");
    if (campaigns < 1) throw ConfigError("need at least one campaign");
    if (const auto* s = std::get_if<SyntheticWorkload>(&workload)) {
      if (s->a_rows_min < 1 || s->a_rows_min > s->a_rows_max || s->k < 1 || s->cols < 1)
        throw ConfigError("bad synthetic workload dimensions");
      if (s->value_min > s->value_max || !fits_signed(s->value_min, array.input_width) ||
          !fits_signed(s->value_max, array.input_width))
        throw ConfigError("synthetic value range must fit the input width");
    } else {
      const auto& imp = std::get<ImportedWorkload>(workload);
      if (imp.a.cols() != imp.w.rows() || imp.a.rows() == 0 || imp.w.cols() == 0)
        throw ConfigError("imported A and W shapes are incompatible");
      if (!imp.a.fits_width(array.input_width) || !imp.w.fits_width(array.input_width))
        throw ConfigError("imported operands exceed the input width");
    }
  }
};

/// splitmix64 finalizer; derives independent per-campaign seeds.
[[nodiscard]] constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

struct CampaignOutcome {
  std::size_t index = 0;
  Category category = Category::Benign;
  std::vector<FaultSpec> faults;
  std::vector<bool> flags;  // one per checksum round, in execution order
  std::vector<ChecksumRoundResult> rounds;
  bool output_corrupted = false;
  bool array_hit = false;
  bool checker_hit = false;
  std::size_t a_rows = 0;
  std::uint64_t cycles = 0;
};

struct CampaignOperands {
  DenseMatrix a;
  StructuredSparseMatrix w;
};

/// Operands of campaign `index`. The workload stream is independent of the
/// sparsity mode, so 2:4 and 1:4 campaigns with the same seed share A and the
/// dense weights they were pruned from.
[[nodiscard]] inline CampaignOperands campaign_operands(const CampaignConfig& cfg, std::size_t index) {
  const auto& pattern = cfg.array.pattern;
  if (const auto* imp = std::get_if<ImportedWorkload>(&cfg.workload))
    return {imp->a, prune_magnitude(imp->w, pattern)};
  const auto& syn = std::get<SyntheticWorkload>(cfg.workload);
  std::mt19937_64 rng(mix_seed(mix_seed(cfg.seed, index), 0));
  std::uniform_int_distribution<std::size_t> rows_dist(syn.a_rows_min, syn.a_rows_max);
  std::uniform_int_distribution<std::int64_t> value(syn.value_min, syn.value_max);
  const auto rows = rows_dist(rng);
  std::vector<std::int64_t> a(rows * syn.k);
  for (auto& v : a) v = value(rng);
  std::vector<std::int64_t> w(syn.k * syn.cols);
  for (auto& v : w) v = value(rng);
  return {DenseMatrix(rows, syn.k, std::move(a)),
          prune_magnitude(DenseMatrix(syn.k, syn.cols, std::move(w)), pattern)};
}

/// One fault-injection campaign: a full multiplication with sampled faults,
/// checked against the golden product and classified.
[[nodiscard]] inline CampaignOutcome run_campaign(const CampaignConfig& cfg, std::size_t index) {
  const auto ops = campaign_operands(cfg, index);
  SimState sim(cfg.array);
  const auto plan = tile_plan(ops.a.rows(), ops.a.cols(), ops.w.cols(), cfg.array);
  const auto cycles = plan_cycles(cfg.array, plan);

  std::mt19937_64 rng(mix_seed(mix_seed(cfg.seed, index), 1));
  std::uniform_int_distribution<std::size_t> count_dist(cfg.faults_min, cfg.faults_max);
  const auto count = count_dist(rng);

  CampaignOutcome out;
  out.index = index;
  out.a_rows = ops.a.rows();
  out.faults = sample_faults(rng(), sim.registers(), count, {1, cycles});

  const auto res = run_matmul(sim, ops.a, ops.w, out.faults);
  out.cycles = res.cycles;
  out.rounds = res.rounds;
  for (const auto& r : res.rounds) out.flags.push_back(r.flag);
  out.output_corrupted = res.product != matmul_ref(ops.a, unpack(ops.w), cfg.array.col_out_width);
  for (const auto& f : out.faults)
    (sim.registers().at(f.reg).owner == Owner::Array ? out.array_hit : out.checker_hit) = true;
  out.category = classify(out.faults, sim.registers(), out.flags, out.output_corrupted);
  return out;
}

/// Worker count: SPARSE_ABFT_THREADS when set and positive, else hardware.
[[nodiscard]] inline unsigned default_threads() {
  if (const char* env = std::getenv("SPARSE_ABFT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs every campaign of `cfg`; results are ordered by campaign index
/// regardless of which worker finished first.
[[nodiscard]] inline std::vector<CampaignOutcome> run_campaigns(const CampaignConfig& cfg,
                                                                unsigned threads = default_threads()) {
  cfg.validate();
  std::vector<CampaignOutcome> out(cfg.campaigns);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.campaigns; i = next++) out[i] = run_campaign(cfg, i);
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cfg.campaigns)));
  if (threads == 1) {
    worker();
    return out;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();
  return out;
}

/// Per-category counts of one (sparsity mode, fault-count regime) group.
struct StatsTable {
  std::string pattern;
  std::string regime;
  std::array<std::size_t, 5> counts{};
  std::size_t total = 0;

  [[nodiscard]] std::size_t count(Category c) const noexcept { return counts[static_cast<std::size_t>(c)]; }
  [[nodiscard]] double percent(Category c) const noexcept {
    return total == 0 ? 0.0 : 100.0 * static_cast<double>(count(c)) / static_cast<double>(total);
  }
  /// Four-category view with Benign folded into Silent.
  [[nodiscard]] double compat_percent(Category c) const noexcept {
    if (c == Category::Benign) return 0.0;
    if (c == Category::Silent) return percent(Category::Silent) + percent(Category::Benign);
    return percent(c);
  }
};

[[nodiscard]] inline StatsTable aggregate(std::span<const CampaignOutcome> outcomes, std::string pattern = {},
                                          std::string regime = {}) {
  if (outcomes.empty()) throw ConfigError("aggregate needs at least one campaign outcome");
  StatsTable t{std::move(pattern), std::move(regime), {}, outcomes.size()};
  for (const auto& o : outcomes) ++t.counts[static_cast<std::size_t>(o.category)];
  return t;
}

}  // namespace sabft
