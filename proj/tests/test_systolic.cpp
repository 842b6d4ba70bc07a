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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "sabft/oracle.hpp"
#include "sabft/systolic.hpp"
#include "test_util.hpp"

using namespace sabft;
using sabft::testing::random_dense;
using sabft::testing::random_structured;

namespace {

ArrayConfig small_config(int rows, int cols, SparsityPattern p = {2, 4}) {
  ArrayConfig cfg;
  cfg.rows = rows;
  cfg.cols = cols;
  cfg.pattern = p;
  return cfg;
}

StructuredSparseMatrix running_w() {
  StructuredSparseMatrix w(4, 2, {2, 4});
  w.set_block(0, 0, SparseBlock::from_mask(0b0101, {1, -1}));
  w.set_block(0, 1, SparseBlock::from_mask(0b1010, {2, 3}));
  return w;
}

DenseMatrix running_a() { return DenseMatrix::from_rows({{1, 2, 3, 4}, {5, 6, 7, 8}}); }

RegisterId reg(const SimState& s, const std::string& name) {
  const auto id = s.registers().find(name);
  if (!id) throw std::runtime_error("no register " + name);
  return *id;
}

bool any_flag(const std::vector<ChecksumRoundResult>& rounds) {
  return std::any_of(rounds.begin(), rounds.end(), [](const auto& r) { return r.flag; });
}

}  // namespace

TEST(LoadWeights, RunningExampleRegisters) {
  SimState s(small_config(1, 2));
  load_weights(s, running_w());
  EXPECT_EQ(s.tpe(0, 0).weight[0], 1);
  EXPECT_EQ(s.tpe(0, 0).weight[1], -1);
  EXPECT_EQ(s.tpe(0, 0).index[0], 0);
  EXPECT_EQ(s.tpe(0, 0).index[1], 2);
  EXPECT_EQ(s.tpe(0, 1).index[0], 1);
  EXPECT_EQ(s.tpe(0, 1).index[1], 3);
  EXPECT_EQ(s.phase().kind, PhaseKind::WeightLoad);
}

TEST(LoadWeights, OneOfFourLeavesSlotIdle) {
  SimState s(small_config(1, 1, {1, 4}));
  StructuredSparseMatrix w(4, 1, {1, 4});
  w.set_block(0, 0, SparseBlock::from_mask(0b1000, {7}));
  load_weights(s, w);
  EXPECT_EQ(s.tpe(0, 0).weight[0], 7);
  EXPECT_EQ(s.tpe(0, 0).index[0], 3);
  EXPECT_EQ(s.tpe(0, 0).weight[1], 0);
  EXPECT_FALSE(s.slot_active(1));
}

TEST(LoadWeights, RejectsBadShapeAndPattern) {
  SimState s(small_config(1, 2));
  EXPECT_THROW(load_weights(s, StructuredSparseMatrix(8, 2, {2, 4})), ShapeError);
  EXPECT_THROW(load_weights(s, StructuredSparseMatrix(6, 2, {2, 6})), ShapeError);
  SimState one(small_config(1, 2, {1, 4}));
  EXPECT_THROW(load_weights(one, running_w()), ShapeError);
}

TEST(LoadWeights, AllZeroTileGivesZeroOutput) {
  SimState s(small_config(2, 3));
  const StructuredSparseMatrix w(8, 3, {2, 4});
  load_weights(s, w);
  std::mt19937_64 rng(5);
  const auto res = run_tile(s, random_dense(rng, 7, 8), w);
  EXPECT_TRUE(res.outputs.is_zero());
  EXPECT_FALSE(any_flag(res.rounds));
}

TEST(Step, SingleTpeProductAppearsNextCycle) {
  SimState s(small_config(1, 1));
  StructuredSparseMatrix w(4, 1, {2, 4});
  w.set_block(0, 0, SparseBlock::from_mask(0b0101, {1, -1}));
  load_weights(s, w);
  const std::vector<WestInput> bubble{WestInput::bubble()};
  step(s, bubble);
  const std::int64_t lanes[4] = {1, 2, 3, 4};
  const std::vector<WestInput> data{WestInput::data(lanes, 0)};
  step(s, data);
  EXPECT_EQ(s.tpe(0, 0).pipe[2], 3);
  EXPECT_EQ(s.tpe(0, 0).psum, 0);
  step(s, bubble);
  EXPECT_EQ(s.tpe(0, 0).psum, 1 * 1 + 3 * -1);
  step(s, bubble);
  EXPECT_EQ(s.tpe(0, 0).psum, 0) << "a bubble passes the north value through";
}

TEST(Step, RejectsDataDuringWeightLoad) {
  SimState s(small_config(1, 1));
  load_weights(s, StructuredSparseMatrix(4, 1, {2, 4}));
  const std::int64_t lanes[4] = {1, 2, 3, 4};
  const std::vector<WestInput> data{WestInput::data(lanes, 0)};
  EXPECT_THROW(step(s, data), StateError);
  const std::vector<WestInput> wrong_width(2);
  EXPECT_THROW(step(s, wrong_width), ShapeError);
}

TEST(TpeCompute, WrapsAtOutputWidth) {
  TpeState t;
  t.weight[0] = 1;
  t.index[0] = 0;
  t.pipe[0] = 1;
  EXPECT_EQ(tpe_compute(t, (std::int64_t{1} << 23) - 1, 1, 4, 24), -(std::int64_t{1} << 23));
  EXPECT_EQ(tpe_compute(t, 5, 0, 4, 24), 5);
}

TEST(RunTile, RunningExample) {
  SimState s(small_config(1, 2));
  load_weights(s, running_w());
  const auto res = run_tile(s, running_a(), running_w());
  EXPECT_EQ(res.outputs, DenseMatrix::from_rows({{-2, 16}, {-2, 36}}));
  ASSERT_EQ(res.rounds.size(), 1u);
  EXPECT_EQ(res.rounds[0].actual, 48);
  EXPECT_EQ(res.rounds[0].predicted, 48);
  EXPECT_FALSE(res.rounds[0].flag);
}

TEST(RunTile, ZeroActivationsAndUnitRow) {
  SimState s(small_config(1, 2));
  load_weights(s, running_w());
  const auto zero = run_tile(s, DenseMatrix(3, 4), running_w());
  EXPECT_TRUE(zero.outputs.is_zero());
  EXPECT_EQ(zero.rounds.at(0).actual, 0);
  const auto unit = run_tile(s, DenseMatrix::from_rows({{1, 0, 0, 0}}), running_w());
  EXPECT_EQ(unit.outputs, DenseMatrix::from_rows({{1, 0}}));
}

TEST(RunTile, RequiresLoadedWeights) {
  SimState s(small_config(1, 2));
  EXPECT_THROW((void)run_tile(s, running_a(), running_w()), StateError);
}

TEST(RunTile, CycleCountMatchesFormula) {
  std::mt19937_64 rng(11);
  for (const auto rows : {1u, 2u, 255u, 256u, 257u, 600u}) {
    const auto cfg = small_config(3, 5);
    SimState s(cfg);
    const auto w = pack(random_structured(rng, 12, 5, cfg.pattern), cfg.pattern);
    load_weights(s, w);
    const auto res = run_tile(s, random_dense(rng, rows, 12), w);
    EXPECT_EQ(res.last_cycle - res.first_cycle + 1, tile_cycles(cfg, rows)) << rows;
    EXPECT_EQ(res.rounds.size(), (rows + 255) / 256);
  }
}

TEST(RunTile, MultiRoundCadence) {
  std::mt19937_64 rng(12);
  const auto cfg = small_config(2, 4);
  SimState s(cfg);
  const auto wd = random_structured(rng, 8, 4, cfg.pattern);
  const auto w = pack(wd, cfg.pattern);
  load_weights(s, w);
  const auto a = random_dense(rng, 600, 8);
  const auto res = run_tile(s, a, w);
  ASSERT_EQ(res.rounds.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(res.rounds[static_cast<std::size_t>(i)].round, i);
    EXPECT_FALSE(res.rounds[static_cast<std::size_t>(i)].flag);
  }
  // Each round checks exactly its own slice of rows.
  for (std::size_t i = 0; i < 3; ++i) {
    DenseMatrix part(std::min<std::size_t>(256, 600 - 256 * i), 8);
    for (std::size_t r = 0; r < part.rows(); ++r)
      for (std::size_t j = 0; j < 8; ++j) part(r, j) = a(256 * i + r, j);
    EXPECT_EQ(res.rounds[i].actual, checksum_identity(part, wd).dot_product);
  }
  EXPECT_EQ(res.outputs, matmul_ref(a, wd, cfg.col_out_width));
}

TEST(RunMatmul, MatchesOracleOnRandomTiles) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 5);
  std::uniform_int_distribution<std::size_t> rows(1, 40);
  std::uniform_int_distribution<std::size_t> kdim(1, 24);
  for (int trial = 0; trial < 1000; ++trial) {
    const SparsityPattern p = trial % 2 == 0 ? SparsityPattern{2, 4} : SparsityPattern{1, 4};
    const auto cfg = small_config(dim(rng), dim(rng), p);
    const auto k = kdim(rng);
    const auto cols = static_cast<std::size_t>(dim(rng) * 2);
    const auto a = random_dense(rng, rows(rng), k);
    const auto wd = random_structured(rng, k, cols, p);
    SimState s(cfg);
    const auto res = run_matmul(s, a, pack(wd, p));
    ASSERT_EQ(res.product, matmul_ref(a, wd, cfg.col_out_width)) << "trial " << trial;
    ASSERT_FALSE(any_flag(res.rounds)) << "trial " << trial;
    for (const auto& r : res.rounds) ASSERT_EQ(r.actual, r.predicted);
  }
}

TEST(RunMatmul, UnselectedActivationsDoNotMatter) {
  // Perturbing A at positions whose W row is entirely zero leaves C unchanged.
  std::mt19937_64 rng(31);
  const auto cfg = small_config(2, 3);
  for (int trial = 0; trial < 50; ++trial) {
    auto wd = random_structured(rng, 16, 6, cfg.pattern);
    std::vector<std::size_t> dead;
    for (std::size_t k = 0; k < 16; ++k) {
      if (k % 3 == 0) {
        for (std::size_t c = 0; c < 6; ++c) wd(k, c) = 0;
        dead.push_back(k);
      }
    }
    const auto w = pack(wd, cfg.pattern);
    auto a = random_dense(rng, 20, 16);
    SimState s1(cfg);
    const auto before = run_matmul(s1, a, w).product;
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (auto k : dead) a(i, k) = static_cast<std::int64_t>(rng() % 256) - 128;
    SimState s2(cfg);
    EXPECT_EQ(run_matmul(s2, a, w).product, before);
  }
}

TEST(RunMatmul, IdleSlotFlipsAreInvisible) {
  std::mt19937_64 rng(41);
  const auto cfg = small_config(2, 3, {1, 4});
  const auto wd = random_structured(rng, 8, 3, cfg.pattern);
  const auto w = pack(wd, cfg.pattern);
  const auto a = random_dense(rng, 30, 8);
  SimState clean(cfg);
  const auto golden_run = run_matmul(clean, a, w);
  std::uniform_int_distribution<int> r(0, 1), c(0, 2);
  for (int trial = 0; trial < 100; ++trial) {
    SimState s(cfg);
    const std::string tpe = "tpe[" + std::to_string(r(rng)) + "][" + std::to_string(c(rng)) + "]";
    const bool weight = trial % 2 == 0;
    const auto id = reg(s, tpe + (weight ? ".weight[1]" : ".index[1]"));
    const int bit = static_cast<int>(rng() % static_cast<unsigned>(weight ? 8 : 2));
    const std::vector<FaultSpec> f{{1 + rng() % golden_run.cycles, id, bit}};
    const auto res = run_matmul(s, a, w, f);
    EXPECT_EQ(res.product, golden_run.product);
    EXPECT_EQ(res.rounds, golden_run.rounds);
  }
}

TEST(RunMatmul, WeightFlipBeforeStreamingEscapesTheChecksum) {
  // A corrupted stationary weight is used for data and digit waves alike, so
  // actual and predicted agree on the wrong value.
  const auto cfg = small_config(1, 2);
  SimState s(cfg);
  load_weights(s, running_w());
  s.flip(reg(s, "tpe[0][0].weight[0]"), 1);
  const auto res = run_tile(s, running_a(), running_w());
  EXPECT_NE(res.outputs, DenseMatrix::from_rows({{-2, 16}, {-2, 36}}));
  ASSERT_EQ(res.rounds.size(), 1u);
  EXPECT_EQ(res.rounds[0].actual, res.rounds[0].predicted);
  EXPECT_NE(res.rounds[0].actual, 48);
}

TEST(RunMatmul, PsumFlipIsFlagged) {
  SimState s(small_config(1, 2));
  load_weights(s, running_w());
  const std::vector<FaultSpec> f{{2, reg(s, "tpe[0][0].psum"), 0}};
  const auto res = run_tile(s, running_a(), running_w(), f);
  EXPECT_EQ(res.outputs(0, 0), -1);
  EXPECT_TRUE(any_flag(res.rounds));
}

TEST(SimState, DigestTrajectoryIsDeterministic) {
  std::mt19937_64 rng(77);
  const auto cfg = small_config(3, 4);
  const auto w = pack(random_structured(rng, 12, 4, cfg.pattern), cfg.pattern);
  const auto a = random_dense(rng, 50, 12);
  SimState s1(cfg), s2(cfg);
  for (auto* s : {&s1, &s2}) {
    load_weights(*s, w);
    enqueue_rows(*s, a, {0, a.rows()});
    enqueue_checksum(*s);
  }
  std::vector<std::uint64_t> t1, t2;
  for (int i = 0; i < 80; ++i) {
    advance(s1);
    advance(s2);
    t1.push_back(s1.digest());
    t2.push_back(s2.digest());
  }
  EXPECT_EQ(t1, t2);
  EXPECT_NE(t1.front(), t1.back());
}

TEST(SimState, FlipChecksWidth) {
  SimState s(small_config(1, 1));
  EXPECT_THROW(s.flip(reg(s, "tpe[0][0].index[0]"), 2), ConfigError);
  s.flip(reg(s, "tpe[0][0].index[0]"), 1);
  EXPECT_EQ(s.tpe(0, 0).index[0], 2);
}

TEST(SimState, TraceEchoesWatchedRegisters) {
  SimState s(small_config(1, 2));
  std::ostringstream out;
  const auto psum = reg(s, "tpe[0][0].psum");
  s.set_trace(&out, {psum});
  load_weights(s, running_w());
  (void)run_tile(s, running_a(), running_w());
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "1,Stream," + std::to_string(psum.value) + ",0");
  std::getline(in, line);
  EXPECT_EQ(line, "2,Stream," + std::to_string(psum.value) + ",-2");
  std::size_t lines = 2;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, tile_cycles(s.config(), 2));
}
