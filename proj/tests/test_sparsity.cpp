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
#include <set>
#include <sstream>
#include <tuple>

#include "sabft/matrix_io.hpp"
#include "sabft/sparsity.hpp"
#include "sabft/tiling.hpp"
#include "test_util.hpp"

using namespace sabft;
using sabft::testing::random_dense;
using sabft::testing::random_structured;

namespace {

constexpr SparsityPattern k24{2, 4};
constexpr SparsityPattern k14{1, 4};

DenseMatrix column(std::initializer_list<std::int64_t> v) {
  return DenseMatrix(v.size(), 1, std::vector<std::int64_t>(v));
}

/// Largest |.|-sum over every size-n subset of one block (brute force).
std::int64_t best_subset_magnitude(const std::vector<std::int64_t>& block, int n) {
  std::int64_t best = 0;
  const int m = static_cast<int>(block.size());
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    if (std::popcount(mask) != n) continue;
    std::int64_t s = 0;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) s += std::abs(block[static_cast<std::size_t>(i)]);
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

TEST(SparsityPattern, ParsesAndValidates) {
  EXPECT_EQ(SparsityPattern::parse("2:4"), k24);
  EXPECT_EQ(SparsityPattern::parse("3:4"), (SparsityPattern{3, 4}));
  EXPECT_THROW((void)SparsityPattern::parse("5:4"), ConfigError);
  EXPECT_THROW((void)SparsityPattern::parse("0:4"), ConfigError);
  EXPECT_THROW((void)SparsityPattern::parse("24"), ParseError);
  EXPECT_THROW((void)SparsityPattern::parse("2:x"), ParseError);
}

TEST(DenseMatrix, RejectsLengthMismatch) {
  EXPECT_THROW(DenseMatrix(2, 2, {1, 2, 3}), ShapeError);
}

TEST(ValidateStructured, ZeroMatrixIsValid) {
  EXPECT_TRUE(validate_structured(DenseMatrix(8, 3), k24).valid);
  EXPECT_TRUE(validate_structured(DenseMatrix(5, 7), k14).valid);
}

TEST(ValidateStructured, ReportsEveryViolation) {
  const auto w = DenseMatrix::from_rows({{5, 1}, {0, 1}, {0, 1}, {0, 0}});
  const auto report = validate_structured(w, k24);
  EXPECT_FALSE(report.valid);
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.violations[0], (Violation{0, 1, 3}));
}

TEST(ValidateStructured, AcceptsTwoPerBlock) {
  const auto w = DenseMatrix::from_rows({{1, 0}, {0, 2}, {-1, 0}, {0, 3}});
  // Brute-force count per block-column.
  for (std::size_t c = 0; c < 2; ++c) {
    int nz = 0;
    for (std::size_t r = 0; r < 4; ++r) nz += w(r, c) != 0;
    EXPECT_LE(nz, 2);
  }
  EXPECT_TRUE(validate_structured(w, k24).valid);
}

TEST(ValidateStructured, PadsPartialBlocks) {
  // 6 rows: second block holds rows 4..5 plus two padding zeros.
  const auto w = column({0, 0, 0, 0, 1, 2});
  EXPECT_TRUE(validate_structured(w, k24).valid);
  EXPECT_FALSE(validate_structured(w, k14).valid);
}

TEST(PruneMagnitude, KeepsLargestMagnitudes) {
  const auto p = prune_magnitude(column({5, -2, 0, 3}), k24);
  EXPECT_EQ(p.block(0, 0).mask, 0b1001u);
  EXPECT_EQ(p.block(0, 0).values, (std::vector<std::int64_t>{5, 3}));
  EXPECT_EQ(best_subset_magnitude({5, -2, 0, 3}, 2), 8);
}

TEST(PruneMagnitude, BreaksTiesByLowerRow) {
  const auto p = prune_magnitude(column({3, -3, 3, 0}), k24);
  EXPECT_EQ(p.block(0, 0).mask, 0b0011u);
  EXPECT_EQ(p.block(0, 0).values, (std::vector<std::int64_t>{3, -3}));
}

TEST(PruneMagnitude, ZeroBlockStaysEmpty) {
  for (const auto pat : {k24, k14}) {
    const auto p = prune_magnitude(column({0, 0, 0, 0}), pat);
    EXPECT_EQ(p.block(0, 0).mask, 0u);
    EXPECT_TRUE(p.block(0, 0).values.empty());
  }
}

TEST(PruneMagnitude, PropertyValidAndOptimal) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto pat = trial % 2 ? k24 : k14;
    const auto w = random_dense(rng, 4 * (1 + trial % 5), 1 + trial % 7, -6, 6);
    const auto pruned = prune_magnitude(w, pat);
    const auto dense = unpack(pruned);
    ASSERT_TRUE(validate_structured(dense, pat).valid);
    for (std::size_t b = 0; b < pruned.block_rows(); ++b) {
      for (std::size_t c = 0; c < w.cols(); ++c) {
        std::vector<std::int64_t> block(4);
        std::int64_t kept = 0;
        for (std::size_t i = 0; i < 4; ++i) {
          block[i] = w(b * 4 + i, c);
          kept += std::abs(dense(b * 4 + i, c));
          // Kept entries are copies of the originals.
          if (dense(b * 4 + i, c) != 0) {
            ASSERT_EQ(dense(b * 4 + i, c), w(b * 4 + i, c));
          }
        }
        ASSERT_EQ(kept, best_subset_magnitude(block, pat.n));
      }
    }
  }
}

TEST(Pack, BitIEqualsRowI) {
  const auto p = pack(column({1, 0, -1, 0}), k24);
  EXPECT_EQ(p.block(0, 0).values, (std::vector<std::int64_t>{1, -1}));
  EXPECT_EQ(p.block(0, 0).indexes, (std::vector<int>{0, 2}));
  EXPECT_EQ(p.block(0, 0).mask, 0b0101u);
}

TEST(Pack, SingleElementOneFour) {
  const auto p = pack(column({0, 0, 7, 0}), k14);
  EXPECT_EQ(p.block(0, 0).values, (std::vector<std::int64_t>{7}));
  EXPECT_EQ(p.block(0, 0).indexes, (std::vector<int>{2}));
  EXPECT_EQ(p.block(0, 0).mask, 0b0100u);
}

TEST(Pack, ZeroRoundTrip) {
  const DenseMatrix z(12, 5);
  EXPECT_EQ(unpack(pack(z, k24)), z);
}

TEST(Pack, InvalidMatrixCarriesReport) {
  const auto w = DenseMatrix::from_rows({{5, 1}, {0, 1}, {0, 1}, {0, 0}});
  try {
    (void)pack(w, k24);
    FAIL() << "expected SparsityViolation";
  } catch (const SparsityViolation& e) {
    ASSERT_EQ(e.report().violations.size(), 1u);
    EXPECT_EQ(e.report().violations[0].count, 3);
  }
}

TEST(Pack, PropertyRoundTrip) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const SparsityPattern pat{1 + trial % 4, 4};
    const auto w = random_structured(rng, 1 + static_cast<std::size_t>(trial % 23), 1 + static_cast<std::size_t>(trial % 9), pat);
    ASSERT_TRUE(validate_structured(w, pat).valid);
    const auto packed = pack(w, pat);
    ASSERT_EQ(unpack(packed), w);
    for (std::size_t b = 0; b < packed.block_rows(); ++b)
      for (std::size_t c = 0; c < packed.cols(); ++c)
        ASSERT_LE(static_cast<int>(packed.block(b, c).values.size()), pat.n);
  }
}

TEST(StructuredSparseMatrix, SetBlockEnforcesInvariants) {
  StructuredSparseMatrix w(4, 1, k24);
  EXPECT_THROW(w.set_block(0, 0, SparseBlock::from_mask(0b0111, {1, 2, 3})), SparsityViolation);
  EXPECT_THROW(w.set_block(0, 0, SparseBlock::from_mask(0b0011, {1})), ShapeError);
  EXPECT_THROW(w.set_block(0, 0, SparseBlock::from_mask(0b10000, {})), ShapeError);
  EXPECT_THROW(w.set_block(1, 0, SparseBlock{}), ShapeError);
  EXPECT_NO_THROW(w.set_block(0, 0, SparseBlock::from_mask(0b1010, {4, -4})));
}

TEST(StructuredSparseMatrix, SliceZeroPads) {
  const auto w = DenseMatrix::from_rows({{1, 2}, {0, 0}, {0, 0}, {3, 0}, {0, 5}, {6, 0}});
  const auto packed = pack(w, k24);
  const auto tile = packed.slice(4, 1, 8, 3);
  const auto dense = unpack(tile);
  ASSERT_EQ(dense.rows(), 8u);
  ASSERT_EQ(dense.cols(), 3u);
  EXPECT_EQ(dense(0, 0), 5);
  EXPECT_EQ(dense(1, 0), 0);
  for (std::size_t r = 0; r < 8; ++r) {
    EXPECT_EQ(dense(r, 1), 0);
    EXPECT_EQ(dense(r, 2), 0);
  }
}

TEST(TilePlan, EverythingFits) {
  ArrayConfig cfg;
  cfg.rows = 1;
  cfg.cols = 2;
  const auto plan = tile_plan(2, 4, 2, cfg);
  ASSERT_EQ(plan.tiles.size(), 1u);
  EXPECT_EQ(plan.flush_interval, 256u);
  EXPECT_EQ(plan.rounds(plan.tiles[0]).size(), 1u);
}

TEST(TilePlan, FlushIntervalFromWidths) {
  ArrayConfig cfg;
  EXPECT_EQ(cfg.flush_interval(), 256);
  cfg.ic_width = 24;
  EXPECT_EQ(cfg.flush_interval(), 65536);
}

TEST(TilePlan, MultiTileMultiRound) {
  ArrayConfig cfg;  // R = 8 (m*R = 32), C = 32
  const auto plan = tile_plan(300, 64, 64, cfg);
  ASSERT_EQ(plan.tiles.size(), 4u);
  for (const auto& t : plan.tiles) {
    const auto rounds = plan.rounds(t);
    ASSERT_EQ(rounds.size(), 2u);
    EXPECT_EQ(rounds[0], (IndexRange{0, 256}));
    EXPECT_EQ(rounds[1], (IndexRange{256, 300}));
  }
}

TEST(TilePlan, PropertyCoversEachProductIndexOnce) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> dim(1, 40);
  for (int trial = 0; trial < 60; ++trial) {
    ArrayConfig cfg;
    cfg.rows = 1 + trial % 3;
    cfg.cols = 1 + trial % 5;
    const std::size_t a = dim(rng), k = dim(rng), n = dim(rng);
    const auto plan = tile_plan(a, k, n, cfg);
    std::vector<int> hits(a * k * n, 0);
    for (const auto& t : plan.tiles) {
      ASSERT_LE(t.k.size(), plan.k_chunk);
      ASSERT_LE(t.cols.size(), plan.col_chunk);
      for (const auto& round : plan.rounds(t))
        for (std::size_t i = round.begin; i < round.end; ++i)
          for (std::size_t kk = t.k.begin; kk < t.k.end; ++kk)
            for (std::size_t c = t.cols.begin; c < t.cols.end; ++c) ++hits[(i * k + kk) * n + c];
    }
    for (int h : hits) ASSERT_EQ(h, 1);
  }
}

TEST(MatrixIo, DenseRoundTrip) {
  const auto m = DenseMatrix::from_rows({{1, -2, 3}, {0, 127, -128}});
  std::stringstream ss;
  write_dense(ss, m);
  EXPECT_EQ(ss.str(), "2 3\n1 -2 3\n0 127 -128\n");
  EXPECT_EQ(read_dense(ss), m);
}

TEST(MatrixIo, PackedFormat) {
  const auto w = DenseMatrix::from_rows({{1, 0}, {0, 2}, {-1, 0}, {0, 3}});
  std::stringstream ss;
  write_packed(ss, pack(w, k24));
  EXPECT_EQ(ss.str(), "4 2 2 4\n0101 1 -1\n1010 2 3\n");
  EXPECT_EQ(unpack(read_packed(ss)), w);
}

TEST(MatrixIo, RejectsMalformedInput) {
  std::stringstream short_row("2 2\n1 2\n3\n");
  EXPECT_THROW((void)read_dense(short_row), ParseError);
  std::stringstream bad_int("1 2\n1 x\n");
  EXPECT_THROW((void)read_dense(bad_int), ParseError);
  std::stringstream bad_mask("4 1 2 4\n01a1 1 2\n");
  EXPECT_THROW((void)read_packed(bad_mask), ParseError);
  std::stringstream too_many("4 1 2 4\n0111 1 2 3\n");
  EXPECT_THROW((void)read_packed(too_many), ParseError);
  std::stringstream missing("4 2 2 4\n0001 1\n");
  EXPECT_THROW((void)read_packed(missing), ParseError);
}
