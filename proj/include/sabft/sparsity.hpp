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
#include <bit>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sabft/error.hpp"
#include "sabft/fixed_width.hpp"

namespace sabft {

/// N:M structured sparsity: at most `n` non-zeros in every aligned block of
/// `m` consecutive rows of a column.
struct SparsityPattern {
  int n = 2;
  int m = 4;

  static constexpr int kMaxBlock = 16;

  void validate() const {
    if (m < 1 || m > kMaxBlock) throw ConfigError("block length m must be in [1, 16]");
    if (n < 1 || n > m) throw ConfigError("pattern " + str() + " violates 1 <= n <= m");
  }

  [[nodiscard]] std::string str() const { return std::to_string(n) + ":" + std::to_string(m); }

  /// Parses "n:m"; throws ParseError on syntax, ConfigError on n > m.
  static SparsityPattern parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw ParseError("pattern must look like n:m");
    SparsityPattern p{};
    auto read = [&](std::string_view s, int& out) {
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
      if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw ParseError("bad pattern '" + std::string(text) + "'");
    };
    read(text.substr(0, colon), p.n);
    read(text.substr(colon + 1), p.m);
    p.validate();
    return p;
  }

  friend bool operator==(const SparsityPattern&, const SparsityPattern&) = default;
};

/// Row-major signed integer matrix (houses the dense input matrix A, outputs,
/// and unpacked weights).
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<std::int64_t> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw ShapeError("matrix data length " + std::to_string(data_.size()) + " != " +
                       std::to_string(rows_) + "x" + std::to_string(cols_));
  }

  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<std::int64_t>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<std::int64_t> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
      if (row.size() != c) throw ShapeError("ragged row list");
      data.insert(data.end(), row.begin(), row.end());
    }
    return DenseMatrix(r, c, std::move(data));
  }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] std::int64_t operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::int64_t& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  [[nodiscard]] std::span<const std::int64_t> data() const noexcept { return data_; }
  [[nodiscard]] std::span<const std::int64_t> row(std::size_t i) const {
    return std::span<const std::int64_t>(data_).subspan(i * cols_, cols_);
  }

  [[nodiscard]] bool fits_width(int width) const noexcept {
    return std::all_of(data_.begin(), data_.end(), [&](std::int64_t v) { return fits_signed(v, width); });
  }

  [[nodiscard]] bool is_zero() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](std::int64_t v) { return v == 0; });
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::int64_t> data_;
};

/// One (block-row, column) cell of packed storage. Bit i of `mask` is set iff
/// row offset i of the block is stored; `values` follow ascending offsets.
struct SparseBlock {
  std::uint32_t mask = 0;
  std::vector<std::int64_t> values;
  std::vector<int> indexes;

  static SparseBlock from_mask(std::uint32_t mask, std::vector<std::int64_t> values) {
    SparseBlock b{mask, std::move(values), {}};
    for (int i = 0; i < 32; ++i)
      if (mask & (1u << i)) b.indexes.push_back(i);
    return b;
  }

  friend bool operator==(const SparseBlock&, const SparseBlock&) = default;
};

struct Violation {
  std::size_t block = 0;
  std::size_t col = 0;
  int count = 0;
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  bool valid = true;
  std::vector<Violation> violations;
};

class SparsityViolation : public Error {
 public:
  explicit SparsityViolation(ValidationReport report)
      : Error("matrix violates structured sparsity in " + std::to_string(report.violations.size()) +
              " block(s)"),
        report_(std::move(report)) {}
  [[nodiscard]] const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

/// Packed N:M matrix (houses the weight matrix W). Logical rows are padded up
/// to a whole number of blocks; padding rows read as zero.
class StructuredSparseMatrix {
 public:
  StructuredSparseMatrix() = default;
  StructuredSparseMatrix(std::size_t rows, std::size_t cols, SparsityPattern pattern)
      : rows_(rows), cols_(cols), pattern_(pattern) {
    pattern_.validate();
    blocks_.resize(block_rows() * cols_);
  }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] const SparsityPattern& pattern() const noexcept { return pattern_; }
  [[nodiscard]] std::size_t block_rows() const noexcept {
    return (rows_ + static_cast<std::size_t>(pattern_.m) - 1) / static_cast<std::size_t>(pattern_.m);
  }

  [[nodiscard]] const SparseBlock& block(std::size_t block_row, std::size_t col) const {
    return blocks_.at(block_row * cols_ + col);
  }

  /// Replaces one block; enforces every packed-storage invariant.
  void set_block(std::size_t block_row, std::size_t col, SparseBlock b) {
    if (block_row >= block_rows() || col >= cols_) throw ShapeError("block coordinate out of range");
    const int m = pattern_.m;
    if (m < 32 && (b.mask >> m) != 0) throw ShapeError("mask has bits beyond block length");
    const int pop = std::popcount(b.mask);
    if (pop > pattern_.n) throw SparsityViolation({false, {{block_row, col, pop}}});
    if (static_cast<int>(b.values.size()) != pop || b.indexes.size() != b.values.size())
      throw ShapeError("value/index count does not match mask popcount");
    for (std::size_t i = 0; i < b.indexes.size(); ++i) {
      const int idx = b.indexes[i];
      if (idx < 0 || idx >= m || !(b.mask & (1u << idx)) || (i > 0 && b.indexes[i - 1] >= idx))
        throw ShapeError("indexes must be ascending and agree with the mask");
      const auto row = block_row * static_cast<std::size_t>(m) + static_cast<std::size_t>(idx);
      if (row >= rows_ && b.values[i] != 0) throw ShapeError("non-zero stored in padding row");
    }
    blocks_[block_row * cols_ + col] = std::move(b);
  }

  [[nodiscard]] std::size_t nonzeros() const noexcept {
    std::size_t count = 0;
    for (const auto& b : blocks_)
      count += static_cast<std::size_t>(std::count_if(b.values.begin(), b.values.end(),
                                                      [](std::int64_t v) { return v != 0; }));
    return count;
  }

  /// Sub-matrix starting at block-aligned `row_begin`, zero-padded to
  /// `out_rows` x `out_cols`.
  [[nodiscard]] StructuredSparseMatrix slice(std::size_t row_begin, std::size_t col_begin,
                                             std::size_t out_rows, std::size_t out_cols) const {
    const auto m = static_cast<std::size_t>(pattern_.m);
    if (row_begin % m != 0) throw ShapeError("slice must start on a block boundary");
    StructuredSparseMatrix out(out_rows, out_cols, pattern_);
    const std::size_t first_block = row_begin / m;
    for (std::size_t br = 0; br < out.block_rows() && first_block + br < block_rows(); ++br) {
      for (std::size_t c = 0; c < out_cols && col_begin + c < cols_; ++c) {
        SparseBlock b = block(first_block + br, col_begin + c);
        // Drop stored rows that fall outside the slice height.
        SparseBlock kept;
        for (std::size_t i = 0; i < b.indexes.size(); ++i) {
          if (br * m + static_cast<std::size_t>(b.indexes[i]) < out_rows) {
            kept.mask |= 1u << b.indexes[i];
            kept.values.push_back(b.values[i]);
            kept.indexes.push_back(b.indexes[i]);
          }
        }
        out.set_block(br, c, std::move(kept));
      }
    }
    return out;
  }

  friend bool operator==(const StructuredSparseMatrix&, const StructuredSparseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  SparsityPattern pattern_{};
  std::vector<SparseBlock> blocks_;
};

namespace detail {
inline std::int64_t padded_at(const DenseMatrix& w, std::size_t row, std::size_t col) {
  return row < w.rows() ? w(row, col) : 0;
}
}  // namespace detail

[[nodiscard]] inline ValidationReport validate_structured(const DenseMatrix& w, SparsityPattern pattern) {
  pattern.validate();
  const auto m = static_cast<std::size_t>(pattern.m);
  const std::size_t blocks = (w.rows() + m - 1) / m;
  ValidationReport report;
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t c = 0; c < w.cols(); ++c) {
      int count = 0;
      for (std::size_t i = 0; i < m; ++i) count += detail::padded_at(w, b * m + i, c) != 0;
      if (count > pattern.n) report.violations.push_back({b, c, count});
    }
  }
  report.valid = report.violations.empty();
  return report;
}

/// Keeps the `n` largest-magnitude entries of every column block (lower row
/// offset wins ties); zeros are never stored.
[[nodiscard]] inline StructuredSparseMatrix prune_magnitude(const DenseMatrix& w, SparsityPattern pattern) {
  StructuredSparseMatrix out(w.rows(), w.cols(), pattern);
  const auto m = static_cast<std::size_t>(pattern.m);
  std::vector<int> order(m);
  for (std::size_t b = 0; b < out.block_rows(); ++b) {
    for (std::size_t c = 0; c < w.cols(); ++c) {
      std::iota(order.begin(), order.end(), 0);
      auto mag = [&](int i) {
        const auto v = detail::padded_at(w, b * m + static_cast<std::size_t>(i), c);
        return v < 0 ? -v : v;
      };
      std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return mag(x) > mag(y); });
      std::uint32_t mask = 0;
      for (int k = 0; k < pattern.n; ++k)
        if (mag(order[static_cast<std::size_t>(k)]) != 0) mask |= 1u << order[static_cast<std::size_t>(k)];
      std::vector<std::int64_t> values;
      for (std::size_t i = 0; i < m; ++i)
        if (mask & (1u << i)) values.push_back(detail::padded_at(w, b * m + i, c));
      out.set_block(b, c, SparseBlock::from_mask(mask, std::move(values)));
    }
  }
  return out;
}

/// Packs an already-valid N:M matrix; throws SparsityViolation otherwise.
[[nodiscard]] inline StructuredSparseMatrix pack(const DenseMatrix& w, SparsityPattern pattern) {
  auto report = validate_structured(w, pattern);
  if (!report.valid) throw SparsityViolation(std::move(report));
  StructuredSparseMatrix out(w.rows(), w.cols(), pattern);
  const auto m = static_cast<std::size_t>(pattern.m);
  for (std::size_t b = 0; b < out.block_rows(); ++b) {
    for (std::size_t c = 0; c < w.cols(); ++c) {
      std::uint32_t mask = 0;
      std::vector<std::int64_t> values;
      for (std::size_t i = 0; i < m; ++i) {
        const auto v = detail::padded_at(w, b * m + i, c);
        if (v != 0) {
          mask |= 1u << i;
          values.push_back(v);
        }
      }
      out.set_block(b, c, SparseBlock::from_mask(mask, std::move(values)));
    }
  }
  return out;
}

[[nodiscard]] inline DenseMatrix unpack(const StructuredSparseMatrix& sw) {
  DenseMatrix out(sw.rows(), sw.cols());
  const auto m = static_cast<std::size_t>(sw.pattern().m);
  for (std::size_t b = 0; b < sw.block_rows(); ++b) {
    for (std::size_t c = 0; c < sw.cols(); ++c) {
      const auto& blk = sw.block(b, c);
      for (std::size_t i = 0; i < blk.indexes.size(); ++i) {
        const auto row = b * m + static_cast<std::size_t>(blk.indexes[i]);
        if (row < sw.rows()) out(row, c) = blk.values[i];
      }
    }
  }
  return out;
}

}  // namespace sabft
