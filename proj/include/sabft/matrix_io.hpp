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

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sabft/error.hpp"
#include "sabft/sparsity.hpp"

// Text formats.
//
// Dense:  line 1 "rows cols", then one line of space-separated signed
//         integers per row.
// Packed: line 1 "rows cols n m", then one line per (block-row, column) in
//         block-row-major order: "mask v0 [v1 ...]". The mask is written as m
//         binary digits, most significant first, so bit i (row offset i of
//         the block) is the i-th character from the right.

namespace sabft {

namespace detail {

inline std::string next_content_line(std::istream& in, const char* what) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) return line;
  }
  throw ParseError(std::string("unexpected end of input while reading ") + what);
}

inline std::vector<std::int64_t> parse_ints(const std::string& line, const char* what) {
  std::istringstream ss(line);
  std::vector<std::int64_t> out;
  std::string tok;
  while (ss >> tok) {
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      throw ParseError(std::string("bad integer '") + tok + "' in " + what);
    }
    if (used != tok.size()) throw ParseError(std::string("bad integer '") + tok + "' in " + what);
    out.push_back(v);
  }
  return out;
}

}  // namespace detail

[[nodiscard]] inline DenseMatrix read_dense(std::istream& in) {
  const auto header = detail::parse_ints(detail::next_content_line(in, "dense header"), "dense header");
  if (header.size() != 2 || header[0] < 0 || header[1] < 0) throw ParseError("dense header must be 'rows cols'");
  const auto rows = static_cast<std::size_t>(header[0]);
  const auto cols = static_cast<std::size_t>(header[1]);
  std::vector<std::int64_t> data;
  data.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto vals = detail::parse_ints(detail::next_content_line(in, "dense row"), "dense row");
    if (vals.size() != cols)
      throw ParseError("row " + std::to_string(i) + " has " + std::to_string(vals.size()) + " values, expected " +
                       std::to_string(cols));
    data.insert(data.end(), vals.begin(), vals.end());
  }
  return DenseMatrix(rows, cols, std::move(data));
}

inline void write_dense(std::ostream& out, const DenseMatrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? " " : "") << m(i, j);
    out << '\n';
  }
}

[[nodiscard]] inline std::string mask_string(std::uint32_t mask, int m) {
  std::string s(static_cast<std::size_t>(m), '0');
  for (int i = 0; i < m; ++i)
    if (mask & (1u << i)) s[static_cast<std::size_t>(m - 1 - i)] = '1';
  return s;
}

[[nodiscard]] inline std::uint32_t parse_mask(const std::string& s, int m) {
  if (static_cast<int>(s.size()) != m) throw ParseError("mask '" + s + "' must have " + std::to_string(m) + " digits");
  std::uint32_t mask = 0;
  for (int i = 0; i < m; ++i) {
    const char ch = s[static_cast<std::size_t>(m - 1 - i)];
    if (ch == '1') mask |= 1u << i;
    else if (ch != '0') throw ParseError("mask '" + s + "' is not binary");
  }
  return mask;
}

[[nodiscard]] inline StructuredSparseMatrix read_packed(std::istream& in) {
  const auto header = detail::parse_ints(detail::next_content_line(in, "packed header"), "packed header");
  if (header.size() != 4 || header[0] < 0 || header[1] < 0)
    throw ParseError("packed header must be 'rows cols n m'");
  SparsityPattern pattern{static_cast<int>(header[2]), static_cast<int>(header[3])};
  try {
    pattern.validate();
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  }
  StructuredSparseMatrix out(static_cast<std::size_t>(header[0]), static_cast<std::size_t>(header[1]), pattern);
  for (std::size_t b = 0; b < out.block_rows(); ++b) {
    for (std::size_t c = 0; c < out.cols(); ++c) {
      std::istringstream ss(detail::next_content_line(in, "packed block"));
      std::string mask_tok;
      ss >> mask_tok;
      std::string rest;
      std::getline(ss, rest);
      auto blk = SparseBlock::from_mask(parse_mask(mask_tok, pattern.m), detail::parse_ints(rest, "packed block"));
      try {
        out.set_block(b, c, std::move(blk));
      } catch (const Error& e) {
        throw ParseError("block (" + std::to_string(b) + ", " + std::to_string(c) + "): " + e.what());
      }
    }
  }
  return out;
}

inline void write_packed(std::ostream& out, const StructuredSparseMatrix& w) {
  out << w.rows() << ' ' << w.cols() << ' ' << w.pattern().n << ' ' << w.pattern().m << '\n';
  for (std::size_t b = 0; b < w.block_rows(); ++b) {
    for (std::size_t c = 0; c < w.cols(); ++c) {
      const auto& blk = w.block(b, c);
      out << mask_string(blk.mask, w.pattern().m);
      for (auto v : blk.values) out << ' ' << v;
      out << '\n';
    }
  }
}

template <typename T, typename Reader>
[[nodiscard]] T read_file(const std::string& path, Reader reader) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return reader(in);
}

template <typename Writer>
void write_file(const std::string& path, Writer writer) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  writer(out);
  if (!out) throw IoError("write failed for " + path);
}

[[nodiscard]] inline DenseMatrix load_dense(const std::string& path) {
  return read_file<DenseMatrix>(path, [](std::istream& in) { return read_dense(in); });
}

[[nodiscard]] inline StructuredSparseMatrix load_packed(const std::string& path) {
  return read_file<StructuredSparseMatrix>(path, [](std::istream& in) { return read_packed(in); });
}

}  // namespace sabft
