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
#include <vector>

#include "sabft/error.hpp"
#include "sabft/fixed_width.hpp"
#include "sabft/sparsity.hpp"

// Golden models. All intermediate arithmetic is 64-bit and exact for the
// operand ranges used here; wrapping happens only at declared output widths.

namespace sabft {

/// C = A W, each element wrapped to `out_width` two's complement.
[[nodiscard]] inline DenseMatrix matmul_ref(const DenseMatrix& a, const DenseMatrix& w, int out_width) {
  if (a.cols() != w.rows())
    throw ShapeError("matmul_ref: A is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " but W has " + std::to_string(w.rows()) + " rows");
  DenseMatrix c(a.rows(), w.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const auto x = a(i, k);
      if (x == 0) continue;
      for (std::size_t j = 0; j < w.cols(); ++j) c(i, j) += x * w(k, j);
    }
  }
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) c(i, j) = wrap(c(i, j), out_width);
  return c;
}

[[nodiscard]] inline std::vector<std::int64_t> column_sums(const DenseMatrix& a) {
  std::vector<std::int64_t> out(a.cols(), 0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += a(i, j);
  return out;
}

[[nodiscard]] inline std::vector<std::int64_t> row_sums(const DenseMatrix& w) {
  std::vector<std::int64_t> out(w.rows(), 0);
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j) out[i] += w(i, j);
  return out;
}

struct ChecksumIdentity {
  std::int64_t sum_c = 0;        // sum of every element of the exact product
  std::int64_t dot_product = 0;  // dot(colsum(A), rowsum(W))
  bool equal = false;
};

/// Evaluates both sides of sum(A W) = colsum(A) . rowsum(W) independently.
[[nodiscard]] inline ChecksumIdentity checksum_identity(const DenseMatrix& a, const DenseMatrix& w) {
  if (a.cols() != w.rows()) throw ShapeError("checksum_identity: incompatible shapes");
  ChecksumIdentity out;
  // Left side straight from the element-wise product, no shared helpers.
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j)
      for (std::size_t k = 0; k < a.cols(); ++k) out.sum_c += a(i, k) * w(k, j);
  const auto cs = column_sums(a);
  const auto rs = row_sums(w);
  for (std::size_t k = 0; k < cs.size(); ++k) out.dot_product += cs[k] * rs[k];
  out.equal = out.sum_c == out.dot_product;
  return out;
}

struct GoldenResult {
  DenseMatrix product;  // wrapped at the output width
  std::int64_t total_checksum = 0;
  std::vector<std::int64_t> colsum_a;
  std::vector<std::int64_t> rowsum_w;
};

[[nodiscard]] inline GoldenResult golden(const DenseMatrix& a, const DenseMatrix& w, int out_width) {
  GoldenResult g;
  g.product = matmul_ref(a, w, out_width);
  g.colsum_a = column_sums(a);
  g.rowsum_w = row_sums(w);
  for (std::size_t k = 0; k < g.colsum_a.size(); ++k) g.total_checksum += g.colsum_a[k] * g.rowsum_w[k];
  return g;
}

}  // namespace sabft
