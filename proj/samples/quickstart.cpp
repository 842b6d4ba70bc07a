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

// Runs a small 2:4 multiplication on a 2x4 array, prints the product and the
// checksum rounds, then repeats it with one weight bit flipped mid-stream.

#include <iostream>
#include <random>

#include "sabft/sabft.hpp"

int main() {
  using namespace sabft;

  ArrayConfig cfg;
  cfg.rows = 2;
  cfg.cols = 4;

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> val(-128, 127);
  DenseMatrix a(6, 8), w(8, 4);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) = val(rng);
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j) w(i, j) = val(rng);
  const auto packed = prune_magnitude(w, cfg.pattern);

  SimState clean(cfg);
  const auto res = run_matmul(clean, a, packed);
  write_dense(std::cout, res.product);
  std::cout << "matches oracle: " << (res.product == matmul_ref(a, unpack(packed), cfg.col_out_width)) << '\n';
  for (const auto& r : res.rounds)
    std::cout << "round " << r.round << ": actual " << r.actual << " predicted " << r.predicted << '\n';

  SimState faulty(cfg);
  const auto weight = *faulty.registers().find("tpe[0][1].weight[0]");
  const std::vector<FaultSpec> faults{{4, weight, 6}};
  const auto bad = run_matmul(faulty, a, packed, faults);
  for (const auto& r : bad.rounds)
    std::cout << "faulty round " << r.round << ": actual " << r.actual << " predicted " << r.predicted
              << (r.flag ? "  <-- flagged" : "") << '\n';
}
