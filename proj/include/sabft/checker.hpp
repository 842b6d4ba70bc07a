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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sabft/config.hpp"
#include "sabft/error.hpp"
#include "sabft/fixed_width.hpp"

namespace sabft {

/// Splits an accumulated checksum into ic_width/input_width signed digits,
/// least significant first: sum_k digit_k * 2^(input_width*k) == v.
///
/// Digit 0 is the low input_width bits read as a signed value; each higher
/// digit absorbs the borrow of the one below. Throws RepresentabilityError if
/// the top digit does not fit input_width, which only happens when more than
/// flush_interval() rows were accumulated.
[[nodiscard]] inline std::vector<std::int64_t> split_digits(std::int64_t v, int input_width, int ic_width) {
  if (!fits_signed(v, ic_width))
    throw RepresentabilityError(std::to_string(v) + " does not fit " + std::to_string(ic_width) + " bits");
  const int d = ic_width / input_width;
  std::vector<std::int64_t> digits;
  digits.reserve(static_cast<std::size_t>(d));
  std::int64_t rest = v;
  for (int k = 0; k < d - 1; ++k) {
    const auto digit = wrap(rest, input_width);
    digits.push_back(digit);
    rest = (rest - digit) >> input_width;
  }
  if (!fits_signed(rest, input_width))
    throw RepresentabilityError("checksum " + std::to_string(v) + " needs a top digit of " +
                                std::to_string(rest));
  digits.push_back(rest);
  return digits;
}

/// Digit `k` as produced by the IC output mux. Identical to split_digits for
/// representable values; a corrupted accumulator yields the truncated digit
/// instead of an error, as the hardware would.
[[nodiscard]] inline std::int64_t hardware_digit(std::int64_t v, int k, int input_width, int ic_width) noexcept {
  const int d = ic_width / input_width;
  std::int64_t rest = wrap(v, ic_width);
  for (int i = 0; i < k && i < d - 1; ++i) {
    const auto digit = wrap(rest, input_width);
    rest = (rest - digit) >> input_width;
  }
  return wrap(rest, input_width);
}

/// West-edge input accumulators of one TPE row, one per lane.
struct IcBlock {
  std::array<std::int64_t, SparsityPattern::kMaxBlock> acc{};

  void accumulate(const std::int64_t* lanes, int m, int ic_width) noexcept {
    for (int j = 0; j < m; ++j) acc[static_cast<std::size_t>(j)] = add_wrap(acc[static_cast<std::size_t>(j)], lanes[j], ic_width);
  }
  void clear() noexcept { acc.fill(0); }
};

struct ChecksumRoundResult {
  int round = 0;
  std::int64_t actual = 0;
  std::int64_t predicted = 0;
  bool flag = false;
  friend bool operator==(const ChecksumRoundResult&, const ChecksumRoundResult&) = default;
};

/// South-east corner accumulators.
struct ChecksumAccums {
  std::int64_t actual = 0;
  std::int64_t predicted = 0;

  /// Data wave: actual += wave_sum (sign-extended from the OC chain).
  void actual_accumulate(std::int64_t wave_sum, const ArrayConfig& cfg) noexcept {
    actual = add_wrap(actual, wave_sum, cfg.cksum_width);
  }

  /// Checksum digit wave k: predicted += wave_sum << (input_width * k).
  void predicted_accumulate(std::int64_t wave_sum, int digit_k, const ArrayConfig& cfg) noexcept {
    predicted = add_wrap(predicted, shl_wrap(wave_sum, cfg.input_width * digit_k, cfg.cksum_width),
                         cfg.cksum_width);
  }

  [[nodiscard]] ChecksumRoundResult compare(int round) const noexcept {
    return {round, actual, predicted, actual != predicted};
  }

  void clear() noexcept { actual = predicted = 0; }
};

/// Complete checker state embedded in the simulator.
struct CheckerState {
  std::vector<IcBlock> ic;          // one per TPE row
  std::vector<std::int64_t> oc;     // one per column
  ChecksumAccums accums;

  explicit CheckerState(const ArrayConfig& cfg = {})
      : ic(static_cast<std::size_t>(cfg.rows)), oc(static_cast<std::size_t>(cfg.cols), 0) {}
};

}  // namespace sabft
