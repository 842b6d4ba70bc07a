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

namespace sabft {

/// Two's-complement reading of the low `width` bits of `v` (1 <= width <= 64).
constexpr std::int64_t wrap(std::int64_t v, int width) noexcept {
  if (width >= 64) return v;
  const int shift = 64 - width;
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(v) << shift) >> shift;
}

/// Low `width` bits of `v`, zero-extended.
constexpr std::int64_t wrap_unsigned(std::int64_t v, int width) noexcept {
  if (width >= 64) return v;
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(v) &
                                   ((std::uint64_t{1} << width) - 1));
}

constexpr std::int64_t add_wrap(std::int64_t a, std::int64_t b, int width) noexcept {
  return wrap(static_cast<std::int64_t>(static_cast<std::uint64_t>(a) +
                                        static_cast<std::uint64_t>(b)),
              width);
}

constexpr std::int64_t shl_wrap(std::int64_t v, int shift, int width) noexcept {
  return wrap(static_cast<std::int64_t>(static_cast<std::uint64_t>(v) << shift), width);
}

constexpr std::int64_t min_signed(int width) noexcept {
  return width >= 64 ? INT64_MIN : -(std::int64_t{1} << (width - 1));
}

constexpr std::int64_t max_signed(int width) noexcept {
  return width >= 64 ? INT64_MAX : (std::int64_t{1} << (width - 1)) - 1;
}

constexpr bool fits_signed(std::int64_t v, int width) noexcept {
  return wrap(v, width) == v;
}

/// XOR-flips `bit`, then re-reads the register at its declared width.
constexpr std::int64_t flip_bit(std::int64_t v, int bit, int width, bool is_signed) noexcept {
  const auto flipped =
      static_cast<std::int64_t>(static_cast<std::uint64_t>(v) ^ (std::uint64_t{1} << bit));
  return is_signed ? wrap(flipped, width) : wrap_unsigned(flipped, width);
}

constexpr int ceil_log2(std::uint64_t x) noexcept {
  int bits = 0;
  while (bits < 63 && (std::uint64_t{1} << bits) < x) ++bits;
  return bits;
}

}  // namespace sabft
