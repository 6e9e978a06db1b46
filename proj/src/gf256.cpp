/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "gf256.hpp"

#include <array>
#include <cstddef>

namespace nctcp::gf256 {

namespace detail {

namespace {

Tables build_tables() {
  Tables t{};
  unsigned x = 1;
  for (unsigned i = 0; i < 255; ++i) {
    t.exp[i] = static_cast<std::uint8_t>(x);
    t.log[x] = static_cast<std::uint8_t>(i);
    x = slow_mul(static_cast<std::uint8_t>(x), 2);
  }
  for (unsigned i = 255; i < 512; ++i) t.exp[i] = t.exp[i - 255];
  t.log[0] = 0;  // unused
  t.inv[0] = 0;
  for (unsigned a = 1; a < 256; ++a) t.inv[a] = t.exp[255 - t.log[a]];
  return t;
}

std::array<std::uint8_t, 256 * 256> build_mul() {
  const Tables& t = tables();
  std::array<std::uint8_t, 256 * 256> m{};
  for (unsigned a = 1; a < 256; ++a) {
    for (unsigned b = 1; b < 256; ++b) {
      m[(a << 8) | b] = t.exp[t.log[a] + t.log[b]];
    }
  }
  return m;
}

}  // namespace

const Tables& tables() {
  static const Tables t = build_tables();
  return t;
}

const std::uint8_t* mul_table() {
  static const auto m = build_mul();
  return m.data();
}

}  // namespace detail

void mul_add(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src, std::uint8_t c) {
  if (dst.size() != src.size()) throw std::invalid_argument("gf256::mul_add: length mismatch");
  if (c == 0) return;
  if (c == 1) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] ^= src[i];
    return;
  }
  const std::uint8_t* row = detail::mul_table() + (static_cast<unsigned>(c) << 8);
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] ^= row[src[i]];
}

void scale(std::span<std::uint8_t> buf, std::uint8_t c) {
  if (c == 1) return;
  const std::uint8_t* row = detail::mul_table() + (static_cast<unsigned>(c) << 8);
  for (auto& b : buf) b = row[b];
}

}  // namespace nctcp::gf256
