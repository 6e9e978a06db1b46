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

#ifndef NCTCP_GF256_HPP
#define NCTCP_GF256_HPP

// GF(2^8) in polynomial basis, reduced by x^8 + x^4 + x^3 + x^2 + 1 (0x11D).
// Generator 2 is primitive for this polynomial.

#include <cstdint>
#include <span>
#include <stdexcept>

namespace nctcp::gf256 {

inline constexpr unsigned kPolynomial = 0x11D;

namespace detail {

struct Tables {
  std::uint8_t exp[512];
  std::uint8_t log[256];
  std::uint8_t inv[256];
};

const Tables& tables();
// 256 x 256 product table, row-major by the first factor.
const std::uint8_t* mul_table();

}  // namespace detail

/// Multiply without tables, shift-and-add with reduction. Used to build the
/// tables and by tests as an independent route.
constexpr std::uint8_t slow_mul(std::uint8_t a, std::uint8_t b) {
  unsigned acc = 0;
  unsigned x = a;
  for (unsigned y = b; y != 0; y >>= 1) {
    if (y & 1u) acc ^= x;
    x <<= 1;
    if (x & 0x100u) x ^= kPolynomial;
  }
  return static_cast<std::uint8_t>(acc);
}

inline std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
  return detail::mul_table()[(static_cast<unsigned>(a) << 8) | b];
}

inline std::uint8_t inv(std::uint8_t a) {
  if (a == 0) throw std::domain_error("gf256: zero has no inverse");
  return detail::tables().inv[a];
}

inline std::uint8_t div(std::uint8_t a, std::uint8_t b) { return mul(a, inv(b)); }

/// dst[i] ^= c * src[i]
void mul_add(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src, std::uint8_t c);

/// buf[i] *= c
void scale(std::span<std::uint8_t> buf, std::uint8_t c);

/// Field element with the usual operators. Addition and subtraction are XOR.
class Element {
 public:
  constexpr Element() = default;
  constexpr explicit Element(std::uint8_t v) : v_(v) {}

  constexpr std::uint8_t value() const { return v_; }
  constexpr bool is_zero() const { return v_ == 0; }

  Element inverse() const { return Element(inv(v_)); }

  friend constexpr Element operator+(Element a, Element b) { return Element(a.v_ ^ b.v_); }
  friend constexpr Element operator-(Element a, Element b) { return Element(a.v_ ^ b.v_); }
  friend Element operator*(Element a, Element b) { return Element(mul(a.v_, b.v_)); }
  friend Element operator/(Element a, Element b) { return Element(div(a.v_, b.v_)); }
  friend constexpr bool operator==(Element, Element) = default;

 private:
  std::uint8_t v_ = 0;
};

}  // namespace nctcp::gf256

#endif  // NCTCP_GF256_HPP
