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

#ifndef NCTCP_RNG_HPP
#define NCTCP_RNG_HPP

// Portable random streams. std::mt19937_64 has a bit-exact output sequence
// fixed by the standard; the distributions in <random> do not, so the
// conversions to doubles and bytes are done here.

#include <cstdint>
#include <random>

namespace nctcp {

enum class Stream : std::uint64_t {
  data_loss = 1,
  ack_loss = 2,
  down_state = 3,
  coefficients = 4,
};

/// SplitMix64 finaliser, used to spread (seed, stream) into a seed word.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}
  Rng(std::uint64_t seed, Stream stream)
      : engine_(mix64(seed ^ mix64(static_cast<std::uint64_t>(stream)))) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint8_t byte() {
    if (spare_bits_ == 0) {
      spare_ = engine_();
      spare_bits_ = 64;
    }
    const auto b = static_cast<std::uint8_t>(spare_ & 0xFF);
    spare_ >>= 8;
    spare_bits_ -= 8;
    return b;
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t spare_ = 0;
  unsigned spare_bits_ = 0;
};

}  // namespace nctcp

#endif  // NCTCP_RNG_HPP
