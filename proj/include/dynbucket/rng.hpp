/*
 * Copyright 2026 The dynbucket Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DYNBUCKET_RNG_HPP
#define DYNBUCKET_RNG_HPP

#include <cstdint>
#include <random>

namespace dynbucket {

// SplitMix64 output function (Steele, Lea, Flood 2014). Used as a stateless
// 64-bit hash for seed derivation and for rank-synchronized bucket draws.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Hash of an ordered (seed, a, b) triple.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0) noexcept {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

// Maps a 64-bit value onto [0, n) by 128-bit multiply-shift.
constexpr std::uint64_t scale_to_range(std::uint64_t x,
                                       std::uint64_t n) noexcept {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(x) * n) >> 64);
}

// Reproducible random variates. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; the distributions are implemented
// here because the standard library ones are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::uint64_t index(std::uint64_t n) { return scale_to_range(engine_(), n); }

  // Standard normal via Box-Muller (cosine branch only).
  double normal();

  // Gamma(shape, scale) via Marsaglia-Tsang; shape < 1 uses the
  // U^(1/shape) boost.
  double gamma(double shape, double scale);

 private:
  std::mt19937_64 engine_;
};

}  // namespace dynbucket

#endif  // DYNBUCKET_RNG_HPP
