/* Copyright 2026 The SDA Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sda {

inline constexpr uint64_t kFnvOffsetBasis = 14695981039346656037ull;
inline constexpr uint64_t kFnvPrime = 1099511628211ull;

// FNV-1a 64-bit. `state` allows chaining over several buffers.
constexpr uint64_t fnv1a64(std::string_view bytes,
                           uint64_t state = kFnvOffsetBasis) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= kFnvPrime;
  }
  return state;
}

// Feeds the 8 little-endian bytes of `value` into an FNV-1a state.
constexpr uint64_t fnv1a64_u64(uint64_t value, uint64_t state) {
  for (int i = 0; i < 8; ++i) {
    state ^= (value >> (8 * i)) & 0xffu;
    state *= kFnvPrime;
  }
  return state;
}

// 16 lowercase hex digits.
std::string hex64(uint64_t value);

// Knuth's MMIX linear congruential generator. Used wherever a seeded,
// platform-independent sequence is needed (dataset shuffling, PCA start
// vectors).
class Lcg64 {
 public:
  static constexpr uint64_t kMultiplier = 6364136223846793005ull;
  static constexpr uint64_t kIncrement = 1442695040888963407ull;

  explicit Lcg64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ = state_ * kMultiplier + kIncrement;
    return state_;
  }

  // Upper 32 bits of the next state.
  uint32_t next_u32() { return static_cast<uint32_t>(next() >> 32); }

  // Uniform in [0, 1) from the upper 53 bits.
  double next_unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  uint64_t state_;
};

}  // namespace sda
