/*
 * Copyright 2026 The lesiondet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LESIONDET_RNG_HPP_
#define LESIONDET_RNG_HPP_

#include <cstdint>

namespace lesiondet {

// SplitMix64 (Steele, Lea & Flood 2014). Every random decision in the library
// goes through this generator so outputs are reproducible bit-for-bit across
// platforms and standard libraries:
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
//
// Independent streams are keyed by (seed, tag): the initial state is
// Mix(seed ^ Mix(tag + 1)), where Mix is the output function above applied
// to its argument.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t state) : state_(state) {}

  static constexpr uint64_t Mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static SplitMix64 Stream(uint64_t seed, uint64_t tag) {
    return SplitMix64(Mix(seed ^ Mix(tag + 1)));
  }

  uint64_t Next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return Mix(state_);
  }

  // Next() % n. n must be > 0.
  uint64_t Below(uint64_t n) { return Next() % n; }

  // Uniform double in [0,1) from the top 53 bits.
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

 private:
  uint64_t state_;
};

}  // namespace lesiondet

#endif  // LESIONDET_RNG_HPP_
