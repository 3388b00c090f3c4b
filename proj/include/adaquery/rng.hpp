// Copyright 2026 The Adaquery Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace adaquery {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Explicit, seedable randomness state. Every randomized operation in the
// library takes one of these by reference; there is no ambient global
// generator, so a transcript is reproducible from its seed alone.
//
// Uniform doubles and bounded integers are derived from raw 64-bit output
// here rather than through <random> distribution objects, whose exact draw
// sequences are implementation-defined.
class RngState {
 public:
  explicit RngState(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in (0, 1); never returns an endpoint, so it is safe to feed
  // through log().
  double uniform_open01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform in [0, 1).
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Unbiased uniform integer in [0, bound). bound must be nonzero.
  std::uint64_t uniform_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Independent stream for a sub-task (e.g. one trial of an experiment).
  // Derived from the original seed, not the current state, so stream k of
  // seed s is stable no matter how much the parent has been used.
  RngState derive(std::uint64_t stream) const {
    return RngState(detail::splitmix64(seed_ ^ detail::splitmix64(stream)));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace adaquery
