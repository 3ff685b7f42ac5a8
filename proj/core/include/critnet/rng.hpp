// Copyright 2026 The critnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <memory>
#include <span>

namespace critnet {

// SplitMix64: a 64-bit counter passed through a bijective mixer. Cheap,
// statistically strong, and trivially splittable by choosing the start
// counter, which makes it a counter-based generator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state = 0) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() { return mix(state_ += kGolden); }

  // The finaliser on its own: a strong 64-bit hash.
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

 private:
  std::uint64_t state_;
};

// Start counter of the stream identified by (seed, a, b); distinct keys give
// statistically independent streams, independent of evaluation order.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// Deterministic stream of standard normal and uniform variates.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);
  ~RandomStream();
  RandomStream(RandomStream&&) noexcept;
  RandomStream& operator=(RandomStream&&) noexcept;

  double normal();
  void fill_normal(std::span<double> out, double scale = 1.0);
  double uniform();                           // [0, 1)
  std::uint64_t below(std::uint64_t bound);   // uniform integer in [0, bound)
  std::uint64_t bits() { return engine_(); }

 private:
  struct Normal;
  SplitMix64 engine_;
  std::unique_ptr<Normal> normal_;
};

}  // namespace critnet
