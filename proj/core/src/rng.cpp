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

#include "critnet/rng.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace critnet {

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t k = SplitMix64::mix(seed + SplitMix64::kGolden);
  k = SplitMix64::mix(k ^ (a + 0x632be59bd9b4e019ULL));
  k = SplitMix64::mix(k ^ (b + 0x8cb92ba72f3d8dd7ULL));
  return k;
}

// Ziggurat normal sampler (Boost.Random).
struct RandomStream::Normal {
  boost::random::normal_distribution<double> dist;
};

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t a, std::uint64_t b)
    : engine_(stream_key(seed, a, b)), normal_(std::make_unique<Normal>()) {}

RandomStream::~RandomStream() = default;
RandomStream::RandomStream(RandomStream&&) noexcept = default;
RandomStream& RandomStream::operator=(RandomStream&&) noexcept = default;

double RandomStream::normal() { return normal_->dist(engine_); }

void RandomStream::fill_normal(std::span<double> out, double scale) {
  auto& dist = normal_->dist;
  for (double& v : out) v = scale * dist(engine_);
}

double RandomStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::below(std::uint64_t bound) {
  boost::random::uniform_int_distribution<std::uint64_t> d(0, bound - 1);
  return d(engine_);
}

}  // namespace critnet
