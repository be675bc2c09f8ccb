// Copyright 2026 The PEEL Authors
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

#include "peel/rng.hpp"

#include <cmath>

#include "peel/errors.hpp"

namespace peel {
namespace {

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline uint64_t Rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

uint64_t SplitMix64(uint64_t& state) {
  uint64_t z = (state += kGolden);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

uint64_t MixSeed(uint64_t seed, uint64_t stream) {
  uint64_t state = seed;
  (void)SplitMix64(state);
  state ^= stream * 0x632BE59BD9B4E019ULL + kGolden;
  uint64_t out = SplitMix64(state);
  return out ^ SplitMix64(state);
}

Rng::Rng(uint64_t seed) {
  uint64_t state = seed;
  for (auto& word : s_) word = SplitMix64(state);
}

Rng Rng::ChildStream(uint64_t master_seed, uint64_t stream_id) {
  return Rng(MixSeed(master_seed, stream_id));
}

uint64_t Rng::NextU64() {
  // xoshiro256++ step.
  const uint64_t result = Rotl(s_[0] + s_[3], 23) + s_[0];
  const uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = Rotl(s_[3], 45);
  return result;
}

double Rng::NextUnit() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double Rng::NextUniform(double lo, double hi) {
  return lo + (hi - lo) * NextUnit();
}

int64_t Rng::NextInt(int64_t bound) {
  if (bound <= 0) throw DomainError("Rng::NextInt: bound must be positive");
  // Rejection sampling to avoid modulo bias.
  const uint64_t ubound = static_cast<uint64_t>(bound);
  const uint64_t limit = UINT64_MAX - UINT64_MAX % ubound;
  uint64_t draw;
  do {
    draw = NextU64();
  } while (draw >= limit);
  return static_cast<int64_t>(draw % ubound);
}

bool Rng::NextBernoulli(double p) { return NextUnit() < p; }

double Rng::NextGaussian() {
  // Box-Muller; u1 is kept away from zero so log() is finite.
  const double u1 = (static_cast<double>(NextU64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = NextUnit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::NextLaplace(double scale) {
  const double u = NextUnit() - 0.5;
  const double mag = std::log(1.0 - 2.0 * std::abs(u));
  return (u < 0 ? scale * mag : -scale * mag);
}

}  // namespace peel
