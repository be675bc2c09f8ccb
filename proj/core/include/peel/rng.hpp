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

#ifndef PEEL_RNG_H_
#define PEEL_RNG_H_

#include <cstdint>

namespace peel {

// One step of the splitmix64 sequence; advances `state` and returns the
// next output. Also used as the mixing function for hashing ids.
uint64_t SplitMix64(uint64_t& state);

// Stateless mix of (seed, stream) into a well-distributed 64-bit value.
// Used to derive child stream seeds and to rank clients for deterministic
// compromised-set selection.
uint64_t MixSeed(uint64_t seed, uint64_t stream);

// Deterministic xoshiro256++ generator with hand-rolled samplers. All
// randomness in the library flows through this class so that identical
// (seed, call sequence) pairs produce identical results on every platform,
// independent of the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  // Child stream keyed by (seed of this experiment, stream id). Streams for
  // distinct ids are statistically independent and reproducible.
  static Rng ChildStream(uint64_t master_seed, uint64_t stream_id);

  uint64_t NextU64();

  // Uniform in [0, 1) with 53 random bits.
  double NextUnit();

  // Uniform in [lo, hi).
  double NextUniform(double lo, double hi);

  // Uniform integer in [0, bound); bound > 0.
  int64_t NextInt(int64_t bound);

  bool NextBernoulli(double p);

  // Standard normal via Box-Muller (no cached spare, fully deterministic).
  double NextGaussian();

  // Laplace(0, scale) via inverse CDF.
  double NextLaplace(double scale);

 private:
  uint64_t s_[4];
};

}  // namespace peel

#endif  // PEEL_RNG_H_
