//
// Copyright 2026 The dpleak Authors
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
//

#ifndef DPLEAK_RNG_H_
#define DPLEAK_RNG_H_

#include <array>
#include <cstdint>

#include "absl/status/statusor.h"

namespace dpleak {

// Number of representable uniform values, R = 2^log2. Every continuous
// sampler draws its uniforms as u/R for an integer u in [1, R).
class Resolution {
 public:
  static constexpr int kDefaultLog2 = 53;

  // Returns an error unless 1 <= log2 <= 63.
  static absl::StatusOr<Resolution> FromLog2(int log2);

  // 2^53, the resolution of a uniform double built from 53 random bits.
  static Resolution Default() { return Resolution(kDefaultLog2); }

  int log2() const { return log2_; }
  uint64_t value() const { return uint64_t{1} << log2_; }
  double as_double() const { return static_cast<double>(value()); }

  friend bool operator==(Resolution a, Resolution b) {
    return a.log2_ == b.log2_;
  }

 private:
  explicit Resolution(int log2) : log2_(log2) {}
  int log2_;
};

// xoshiro256** seeded through SplitMix64. Single owner; copy it to replay a
// draw sequence from the current state.
class RngStream {
 public:
  explicit RngStream(uint64_t seed);

  // One primitive 64-bit draw.
  uint64_t NextU64();

  // Advances the state by 2^128 draws without touching the draw counter.
  void Jump();

  uint64_t seed() const { return seed_; }
  uint64_t draw_counter() const { return draw_counter_; }

 private:
  std::array<uint64_t, 4> s_;
  uint64_t seed_;
  uint64_t draw_counter_ = 0;
};

// Seed for trial `index` of a campaign seeded with `campaign_seed`.
inline uint64_t TrialSeed(uint64_t campaign_seed, uint64_t index) {
  return campaign_seed ^ index;
}

struct UniformDraw {
  uint64_t u;    // in [1, R)
  double value;  // u / R
};

// Draws u uniformly from [1, R) and returns it with u/R. One primitive draw.
UniformDraw RandomFp(RngStream& stream, Resolution res);

// Uniform 32-bit integer. One primitive draw.
uint32_t RandomU32(RngStream& stream);

// Uniform integer in [0, n) for n >= 1. One primitive draw; the bias is at
// most n / 2^64.
uint64_t UniformBelow(RngStream& stream, uint64_t n);

// Returns true with probability p. One primitive draw.
absl::StatusOr<bool> Bernoulli(RngStream& stream, double p);

// Same as Bernoulli() without the range check; p must lie in [0, 1].
bool DrawBernoulli(RngStream& stream, double p);

// Returns true with probability num/den, up to the UniformBelow() bias.
// Requires num <= den and den > 0. One primitive draw.
bool DrawBernoulliRational(RngStream& stream, uint64_t num, uint64_t den);

}  // namespace dpleak

#endif  // DPLEAK_RNG_H_
