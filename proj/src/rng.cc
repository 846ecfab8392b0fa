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

#include "dpleak/rng.h"

#include <cstdint>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace dpleak {
namespace {

uint64_t Rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

uint64_t SplitMix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t MulHi(uint64_t a, uint64_t b) {
  return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) >> 64);
}

}  // namespace

absl::StatusOr<Resolution> Resolution::FromLog2(int log2) {
  if (log2 < 1 || log2 > 63) {
    return absl::InvalidArgumentError(
        absl::StrCat("Resolution exponent must be in [1, 63], got ", log2));
  }
  return Resolution(log2);
}

RngStream::RngStream(uint64_t seed) : seed_(seed) {
  uint64_t sm = seed;
  for (uint64_t& word : s_) word = SplitMix64(sm);
}

uint64_t RngStream::NextU64() {
  const uint64_t result = Rotl(s_[1] * 5, 7) * 9;
  const uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = Rotl(s_[3], 45);
  ++draw_counter_;
  return result;
}

void RngStream::Jump() {
  static constexpr uint64_t kJump[] = {0x180ec6d33cfd0abaULL,
                                       0xd5a61266f0c9392cULL,
                                       0xa9582618e03fc9aaULL,
                                       0x39abdc4529b1661cULL};
  std::array<uint64_t, 4> acc = {0, 0, 0, 0};
  const uint64_t saved_counter = draw_counter_;
  for (uint64_t word : kJump) {
    for (int b = 0; b < 64; ++b) {
      if (word & (uint64_t{1} << b)) {
        for (int i = 0; i < 4; ++i) acc[i] ^= s_[i];
      }
      NextU64();
    }
  }
  s_ = acc;
  draw_counter_ = saved_counter;
}

UniformDraw RandomFp(RngStream& stream, Resolution res) {
  const uint64_t r = res.value();
  const uint64_t u = 1 + MulHi(stream.NextU64(), r - 1);
  return {u, static_cast<double>(u) / res.as_double()};
}

uint32_t RandomU32(RngStream& stream) {
  return static_cast<uint32_t>(stream.NextU64() >> 32);
}

uint64_t UniformBelow(RngStream& stream, uint64_t n) {
  return MulHi(stream.NextU64(), n);
}

absl::StatusOr<bool> Bernoulli(RngStream& stream, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Bernoulli probability must be in [0, 1], got ", p));
  }
  return DrawBernoulli(stream, p);
}

bool DrawBernoulli(RngStream& stream, double p) {
  // 53 random bits give a uniform on [0, 1) with spacing 2^-53; p = 1 always
  // succeeds and p = 0 never does.
  const double x = static_cast<double>(stream.NextU64() >> 11) * 0x1.0p-53;
  return x < p;
}

bool DrawBernoulliRational(RngStream& stream, uint64_t num, uint64_t den) {
  return UniformBelow(stream, den) < num;
}

}  // namespace dpleak
