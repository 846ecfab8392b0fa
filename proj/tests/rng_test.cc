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
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "dpleak/stats.h"

namespace dpleak {
namespace {

using ::testing::AllOf;
using ::testing::Ge;
using ::testing::Le;

constexpr int kNumSamples = 1000000;

TEST(ResolutionTest, RejectsOutOfRangeExponents) {
  EXPECT_FALSE(Resolution::FromLog2(0).ok());
  EXPECT_FALSE(Resolution::FromLog2(64).ok());
  EXPECT_TRUE(Resolution::FromLog2(1).ok());
  EXPECT_TRUE(Resolution::FromLog2(63).ok());
  EXPECT_EQ(Resolution::FromLog2(10)->value(), 1024u);
  EXPECT_EQ(Resolution::Default().log2(), 53);
}

TEST(RandomFpTest, StaysInRangeAndCountsDraws) {
  RngStream stream(17);
  const Resolution res = *Resolution::FromLog2(10);
  for (int i = 0; i < 10000; ++i) {
    const UniformDraw d = RandomFp(stream, res);
    ASSERT_GE(d.u, 1u);
    ASSERT_LE(d.u, 1023u);
    ASSERT_EQ(d.value, static_cast<double>(d.u) / 1024.0);
    ASSERT_EQ(d.value * 1024.0, static_cast<double>(d.u));
  }
  EXPECT_EQ(stream.draw_counter(), 10000u);
}

TEST(RandomFpTest, SameSeedSameSequence) {
  RngStream a(99), b(99);
  const Resolution res = *Resolution::FromLog2(32);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(RandomFp(a, res).u, RandomFp(b, res).u);
  }
}

TEST(RandomFpTest, ResolutionTwoIsAlwaysOneHalf) {
  RngStream stream(5);
  const Resolution res = *Resolution::FromLog2(1);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(RandomFp(stream, res).value, 0.5);
  }
}

TEST(RandomFpTest, ValueTimesResolutionIsExactUpTo52Bits) {
  RngStream stream(8);
  for (int log2 : {20, 40, 52}) {
    const Resolution res = *Resolution::FromLog2(log2);
    for (int i = 0; i < 1000; ++i) {
      const UniformDraw d = RandomFp(stream, res);
      ASSERT_EQ(d.value * res.as_double(), static_cast<double>(d.u));
      ASSERT_GT(d.value, 0.0);
      ASSERT_LT(d.value, 1.0);
    }
  }
}

TEST(RandomU32Test, DeterministicAndLowBitsUniform) {
  RngStream a(1234), b(1234);
  EXPECT_EQ(RandomU32(a), RandomU32(b));

  RngStream stream(42);
  std::vector<uint64_t> counts(128, 0);
  int repeats = 0;
  uint32_t prev = RandomU32(stream);
  for (int i = 0; i < kNumSamples; ++i) {
    const uint32_t x = RandomU32(stream);
    ++counts[x & 0x7F];
    repeats += (x == prev);
    prev = x;
  }
  const std::vector<double> probs(128, 1.0 / 128);
  EXPECT_GT(ChiSquareGof(counts, probs).p_value, 0.001);
  EXPECT_EQ(repeats, 0);
}

TEST(BernoulliTest, DegenerateProbabilities) {
  RngStream stream(3);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_TRUE(*Bernoulli(stream, 1.0));
    EXPECT_FALSE(*Bernoulli(stream, 0.0));
  }
}

TEST(BernoulliTest, RejectsInvalidProbability) {
  RngStream stream(3);
  EXPECT_FALSE(Bernoulli(stream, -0.1).ok());
  EXPECT_FALSE(Bernoulli(stream, 1.5).ok());
  EXPECT_EQ(stream.draw_counter(), 0u);
}

TEST(BernoulliTest, OneDrawPerTrialAndFairMean) {
  RngStream stream(11);
  int ones = 0;
  for (int i = 0; i < kNumSamples; ++i) ones += *Bernoulli(stream, 0.5);
  EXPECT_EQ(stream.draw_counter(), static_cast<uint64_t>(kNumSamples));
  EXPECT_THAT(static_cast<double>(ones) / kNumSamples,
              AllOf(Ge(0.498), Le(0.502)));
}

TEST(BernoulliRationalTest, MatchesRatio) {
  RngStream stream(12);
  int ones = 0;
  for (int i = 0; i < kNumSamples; ++i) {
    ones += DrawBernoulliRational(stream, 1, 3);
  }
  EXPECT_THAT(static_cast<double>(ones) / kNumSamples,
              AllOf(Ge(1.0 / 3 - 0.0015), Le(1.0 / 3 + 0.0015)));
}

TEST(RngStreamTest, JumpChangesSequenceButNotCounter) {
  RngStream a(7), b(7);
  b.Jump();
  EXPECT_EQ(b.draw_counter(), 0u);
  EXPECT_NE(a.NextU64(), b.NextU64());
}

TEST(RngStreamTest, TrialSeedsDiffer) {
  EXPECT_EQ(TrialSeed(100, 0), 100u);
  EXPECT_NE(TrialSeed(100, 1), TrialSeed(100, 2));
}

}  // namespace
}  // namespace dpleak
