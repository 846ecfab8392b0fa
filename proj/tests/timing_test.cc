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

#include "dpleak/timing.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "absl/status/status.h"
#include "gtest/gtest.h"
#include "dpleak/discrete.h"
#include "dpleak/mechanisms.h"
#include "dpleak/rng.h"

namespace dpleak {
namespace {

TimingProfile LinearProfile(int n, double base, double slope) {
  TimingProfile p;
  for (int i = 0; i < n; ++i) {
    ProfileEntry e;
    e.mean = base + slope * i;
    e.count = 1;
    p.entries.push_back(e);
  }
  return p;
}

TEST(BuildProfile, GeometricLoopCostIsValuePlusOne) {
  const DiscreteSampler s = *MakeDiscreteSampler(DiscreteKind::kGeometricLoop, 0.3);
  ProfileConfig cfg;
  cfg.min_count = 2000;
  cfg.seed = 1;
  auto p = BuildProfile(s, "geom-loop", 0.3, cfg);
  ASSERT_TRUE(p.ok()) << p.status();
  ASSERT_EQ(p->i_max(), 9);
  for (int i = 0; i <= 9; ++i) {
    EXPECT_EQ(p->entries[i].mean, i + 1.0);
    EXPECT_EQ(p->entries[i].stddev, 0.0);
    EXPECT_GE(p->entries[i].count, 2000);
  }
}

TEST(BuildProfile, LaplaceMeansIncreaseAndRebuildIsIdentical) {
  const DiscreteSampler s = *MakeDiscreteSampler(DiscreteKind::kLaplaceLoop, 8.0);
  ProfileConfig cfg;
  cfg.seed = 2;
  auto a = BuildProfile(s, "dlaplace", 8.0, cfg);
  auto b = BuildProfile(s, "dlaplace", 8.0, cfg);
  ASSERT_TRUE(a.ok()) << a.status();
  for (int i = 1; i <= 9; ++i) {
    EXPECT_GT(a->entries[i].mean, a->entries[i - 1].mean);
  }
  EXPECT_EQ(ProfileToJson(*a), ProfileToJson(*b));
}

TEST(BuildProfile, PositiveAndNegativeNoiseAgree) {
  const DiscreteSampler s = *MakeDiscreteSampler(DiscreteKind::kLaplaceLoop, 8.0);
  ProfileConfig cfg;
  cfg.seed = 3;
  cfg.sign = SignFilter::kPositive;
  auto pos = BuildProfile(s, "dlaplace", 8.0, cfg);
  cfg.seed = 4;
  cfg.sign = SignFilter::kNegative;
  auto neg = BuildProfile(s, "dlaplace", 8.0, cfg);
  ASSERT_TRUE(pos.ok() && neg.ok());
  // Bin 0 mixes both signs by construction; compare the signed bins.
  for (int i = 1; i <= 9; ++i) {
    const ProfileEntry& p = pos->entries[i];
    const ProfileEntry& n = neg->entries[i];
    const double se = std::sqrt(p.stddev * p.stddev / p.count +
                                n.stddev * n.stddev / n.count);
    EXPECT_LE(std::abs(p.mean - n.mean), 2.0 * se + 1e-12) << "bin " << i;
  }
}

TEST(BuildProfile, UnderfilledBinIsAnError) {
  const DiscreteSampler s = *MakeDiscreteSampler(DiscreteKind::kLaplaceLoop, 1.0);
  ProfileConfig cfg;
  cfg.max_draws = 1000;
  EXPECT_EQ(BuildProfile(s, "dlaplace", 1.0, cfg).status().code(),
            absl::StatusCode::kResourceExhausted);
  cfg.i_max = 0;
  EXPECT_EQ(BuildProfile(s, "dlaplace", 1.0, cfg).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(GuessMagnitude, NearestMeanWithTiesTowardSmaller) {
  const TimingProfile p = LinearProfile(10, 10.0, 2.0);
  EXPECT_EQ(GuessMagnitude(p, 15.1), 3);
  EXPECT_EQ(GuessMagnitude(p, 10.0), 0);
  EXPECT_EQ(GuessMagnitude(p, 13.0), 1);
  EXPECT_EQ(GuessMagnitude(p, 1000.0), 9);
}

TEST(EvaluateMatch, Predicates) {
  EXPECT_TRUE(EvaluateMatch(-4, 4).exact);
  EXPECT_TRUE(EvaluateMatch(-4, 4).approx);
  EXPECT_FALSE(EvaluateMatch(5, 4).exact);
  EXPECT_TRUE(EvaluateMatch(5, 4).approx);
  EXPECT_FALSE(EvaluateMatch(7, 4).exact);
  EXPECT_FALSE(EvaluateMatch(7, 4).approx);
}

TEST(TimeDraw, WallClockReplaysTheSameDraw) {
  const DiscreteSampler s = *MakeDiscreteSampler(DiscreteKind::kLaplaceLoop, 4.0);
  RngStream a(9), b(9);
  for (int t = 0; t < 100; ++t) {
    const TimedDraw counter = TimeDraw(s, a, Clock::kCostCounter, 5);
    const TimedDraw wall = TimeDraw(s, b, Clock::kWallNanos, 5);
    EXPECT_EQ(counter.sample.value, wall.sample.value);
    EXPECT_GE(wall.elapsed, 0);
  }
  EXPECT_EQ(a.draw_counter(), b.draw_counter());
}

TEST(SamplerAttackCampaign, LaplaceBeatsBaselinesAndGaussian) {
  ProfileConfig cfg;
  cfg.min_count = 1000;
  cfg.max_draws = 100000000;
  cfg.seed = 5;
  const DiscreteSampler lap = *MakeDiscreteSampler(DiscreteKind::kLaplaceLoop, 1.0);
  const DiscreteSampler gauss = *MakeDiscreteSampler(DiscreteKind::kGaussian, 2.0);
  auto lap_profile = BuildProfile(lap, "dlaplace", 1.0, cfg);
  auto gauss_profile = BuildProfile(gauss, "dgauss", 2.0, cfg);
  ASSERT_TRUE(lap_profile.ok() && gauss_profile.ok());
  auto lap_report = SamplerAttackCampaign(lap, *lap_profile, 20000, 6);
  auto gauss_report = SamplerAttackCampaign(gauss, *gauss_profile, 20000, 6);
  ASSERT_TRUE(lap_report.ok() && gauss_report.ok());
  EXPECT_LT(lap_report->exact_p_value, 1e-6);
  EXPECT_LT(lap_report->approx_p_value, 1e-6);
  EXPECT_GT(lap_report->exact_accuracy, gauss_report->exact_accuracy);
}

TEST(SamplerAttackCampaign, FlatProfileFallsBackToUniformGuess) {
  TimingProfile flat = LinearProfile(10, 7.0, 0.0);
  ASSERT_TRUE(flat.Flat());
  const DiscreteSampler lap = *MakeDiscreteSampler(DiscreteKind::kLaplaceLoop, 1.0);
  auto report = SamplerAttackCampaign(lap, flat, 100000, 7);
  ASSERT_TRUE(report.ok());
  // Uniform guesses match any fixed magnitude with probability 1/10.
  EXPECT_NEAR(report->exact_accuracy, 0.10, 0.005);
}

TEST(SamplerAttackCampaign, RejectsBadInputs) {
  const DiscreteSampler lap = *MakeDiscreteSampler(DiscreteKind::kLaplaceLoop, 1.0);
  EXPECT_FALSE(SamplerAttackCampaign(lap, TimingProfile{}, 10, 1).ok());
  TimingProfile binned = LinearProfile(10, 1.0, 1.0);
  binned.bin_width = 4;
  EXPECT_FALSE(SamplerAttackCampaign(lap, binned, 10, 1).ok());
}

TEST(PrivateSumAttack, DecisionRule) {
  // Unit bins with mean i, so elapsed 800 guesses s_g = 800.
  const TimingProfile p = LinearProfile(1001, 0.0, 1.0);
  RngStream coin(1);
  EXPECT_EQ(PrivateSumAttack(100750, 800.0, 100000, 95000, p, coin),
            SumGuess::kD);
  EXPECT_EQ(PrivateSumAttack(95750, 800.0, 100000, 95000, p, coin),
            SumGuess::kDprime);
  int d = 0;
  for (int t = 0; t < 200; ++t) {
    // s = s' = 2500 whatever s_g is.
    d += PrivateSumAttack(97500, 800.0, 100000, 95000, p, coin) == SumGuess::kD;
  }
  EXPECT_GT(d, 60);
  EXPECT_LT(d, 140);
}

TEST(PrivateSumCampaign, BeatsCoinAndImprovesWithEpsilon) {
  const Dataset base{{100, 200, 6000, 4999, 0}};
  double previous = 0.0;
  for (double eps : {1.0, 10.0}) {
    const double lambda = CalibrateLaplace(eps, 5000.0)->lambda;
    const DiscreteSampler s =
        *MakeDiscreteSampler(DiscreteKind::kLaplaceLoop, lambda);
    Dataset d = base;
    d.credits.push_back(5000);
    const ProfileConfig cfg =
        SumProfileConfig(lambda, 5000, Clock::kCostCounter, 300, 11);
    auto profile = BuildSumProfile(d, 5000, s, "dlaplace", lambda, cfg);
    ASSERT_TRUE(profile.ok()) << profile.status();
    auto report = PrivateSumCampaign(base, 5000, s, *profile,
                                     Clock::kCostCounter, 3000, 12);
    ASSERT_TRUE(report.ok());
    EXPECT_LT(report->p_value, 1e-6);
    EXPECT_GE(report->success_rate, previous);
    previous = report->success_rate;
  }
}

TEST(SumProfileConfig, ReachesPastHalfTheCap) {
  EXPECT_EQ(SumProfileConfig(5000, 5000, Clock::kCostCounter, 1, 0).i_max, 9);
  const ProfileConfig c = SumProfileConfig(500, 5000, Clock::kCostCounter, 1, 0);
  EXPECT_EQ(c.bin_width, 250);
  EXPECT_EQ(c.i_max, 11);
  EXPECT_GT((c.i_max + 1) * c.bin_width, 2500);
}

TEST(ProfileJson, RoundTripAndErrors) {
  TimingProfile p = LinearProfile(4, 1.5, 0.25);
  p.clock = Clock::kWallNanos;
  p.sampler_id = "dlaplace";
  p.param = 2.0;
  p.bin_width = 3;
  auto back = ProfileFromJson(ProfileToJson(p));
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(ProfileToJson(*back), ProfileToJson(p));
  EXPECT_FALSE(ProfileFromJson("not json").ok());
  EXPECT_FALSE(ProfileFromJson("{\"clock\": \"counter\"}").ok());
  EXPECT_FALSE(ProfileFromJson(
                   "{\"clock\":\"sundial\",\"sampler\":\"x\",\"param\":1,"
                   "\"bin_width\":1,\"entries\":[]}")
                   .ok());
}

}  // namespace
}  // namespace dpleak
