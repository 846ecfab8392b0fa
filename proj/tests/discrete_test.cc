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

#include "dpleak/discrete.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <map>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "dpleak/rng.h"
#include "dpleak/stats.h"

namespace dpleak {
namespace {

using ::testing::AllOf;
using ::testing::Ge;
using ::testing::Le;

constexpr int kNumSamples = 1000000;

// Counts of value + offset in `cells` cells plus a final cell for
// everything outside.
std::vector<uint64_t> Histogram(const std::vector<int64_t>& values,
                                int64_t offset, int cells) {
  std::vector<uint64_t> h(cells + 1, 0);
  for (int64_t v : values) {
    const int64_t i = v + offset;
    ++h[(i >= 0 && i < cells) ? i : cells];
  }
  return h;
}

std::vector<double> GeometricPmf(double p, int cells) {
  std::vector<double> pmf;
  for (int k = 0; k < cells; ++k) pmf.push_back(std::pow(1 - p, k) * p);
  return pmf;
}

// pmf over [-half, half] proportional to weight(k).
template <typename Weight>
std::vector<double> SymmetricPmf(int half, Weight weight) {
  double z = 0.0;
  for (int k = -10 * half; k <= 10 * half; ++k) z += weight(k);
  std::vector<double> pmf;
  for (int k = -half; k <= half; ++k) pmf.push_back(weight(k) / z);
  return pmf;
}

// Appends the mass outside the listed cells.
std::vector<double> WithRemainder(std::vector<double> pmf) {
  double mass = 0.0;
  for (double p : pmf) mass += p;
  pmf.push_back(std::max(0.0, 1.0 - mass));
  return pmf;
}

TEST(RationalTest, RecoversSimpleFractions) {
  const Rational a = Rational::FromDouble(0.75);
  EXPECT_EQ(a.num, 3u);
  EXPECT_EQ(a.den, 4u);
  const Rational b = Rational::FromDouble(49.0 / 72.0);
  EXPECT_EQ(b.num, 49u);
  EXPECT_EQ(b.den, 72u);
  const Rational c = Rational::FromDouble(0.0);
  EXPECT_EQ(c.num, 0u);
  EXPECT_NEAR(Rational::FromDouble(M_LN2).ToDouble(), M_LN2, 1e-15);
}

TEST(BernoulliExpTest, ZeroGammaAlwaysSucceeds) {
  RngStream stream(1);
  for (int i = 0; i < 1000; ++i) {
    const auto r = BernoulliExp(stream, 0.0);
    ASSERT_TRUE(r.ok());
    EXPECT_TRUE(r->bit);
    EXPECT_GE(r->trace.bernoulli_trials, 1);
  }
}

TEST(BernoulliExpTest, RejectsNegativeGamma) {
  RngStream stream(1);
  EXPECT_FALSE(BernoulliExp(stream, -0.5).ok());
}

TEST(BernoulliExpTest, LnTwoIsFair) {
  RngStream stream(2);
  int ones = 0;
  for (int i = 0; i < kNumSamples; ++i) {
    const auto r = BernoulliExp(stream, M_LN2);
    ASSERT_GE(r->trace.bernoulli_trials, 1);
    ones += r->bit;
  }
  EXPECT_THAT(static_cast<double>(ones) / kNumSamples,
              AllOf(Ge(0.4985), Le(0.5015)));
}

TEST(BernoulliExpTest, LargeGammaMatchesExp) {
  RngStream stream(3);
  int ones = 0;
  for (int i = 0; i < kNumSamples; ++i) ones += BernoulliExp(stream, 2.5)->bit;
  const double p = std::exp(-2.5);
  EXPECT_NEAR(static_cast<double>(ones) / kNumSamples, p,
              4 * std::sqrt(p * (1 - p) / kNumSamples));
}

TEST(GeometricLoopTest, ForcedOutcomes) {
  const std::vector<bool> outcomes = {false, false, true};
  size_t next = 0;
  const DiscreteSample s = CountFailures([&] { return outcomes[next++]; });
  EXPECT_EQ(s.value, 2);
  EXPECT_EQ(s.trace.bernoulli_trials, 3);
}

TEST(GeometricLoopTest, CertainSuccessAndInvalidP) {
  RngStream stream(4);
  for (int i = 0; i < 100; ++i) {
    const auto s = GeometricLoop(stream, 1.0);
    EXPECT_EQ(s->value, 0);
    EXPECT_EQ(s->trace.bernoulli_trials, 1);
  }
  EXPECT_FALSE(GeometricLoop(stream, 0.0).ok());
  EXPECT_FALSE(GeometricLoop(stream, -1.0).ok());
}

TEST(GeometricLoopTest, PmfAndLeakLaw) {
  RngStream stream(5);
  std::vector<int64_t> values;
  for (int i = 0; i < kNumSamples; ++i) {
    const auto s = GeometricLoop(stream, 0.5);
    ASSERT_EQ(s->trace.bernoulli_trials - s->value, 1);
    ASSERT_EQ(s->trace.bsearch_steps, 0);
    values.push_back(s->value);
  }
  EXPECT_GT(ChiSquareGof(Histogram(values, 0, 40), WithRemainder(GeometricPmf(0.5, 40)))
                .p_value,
            0.001);
}

TEST(GeometricBsearchTest, RejectsBadArguments) {
  RngStream stream(6);
  EXPECT_FALSE(GeometricBsearch(stream, 0.0).ok());
  EXPECT_FALSE(GeometricBsearch(stream, 0.5, 10).ok());
  EXPECT_TRUE(GeometricBsearch(stream, 0.5, 100).ok());
  EXPECT_EQ(DefaultSupportBound(1.0), 0);
  EXPECT_LT(std::pow(0.5, DefaultSupportBound(0.5) + 1), std::pow(2.0, -60));
}

TEST(GeometricBsearchTest, StepsGrowWithValue) {
  const double p = -std::expm1(-1.0 / 8);
  RngStream stream(7);
  std::map<int64_t, std::vector<double>> steps;
  for (int i = 0; i < kNumSamples; ++i) {
    const auto s = GeometricBsearch(stream, p);
    ASSERT_EQ(s->trace.bernoulli_trials, 0);
    ASSERT_GT(s->trace.bsearch_steps, 0);
    steps[s->value].push_back(static_cast<double>(s->trace.bsearch_steps));
  }
  ASSERT_GE(steps[0].size(), 1000u);
  ASSERT_GE(steps[8].size(), 1000u);
  EXPECT_GT(Mean(steps[8]), Mean(steps[0]));
  // The most probable leaf sits at the smallest depth of any leaf.
  double min_zero = 1e9, min_other = 1e9;
  for (const auto& [value, s] : steps) {
    for (double d : s) (value == 0 ? min_zero : min_other) =
        std::min(value == 0 ? min_zero : min_other, d);
  }
  EXPECT_LE(min_zero, min_other);
}

TEST(GeometricBsearchTest, MatchesLoopPmf) {
  const double p = 0.2;
  RngStream a(8), b(9);
  std::vector<int64_t> loop, bsearch;
  for (int i = 0; i < kNumSamples; ++i) {
    loop.push_back(GeometricLoop(a, p)->value);
    bsearch.push_back(GeometricBsearch(b, p)->value);
  }
  const auto hl = Histogram(loop, 0, 31);
  const auto hb = Histogram(bsearch, 0, 31);
  double tv = 0.0;
  for (int k = 0; k <= 30; ++k) {
    tv += std::abs(static_cast<double>(hl[k]) - static_cast<double>(hb[k]));
  }
  EXPECT_LT(0.5 * tv / kNumSamples, 0.01);
  EXPECT_GT(ChiSquareGof(Histogram(bsearch, 0, 80), WithRemainder(GeometricPmf(p, 80)))
                .p_value,
            0.001);
}

TEST(DiscreteLaplaceTest, ZeroMassAndPmf) {
  RngStream stream(10);
  std::vector<int64_t> values;
  int zeros = 0;
  for (int i = 0; i < kNumSamples; ++i) {
    const auto s = DiscreteLaplace(stream, 1.0);
    zeros += s->value == 0;
    values.push_back(s->value);
  }
  EXPECT_THAT(static_cast<double>(zeros) / kNumSamples,
              AllOf(Ge(0.460), Le(0.465)));
  const auto pmf =
      SymmetricPmf(12, [](int k) { return std::exp(-std::abs(k) / 1.0); });
  EXPECT_GT(ChiSquareGof(Histogram(values, 12, 25), WithRemainder(pmf)).p_value, 0.001);
}

TEST(DiscreteLaplaceTest, BsearchBackendPmf) {
  RngStream stream(11);
  std::vector<int64_t> values;
  for (int i = 0; i < kNumSamples; ++i) {
    values.push_back(
        DiscreteLaplace(stream, 3.0, GeometricBackend::kBsearch)->value);
  }
  const auto pmf =
      SymmetricPmf(40, [](int k) { return std::exp(-std::abs(k) / 3.0); });
  EXPECT_GT(ChiSquareGof(Histogram(values, 40, 81), WithRemainder(pmf)).p_value, 0.001);
}

TEST(DiscreteLaplaceTest, MagnitudeIsTheGeometricDraw) {
  const double lambda = 4.0;
  const double p = -std::expm1(-1.0 / lambda);
  RngStream stream(12);
  for (int i = 0; i < 10000; ++i) {
    RngStream copy = stream;
    const DiscreteSample g = *GeometricLoop(copy, p);
    const DiscreteSample s = *DiscreteLaplace(stream, lambda);
    if (g.value == 0) continue;  // a negative zero is redrawn
    ASSERT_EQ(std::abs(s.value), g.value);
    ASSERT_EQ(s.trace.bernoulli_trials, g.trace.bernoulli_trials);
  }
}

TEST(DiscreteLaplaceTest, SignDoesNotChangeCost) {
  RngStream stream(13);
  std::map<int64_t, std::vector<double>> cost;
  for (int i = 0; i < kNumSamples; ++i) {
    const auto s = DiscreteLaplace(stream, 8.0);
    cost[s->value].push_back(static_cast<double>(s->trace.Total()));
  }
  // Redrawn negative zeros add the same expected cost to both signs.
  for (int k = 1; k <= 5; ++k) {
    EXPECT_NEAR(Mean(cost[k]), Mean(cost[-k]), 0.02);
    EXPECT_GE(Mean(cost[k]), static_cast<double>(k + 1));
  }
}

TEST(DiscreteLaplaceTest, MeanMagnitudeGrowsWithScale) {
  double previous = 0.0;
  for (double lambda : {1.0, 3.0, 8.0}) {
    RngStream stream(14);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
      sum += std::abs(DiscreteLaplace(stream, lambda)->value);
    }
    EXPECT_GT(sum / 100000, previous);
    previous = sum / 100000;
  }
}

TEST(DiscreteLaplaceTest, LeakLawCorrelation) {
  RngStream stream(15);
  std::vector<double> magnitude, cost;
  for (int i = 0; i < kNumSamples; ++i) {
    const auto s = DiscreteLaplace(stream, 8.0);
    magnitude.push_back(std::abs(static_cast<double>(s->value)));
    cost.push_back(static_cast<double>(s->trace.Total()));
  }
  EXPECT_GT(Pearson(magnitude, cost), 0.9);
}

TEST(DiscreteGaussianTest, VarianceRoundsAndPmf) {
  RngStream stream(16);
  std::vector<int64_t> values;
  std::vector<double> as_double;
  for (int i = 0; i < kNumSamples; ++i) {
    const auto s = DiscreteGaussian(stream, 2.0);
    ASSERT_GE(s->trace.rejection_rounds, 1);
    values.push_back(s->value);
    as_double.push_back(static_cast<double>(s->value));
  }
  EXPECT_THAT(Variance(as_double), AllOf(Ge(3.9), Le(4.1)));
  const auto pmf =
      SymmetricPmf(12, [](int k) { return std::exp(-k * k / 8.0); });
  EXPECT_GT(ChiSquareGof(Histogram(values, 12, 25), WithRemainder(pmf)).p_value, 0.001);
}

TEST(DiscreteGaussianTest, PmfAtLargeSigma) {
  RngStream stream(17);
  std::vector<int64_t> values;
  for (int i = 0; i < kNumSamples; ++i) {
    values.push_back(DiscreteGaussian(stream, 19.0)->value);
  }
  const auto pmf =
      SymmetricPmf(70, [](int k) { return std::exp(-k * k / 722.0); });
  EXPECT_GT(ChiSquareGof(Histogram(values, 70, 141), WithRemainder(pmf)).p_value, 0.001);
}

TEST(DiscreteGaussianTest, ConditionalMeanCostIsLinearInMagnitude) {
  RngStream stream(18);
  std::map<int64_t, std::vector<double>> cost;
  std::vector<double> magnitude, total;
  for (int i = 0; i < kNumSamples; ++i) {
    const auto s = DiscreteGaussian(stream, 19.0);
    const int64_t m = std::abs(s->value);
    cost[m].push_back(static_cast<double>(s->trace.Total()));
    magnitude.push_back(static_cast<double>(m));
    total.push_back(static_cast<double>(s->trace.Total()));
  }
  std::vector<double> x, y;
  for (int m = 0; m <= 40; ++m) {
    x.push_back(m);
    y.push_back(Mean(cost[m]));
  }
  EXPECT_GT(Pearson(x, y), 0.9);
  RecordProperty("per_draw_pearson", std::to_string(Pearson(magnitude, total)));
  std::printf("per-draw Pearson(|value|, cost) at sigma=19: %.4f\n",
              Pearson(magnitude, total));
}

TEST(TruncatedGeometricTest, ConstantCostAndPmf) {
  RngStream stream(19);
  const auto zero = TruncatedGeometric(stream, 0.3, 0);
  EXPECT_EQ(zero->value, 0);
  EXPECT_EQ(zero->trace.bernoulli_trials, 1);

  const double p = 0.3;
  const int max_value = 12;
  std::vector<int64_t> values;
  for (int i = 0; i < kNumSamples; ++i) {
    const auto s = TruncatedGeometric(stream, p, max_value);
    ASSERT_EQ(s->trace.bernoulli_trials, max_value + 1);
    ASSERT_GE(s->value, 0);
    ASSERT_LE(s->value, max_value);
    values.push_back(s->value);
  }
  std::vector<double> pmf = GeometricPmf(p, max_value + 1);
  const double mass = 1 - std::pow(1 - p, max_value + 1);
  for (double& v : pmf) v /= mass;
  EXPECT_GT(ChiSquareGof(Histogram(values, 0, max_value + 1), WithRemainder(pmf)).p_value,
            0.001);
  EXPECT_FALSE(TruncatedGeometric(stream, 0.3, -1).ok());
}

TEST(DiscreteKindTest, FactoryValidatesOnce) {
  EXPECT_FALSE(MakeDiscreteSampler(DiscreteKind::kGeometricLoop, 0.0).ok());
  EXPECT_FALSE(MakeDiscreteSampler(DiscreteKind::kGaussian, -1.0).ok());
  auto sampler = MakeDiscreteSampler(DiscreteKind::kLaplaceBsearch, 2.0);
  ASSERT_TRUE(sampler.ok());
  RngStream stream(20);
  EXPECT_EQ((*sampler)(stream).distribution, Distribution::kDiscreteLaplace);
  EXPECT_EQ(*ParseDiscreteKind("dgauss"), DiscreteKind::kGaussian);
  EXPECT_EQ(DiscreteKindName(DiscreteKind::kGeometricBsearch), "geom-bsearch");
  EXPECT_FALSE(ParseDiscreteKind("binomial").ok());
}

}  // namespace
}  // namespace dpleak
