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

#include "dpleak/dpsgd.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "gtest/gtest.h"
#include "dpleak/gauss_sampler.h"
#include "dpleak/rng.h"
#include "dpleak/stats.h"

namespace dpleak {
namespace {

constexpr int kDim = 256;
constexpr int kBatch = 64;

double Norm(const std::vector<double>& v) {
  return L2Distance(v, std::vector<double>(v.size(), 0.0));
}

// A model with random weights so that both classes have large gradients.
LogisticModel RandomModel(uint64_t seed) {
  auto normal = MakeGaussianSampler(GaussMethod::kPolar, seed,
                                    Resolution::Default());
  LogisticModel m{std::vector<double>(kDim), 0.3};
  for (double& w : m.w) w = normal->Sample(0.1).value;
  return m;
}

TEST(SgdConfig, SensitivityIsTwoLOverS) {
  SgdConfig cfg;
  EXPECT_EQ(cfg.Sensitivity(64), 1.0 / 32.0);
}

TEST(PerRecordGradient, ClippedNormsNeverExceedL) {
  BlobData data(kDim, 4.0, 3);
  const LogisticModel model = RandomModel(4);
  for (int n = 0; n < 1000; ++n) {
    const Record r = data.Draw(n % 2);
    auto g = PerRecordGradient(model, r);
    ASSERT_TRUE(g.ok());
    EXPECT_LE(Norm(ClipToNorm(*g, 1.0)), 1.0 * (1 + 1e-12));
  }
}

TEST(PerRecordGradient, ConfidentModelSilencesClassOne) {
  BlobData data(kDim, 4.0, 5);
  const LogisticModel model = ConfidentModel(kDim);
  const Record one = data.Draw(1);
  const Record zero = data.Draw(0);
  EXPECT_LT(Norm(*PerRecordGradient(model, one)), 1e-20);
  EXPECT_NEAR(Norm(*PerRecordGradient(model, zero)), Norm(zero.x), 1e-9);
}

TEST(PerRecordGradient, RejectsDimensionMismatch) {
  Record r{std::vector<double>(3, 1.0), 1};
  EXPECT_FALSE(PerRecordGradient(ConfidentModel(4), r).ok());
  SgdConfig cfg;
  cfg.dim = 5;
  Batch b{{Record{std::vector<double>(4, 1.0), 0}}};
  EXPECT_FALSE(AverageClippedGradient(ConfidentModel(4), b, cfg).ok());
}

TEST(AverageClippedGradient, IdenticalBatchesGiveIdenticalOutput) {
  BlobData data(kDim, 4.0, 6);
  const CanaryPair pair = MakeCanaryPair(data, kBatch, CanaryKind::kDiffLabel);
  const LogisticModel model = RandomModel(7);
  SgdConfig cfg;
  EXPECT_EQ(*AverageClippedGradient(model, pair.b, cfg),
            *AverageClippedGradient(model, pair.b, cfg));
}

TEST(AverageClippedGradient, SensitivityBoundOnRandomPairs) {
  BlobData data(kDim, 4.0, 8);
  SgdConfig cfg;
  const double bound = cfg.Sensitivity(kBatch);
  for (int t = 0; t < 1000; ++t) {
    const LogisticModel model = RandomModel(100 + t);
    Batch b;
    for (int n = 0; n < kBatch; ++n) b.records.push_back(data.Draw(n % 2));
    Batch bprime = b;
    bprime.records[t % kBatch] = data.Draw(t % 3 == 0);
    const double dist = L2Distance(*AverageClippedGradient(model, b, cfg),
                                   *AverageClippedGradient(model, bprime, cfg));
    EXPECT_LE(dist, bound * (1 + 1e-12));
  }
}

TEST(AverageClippedGradient, AdversarialCanaryApproachesBound) {
  // Under the confident model (x, 0) and (-x, 0) have opposite gradients of
  // norm |x| >= L, so clipping maps them to antipodal vectors of norm L.
  BlobData data(kDim, 4.0, 9);
  SgdConfig cfg;
  const LogisticModel model = ConfidentModel(kDim);
  Batch b;
  for (int n = 0; n < kBatch; ++n) b.records.push_back(data.Draw(1));
  Batch bprime = b;
  Record canary = data.Draw(0);
  b.records.back() = canary;
  for (double& v : canary.x) v = -v;
  bprime.records.back() = canary;
  const double dist = L2Distance(*AverageClippedGradient(model, b, cfg),
                                 *AverageClippedGradient(model, bprime, cfg));
  EXPECT_NEAR(dist, cfg.Sensitivity(kBatch), 1e-12);
}

TEST(DpSgdStep, NoiseHasScaleSigmaLOverS) {
  BlobData data(kDim, 4.0, 10);
  const CanaryPair pair = MakeCanaryPair(data, kBatch, CanaryKind::kSimLabel);
  const LogisticModel model = ConfidentModel(kDim);
  SgdConfig cfg;
  cfg.sigma = 8.0;
  auto sampler = MakeGaussianSampler(GaussMethod::kPolar, 11,
                                     Resolution::Default());
  const std::vector<double> f = *AverageClippedGradient(model, pair.b, cfg);
  std::vector<double> scaled;
  for (int step = 0; step < 200; ++step) {
    const std::vector<double> y = *DpSgdStep(model, pair.b, cfg, *sampler);
    for (int k = 0; k < kDim; ++k) {
      scaled.push_back((y[k] - f[k]) * kBatch / (cfg.sigma * cfg.clip_norm));
    }
  }
  const TestResult ks = KsTest(scaled, StandardNormalCdf);
  EXPECT_GT(ks.p_value, 0.001);
}

TEST(DpSgdStep, RejectsNonPositiveSigma) {
  SgdConfig cfg;
  cfg.sigma = 0.0;
  BlobData data(kDim, 4.0, 1);
  Batch b{{data.Draw(1)}};
  auto sampler = MakeGaussianSampler(GaussMethod::kPolar, 1,
                                     Resolution::Default());
  EXPECT_FALSE(DpSgdStep(ConfidentModel(kDim), b, cfg, *sampler).ok());
}

TEST(CanaryPair, DiffersOnlyInLastRecord) {
  BlobData data(kDim, 4.0, 12);
  for (CanaryKind kind : {CanaryKind::kSimLabel, CanaryKind::kDiffLabel}) {
    const CanaryPair pair = MakeCanaryPair(data, kBatch, kind);
    ASSERT_EQ(pair.b.size(), kBatch);
    ASSERT_EQ(pair.bprime.size(), kBatch);
    for (int n = 0; n + 1 < kBatch; ++n) {
      EXPECT_EQ(pair.b.records[n].x, pair.bprime.records[n].x);
      EXPECT_EQ(pair.b.records[n].label, 1);
    }
    EXPECT_NE(pair.b.records.back().x, pair.bprime.records.back().x);
    EXPECT_EQ(pair.bprime.records.back().label,
              kind == CanaryKind::kSimLabel ? 1 : 0);
  }
}

TEST(CanaryKind, NamesRoundTrip) {
  for (CanaryKind k : {CanaryKind::kSimLabel, CanaryKind::kDiffLabel}) {
    EXPECT_EQ(*ParseCanaryKind(CanaryKindName(k)), k);
  }
  EXPECT_FALSE(ParseCanaryKind("same").ok());
}

TEST(RunDpSgdTrial, DeterministicForSeed) {
  DpSgdTrialConfig cfg;
  cfg.sgd.sigma = 16.0;
  const DpSgdTrial a = *RunDpSgdTrial(cfg, 99);
  const DpSgdTrial b = *RunDpSgdTrial(cfg, 99);
  EXPECT_EQ(a.released_bprime, b.released_bprime);
  EXPECT_EQ(a.vote.votes_b, b.vote.votes_b);
  EXPECT_EQ(a.vote.votes_bprime, b.vote.votes_bprime);
}

TEST(RunDpSgdTrial, DiffCanaryBeatsCoinAtSmallResolution) {
  DpSgdTrialConfig cfg;
  cfg.sgd.sigma = 64.0;
  cfg.log2_resolution = 16;
  int wins = 0;
  constexpr int kTrials = 200;
  for (int t = 0; t < kTrials; ++t) {
    wins += RunDpSgdTrial(cfg, TrialSeed(3, t))->success();
  }
  EXPECT_LT(BinomialUpperTail(wins, kTrials, 0.5), 1e-6);
}

}  // namespace
}  // namespace dpleak
