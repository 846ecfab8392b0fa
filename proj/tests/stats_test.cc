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

#include "dpleak/stats.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "dpleak/rng.h"

namespace dpleak {
namespace {

// Reference values of the Kolmogorov survival function computed with an
// independent implementation.
TEST(KolmogorovTest, AsymptoticSurvivalFunction) {
  const double n = 1e12;  // makes the small-sample correction negligible
  EXPECT_NEAR(KolmogorovPValue(1.3581 / std::sqrt(n), n), 0.0499996304316674,
              1e-6);
  EXPECT_NEAR(KolmogorovPValue(1.0 / std::sqrt(n), n), 0.26999967167735456,
              1e-6);
  EXPECT_NEAR(KolmogorovPValue(0.5 / std::sqrt(n), n), 0.9639452436648751,
              1e-6);
}

TEST(KsTest, UniformSamplesPassAndShiftedFail) {
  RngStream stream(1);
  const Resolution res = Resolution::Default();
  std::vector<double> u, shifted;
  for (int i = 0; i < 100000; ++i) {
    const double v = RandomFp(stream, res).value;
    u.push_back(v);
    shifted.push_back(v * 0.98);
  }
  auto cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  EXPECT_GT(KsTest(u, cdf).p_value, 0.001);
  EXPECT_LT(KsTest(shifted, cdf).p_value, 0.001);
  EXPECT_GT(KsTest2(u, std::vector<double>(u.rbegin(), u.rend())).p_value,
            0.99);
}

TEST(ChiSquareTest, DetectsBias) {
  const std::vector<uint64_t> fair = {2500, 2480, 2520, 2500};
  const std::vector<uint64_t> biased = {2800, 2400, 2400, 2400};
  const std::vector<double> probs(4, 0.25);
  EXPECT_GT(ChiSquareGof(fair, probs).p_value, 0.5);
  EXPECT_LT(ChiSquareGof(biased, probs).p_value, 1e-6);
  EXPECT_GT(ChiSquareHomogeneity(fair, fair).p_value, 0.99);
  EXPECT_LT(ChiSquareHomogeneity(fair, biased).p_value, 1e-3);
}

TEST(BinomialTest, TailsMatchClosedForm) {
  // P(X >= 2), X ~ Bin(3, 0.5) = 4/8.
  EXPECT_NEAR(BinomialUpperTail(2, 3, 0.5), 0.5, 1e-12);
  EXPECT_NEAR(BinomialLowerTail(0, 3, 0.5), 0.125, 1e-12);
  EXPECT_EQ(BinomialUpperTail(0, 3, 0.5), 1.0);
}

TEST(CorrelationTest, PearsonAndSpearman) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> y = {2, 4, 6, 8, 10};
  const std::vector<double> z = {1, 8, 27, 64, 125};
  EXPECT_NEAR(Pearson(x, y), 1.0, 1e-12);
  EXPECT_NEAR(Spearman(x, z), 1.0, 1e-12);
  EXPECT_LT(Pearson(x, z), 1.0);
}

TEST(QuantileTest, Interpolates) {
  const std::vector<double> v = {0, 1, 2, 3, 4};
  EXPECT_EQ(SortedQuantile(v, 0.25), 1.0);
  EXPECT_EQ(SortedQuantile(v, 0.5), 2.0);
  EXPECT_EQ(SortedQuantile({5}, 0.75), 5.0);
}

}  // namespace
}  // namespace dpleak
