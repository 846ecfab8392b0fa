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

#ifndef DPLEAK_STATS_H_
#define DPLEAK_STATS_H_

#include <cstdint>
#include <functional>
#include <vector>

namespace dpleak {

double Mean(const std::vector<double>& x);

// Unbiased sample variance.
double Variance(const std::vector<double>& x);

// Linear-interpolated quantile of an already sorted sample.
double SortedQuantile(const std::vector<double>& sorted, double q);

double Pearson(const std::vector<double>& x, const std::vector<double>& y);

// Pearson correlation of average ranks.
double Spearman(const std::vector<double>& x, const std::vector<double>& y);

double StandardNormalCdf(double x);

struct TestResult {
  double statistic;
  double p_value;
};

// Asymptotic Kolmogorov distribution tail with Stephens' small-sample
// correction.
double KolmogorovPValue(double d, double effective_n);

// One-sample Kolmogorov-Smirnov test against a continuous CDF.
TestResult KsTest(std::vector<double> samples,
                  const std::function<double(double)>& cdf);

// Two-sample Kolmogorov-Smirnov test.
TestResult KsTest2(std::vector<double> a, std::vector<double> b);

// Pearson chi-square goodness of fit. Adjacent cells are merged until every
// expected count reaches `min_expected`. `probabilities` need not sum to one;
// the remainder forms a final cell observed as zero.
TestResult ChiSquareGof(const std::vector<uint64_t>& observed,
                        const std::vector<double>& probabilities,
                        double min_expected = 5.0);

// Chi-square test that two count vectors share one distribution. Cells are
// merged from the right until both expected counts reach five.
TestResult ChiSquareHomogeneity(const std::vector<uint64_t>& a,
                                const std::vector<uint64_t>& b);

// P(X >= k) for X ~ Binomial(n, p).
double BinomialUpperTail(uint64_t k, uint64_t n, double p);

// P(X <= k) for X ~ Binomial(n, p).
double BinomialLowerTail(uint64_t k, uint64_t n, double p);

// Two-sided binomial test p-value by doubling the smaller tail.
double BinomialTwoSided(uint64_t k, uint64_t n, double p);

}  // namespace dpleak

#endif  // DPLEAK_STATS_H_
