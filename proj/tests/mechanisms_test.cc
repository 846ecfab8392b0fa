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

#include "dpleak/mechanisms.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "gtest/gtest.h"
#include "dpleak/discrete.h"
#include "dpleak/gauss_sampler.h"
#include "dpleak/rng.h"

namespace dpleak {
namespace {

// sqrt(2 ln(1.25e5)) from 30-digit arithmetic.
constexpr double kSigmaEps1 = 4.84480526260538942126;

std::string CreditPath() {
  return std::string(DPLEAK_SOURCE_DIR) + "/data/credit.csv";
}

std::string WriteTemp(const std::string& name, const std::string& body) {
  const std::string path =
      (std::filesystem::temp_directory_path() / name).string();
  std::ofstream(path) << body;
  return path;
}

TEST(CalibrateGaussian, ReferenceValue) {
  auto p = CalibrateGaussian(1.0, 1e-5, 1.0);
  ASSERT_TRUE(p.ok());
  EXPECT_NEAR(p->sigma, kSigmaEps1, 1e-12);
  EXPECT_NEAR(p->sigma, 4.84480, 1e-5);
}

TEST(CalibrateGaussian, ScalesWithEpsilonAndSensitivity) {
  const double base = CalibrateGaussian(1.0, 1e-5, 1.0)->sigma;
  EXPECT_DOUBLE_EQ(CalibrateGaussian(2.0, 1e-5, 1.0)->sigma, base / 2);
  EXPECT_NEAR(CalibrateGaussian(1.0, 1e-5, 10.0)->sigma, 10 * base, 1e-12);
  double previous = INFINITY;
  for (double eps : {0.1, 0.5, 1.0, 5.0, 20.0}) {
    const double sigma = CalibrateGaussian(eps, 1e-5, 1.0)->sigma;
    EXPECT_LT(sigma, previous);
    previous = sigma;
  }
}

TEST(CalibrateGaussian, RejectsOutOfRange) {
  EXPECT_FALSE(CalibrateGaussian(0.0, 1e-5, 1.0).ok());
  EXPECT_FALSE(CalibrateGaussian(1.0, 0.0, 1.0).ok());
  EXPECT_FALSE(CalibrateGaussian(1.0, 1.0, 1.0).ok());
  EXPECT_FALSE(CalibrateGaussian(1.0, 1e-5, -1.0).ok());
  EXPECT_FALSE(CalibrateGaussian(NAN, 1e-5, 1.0).ok());
}

TEST(CalibrateLaplace, ExactRatio) {
  EXPECT_EQ(CalibrateLaplace(2.0, 5000.0)->lambda, 2500.0);
  EXPECT_EQ(CalibrateLaplace(10.0, 5000.0)->lambda, 500.0);
  EXPECT_EQ(CalibrateLaplace(1.0, 1.0)->lambda, 1.0);
  EXPECT_FALSE(CalibrateLaplace(0.0, 1.0).ok());
  EXPECT_FALSE(CalibrateLaplace(1.0, 0.0).ok());
}

TEST(LoadDataset, BundledCreditData) {
  auto data = LoadDataset(CreditPath());
  ASSERT_TRUE(data.ok()) << data.status();
  ASSERT_EQ(data->credits.size(), 1000u);
  std::vector<int64_t> sorted = data->credits;
  std::sort(sorted.rbegin(), sorted.rend());
  EXPECT_EQ(sorted[0], 18424);
  EXPECT_EQ(sorted[1], 15945);
}

TEST(LoadDataset, ReportsErrors) {
  EXPECT_EQ(LoadDataset("/nonexistent/credit.csv").status().code(),
            absl::StatusCode::kNotFound);
  const auto bad_header = LoadDataset(WriteTemp("bad_header.csv", "amount\n1\n"));
  EXPECT_EQ(bad_header.status().code(), absl::StatusCode::kInvalidArgument);
  const auto bad_row =
      LoadDataset(WriteTemp("bad_row.csv", "credits\n12\nabc\n"));
  EXPECT_EQ(bad_row.status().code(), absl::StatusCode::kInvalidArgument);
  EXPECT_NE(bad_row.status().message().find(":3"), std::string::npos);
  const auto negative = LoadDataset(WriteTemp("negative.csv", "credits\n-4\n"));
  EXPECT_EQ(negative.status().code(), absl::StatusCode::kInvalidArgument);
  const auto blank = LoadDataset(WriteTemp("blank.csv", "credits\n3\n\n4\n"));
  ASSERT_TRUE(blank.ok());
  EXPECT_EQ(blank->credits.size(), 2u);
}

TEST(PrivateCount, ZeroSigmaReleasesExactCount) {
  auto data = *LoadDataset(CreditPath());
  MechanismParams params;
  params.sigma = 0.0;
  auto sampler = MakeGaussianSampler(GaussMethod::kPolar, 1, Resolution::Default());
  const QueryResult r = PrivateCount(
      data, [](int64_t x) { return x > 16000; }, params, *sampler);
  EXPECT_EQ(r.value, 1.0);
  EXPECT_EQ(r.true_value, 1.0);
}

TEST(PrivateCount, NeighboringDatasetsDifferByOne) {
  auto data = *LoadDataset(CreditPath());
  Dataset d = data;
  Dataset dprime = data;
  // D holds 0 where D' holds the 18424 record.
  for (int64_t& x : d.credits) {
    if (x == 18424) x = 0;
  }
  MechanismParams params;
  auto sampler = MakeGaussianSampler(GaussMethod::kPolar, 1, Resolution::Default());
  const auto above = [](int64_t x) { return x > 16000; };
  EXPECT_EQ(PrivateCount(d, above, params, *sampler).value, 0.0);
  EXPECT_EQ(PrivateCount(dprime, above, params, *sampler).value, 1.0);
}

TEST(PrivateCount, CompanionIsNextDrawForPairedMethods) {
  Dataset data{{1, 2, 3}};
  MechanismParams params = *CalibrateGaussian(1.0, 1e-5, 1.0);
  const auto all = [](int64_t) { return true; };
  for (GaussMethod m : {GaussMethod::kPolar, GaussMethod::kBoxMuller}) {
    auto a = MakeGaussianSampler(m, 42, Resolution::Default());
    auto b = MakeGaussianSampler(m, 42, Resolution::Default());
    const QueryResult r = PrivateCount(data, all, params, *a);
    ASSERT_TRUE(r.companion.has_value());
    const double s1 = b->Sample(params.sigma).value;
    const double s2 = b->Sample(params.sigma).value;
    EXPECT_EQ(r.value, 3.0 + s1);
    EXPECT_EQ(*r.companion, 3.0 + s2);
  }
  auto z = MakeGaussianSampler(GaussMethod::kZiggurat, 42, Resolution::Default());
  EXPECT_FALSE(PrivateCount(data, all, params, *z).companion.has_value());
}

TEST(PrivateCount, UtilityWithinFourSigma) {
  Dataset data{{5, 20000, 17000}};
  const MechanismParams params = *CalibrateGaussian(1.0, 1e-5, 1.0);
  const auto above = [](int64_t x) { return x > 16000; };
  for (GaussMethod m : {GaussMethod::kPolar, GaussMethod::kBoxMuller,
                        GaussMethod::kZiggurat}) {
    auto sampler = MakeGaussianSampler(m, 7, Resolution::Default());
    int outside = 0;
    constexpr int kRuns = 1000000;
    for (int t = 0; t < kRuns; ++t) {
      const QueryResult r = PrivateCount(data, above, params, *sampler);
      outside += std::abs(r.value - r.true_value) > 4 * params.sigma;
    }
    // 99.99% coverage allows 100 of 10^6; P(|Z| > 4) = 6.3e-5.
    EXPECT_LE(outside, 100) << GaussMethodName(m);
  }
}

TEST(PrivateSum, ZeroNoiseOnEmptyDataset) {
  RngStream stream(1);
  const SumResult r = PrivateSum(Dataset{}, 5000, nullptr, stream,
                                 Clock::kCostCounter);
  EXPECT_EQ(r.value, 0);
  EXPECT_EQ(r.true_sum, 0);
  EXPECT_EQ(r.elapsed, 0);
}

TEST(PrivateSum, NeighborsDifferByCap) {
  auto data = *LoadDataset(CreditPath());
  Dataset d = data;
  Dataset dprime = data;
  d.credits.push_back(5000);
  dprime.credits.push_back(0);
  RngStream stream(1);
  const int64_t sd =
      PrivateSum(d, 5000, nullptr, stream, Clock::kCostCounter).value;
  const int64_t sdp =
      PrivateSum(dprime, 5000, nullptr, stream, Clock::kCostCounter).value;
  EXPECT_EQ(sd - sdp, 5000);
  int64_t capped = 0;
  for (int64_t x : data.credits) capped += std::min<int64_t>(x, 5000);
  EXPECT_EQ(sdp, capped);
}

TEST(PrivateSum, CounterElapsedGrowsWithNoiseMagnitude) {
  Dataset data{{100, 7000, 3}};
  const double lambda = CalibrateLaplace(1.0, 8.0)->lambda;
  const DiscreteSampler sampler =
      *MakeDiscreteSampler(DiscreteKind::kLaplaceLoop, lambda);
  RngStream stream(5);
  std::map<int64_t, std::pair<double, int>> by_magnitude;
  for (int t = 0; t < 1000000; ++t) {
    const SumResult r =
        PrivateSum(data, 5000, &sampler, stream, Clock::kCostCounter);
    EXPECT_EQ(r.value, r.true_sum + r.noise);
    auto& [total, count] = by_magnitude[std::llabs(r.noise)];
    total += static_cast<double>(r.elapsed);
    ++count;
  }
  double previous = -1.0;
  for (const auto& [magnitude, entry] : by_magnitude) {
    if (magnitude > 40) break;
    const double mean = entry.first / entry.second;
    EXPECT_GT(mean, previous) << "magnitude " << magnitude;
    previous = mean;
  }
}

}  // namespace
}  // namespace dpleak
