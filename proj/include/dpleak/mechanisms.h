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

#ifndef DPLEAK_MECHANISMS_H_
#define DPLEAK_MECHANISMS_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpleak/clock.h"
#include "dpleak/discrete.h"
#include "dpleak/gauss.h"
#include "dpleak/gauss_sampler.h"

namespace dpleak {

struct MechanismParams {
  double epsilon = 0.0;
  double delta = 0.0;
  double sensitivity = 0.0;
  double sigma = 0.0;   // Gaussian scale, zero when unused
  double lambda = 0.0;  // Laplace scale, zero when unused
};

// sigma = sqrt(2 ln(1.25 / delta)) * sensitivity / epsilon.
absl::StatusOr<MechanismParams> CalibrateGaussian(double epsilon, double delta,
                                                  double sensitivity);

// lambda = sensitivity / epsilon.
absl::StatusOr<MechanismParams> CalibrateLaplace(double epsilon,
                                                 double sensitivity);

// One integer credit value per record.
struct Dataset {
  std::vector<int64_t> credits;
};

// Reads a CSV whose header is `credits` followed by one non-negative integer
// per line. Missing files yield NotFound; malformed rows yield
// InvalidArgument naming the line.
absl::StatusOr<Dataset> LoadDataset(const std::string& path);

struct QueryResult {
  double value = 0.0;
  double true_value = 0.0;
  GaussMethod method = GaussMethod::kPolar;
  double sigma = 0.0;
  // Answer of the same query released with the next noise draw. Present
  // for the polar and Box-Muller methods, whose next draw is the cached
  // second output of the transform.
  std::optional<double> companion;
};

// count(predicate) + N(0, sigma^2) drawn from `sampler`. sigma = 0 releases
// the exact count without sampling.
QueryResult PrivateCount(const Dataset& data,
                         const std::function<bool(int64_t)>& predicate,
                         const MechanismParams& params,
                         GaussianSampler& sampler);

struct SumResult {
  int64_t value = 0;
  int64_t true_sum = 0;
  int64_t noise = 0;
  CostTrace trace;
  // Records summed plus the sampler's trace total under kCostCounter,
  // nanoseconds under kWallNanos. Covers the summation and the sampling.
  int64_t elapsed = 0;
};

// Sum of min(x, cap) plus one draw of `sampler`. A null sampler releases the
// exact sum.
SumResult PrivateSum(const Dataset& data, int64_t cap,
                     const DiscreteSampler* sampler, RngStream& stream,
                     Clock clock);

}  // namespace dpleak

#endif  // DPLEAK_MECHANISMS_H_
