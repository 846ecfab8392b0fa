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
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/string_view.h"

namespace dpleak {

absl::StatusOr<MechanismParams> CalibrateGaussian(double epsilon, double delta,
                                                  double sensitivity) {
  if (!(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0) ||
      !(sensitivity > 0.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Gaussian calibration needs epsilon > 0, 0 < delta < 1 and "
        "sensitivity > 0; got epsilon=",
        epsilon, " delta=", delta, " sensitivity=", sensitivity));
  }
  MechanismParams params;
  params.epsilon = epsilon;
  params.delta = delta;
  params.sensitivity = sensitivity;
  params.sigma =
      std::sqrt(2.0 * std::log(1.25 / delta)) * sensitivity / epsilon;
  return params;
}

absl::StatusOr<MechanismParams> CalibrateLaplace(double epsilon,
                                                 double sensitivity) {
  if (!(epsilon > 0.0) || !(sensitivity > 0.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Laplace calibration needs epsilon > 0 and sensitivity > 0; got "
        "epsilon=",
        epsilon, " sensitivity=", sensitivity));
  }
  MechanismParams params;
  params.epsilon = epsilon;
  params.sensitivity = sensitivity;
  params.lambda = sensitivity / epsilon;
  return params;
}

absl::StatusOr<Dataset> LoadDataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("Cannot open ", path));
  std::string line;
  if (!std::getline(in, line) ||
      absl::StripAsciiWhitespace(line) != "credits") {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ":1: expected header `credits`"));
  }
  Dataset data;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    const absl::string_view field = absl::StripAsciiWhitespace(line);
    if (field.empty()) continue;
    int64_t value = 0;
    const auto [end, ec] =
        std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || end != field.data() + field.size()) {
      return absl::InvalidArgumentError(absl::StrCat(
          path, ":", line_number, ": not an integer: ", std::string(field)));
    }
    if (value < 0) {
      return absl::InvalidArgumentError(absl::StrCat(
          path, ":", line_number, ": negative credit ", value));
    }
    data.credits.push_back(value);
  }
  return data;
}

QueryResult PrivateCount(const Dataset& data,
                         const std::function<bool(int64_t)>& predicate,
                         const MechanismParams& params,
                         GaussianSampler& sampler) {
  QueryResult result;
  result.method = sampler.method();
  result.sigma = params.sigma;
  result.true_value = static_cast<double>(
      std::count_if(data.credits.begin(), data.credits.end(), predicate));
  if (params.sigma == 0.0) {
    result.value = result.true_value;
    return result;
  }
  result.value = result.true_value + sampler.Sample(params.sigma).value;
  if (sampler.method() != GaussMethod::kZiggurat) {
    result.companion =
        result.true_value + sampler.Sample(params.sigma).value;
  }
  return result;
}

SumResult PrivateSum(const Dataset& data, int64_t cap,
                     const DiscreteSampler* sampler, RngStream& stream,
                     Clock clock) {
  SumResult result;
  const WallTimer timer;
  for (int64_t x : data.credits) result.true_sum += std::min(x, cap);
  if (sampler != nullptr) {
    const DiscreteSample noise = (*sampler)(stream);
    result.noise = noise.value;
    result.trace = noise.trace;
  }
  result.value = result.true_sum + result.noise;
  result.elapsed = clock == Clock::kWallNanos
                       ? timer.ElapsedNanos()
                       : static_cast<int64_t>(data.credits.size()) +
                             result.trace.Total();
  return result;
}

}  // namespace dpleak
