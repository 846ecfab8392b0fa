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

#include "dpleak/gauss.h"

#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpleak/gauss_sampler.h"

namespace dpleak {

absl::StatusOr<GaussMethod> ParseGaussMethod(std::string_view name) {
  if (name == "polar") return GaussMethod::kPolar;
  if (name == "boxmuller") return GaussMethod::kBoxMuller;
  if (name == "ziggurat") return GaussMethod::kZiggurat;
  return absl::InvalidArgumentError(
      absl::StrCat("Unknown Gaussian method: ", std::string(name)));
}

std::string_view GaussMethodName(GaussMethod method) {
  switch (method) {
    case GaussMethod::kPolar:
      return "polar";
    case GaussMethod::kBoxMuller:
      return "boxmuller";
    case GaussMethod::kZiggurat:
      return "ziggurat";
  }
  return "unknown";
}

std::optional<UnitPair> PolarTransform(uint64_t u1, uint64_t u2,
                                       Resolution res) {
  const double x1 = 2.0 * (static_cast<double>(u1) / res.as_double()) - 1.0;
  const double x2 = 2.0 * (static_cast<double>(u2) / res.as_double()) - 1.0;
  const double r = x1 * x1 + x2 * x2;
  if (r > 1.0 || r == 0.0) return std::nullopt;
  const double m = std::sqrt(-2.0 * std::log(r) / r);
  return UnitPair{x1 * m, x2 * m};
}

UnitPair BoxMullerTransform(uint64_t u1, uint64_t u2, Resolution res) {
  const double x1 = static_cast<double>(u1) / res.as_double();
  const double x2 = static_cast<double>(u2) / res.as_double();
  const double r = std::sqrt(-2.0 * std::log(x1));
  const double theta = 2.0 * std::numbers::pi * x2;
  return UnitPair{r * std::cos(theta), r * std::sin(theta)};
}

GaussSample PolarSample(PolarState& state, double sigma) {
  if (state.cached_.has_value()) {
    const double value = *state.cached_;
    state.cached_.reset();
    return {value, sigma, GaussMethod::kPolar};
  }
  while (true) {
    const UniformDraw d1 = RandomFp(state.stream_, state.res_);
    const UniformDraw d2 = RandomFp(state.stream_, state.res_);
    const std::optional<UnitPair> pair = PolarTransform(d1.u, d2.u, state.res_);
    if (!pair.has_value()) continue;
    state.cached_ = sigma * pair->s2;
    return {sigma * pair->s1, sigma, GaussMethod::kPolar};
  }
}

GaussSample BoxMullerSample(PolarState& state, double sigma) {
  if (state.cached_.has_value()) {
    const double value = *state.cached_;
    state.cached_.reset();
    return {value, sigma, GaussMethod::kBoxMuller};
  }
  const UniformDraw d1 = RandomFp(state.stream_, state.res_);
  const UniformDraw d2 = RandomFp(state.stream_, state.res_);
  const UnitPair pair = BoxMullerTransform(d1.u, d2.u, state.res_);
  state.cached_ = sigma * pair.s2;
  return {sigma * pair.s1, sigma, GaussMethod::kBoxMuller};
}

std::unique_ptr<GaussianSampler> MakeGaussianSampler(GaussMethod method,
                                                     uint64_t seed,
                                                     Resolution res) {
  switch (method) {
    case GaussMethod::kPolar:
      return std::make_unique<PolarSampler>(PolarState(RngStream(seed), res));
    case GaussMethod::kBoxMuller:
      return std::make_unique<BoxMullerSampler>(
          PolarState(RngStream(seed), res));
    case GaussMethod::kZiggurat:
      break;
  }
  return std::make_unique<ZigguratSampler>(RngStream(seed));
}

}  // namespace dpleak
