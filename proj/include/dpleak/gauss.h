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

#ifndef DPLEAK_GAUSS_H_
#define DPLEAK_GAUSS_H_

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>

#include "absl/status/statusor.h"
#include "dpleak/rng.h"

namespace dpleak {

enum class GaussMethod { kPolar, kBoxMuller, kZiggurat };

absl::StatusOr<GaussMethod> ParseGaussMethod(std::string_view name);
std::string_view GaussMethodName(GaussMethod method);

struct GaussSample {
  double value;
  double sigma;
  GaussMethod method;
  bool tail_used = false;
};

// A pair of unit-variance outputs before scaling by sigma.
struct UnitPair {
  double s1;
  double s2;
};

// Marsaglia polar transform of one uniform pair: x = 2u/R - 1,
// r = x1^2 + x2^2, s = x * sqrt(-2 ln r / r). Returns nullopt when the pair
// falls outside the unit disc or on its center.
std::optional<UnitPair> PolarTransform(uint64_t u1, uint64_t u2,
                                       Resolution res);

// Box-Muller transform: r = sqrt(-2 ln(u1/R)), theta = 2 pi u2/R, returns
// (r cos theta, r sin theta).
UnitPair BoxMullerTransform(uint64_t u1, uint64_t u2, Resolution res);

// Sampler state shared by the polar and Box-Muller methods. Each transform
// yields two values; the second is cached and returned by the next call.
class PolarState {
 public:
  PolarState(RngStream stream, Resolution res)
      : stream_(std::move(stream)), res_(res) {}

  RngStream& stream() { return stream_; }
  const RngStream& stream() const { return stream_; }
  Resolution res() const { return res_; }
  const std::optional<double>& cached_second() const { return cached_; }
  void ClearCache() { cached_.reset(); }

 private:
  friend GaussSample PolarSample(PolarState& state, double sigma);
  friend GaussSample BoxMullerSample(PolarState& state, double sigma);

  RngStream stream_;
  Resolution res_;
  std::optional<double> cached_;
};

// Returns sigma * s1 and caches sigma * s2, or returns the cached value.
// Sigma is applied as the last multiplication.
GaussSample PolarSample(PolarState& state, double sigma);

// Returns sigma * r cos(theta) and caches sigma * r sin(theta), or returns
// the cached value.
GaussSample BoxMullerSample(PolarState& state, double sigma);

}  // namespace dpleak

#endif  // DPLEAK_GAUSS_H_
