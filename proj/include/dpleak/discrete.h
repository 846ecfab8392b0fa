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

#ifndef DPLEAK_DISCRETE_H_
#define DPLEAK_DISCRETE_H_

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "dpleak/rng.h"

namespace dpleak {

// Deterministic cost of one sampling call. Its total is the timing
// observable used by the counter clock.
struct CostTrace {
  int64_t bernoulli_trials = 0;
  int64_t rejection_rounds = 0;
  int64_t bsearch_steps = 0;

  int64_t Total() const { return bernoulli_trials + bsearch_steps; }

  CostTrace& operator+=(const CostTrace& other) {
    bernoulli_trials += other.bernoulli_trials;
    rejection_rounds += other.rejection_rounds;
    bsearch_steps += other.bsearch_steps;
    return *this;
  }
};

enum class Distribution { kGeometric, kDiscreteLaplace, kDiscreteGaussian };

struct DiscreteSample {
  int64_t value = 0;
  CostTrace trace;
  Distribution distribution = Distribution::kGeometric;
  // Set by trial padding when the call needed more work than the budget.
  bool truncated = false;
};

// Non-negative rational num/den with den > 0.
struct Rational {
  uint64_t num = 0;
  uint64_t den = 1;

  double ToDouble() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }

  // Closest fraction with denominator at most `max_den`, by continued
  // fractions. Requires x >= 0.
  static Rational FromDouble(double x, uint64_t max_den = uint64_t{1} << 32);
};

struct BernoulliExpResult {
  bool bit;
  CostTrace trace;
};

// Returns true with probability exp(-gamma). gamma <= 1 uses the alternating
// series loop on Bernoulli(gamma/k); larger gamma factors into floor(gamma)
// calls at gamma = 1 and one call at the fractional part.
absl::StatusOr<BernoulliExpResult> BernoulliExp(RngStream& stream,
                                                Rational gamma);
absl::StatusOr<BernoulliExpResult> BernoulliExp(RngStream& stream,
                                                double gamma);

// Counts failures before the first success of Bernoulli(p) trials.
absl::StatusOr<DiscreteSample> GeometricLoop(RngStream& stream, double p);

// Failure count of an arbitrary trial source; the building block of
// GeometricLoop(), exposed for forcing trial outcomes in tests.
DiscreteSample CountFailures(const std::function<bool()>& trial);

// Smallest support bound whose truncated geometric mass is below 2^-60.
int64_t DefaultSupportBound(double p);

// Geometric sample by mass-proportional bisection of [0, support_bound].
// Each step consumes one uniform and halves the remaining mass.
absl::StatusOr<DiscreteSample> GeometricBsearch(RngStream& stream, double p,
                                                int64_t support_bound);
absl::StatusOr<DiscreteSample> GeometricBsearch(RngStream& stream, double p);

enum class GeometricBackend { kLoop, kBsearch };

// Integer Laplace with pmf proportional to exp(-|k| / lambda). The magnitude
// is a geometric draw with p = 1 - exp(-1/lambda) and the sign an
// independent fair bit (not counted in the trace); a negative zero is
// redrawn.
absl::StatusOr<DiscreteSample> DiscreteLaplace(
    RngStream& stream, double lambda,
    GeometricBackend backend = GeometricBackend::kLoop);

// Integer Gaussian with pmf proportional to exp(-k^2 / (2 sigma^2)), by
// rejection from DiscreteLaplace(floor(sigma) + 1). The trace adds up every
// round.
absl::StatusOr<DiscreteSample> DiscreteGaussian(RngStream& stream,
                                                double sigma);

// Geometric(p) conditioned on [0, max_value]. Always spends max_value + 1
// Bernoulli trials: trial i succeeds with the conditional probability of
// stopping there, and trials after the success are drawn and ignored.
absl::StatusOr<DiscreteSample> TruncatedGeometric(RngStream& stream, double p,
                                                  int64_t max_value);

// Named sampler configurations used by the harness and the timing attack.
enum class DiscreteKind {
  kGeometricLoop,
  kGeometricBsearch,
  kLaplaceLoop,
  kLaplaceBsearch,
  kGaussian,
};

absl::StatusOr<DiscreteKind> ParseDiscreteKind(std::string_view name);
std::string_view DiscreteKindName(DiscreteKind kind);

using DiscreteSampler = std::function<DiscreteSample(RngStream&)>;

// Validates `param` (p for geometric kinds, lambda for Laplace, sigma for
// Gaussian) once and returns a sampler closure.
absl::StatusOr<DiscreteSampler> MakeDiscreteSampler(DiscreteKind kind,
                                                    double param);

}  // namespace dpleak

#endif  // DPLEAK_DISCRETE_H_
