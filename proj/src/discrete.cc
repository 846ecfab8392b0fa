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
#include <limits>
#include <string>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace dpleak {
namespace {

// Uniform on (0, 1] with 53 bits; one primitive draw.
double UnitUniform(RngStream& stream) {
  return RandomFp(stream, Resolution::Default()).value;
}

bool FairBit(RngStream& stream) { return (stream.NextU64() >> 63) != 0; }

absl::Status CheckProbability(double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Success probability must be in (0, 1], got ", p));
  }
  return absl::OkStatus();
}

absl::Status CheckPositive(double x, std::string_view name) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    return absl::InvalidArgumentError(
        absl::StrCat(std::string(name), " must be positive, got ", x));
  }
  return absl::OkStatus();
}

// gamma in [0, 1]: draw Bernoulli(gamma / k) for k = 1, 2, ... until the first
// failure; the result is 1 iff that k is odd.
bool BernoulliExpUnit(RngStream& stream, Rational gamma, CostTrace& trace) {
  uint64_t k = 1;
  while (true) {
    ++trace.bernoulli_trials;
    const unsigned __int128 den =
        static_cast<unsigned __int128>(gamma.den) * k;
    const bool success =
        den > std::numeric_limits<uint64_t>::max()
            ? DrawBernoulli(stream, gamma.ToDouble() / static_cast<double>(k))
            : DrawBernoulliRational(stream, gamma.num,
                                    static_cast<uint64_t>(den));
    if (!success) break;
    ++k;
  }
  return k % 2 == 1;
}

bool BernoulliExpUnchecked(RngStream& stream, Rational gamma,
                           CostTrace& trace) {
  if (gamma.num <= gamma.den) return BernoulliExpUnit(stream, gamma, trace);
  const uint64_t whole = gamma.num / gamma.den;
  for (uint64_t i = 0; i < whole; ++i) {
    if (!BernoulliExpUnit(stream, {1, 1}, trace)) return false;
  }
  return BernoulliExpUnit(stream, {gamma.num % gamma.den, gamma.den}, trace);
}

DiscreteSample GeometricLoopUnchecked(RngStream& stream, double p) {
  return CountFailures([&] { return DrawBernoulli(stream, p); });
}

DiscreteSample GeometricBsearchUnchecked(RngStream& stream, double p,
                                         int64_t support_bound) {
  // Remaining candidates are [lo, hi). Mass of [lo, mid) relative to
  // [lo, hi) is expm1(-rate (mid - lo)) / expm1(-rate (hi - lo)).
  const double rate = -std::log1p(-p);
  int64_t lo = 0;
  int64_t hi = support_bound + 1;
  DiscreteSample sample;
  while (hi - lo > 1) {
    const double width = static_cast<double>(hi - lo);
    double offset = std::floor(
        -(std::log(0.5) + std::log1p(std::exp(-rate * width))) / rate);
    if (!(offset >= 1.0)) offset = 1.0;
    if (offset > width - 1.0) offset = width - 1.0;
    const int64_t mid = lo + static_cast<int64_t>(offset);
    const double q = std::expm1(-rate * static_cast<double>(mid - lo)) /
                     std::expm1(-rate * width);
    ++sample.trace.bsearch_steps;
    if (UnitUniform(stream) <= q) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  sample.value = lo;
  return sample;
}

DiscreteSample DiscreteLaplaceUnchecked(RngStream& stream, double lambda,
                                        GeometricBackend backend) {
  const double p = -std::expm1(-1.0 / lambda);
  CostTrace trace;
  while (true) {
    const DiscreteSample magnitude =
        backend == GeometricBackend::kLoop
            ? GeometricLoopUnchecked(stream, p)
            : GeometricBsearchUnchecked(stream, p, DefaultSupportBound(p));
    trace += magnitude.trace;
    const bool negative = FairBit(stream);
    if (negative && magnitude.value == 0) continue;
    DiscreteSample out;
    out.value = negative ? -magnitude.value : magnitude.value;
    out.trace = trace;
    out.distribution = Distribution::kDiscreteLaplace;
    return out;
  }
}

DiscreteSample DiscreteGaussianUnchecked(RngStream& stream, double sigma) {
  const double t = std::floor(sigma) + 1.0;
  const double sigma_sq = sigma * sigma;
  CostTrace trace;
  while (true) {
    const DiscreteSample candidate =
        DiscreteLaplaceUnchecked(stream, t, GeometricBackend::kLoop);
    trace += candidate.trace;
    ++trace.rejection_rounds;
    const double shift =
        std::abs(static_cast<double>(candidate.value)) - sigma_sq / t;
    const Rational gamma =
        Rational::FromDouble(shift * shift / (2.0 * sigma_sq));
    CostTrace accept_trace;
    const bool accept = BernoulliExpUnchecked(stream, gamma, accept_trace);
    trace += accept_trace;
    if (accept) {
      DiscreteSample out;
      out.value = candidate.value;
      out.trace = trace;
      out.distribution = Distribution::kDiscreteGaussian;
      return out;
    }
  }
}

}  // namespace

Rational Rational::FromDouble(double x, uint64_t max_den) {
  if (!(x > 0.0)) return {0, 1};
  // Convergents h/k of the continued fraction of x.
  uint64_t h_prev = 1, h = static_cast<uint64_t>(std::floor(x));
  uint64_t k_prev = 0, k = 1;
  double frac = x - std::floor(x);
  while (frac > 1e-18) {
    const double inv = 1.0 / frac;
    const double a_real = std::floor(inv);
    if (a_real > 1e18) break;
    const uint64_t a = static_cast<uint64_t>(a_real);
    const unsigned __int128 k_next =
        static_cast<unsigned __int128>(a) * k + k_prev;
    const unsigned __int128 h_next =
        static_cast<unsigned __int128>(a) * h + h_prev;
    if (k_next > max_den || h_next > std::numeric_limits<uint64_t>::max()) {
      break;
    }
    h_prev = h;
    k_prev = k;
    h = static_cast<uint64_t>(h_next);
    k = static_cast<uint64_t>(k_next);
    if (static_cast<double>(h) / static_cast<double>(k) == x) break;
    frac = inv - a_real;
  }
  return {h, k};
}

absl::StatusOr<BernoulliExpResult> BernoulliExp(RngStream& stream,
                                                Rational gamma) {
  if (gamma.den == 0) {
    return absl::InvalidArgumentError("Rational with zero denominator");
  }
  BernoulliExpResult result{true, {}};
  result.bit = BernoulliExpUnchecked(stream, gamma, result.trace);
  return result;
}

absl::StatusOr<BernoulliExpResult> BernoulliExp(RngStream& stream,
                                                double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    return absl::InvalidArgumentError(
        absl::StrCat("gamma must be a non-negative finite number, got ", gamma));
  }
  return BernoulliExp(stream, Rational::FromDouble(gamma));
}

DiscreteSample CountFailures(const std::function<bool()>& trial) {
  DiscreteSample sample;
  while (true) {
    ++sample.trace.bernoulli_trials;
    if (trial()) break;
    ++sample.value;
  }
  return sample;
}

absl::StatusOr<DiscreteSample> GeometricLoop(RngStream& stream, double p) {
  if (absl::Status s = CheckProbability(p); !s.ok()) return s;
  return GeometricLoopUnchecked(stream, p);
}

int64_t DefaultSupportBound(double p) {
  if (p >= 1.0) return 0;
  // (1 - p)^(B + 1) < 2^-60  <=>  B + 1 > 60 ln 2 / rate.
  const double rate = -std::log1p(-p);
  return static_cast<int64_t>(std::ceil(60.0 * std::log(2.0) / rate));
}

absl::StatusOr<DiscreteSample> GeometricBsearch(RngStream& stream, double p,
                                                int64_t support_bound) {
  if (absl::Status s = CheckProbability(p); !s.ok()) return s;
  if (support_bound < DefaultSupportBound(p) ||
      support_bound > (int64_t{1} << 52)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Support bound ", support_bound,
        " leaves more than 2^-60 mass untruncated or exceeds 2^52"));
  }
  return GeometricBsearchUnchecked(stream, p, support_bound);
}

absl::StatusOr<DiscreteSample> GeometricBsearch(RngStream& stream, double p) {
  if (absl::Status s = CheckProbability(p); !s.ok()) return s;
  return GeometricBsearch(stream, p, DefaultSupportBound(p));
}

absl::StatusOr<DiscreteSample> DiscreteLaplace(RngStream& stream,
                                               double lambda,
                                               GeometricBackend backend) {
  if (absl::Status s = CheckPositive(lambda, "lambda"); !s.ok()) return s;
  return DiscreteLaplaceUnchecked(stream, lambda, backend);
}

absl::StatusOr<DiscreteSample> DiscreteGaussian(RngStream& stream,
                                                double sigma) {
  if (absl::Status s = CheckPositive(sigma, "sigma"); !s.ok()) return s;
  return DiscreteGaussianUnchecked(stream, sigma);
}

absl::StatusOr<DiscreteSample> TruncatedGeometric(RngStream& stream, double p,
                                                  int64_t max_value) {
  if (absl::Status s = CheckProbability(p); !s.ok()) return s;
  if (max_value < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("max_value must be non-negative, got ", max_value));
  }
  const double log_fail = std::log1p(-p);
  DiscreteSample sample;
  bool done = false;
  for (int64_t i = 0; i <= max_value; ++i) {
    ++sample.trace.bernoulli_trials;
    if (done) {
      DrawBernoulli(stream, 0.5);
      continue;
    }
    // P(X = i | X >= i, X <= max_value).
    const double remaining = static_cast<double>(max_value + 1 - i);
    const double p_i = p / -std::expm1(remaining * log_fail);
    if (DrawBernoulli(stream, std::min(p_i, 1.0))) {
      sample.value = i;
      done = true;
    }
  }
  return sample;
}

absl::StatusOr<DiscreteKind> ParseDiscreteKind(std::string_view name) {
  if (name == "geom-loop") return DiscreteKind::kGeometricLoop;
  if (name == "geom-bsearch") return DiscreteKind::kGeometricBsearch;
  if (name == "dlaplace") return DiscreteKind::kLaplaceLoop;
  if (name == "dlaplace-bsearch") return DiscreteKind::kLaplaceBsearch;
  if (name == "dgauss") return DiscreteKind::kGaussian;
  return absl::InvalidArgumentError(
      absl::StrCat("Unknown discrete sampler: ", std::string(name)));
}

std::string_view DiscreteKindName(DiscreteKind kind) {
  switch (kind) {
    case DiscreteKind::kGeometricLoop:
      return "geom-loop";
    case DiscreteKind::kGeometricBsearch:
      return "geom-bsearch";
    case DiscreteKind::kLaplaceLoop:
      return "dlaplace";
    case DiscreteKind::kLaplaceBsearch:
      return "dlaplace-bsearch";
    case DiscreteKind::kGaussian:
      return "dgauss";
  }
  return "unknown";
}

absl::StatusOr<DiscreteSampler> MakeDiscreteSampler(DiscreteKind kind,
                                                    double param) {
  switch (kind) {
    case DiscreteKind::kGeometricLoop:
      if (absl::Status s = CheckProbability(param); !s.ok()) return s;
      return DiscreteSampler([param](RngStream& stream) {
        return GeometricLoopUnchecked(stream, param);
      });
    case DiscreteKind::kGeometricBsearch: {
      if (absl::Status s = CheckProbability(param); !s.ok()) return s;
      const int64_t bound = DefaultSupportBound(param);
      return DiscreteSampler([param, bound](RngStream& stream) {
        return GeometricBsearchUnchecked(stream, param, bound);
      });
    }
    case DiscreteKind::kLaplaceLoop:
    case DiscreteKind::kLaplaceBsearch: {
      if (absl::Status s = CheckPositive(param, "lambda"); !s.ok()) return s;
      const GeometricBackend backend = kind == DiscreteKind::kLaplaceLoop
                                           ? GeometricBackend::kLoop
                                           : GeometricBackend::kBsearch;
      return DiscreteSampler([param, backend](RngStream& stream) {
        return DiscreteLaplaceUnchecked(stream, param, backend);
      });
    }
    case DiscreteKind::kGaussian:
      if (absl::Status s = CheckPositive(param, "sigma"); !s.ok()) return s;
      return DiscreteSampler([param](RngStream& stream) {
        return DiscreteGaussianUnchecked(stream, param);
      });
  }
  return absl::InvalidArgumentError("Unknown discrete sampler kind");
}

}  // namespace dpleak
