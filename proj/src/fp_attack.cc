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

#include "dpleak/fp_attack.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpleak/gauss_sampler.h"
#include "dpleak/ulp.h"

namespace dpleak {
namespace {

using Wide = __int128;

absl::Status CheckInputs(double s, double s2, double sigma) {
  if (!std::isfinite(s) || !std::isfinite(s2)) {
    return absl::InvalidArgumentError("Observed values must be finite");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sigma must be positive, got ", sigma));
  }
  return absl::OkStatus();
}

// Grid points tried around a reconstructed uniform. The inverse transform
// is accurate to a few ulps of x, which is below one grid step unless R
// approaches 2^53.
Wide ReconstructionWindow(Resolution res, int width) {
  const double scaled = static_cast<double>(width) * res.as_double() * 0x1p-53;
  return 2 + static_cast<Wide>(std::ceil(scaled));
}

Wide RoundToGrid(double u, Resolution res) {
  const double clamped = std::clamp(std::round(u), 0.0, res.as_double());
  return static_cast<Wide>(static_cast<uint64_t>(clamped));
}

bool WithinUlps(double observed, double candidate, int width) {
  return UlpDistance(observed, candidate) <= static_cast<uint64_t>(width);
}

bool FairBit(RngStream& stream) { return (stream.NextU64() >> 63) != 0; }

bool NearInteger(double v, double n, double tol) {
  return v >= n - tol && v <= n + tol;
}

// Calls visit(m) for every m in [-width, width] with g(m) within `tol` of an
// integer in [min_int, max_int], stopping early when visit returns true. g
// is evaluated at O(log width) points per candidate integer when monotone,
// otherwise at every point.
template <typename G, typename Visit>
bool ForEachIntegerHit(const G& g, int width, double tol, double min_int,
                       double max_int, const Visit& visit) {
  const double g_lo = g(-width);
  const double g_hi = g(width);
  const double sign = g_lo <= g_hi ? 1.0 : -1.0;
  const double lo_int = std::max(std::ceil(std::min(g_lo, g_hi) - tol), min_int);
  const double hi_int = std::min(std::floor(std::max(g_lo, g_hi) + tol), max_int);
  if (hi_int - lo_int > 2.0 * width) {
    for (int m = -width; m <= width; ++m) {
      const double v = g(m);
      const double n = std::round(v);
      if (n >= min_int && n <= max_int && NearInteger(v, n, tol) && visit(m)) {
        return true;
      }
    }
    return false;
  }
  for (double n = lo_int; n <= hi_int; n += 1.0) {
    // First m with sign * g(m) >= sign * n - tol.
    int lo = -width, hi = width + 1;
    while (lo < hi) {
      const int mid = lo + (hi - lo) / 2;
      if (sign * g(mid) >= sign * n - tol) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    for (int m = lo; m <= width; ++m) {
      if (!NearInteger(g(m), n, tol)) break;
      if (visit(m)) return true;
    }
  }
  return false;
}

// Integrality of exp(-(a~^2 + b~^2) / 2) * R^2 over the neighbor grid,
// with 0 < r <= 1.
bool LiteralPolar(double a, double b, Resolution res,
                  const NeighborSearchConfig& cfg) {
  const double r = res.as_double();
  const double r2 = r * r;
  // exp(-t/2) is monotone in b~^2, which is monotone in b~ unless the
  // window crosses zero.
  const bool monotone =
      std::signbit(StepUlps(b, -cfg.width)) == std::signbit(StepUlps(b, cfg.width));
  for (int k = -cfg.width; k <= cfg.width; ++k) {
    const double at = StepUlps(a, k);
    const double aa = at * at;
    const auto g = [&](int m) {
      const double bt = StepUlps(b, m);
      return std::exp(-0.5 * (aa + bt * bt)) * r2;
    };
    // r = 1 needs a~ = b~ = 0, which the sampler rejects.
    const auto accept = [](int) { return true; };
    if (monotone) {
      if (ForEachIntegerHit(g, cfg.width, cfg.integer_tolerance, 1.0, r2 - 1,
                            accept)) {
        return true;
      }
      continue;
    }
    for (int m = -cfg.width; m <= cfg.width; ++m) {
      const double v = g(m);
      const double n = std::round(v);
      if (n >= 1.0 && n < r2 && NearInteger(v, n, cfg.integer_tolerance)) {
        return true;
      }
    }
  }
  return false;
}

// Integrality of x1 * R and x2 * R for the same neighbor pair.
bool LiteralBoxMuller(double a, double b, Resolution res,
                      const NeighborSearchConfig& cfg) {
  const double r = res.as_double();
  const double tol = cfg.integer_tolerance;
  const bool monotone =
      std::signbit(StepUlps(b, -cfg.width)) == std::signbit(StepUlps(b, cfg.width));
  for (int k = -cfg.width; k <= cfg.width; ++k) {
    const double at = StepUlps(a, k);
    const double aa = at * at;
    const auto g = [&](int m) {
      const double bt = StepUlps(b, m);
      return std::exp(-0.5 * (aa + bt * bt)) * r;
    };
    const auto angle_on_grid = [&](int m) {
      double x2 = std::atan2(StepUlps(b, m), at) / (2.0 * std::numbers::pi);
      if (x2 < 0.0) x2 += 1.0;
      const double v = x2 * r;
      const double n = std::round(v);
      return n >= 1.0 && n < r && NearInteger(v, n, tol);
    };
    if (monotone) {
      if (ForEachIntegerHit(g, cfg.width, tol, 1.0, r - 1, angle_on_grid)) {
        return true;
      }
      continue;
    }
    for (int m = -cfg.width; m <= cfg.width; ++m) {
      const double v = g(m);
      const double n = std::round(v);
      if (n >= 1.0 && n < r && NearInteger(v, n, tol) && angle_on_grid(m)) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace

absl::StatusOr<FeasibilityCheck> ParseFeasibilityCheck(std::string_view name) {
  if (name == "forward") return FeasibilityCheck::kForward;
  if (name == "literal") return FeasibilityCheck::kLiteral;
  return absl::InvalidArgumentError(absl::StrCat(
      "Unknown feasibility check: ", std::string(name)));
}

std::string_view FeasibilityCheckName(FeasibilityCheck check) {
  return check == FeasibilityCheck::kForward ? "forward" : "literal";
}

bool IsFeasibleRandomFp(double x, Resolution res,
                        const NeighborSearchConfig& cfg) {
  if (!std::isfinite(x)) return false;
  const double r = res.as_double();
  for (int k = -cfg.width; k <= cfg.width; ++k) {
    const double v = StepUlps(x, k) * r;
    const double u = std::round(v);
    if (std::abs(v - u) <= cfg.integer_tolerance && u >= 1.0 && u < r) {
      return true;
    }
  }
  return false;
}

absl::StatusOr<bool> IsFeasiblePolar(double s, double s2, double sigma,
                                     Resolution res,
                                     const NeighborSearchConfig& cfg) {
  if (absl::Status st = CheckInputs(s, s2, sigma); !st.ok()) return st;
  const double a = s / sigma;
  const double b = s2 / sigma;
  if (cfg.check == FeasibilityCheck::kLiteral) return LiteralPolar(a, b, res, cfg);
  const double total = a * a + b * b;
  if (total == 0.0) return false;
  // r = exp(-total / 2) and x = s * sqrt(r / total).
  const double factor = std::sqrt(std::exp(-0.5 * total) / total);
  const double half_r = 0.5 * res.as_double();
  const Wide c1 = RoundToGrid((a * factor + 1.0) * half_r, res);
  const Wide c2 = RoundToGrid((b * factor + 1.0) * half_r, res);
  const Wide window = ReconstructionWindow(res, cfg.width);
  const Wide grid = static_cast<Wide>(res.value());
  for (Wide u1 = std::max<Wide>(1, c1 - window);
       u1 <= std::min<Wide>(grid - 1, c1 + window); ++u1) {
    for (Wide u2 = std::max<Wide>(1, c2 - window);
         u2 <= std::min<Wide>(grid - 1, c2 + window); ++u2) {
      const auto pair = PolarTransform(static_cast<uint64_t>(u1),
                                       static_cast<uint64_t>(u2), res);
      if (!pair.has_value()) continue;
      if (WithinUlps(s, sigma * pair->s1, cfg.width) &&
          WithinUlps(s2, sigma * pair->s2, cfg.width)) {
        return true;
      }
    }
  }
  return false;
}

absl::StatusOr<bool> IsFeasibleBoxMuller(double s, double s2, double sigma,
                                         Resolution res,
                                         const NeighborSearchConfig& cfg) {
  if (absl::Status st = CheckInputs(s, s2, sigma); !st.ok()) return st;
  const double a = s / sigma;
  const double b = s2 / sigma;
  if (cfg.check == FeasibilityCheck::kLiteral) {
    return LiteralBoxMuller(a, b, res, cfg);
  }
  const double x1 = std::exp(-0.5 * (a * a + b * b));
  double x2 = std::atan2(b, a) / (2.0 * std::numbers::pi);
  if (x2 < 0.0) x2 += 1.0;
  const Wide c1 = RoundToGrid(x1 * res.as_double(), res);
  const Wide c2 = RoundToGrid(x2 * res.as_double(), res);
  const Wide window = ReconstructionWindow(res, cfg.width);
  const Wide grid = static_cast<Wide>(res.value());
  for (Wide u1 = std::max<Wide>(1, c1 - window);
       u1 <= std::min<Wide>(grid - 1, c1 + window); ++u1) {
    for (Wide d2 = -window; d2 <= window; ++d2) {
      // The angle wraps around, so u2 is taken modulo R.
      const Wide u2 = ((c2 + d2) % grid + grid) % grid;
      if (u2 == 0) continue;
      const UnitPair pair = BoxMullerTransform(static_cast<uint64_t>(u1),
                                               static_cast<uint64_t>(u2), res);
      if (WithinUlps(s, sigma * pair.s1, cfg.width) &&
          WithinUlps(s2, sigma * pair.s2, cfg.width)) {
        return true;
      }
    }
  }
  return false;
}

absl::StatusOr<bool> IsFeasibleZiggurat(double s, double sigma,
                                        const ZigguratTables& tables,
                                        const NeighborSearchConfig& cfg) {
  if (absl::Status st = CheckInputs(s, 0.0, sigma); !st.ok()) return st;
  const double lo_s = StepUlps(s, -cfg.width);
  const double hi_s = StepUlps(s, cfg.width);
  const double slack = 1.0 + cfg.integer_tolerance;
  constexpr double kMin = std::numeric_limits<int32_t>::min();
  constexpr double kMax = std::numeric_limits<int32_t>::max();
  for (int i = 0; i < tables.n; ++i) {
    const double d = sigma * tables.w[i];
    // Division by a positive constant is monotone, so candidate draws lie in
    // [lo_s / d, hi_s / d], padded for the rounding of the quotient.
    const double j_lo = std::max(std::ceil(lo_s / d - slack), kMin);
    const double j_hi = std::min(std::floor(hi_s / d + slack), kMax);
    // Draws congruent to i modulo 128 only.
    const int64_t first = static_cast<int64_t>(j_lo);
    const int64_t offset = ((i - first) % 128 + 128) % 128;
    for (int64_t j = first + offset; static_cast<double>(j) <= j_hi; j += 128) {
      if (i == 0 && std::abs(j) >= static_cast<int64_t>(tables.k[0])) continue;
      if (cfg.check == FeasibilityCheck::kForward) {
        // The sampler's own arithmetic: sigma * (j * w[i]).
        const double emitted = sigma * (static_cast<double>(j) * tables.w[i]);
        if (WithinUlps(s, emitted, cfg.width)) return true;
        continue;
      }
      // Smallest neighbor whose quotient reaches j - tol.
      const double jd = static_cast<double>(j);
      const double tol = cfg.integer_tolerance;
      int64_t lo = -cfg.width, hi = cfg.width;
      while (lo < hi) {
        const int64_t mid = lo + (hi - lo) / 2;
        if (StepUlps(s, mid) / d >= jd - tol) {
          hi = mid;
        } else {
          lo = mid + 1;
        }
      }
      const double q = StepUlps(s, lo) / d;
      if (q >= jd - tol && q <= jd + tol) return true;
    }
  }
  return false;
}

absl::StatusOr<bool> IsFeasibleNoise(GaussMethod method, double s,
                                     std::optional<double> s2, double sigma,
                                     Resolution res,
                                     const NeighborSearchConfig& cfg) {
  switch (method) {
    case GaussMethod::kZiggurat:
      return IsFeasibleZiggurat(s, sigma, CanonicalZigguratTables(), cfg);
    case GaussMethod::kPolar:
      if (!s2.has_value()) return false;
      return IsFeasiblePolar(s, *s2, sigma, res, cfg);
    case GaussMethod::kBoxMuller:
      if (!s2.has_value()) return false;
      return IsFeasibleBoxMuller(s, *s2, sigma, res, cfg);
  }
  return absl::InvalidArgumentError("Unknown method");
}

absl::StatusOr<DistinguishOutcome> DistinguishCount(
    double y, std::optional<double> y2, double f_d, double f_dprime,
    GaussMethod method, double sigma, Resolution res,
    const NeighborSearchConfig& cfg, RngStream& stream) {
  if (f_d == f_dprime) {
    return absl::InvalidArgumentError("Neighboring answers must differ");
  }
  auto companion = [&](double f) -> std::optional<double> {
    if (!y2.has_value()) return std::nullopt;
    return *y2 - f;
  };
  DistinguishOutcome out;
  absl::StatusOr<bool> d =
      IsFeasibleNoise(method, y - f_d, companion(f_d), sigma, res, cfg);
  if (!d.ok()) return d.status();
  absl::StatusOr<bool> dp =
      IsFeasibleNoise(method, y - f_dprime, companion(f_dprime), sigma, res, cfg);
  if (!dp.ok()) return dp.status();
  out.verdict = {*d, *dp};
  if (out.verdict.committed()) {
    out.guess = *d ? Guess::kD : Guess::kDprime;
  } else {
    out.guess = FairBit(stream) ? Guess::kD : Guess::kDprime;
  }
  return out;
}

absl::StatusOr<PolarOracle> PolarOracle::Enumerate(Resolution res,
                                                   double sigma) {
  if (res.log2() > 12) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Exhaustive enumeration supports log2 R <= 12, got ", res.log2()));
  }
  PolarOracle oracle;
  const uint64_t r = res.value();
  for (uint64_t u1 = 1; u1 < r; ++u1) {
    for (uint64_t u2 = 1; u2 < r; ++u2) {
      ++oracle.grid_size_;
      const auto pair = PolarTransform(u1, u2, res);
      if (pair.has_value()) {
        oracle.pairs_.push_back({sigma * pair->s1, sigma * pair->s2});
      }
    }
  }
  std::sort(oracle.pairs_.begin(), oracle.pairs_.end(),
            [](const UnitPair& a, const UnitPair& b) {
              return a.s1 < b.s1 || (a.s1 == b.s1 && a.s2 < b.s2);
            });
  return oracle;
}

bool PolarOracle::Contains(double s, double s2, int width) const {
  const double lo = StepUlps(s, -width);
  const double hi = StepUlps(s, width);
  auto it = std::lower_bound(
      pairs_.begin(), pairs_.end(), lo,
      [](const UnitPair& p, double v) { return p.s1 < v; });
  for (; it != pairs_.end() && it->s1 <= hi; ++it) {
    if (WithinUlps(s2, it->s2, width)) return true;
  }
  return false;
}

absl::StatusOr<DpSgdVote> DpSgdAttack(const std::vector<double>& y,
                                      const std::vector<double>& f_b,
                                      const std::vector<double>& f_bprime,
                                      int batch_size, GaussMethod method,
                                      double noise_sigma, Resolution res,
                                      const NeighborSearchConfig& cfg,
                                      RngStream& stream) {
  if (y.size() != f_b.size() || y.size() != f_bprime.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Dimension mismatch: y has ", y.size(), ", f(B) has ", f_b.size(),
        ", f(B') has ", f_bprime.size()));
  }
  if (y.size() < 2) {
    return absl::InvalidArgumentError("Need at least two coordinates");
  }
  const double scale = static_cast<double>(batch_size);
  auto noise = [&](const std::vector<double>& f, size_t k) {
    return scale * (y[k] - f[k]);
  };
  DpSgdVote vote{Guess::kD};
  const bool paired = method != GaussMethod::kZiggurat;
  const size_t step = paired ? 2 : 1;
  for (size_t k = 0; k + step <= y.size(); k += step) {
    auto test = [&](const std::vector<double>& f) {
      const std::optional<double> second =
          paired ? std::optional<double>(noise(f, k + 1)) : std::nullopt;
      return IsFeasibleNoise(method, noise(f, k), second, noise_sigma, res,
                             cfg);
    };
    absl::StatusOr<bool> b = test(f_b);
    if (!b.ok()) return b.status();
    absl::StatusOr<bool> bp = test(f_bprime);
    if (!bp.ok()) return bp.status();
    if (*b && !*bp) ++vote.votes_b;
    if (*bp && !*b) ++vote.votes_bprime;
  }
  if (vote.votes_b != vote.votes_bprime) {
    vote.guess = vote.votes_b > vote.votes_bprime ? Guess::kD : Guess::kDprime;
  } else {
    vote.guess = FairBit(stream) ? Guess::kD : Guess::kDprime;
  }
  return vote;
}

absl::StatusOr<std::vector<ScanBin>> AttackableValueScan(
    const ScanConfig& cfg) {
  if (cfg.trials < 100000) {
    return absl::InvalidArgumentError(
        absl::StrCat("The scan needs at least 10^5 trials, got ", cfg.trials));
  }
  if (!(cfg.bin_width > 0.0) || cfg.repeats < 1) {
    return absl::InvalidArgumentError("bin_width and repeats must be positive");
  }
  absl::StatusOr<Resolution> res = Resolution::FromLog2(cfg.log2_resolution);
  if (!res.ok()) return res.status();
  std::map<int64_t, ScanBin> bins;
  RngStream coin(cfg.seed);
  for (int rep = 0; rep < cfg.repeats; ++rep) {
    auto sampler = MakeGaussianSampler(
        cfg.method, TrialSeed(cfg.seed, static_cast<uint64_t>(rep) + 1), *res);
    for (int64_t t = 0; t < cfg.trials; ++t) {
      const double y = cfg.f_d + sampler->Sample(cfg.sigma).value;
      std::optional<double> y2;
      if (cfg.method != GaussMethod::kZiggurat) {
        y2 = cfg.f_d + sampler->Sample(cfg.sigma).value;
      }
      absl::StatusOr<DistinguishOutcome> outcome =
          DistinguishCount(y, y2, cfg.f_d, cfg.f_dprime, cfg.method, cfg.sigma,
                           *res, cfg.search, coin);
      if (!outcome.ok()) return outcome.status();
      const int64_t index = static_cast<int64_t>(std::floor(y / cfg.bin_width));
      ScanBin& bin = bins[index];
      bin.center = (static_cast<double>(index) + 0.5) * cfg.bin_width;
      bin.observations += 1.0;
      bin.attackable += outcome->verdict.committed() ? 1.0 : 0.0;
    }
  }
  std::vector<ScanBin> out;
  for (auto& [index, bin] : bins) {
    bin.observations /= cfg.repeats;
    bin.attackable /= cfg.repeats;
    out.push_back(bin);
  }
  return out;
}

}  // namespace dpleak
