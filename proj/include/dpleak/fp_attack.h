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

#ifndef DPLEAK_FP_ATTACK_H_
#define DPLEAK_FP_ATTACK_H_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dpleak/gauss.h"
#include "dpleak/rng.h"
#include "dpleak/ziggurat.h"

namespace dpleak {

// How a feasibility test decides that an observation is reachable.
enum class FeasibilityCheck {
  // Reconstruct the random inputs, re-run the sampler's own arithmetic and
  // compare the output within the ulp width.
  kForward,
  // Require some neighbor of the observation to make the inverted quantity
  // an integer within the integer tolerance: r * R^2 for polar, x1 * R and
  // x2 * R for Box-Muller, s~ / (sigma * w[i]) for the ziggurat. Misses
  // reachable values whose neighbors step over the integer.
  kLiteral,
};

absl::StatusOr<FeasibilityCheck> ParseFeasibilityCheck(std::string_view name);
std::string_view FeasibilityCheckName(FeasibilityCheck check);

struct NeighborSearchConfig {
  // Adjacent doubles probed in each direction of each observed variable.
  int width = 50;
  // Slack for the RandomFp integrality test and for widening the ziggurat
  // quotient range.
  double integer_tolerance = 0.0;
  FeasibilityCheck check = FeasibilityCheck::kForward;
};

struct FeasibilityVerdict {
  bool supports_d = false;
  bool supports_dprime = false;

  bool committed() const { return supports_d != supports_dprime; }
};

enum class Guess { kD, kDprime };

struct DistinguishOutcome {
  Guess guess;
  FeasibilityVerdict verdict;
};

// True iff some double within `width` ulps of x equals u/R (within the
// integer tolerance) for an integer u in [1, R).
bool IsFeasibleRandomFp(double x, Resolution res,
                        const NeighborSearchConfig& cfg);

// True iff some uniform pair accepted by the polar transform, scaled by
// sigma exactly as the sampler does, lands within `width` ulps of (s, s2) in
// both coordinates. The pair is recovered by inverting the transform on
// (s, s2) / sigma, rounding to the grid, and re-running the forward
// equations over a small window of grid points.
absl::StatusOr<bool> IsFeasiblePolar(double s, double s2, double sigma,
                                     Resolution res,
                                     const NeighborSearchConfig& cfg);

// Box-Muller analogue of IsFeasiblePolar(): u1 from exp(-(s^2 + s2^2) / 2),
// u2 from atan2(s2, s) / (2 pi) lifted to [0, 1).
absl::StatusOr<bool> IsFeasibleBoxMuller(double s, double s2, double sigma,
                                         Resolution res,
                                         const NeighborSearchConfig& cfg);

// True iff for some layer i and some 32-bit signed draw j whose rightmost 7
// bits equal i, the sampler's output sigma * (j * w[i]) lies within `width`
// ulps of s. Candidate draws come from the quotients s~ / (sigma * w[i]) over
// the neighbors s~ of s, widened by one plus the integer tolerance. Layer 0
// also needs |j| < k[0], since larger draws of that layer go to the tail.
// With FeasibilityCheck::kLiteral the recomputation is replaced by
// requiring some neighbor's quotient to be j within the integer tolerance.
absl::StatusOr<bool> IsFeasibleZiggurat(double s, double sigma,
                                        const ZigguratTables& tables,
                                        const NeighborSearchConfig& cfg);

// Runs the feasibility test of `method` on one candidate noise. The polar and
// Box-Muller tests need the companion; without it they are disabled and
// report false.
absl::StatusOr<bool> IsFeasibleNoise(GaussMethod method, double s,
                                     std::optional<double> s2, double sigma,
                                     Resolution res,
                                     const NeighborSearchConfig& cfg);

// Distinguishes a count released on D (true answer f_d) from one released on
// D' (f_dprime). Candidate noises are y - f and y2 - f. A singly supported
// side is guessed; otherwise the guess is a fair coin from `stream`.
absl::StatusOr<DistinguishOutcome> DistinguishCount(
    double y, std::optional<double> y2, double f_d, double f_dprime,
    GaussMethod method, double sigma, Resolution res,
    const NeighborSearchConfig& cfg, RngStream& stream);

// Every (sigma * s1, sigma * s2) the polar sampler can emit at resolution R,
// sorted. Only log2 R <= 12 is supported.
class PolarOracle {
 public:
  static absl::StatusOr<PolarOracle> Enumerate(Resolution res,
                                               double sigma = 1.0);

  const std::vector<UnitPair>& pairs() const { return pairs_; }
  uint64_t grid_size() const { return grid_size_; }

  // True iff some emitted pair lies within `width` ulps of (s, s2) in both
  // coordinates.
  bool Contains(double s, double s2, int width) const;

 private:
  std::vector<UnitPair> pairs_;
  uint64_t grid_size_ = 0;
};

struct DpSgdVote {
  Guess guess;
  int votes_b = 0;
  int votes_bprime = 0;
};

// Majority vote over coordinates. Candidate noises are S * (y - f); the
// polar and Box-Muller tests read consecutive coordinates (2k, 2k + 1) as
// one (s, s2) pair, the ziggurat test reads every coordinate alone. A tie
// is broken by a fair coin. `noise_sigma` is sigma * L.
absl::StatusOr<DpSgdVote> DpSgdAttack(const std::vector<double>& y,
                                      const std::vector<double>& f_b,
                                      const std::vector<double>& f_bprime,
                                      int batch_size, GaussMethod method,
                                      double noise_sigma, Resolution res,
                                      const NeighborSearchConfig& cfg,
                                      RngStream& stream);

struct ScanBin {
  double center = 0.0;
  double observations = 0.0;  // mean count per repeat
  double attackable = 0.0;    // mean attackable count per repeat

  double rate() const { return observations > 0 ? attackable / observations : 0; }
};

struct ScanConfig {
  double f_d = 0.0;
  double f_dprime = 1.0;
  double sigma = 114.0;
  int log2_resolution = 10;
  int64_t trials = 100000;
  int repeats = 1;
  double bin_width = 0.8;
  GaussMethod method = GaussMethod::kPolar;
  uint64_t seed = 0;
  NeighborSearchConfig search;
};

// Releases `trials` noisy answers f_d + noise (plus companions) and bins
// them by value. An answer is attackable when exactly one of D, D' supports
// it.
absl::StatusOr<std::vector<ScanBin>> AttackableValueScan(const ScanConfig& cfg);

}  // namespace dpleak

#endif  // DPLEAK_FP_ATTACK_H_
