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

#ifndef DPLEAK_TIMING_H_
#define DPLEAK_TIMING_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpleak/clock.h"
#include "dpleak/discrete.h"
#include "dpleak/mechanisms.h"
#include "dpleak/rng.h"

namespace dpleak {

// Timing statistics of the draws whose magnitude fell in one bin.
struct ProfileEntry {
  double mean = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double stddev = 0.0;
  int64_t count = 0;
};

// Conditional timing per magnitude bin. Bin i covers magnitudes
// [i * bin_width, (i + 1) * bin_width); with bin_width = 1 bin i is the
// magnitude i itself.
struct TimingProfile {
  Clock clock = Clock::kCostCounter;
  std::string sampler_id;
  double param = 0.0;
  int64_t bin_width = 1;
  std::vector<ProfileEntry> entries;

  int i_max() const { return static_cast<int>(entries.size()) - 1; }
  // Representative magnitude of bin i: i for unit bins, else the midpoint.
  double Magnitude(int i) const;
  // True when every bin has the same mean, so time carries no information.
  bool Flat() const;
};

enum class SignFilter { kBoth, kPositive, kNegative };

struct ProfileConfig {
  Clock clock = Clock::kCostCounter;
  int i_max = 9;
  int64_t bin_width = 1;
  int64_t min_count = 10000;
  // Draw budget; bins still under min_count afterwards fail the build.
  int64_t max_draws = 10000000;
  // Wall clock only: draws discarded before measuring, and re-executions
  // per observation whose median is kept.
  int64_t warmup = 1000;
  int wall_repeats = 5;
  SignFilter sign = SignFilter::kBoth;
  uint64_t seed = 0;
};

struct TimedDraw {
  DiscreteSample sample;
  int64_t elapsed = 0;
};

// One draw and its timing. Under kCostCounter the elapsed value is the trace
// total. Under kWallNanos the draw is executed `repeats` times from copies
// of the same stream state and the median time is kept; `stream` then
// advances past the draw once.
TimedDraw TimeDraw(const DiscreteSampler& sampler, RngStream& stream,
                   Clock clock, int repeats);

// Same for a private sum; the observable covers the summation.
SumResult TimeSum(const Dataset& data, int64_t cap,
                  const DiscreteSampler& sampler, RngStream& stream,
                  Clock clock, int repeats);

// Samples until every magnitude bin in [0, i_max] holds min_count draws.
// Draws beyond the last bin are ignored. Fails with ResourceExhausted when
// the budget runs out first.
absl::StatusOr<TimingProfile> BuildProfile(const DiscreteSampler& sampler,
                                           const std::string& sampler_id,
                                           double param,
                                           const ProfileConfig& cfg);

// Profile shape for the private sum: bins of width lambda / 2 reaching past
// the point |noise| = cap / 2 where the two candidate sums are equidistant,
// so i_max = max(9, ceil(cap / lambda) + 1).
ProfileConfig SumProfileConfig(double lambda, int64_t cap, Clock clock,
                               int64_t min_count, uint64_t seed);

// Profile of the end-to-end private sum on `data`, binned by |noise|.
absl::StatusOr<TimingProfile> BuildSumProfile(const Dataset& data, int64_t cap,
                                              const DiscreteSampler& sampler,
                                              const std::string& sampler_id,
                                              double param,
                                              const ProfileConfig& cfg);

// The bin whose mean time is closest to `elapsed`, ties toward the smaller
// bin.
int GuessMagnitude(const TimingProfile& profile, double elapsed);

struct MatchResult {
  bool exact = false;
  bool approx = false;
};

// exact: |j| == guess; approx: -1 <= guess - |j| <= 1.
MatchResult EvaluateMatch(int64_t j, int64_t guess);

// Per-trial callback: the secret (noise value, or 1 when D' was released),
// the guess, whether it was correct, and the observed elapsed value.
using TimingTrialObserver =
    std::function<void(int64_t truth, int64_t guess, bool correct,
                       int64_t elapsed)>;

struct SamplerAttackReport {
  int64_t trials = 0;
  double exact_accuracy = 0.0;
  double approx_accuracy = 0.0;
  double baseline_exact = 0.10;
  double baseline_approx = 0.33;
  // Binomial upper-tail p-values against the baselines.
  double exact_p_value = 1.0;
  double approx_p_value = 1.0;
};

// Draws noise until `trials` draws with |j| <= i_max have been observed and
// guesses each magnitude from its timing alone. Against a flat profile the
// attacker guesses uniformly over [0, i_max].
absl::StatusOr<SamplerAttackReport> SamplerAttackCampaign(
    const DiscreteSampler& sampler, const TimingProfile& profile,
    int64_t trials, uint64_t seed, int wall_repeats = 5,
    const TimingTrialObserver& observer = nullptr);

enum class SumGuess { kD, kDprime };

// s = |y - sum_d|, s' = |y - sum_dprime| and s_g is the magnitude of the
// profile bin closest to `elapsed`, clamped to the profiled range. Picks D
// when |s - s_g| < |s' - s_g|, D' when greater, else a fair coin.
SumGuess PrivateSumAttack(int64_t y, double elapsed, int64_t sum_d,
                          int64_t sum_dprime, const TimingProfile& profile,
                          RngStream& coin);

struct SumAttackReport {
  int64_t trials = 0;
  double success_rate = 0.0;
  double p_value = 1.0;  // binomial upper tail against 1/2
};

// Each trial releases the capped sum of D (with an extra record of credit
// `cap`) or of D' (the same record at 0) by a fair coin and attacks it.
absl::StatusOr<SumAttackReport> PrivateSumCampaign(
    const Dataset& base, int64_t cap, const DiscreteSampler& sampler,
    const TimingProfile& profile, Clock clock, int64_t trials, uint64_t seed,
    int wall_repeats = 5, const TimingTrialObserver& observer = nullptr);

// JSON round trip for profiles.
std::string ProfileToJson(const TimingProfile& profile);
absl::StatusOr<TimingProfile> ProfileFromJson(const std::string& text);

}  // namespace dpleak

#endif  // DPLEAK_TIMING_H_
