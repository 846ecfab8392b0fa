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

#include "dpleak/timing.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpleak/stats.h"
#include "json.hpp"

namespace dpleak {
namespace {

// Bins keep at most this many times the minimum count, which bounds memory
// for the low magnitudes that fill first.
constexpr int64_t kStorageFactor = 4;

int64_t Median(std::vector<int64_t> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

// Runs `draw` on `repeats` copies of the stream state and keeps the median
// elapsed time; the stream advances as if the draw ran once.
template <typename Result, typename Draw>
Result MedianOfCopies(RngStream& stream, int repeats, const Draw& draw,
                      int64_t Result::*elapsed) {
  const int k = std::max(repeats, 1);
  std::vector<int64_t> times;
  times.reserve(k);
  Result result;
  RngStream after = stream;
  for (int r = 0; r < k; ++r) {
    RngStream copy = stream;
    result = draw(copy);
    times.push_back(result.*elapsed);
    after = copy;
  }
  stream = after;
  result.*elapsed = Median(std::move(times));
  return result;
}

bool SignAccepted(int64_t value, SignFilter sign) {
  switch (sign) {
    case SignFilter::kBoth:
      return true;
    case SignFilter::kPositive:
      return value >= 0;
    case SignFilter::kNegative:
      return value <= 0;
  }
  return true;
}

absl::Status CheckProfileConfig(const ProfileConfig& cfg) {
  if (cfg.i_max < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("i_max must be at least 1, got ", cfg.i_max));
  }
  if (cfg.bin_width < 1 || cfg.min_count < 1 || cfg.max_draws < 1) {
    return absl::InvalidArgumentError(
        "bin_width, min_count and max_draws must be positive");
  }
  return absl::OkStatus();
}

// Shared loop of the two profile builders. `draw` returns (noise, elapsed).
template <typename Draw>
absl::StatusOr<TimingProfile> CollectProfile(const std::string& sampler_id,
                                             double param,
                                             const ProfileConfig& cfg,
                                             const Draw& draw) {
  if (absl::Status st = CheckProfileConfig(cfg); !st.ok()) return st;
  const size_t bins = static_cast<size_t>(cfg.i_max) + 1;
  const size_t cap = static_cast<size_t>(cfg.min_count * kStorageFactor);
  std::vector<std::vector<double>> times(bins);
  size_t filled = 0;
  int64_t draws = 0;
  if (cfg.clock == Clock::kWallNanos) {
    PinCurrentThread();
    for (int64_t w = 0; w < cfg.warmup; ++w) draw();
  }
  while (filled < bins && draws < cfg.max_draws) {
    ++draws;
    const auto [noise, elapsed] = draw();
    if (!SignAccepted(noise, cfg.sign)) continue;
    const uint64_t bin = static_cast<uint64_t>(std::llabs(noise)) /
                         static_cast<uint64_t>(cfg.bin_width);
    if (bin >= bins) continue;
    std::vector<double>& slot = times[bin];
    if (slot.size() >= cap) continue;
    slot.push_back(static_cast<double>(elapsed));
    if (slot.size() == static_cast<size_t>(cfg.min_count)) ++filled;
  }
  TimingProfile profile;
  profile.clock = cfg.clock;
  profile.sampler_id = sampler_id;
  profile.param = param;
  profile.bin_width = cfg.bin_width;
  for (size_t i = 0; i < bins; ++i) {
    std::vector<double>& t = times[i];
    if (static_cast<int64_t>(t.size()) < cfg.min_count) {
      return absl::ResourceExhaustedError(absl::StrCat(
          "Magnitude bin ", i, " holds ", t.size(), " draws after ", draws,
          "; need ", cfg.min_count));
    }
    std::sort(t.begin(), t.end());
    ProfileEntry e;
    e.mean = Mean(t);
    e.q25 = SortedQuantile(t, 0.25);
    e.q75 = SortedQuantile(t, 0.75);
    e.stddev = std::sqrt(Variance(t));
    e.count = static_cast<int64_t>(t.size());
    profile.entries.push_back(e);
  }
  return profile;
}

}  // namespace

double TimingProfile::Magnitude(int i) const {
  if (bin_width == 1) return i;
  return (static_cast<double>(i) + 0.5) * static_cast<double>(bin_width);
}

bool TimingProfile::Flat() const {
  for (const ProfileEntry& e : entries) {
    if (e.mean != entries.front().mean) return false;
  }
  return true;
}

TimedDraw TimeDraw(const DiscreteSampler& sampler, RngStream& stream,
                   Clock clock, int repeats) {
  if (clock == Clock::kCostCounter) {
    TimedDraw out;
    out.sample = sampler(stream);
    out.elapsed = out.sample.trace.Total();
    return out;
  }
  return MedianOfCopies<TimedDraw>(
      stream, repeats,
      [&](RngStream& s) {
        TimedDraw out;
        const WallTimer timer;
        out.sample = sampler(s);
        out.elapsed = timer.ElapsedNanos();
        return out;
      },
      &TimedDraw::elapsed);
}

SumResult TimeSum(const Dataset& data, int64_t cap,
                  const DiscreteSampler& sampler, RngStream& stream,
                  Clock clock, int repeats) {
  if (clock == Clock::kCostCounter) {
    return PrivateSum(data, cap, &sampler, stream, clock);
  }
  return MedianOfCopies<SumResult>(
      stream, repeats,
      [&](RngStream& s) { return PrivateSum(data, cap, &sampler, s, clock); },
      &SumResult::elapsed);
}

absl::StatusOr<TimingProfile> BuildProfile(const DiscreteSampler& sampler,
                                           const std::string& sampler_id,
                                           double param,
                                           const ProfileConfig& cfg) {
  RngStream stream(cfg.seed);
  return CollectProfile(sampler_id, param, cfg, [&] {
    const TimedDraw d = TimeDraw(sampler, stream, cfg.clock, cfg.wall_repeats);
    return std::pair<int64_t, int64_t>(d.sample.value, d.elapsed);
  });
}

ProfileConfig SumProfileConfig(double lambda, int64_t cap, Clock clock,
                               int64_t min_count, uint64_t seed) {
  ProfileConfig cfg;
  cfg.clock = clock;
  cfg.bin_width = std::max<int64_t>(1, static_cast<int64_t>(lambda / 2));
  cfg.i_max = std::max(
      9, static_cast<int>(std::ceil(static_cast<double>(cap) / lambda)) + 1);
  cfg.min_count = min_count;
  cfg.max_draws = 100000000;
  cfg.seed = seed;
  return cfg;
}

absl::StatusOr<TimingProfile> BuildSumProfile(const Dataset& data, int64_t cap,
                                              const DiscreteSampler& sampler,
                                              const std::string& sampler_id,
                                              double param,
                                              const ProfileConfig& cfg) {
  RngStream stream(cfg.seed);
  return CollectProfile(sampler_id, param, cfg, [&] {
    const SumResult r =
        TimeSum(data, cap, sampler, stream, cfg.clock, cfg.wall_repeats);
    return std::pair<int64_t, int64_t>(r.noise, r.elapsed);
  });
}

int GuessMagnitude(const TimingProfile& profile, double elapsed) {
  int best = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= profile.i_max(); ++i) {
    const double gap = std::abs(elapsed - profile.entries[i].mean);
    if (gap < best_gap) {
      best = i;
      best_gap = gap;
    }
  }
  return best;
}

MatchResult EvaluateMatch(int64_t j, int64_t guess) {
  const int64_t diff = guess - std::llabs(j);
  return MatchResult{diff == 0, diff >= -1 && diff <= 1};
}

absl::StatusOr<SamplerAttackReport> SamplerAttackCampaign(
    const DiscreteSampler& sampler, const TimingProfile& profile,
    int64_t trials, uint64_t seed, int wall_repeats,
    const TimingTrialObserver& observer) {
  if (profile.entries.empty()) {
    return absl::InvalidArgumentError("Profile has no entries");
  }
  if (profile.bin_width != 1) {
    return absl::InvalidArgumentError(
        "The sampler attack needs a unit-bin profile");
  }
  if (trials < 1) return absl::InvalidArgumentError("trials must be positive");
  RngStream stream(seed);
  RngStream coin = stream;
  coin.Jump();
  const bool flat = profile.Flat();
  const int64_t limit = profile.i_max();
  if (profile.clock == Clock::kWallNanos) PinCurrentThread();
  int64_t exact = 0, approx = 0;
  for (int64_t t = 0; t < trials;) {
    const TimedDraw d = TimeDraw(sampler, stream, profile.clock, wall_repeats);
    if (std::llabs(d.sample.value) > limit) continue;
    ++t;
    const int64_t guess =
        flat ? static_cast<int64_t>(UniformBelow(coin, limit + 1))
             : GuessMagnitude(profile, static_cast<double>(d.elapsed));
    const MatchResult m = EvaluateMatch(d.sample.value, guess);
    exact += m.exact;
    approx += m.approx;
    if (observer) observer(d.sample.value, guess, m.exact, d.elapsed);
  }
  SamplerAttackReport report;
  report.trials = trials;
  report.exact_accuracy = static_cast<double>(exact) / trials;
  report.approx_accuracy = static_cast<double>(approx) / trials;
  report.exact_p_value = BinomialUpperTail(exact, trials, report.baseline_exact);
  report.approx_p_value =
      BinomialUpperTail(approx, trials, report.baseline_approx);
  return report;
}

SumGuess PrivateSumAttack(int64_t y, double elapsed, int64_t sum_d,
                          int64_t sum_dprime, const TimingProfile& profile,
                          RngStream& coin) {
  const double s = std::abs(static_cast<double>(y - sum_d));
  const double s_prime = std::abs(static_cast<double>(y - sum_dprime));
  const double s_g = profile.Magnitude(GuessMagnitude(profile, elapsed));
  const double gap = std::abs(s - s_g);
  const double gap_prime = std::abs(s_prime - s_g);
  if (gap < gap_prime) return SumGuess::kD;
  if (gap > gap_prime) return SumGuess::kDprime;
  return (coin.NextU64() >> 63) ? SumGuess::kD : SumGuess::kDprime;
}

absl::StatusOr<SumAttackReport> PrivateSumCampaign(
    const Dataset& base, int64_t cap, const DiscreteSampler& sampler,
    const TimingProfile& profile, Clock clock, int64_t trials, uint64_t seed,
    int wall_repeats, const TimingTrialObserver& observer) {
  if (profile.entries.empty()) {
    return absl::InvalidArgumentError("Profile has no entries");
  }
  if (trials < 1) return absl::InvalidArgumentError("trials must be positive");
  if (cap < 1) return absl::InvalidArgumentError("cap must be positive");
  Dataset d = base;
  Dataset dprime = base;
  d.credits.push_back(cap);
  dprime.credits.push_back(0);
  int64_t sum_d = 0;
  for (int64_t x : d.credits) sum_d += std::min(x, cap);
  const int64_t sum_dprime = sum_d - cap;

  RngStream stream(seed);
  RngStream coin = stream;
  coin.Jump();
  if (clock == Clock::kWallNanos) PinCurrentThread();
  int64_t wins = 0;
  for (int64_t t = 0; t < trials; ++t) {
    const bool use_dprime = (coin.NextU64() >> 63) != 0;
    const SumResult r = TimeSum(use_dprime ? dprime : d, cap, sampler, stream,
                                clock, wall_repeats);
    const SumGuess g = PrivateSumAttack(r.value, static_cast<double>(r.elapsed),
                                        sum_d, sum_dprime, profile, coin);
    const bool correct = (g == SumGuess::kDprime) == use_dprime;
    wins += correct;
    if (observer) {
      observer(use_dprime, g == SumGuess::kDprime, correct, r.elapsed);
    }
  }
  SumAttackReport report;
  report.trials = trials;
  report.success_rate = static_cast<double>(wins) / trials;
  report.p_value = BinomialUpperTail(wins, trials, 0.5);
  return report;
}

std::string ProfileToJson(const TimingProfile& profile) {
  nlohmann::ordered_json j;
  j["clock"] = std::string(ClockName(profile.clock));
  j["sampler"] = profile.sampler_id;
  j["param"] = profile.param;
  j["bin_width"] = profile.bin_width;
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (int i = 0; i <= profile.i_max(); ++i) {
    const ProfileEntry& e = profile.entries[i];
    entries.push_back({{"magnitude", profile.Magnitude(i)},
                       {"mean", e.mean},
                       {"q25", e.q25},
                       {"q75", e.q75},
                       {"stddev", e.stddev},
                       {"count", e.count}});
  }
  j["entries"] = std::move(entries);
  return j.dump(2);
}

absl::StatusOr<TimingProfile> ProfileFromJson(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return absl::InvalidArgumentError("Profile is not a JSON object");
  }
  try {
    TimingProfile p;
    absl::StatusOr<Clock> clock = ParseClock(j.at("clock").get<std::string>());
    if (!clock.ok()) return clock.status();
    p.clock = *clock;
    p.sampler_id = j.at("sampler").get<std::string>();
    p.param = j.at("param").get<double>();
    p.bin_width = j.at("bin_width").get<int64_t>();
    for (const auto& e : j.at("entries")) {
      p.entries.push_back(ProfileEntry{
          e.at("mean").get<double>(), e.at("q25").get<double>(),
          e.at("q75").get<double>(), e.at("stddev").get<double>(),
          e.at("count").get<int64_t>()});
    }
    if (p.entries.empty() || p.bin_width < 1) {
      return absl::InvalidArgumentError("Profile has no usable entries");
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("Malformed profile: ", e.what()));
  }
}

}  // namespace dpleak
