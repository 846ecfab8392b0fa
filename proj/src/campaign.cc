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

#include "dpleak/campaign.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpleak/discrete.h"
#include "dpleak/dpsgd.h"
#include "dpleak/gauss.h"
#include "dpleak/gauss_sampler.h"
#include "dpleak/mechanisms.h"
#include "dpleak/mitigations.h"
#include "dpleak/rng.h"
#include "dpleak/stats.h"
#include "dpleak/timing.h"

namespace dpleak {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::pair<Scenario, std::string_view> kScenarioNames[] = {
    {Scenario::kCount, "count"},
    {Scenario::kScan, "scan"},
    {Scenario::kDpSgd, "dpsgd"},
    {Scenario::kProfile, "profile"},
    {Scenario::kSumProfile, "sum-profile"},
    {Scenario::kSamplerTiming, "sampler-timing"},
    {Scenario::kSumTiming, "sum-timing"},
    {Scenario::kMitigation, "mitigation"},
};

struct FigureSchema {
  std::string_view id;
  std::vector<std::string> columns;
};

const std::vector<FigureSchema>& Schemas() {
  static const auto* schemas = new std::vector<FigureSchema>{
      {"fig1", {"bin_center", "attackable_rate", "mean_observations"}},
      {"fig2", {"epsilon", "success_rate", "sampler"}},
      {"fig3", {"sigma", "success_rate", "canary"}},
      {"fig4", {"magnitude", "mean_time", "q25", "q75", "series"}},
      {"fig5", {"sigma", "success_rate", "sampler"}},
      {"fig6", {"magnitude", "mean_time", "q25", "q75", "series"}},
      {"fig7", {"epsilon", "success_rate", "sampler"}},
      {"table1",
       {"sampler", "param", "exact_accuracy", "approx_accuracy",
        "baseline_exact", "baseline_approx", "exact_p_value",
        "approx_p_value"}},
      {"table2",
       {"sampler", "epsilon", "sigma", "attack_rate", "accuracy",
        "success_rate"}},
      {"mitigations", {"mitigation", "series", "metric", "value", "baseline"}},
  };
  return *schemas;
}

std::string FormatParam(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

double Ratio(int64_t num, int64_t den) {
  return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

double Band3Sigma(int64_t trials) { return 3.0 * std::sqrt(0.25 / trials); }

// Reads `key` into `out` when present; fails on a type mismatch.
template <typename T>
absl::Status Read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return absl::OkStatus();
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    return absl::InvalidArgumentError(
        absl::StrCat("Config field '", key, "' has the wrong type"));
  }
  return absl::OkStatus();
}

#define DPLEAK_RETURN_IF_ERROR(expr)     \
  do {                                   \
    const absl::Status status_ = (expr); \
    if (!status_.ok()) return status_;   \
  } while (0)

absl::Status Validate(const CampaignConfig& c) {
  if (c.trials < 1) return absl::InvalidArgumentError("trials must be >= 1");
  if (!Resolution::FromLog2(c.log2_resolution).ok()) {
    return absl::InvalidArgumentError("log2_resolution must be in [1, 63]");
  }
  if (c.search.width < 0) {
    return absl::InvalidArgumentError("search.width must be >= 0");
  }
  for (const std::string& s : c.samplers) {
    if (!ParseGaussMethod(s).ok()) {
      return absl::InvalidArgumentError(absl::StrCat("Unknown sampler: ", s));
    }
  }
  const bool sum = c.scenario == Scenario::kSumProfile ||
                   c.scenario == Scenario::kSumTiming;
  for (const SamplerSpec& s : c.discrete) {
    auto kind = ParseDiscreteKind(s.kind);
    if (!kind.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("Unknown discrete sampler: ", s.kind));
    }
    // Sum scenarios derive the scale from epsilon and the cap.
    if (!sum && !MakeDiscreteSampler(*kind, s.param).ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("Bad parameter for ", s.kind));
    }
  }
  for (const std::string& s : c.canaries) {
    if (!ParseCanaryKind(s).ok()) {
      return absl::InvalidArgumentError(absl::StrCat("Unknown canary: ", s));
    }
  }
  for (const std::string& s : c.mitigations) {
    if (!ParseMitigationKind(s).ok()) {
      return absl::InvalidArgumentError(absl::StrCat("Unknown mitigation: ", s));
    }
  }
  for (double e : c.epsilons) {
    if (!(e > 0.0)) return absl::InvalidArgumentError("epsilons must be > 0");
  }
  for (double s : c.sigmas) {
    if (!(s > 0.0)) return absl::InvalidArgumentError("sigmas must be > 0");
  }
  if (!(c.delta > 0.0 && c.delta < 1.0)) {
    return absl::InvalidArgumentError("delta must be in (0, 1)");
  }
  if (!(c.sensitivity > 0.0)) {
    return absl::InvalidArgumentError("sensitivity must be > 0");
  }
  const bool sweep = !c.epsilons.empty() || !c.sigmas.empty();
  switch (c.scenario) {
    case Scenario::kCount:
      if (c.samplers.empty() || !sweep) {
        return absl::InvalidArgumentError(
            "count needs samplers and an epsilon or sigma sweep");
      }
      break;
    case Scenario::kScan:
      if (c.samplers.size() != 1) {
        return absl::InvalidArgumentError("scan needs exactly one sampler");
      }
      break;
    case Scenario::kDpSgd:
      if (c.samplers.empty() || c.canaries.empty() || c.sigmas.empty()) {
        return absl::InvalidArgumentError(
            "dpsgd needs samplers, canaries and sigmas");
      }
      break;
    case Scenario::kProfile:
    case Scenario::kSamplerTiming:
      if (c.discrete.empty()) {
        return absl::InvalidArgumentError("timing scenarios need discrete");
      }
      break;
    case Scenario::kSumProfile:
    case Scenario::kSumTiming:
      if (c.discrete.empty() || c.epsilons.empty() || c.dataset.empty()) {
        return absl::InvalidArgumentError(
            "sum scenarios need discrete, epsilons and a dataset");
      }
      if (c.cap < 1) return absl::InvalidArgumentError("cap must be >= 1");
      break;
    case Scenario::kMitigation:
      if (c.mitigations.empty()) {
        return absl::InvalidArgumentError("mitigation needs mitigations");
      }
      break;
  }
  if (c.min_count < 1 || c.max_draws < 1 || c.i_max < 1) {
    return absl::InvalidArgumentError(
        "min_count, max_draws and i_max must be >= 1");
  }
  if (c.wall_repeats < 1 || c.cache_k < 1 || c.average_m < 1) {
    return absl::InvalidArgumentError(
        "wall_repeats, cache_k and average_m must be >= 1");
  }
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) {
    return absl::InvalidArgumentError("gamma must be in (0, 1]");
  }
  return absl::OkStatus();
}

// Shared state of one run.
struct Run {
  const CampaignConfig& config;
  const TrialSink& sink;
  Resolution res;
  Json points = Json::array();

  uint64_t PointSeed(int64_t index) const {
    return TrialSeed(config.seed, static_cast<uint64_t>(index));
  }

  void Emit(std::string_view series, double x, int64_t trial, int64_t truth,
            int64_t guess, bool correct, double observable) const {
    if (sink) sink({std::string(series), x, trial, truth, guess, correct,
                    observable});
  }
};

class Stopwatch {
 public:
  void Stamp(Json& point, bool record) const {
    if (!record) return;
    point["runtime_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

struct CountTally {
  int64_t wins = 0;
  int64_t committed = 0;
  int64_t committed_wins = 0;
};

// Neighbouring datasets for the count: D' adds one record that satisfies
// the predicate.
struct CountPair {
  Dataset d;
  Dataset dprime;
  int64_t threshold = 0;
};

absl::StatusOr<CountPair> LoadCountPair(const CampaignConfig& c) {
  CountPair pair;
  pair.threshold = c.count_threshold;
  if (!c.dataset.empty()) {
    auto data = LoadDataset(c.dataset);
    if (!data.ok()) return data.status();
    pair.d = *std::move(data);
  }
  pair.dprime = pair.d;
  pair.dprime.credits.push_back(c.count_threshold);
  return pair;
}

// Runs the count game for one sweep point with `sampler`.
absl::StatusOr<CountTally> CountGame(const Run& run, const CountPair& pair,
                                     GaussianSampler& sampler,
                                     GaussMethod method, double sigma,
                                     uint64_t seed, std::string_view series,
                                     double x) {
  const CampaignConfig& c = run.config;
  const int64_t threshold = pair.threshold;
  const auto predicate = [threshold](int64_t v) { return v >= threshold; };
  MechanismParams params;
  params.sigma = sigma;
  params.delta = c.delta;
  params.sensitivity = c.sensitivity;
  RngStream truth(TrialSeed(seed, 1));
  RngStream coin(TrialSeed(seed, 2));
  double f_d = 0.0;
  for (int64_t v : pair.d.credits) f_d += predicate(v);
  const double f_dprime = f_d + 1.0;
  CountTally tally;
  for (int64_t t = 0; t < c.trials; ++t) {
    const bool dprime = DrawBernoulli(truth, 0.5);
    const QueryResult q =
        PrivateCount(dprime ? pair.dprime : pair.d, predicate, params, sampler);
    auto out = DistinguishCount(q.value, q.companion, f_d, f_dprime, method,
                                sigma, run.res, c.search, coin);
    if (!out.ok()) return out.status();
    const bool correct = (out->guess == Guess::kDprime) == dprime;
    const bool committed = out->verdict.committed();
    tally.wins += correct;
    tally.committed += committed;
    tally.committed_wins += committed && correct;
    run.Emit(series, x, t, dprime, out->guess == Guess::kDprime, correct,
             committed);
  }
  return tally;
}

void FillCount(Json& p, const CountTally& tally, int64_t trials) {
  p["trials"] = trials;
  p["success_rate"] = Ratio(tally.wins, trials);
  p["attack_rate"] = Ratio(tally.committed, trials);
  p["accuracy"] = Ratio(tally.committed_wins, tally.committed);
  p["p_value"] = BinomialUpperTail(tally.wins, trials, 0.5);
}

absl::Status RunCount(Run& run) {
  const CampaignConfig& c = run.config;
  auto pair = LoadCountPair(c);
  if (!pair.ok()) return pair.status();
  struct Point {
    double epsilon;
    double sigma;
  };
  std::vector<Point> sweep;
  if (!c.sigmas.empty()) {
    for (double s : c.sigmas) sweep.push_back({0.0, s});
  } else {
    for (double e : c.epsilons) {
      auto params = CalibrateGaussian(e, c.delta, c.sensitivity);
      if (!params.ok()) return params.status();
      sweep.push_back({e, params->sigma});
    }
  }
  int64_t index = 0;
  for (const std::string& name : c.samplers) {
    const GaussMethod method = *ParseGaussMethod(name);
    for (const Point& pt : sweep) {
      const Stopwatch watch;
      const uint64_t seed = run.PointSeed(index++);
      auto sampler = MakeGaussianSampler(method, TrialSeed(seed, 0), run.res);
      const double x = c.sigmas.empty() ? pt.epsilon : pt.sigma;
      auto tally =
          CountGame(run, *pair, *sampler, method, pt.sigma, seed, name, x);
      if (!tally.ok()) return tally.status();
      Json p;
      p["sampler"] = name;
      if (c.sigmas.empty()) p["epsilon"] = pt.epsilon;
      p["sigma"] = pt.sigma;
      FillCount(p, *tally, c.trials);
      watch.Stamp(p, c.record_runtime);
      run.points.push_back(std::move(p));
    }
  }
  return absl::OkStatus();
}

absl::Status RunScan(Run& run) {
  const CampaignConfig& c = run.config;
  const Stopwatch watch;
  ScanConfig scan;
  scan.sigma = c.scan_sigma;
  scan.log2_resolution = c.log2_resolution;
  scan.trials = c.trials;
  scan.repeats = c.scan_repeats;
  scan.bin_width = c.scan_bin_width;
  scan.method = *ParseGaussMethod(c.samplers.front());
  scan.seed = run.PointSeed(0);
  scan.search = c.search;
  auto bins = AttackableValueScan(scan);
  if (!bins.ok()) return bins.status();
  for (const ScanBin& b : *bins) {
    Json p;
    p["bin_center"] = b.center;
    p["attackable_rate"] = b.rate();
    p["mean_observations"] = b.observations;
    p["mean_attackable"] = b.attackable;
    run.points.push_back(std::move(p));
  }
  if (c.record_runtime && !run.points.empty()) {
    watch.Stamp(run.points.back(), true);
  }
  return absl::OkStatus();
}

absl::Status RunDpSgd(Run& run) {
  const CampaignConfig& c = run.config;
  int64_t index = 0;
  for (const std::string& name : c.samplers) {
    for (const std::string& canary : c.canaries) {
      for (double sigma : c.sigmas) {
        const Stopwatch watch;
        const uint64_t seed = run.PointSeed(index++);
        DpSgdTrialConfig cfg;
        cfg.sgd.sigma = sigma;
        cfg.canary = *ParseCanaryKind(canary);
        cfg.method = *ParseGaussMethod(name);
        cfg.log2_resolution = c.log2_resolution;
        cfg.search = c.search;
        int64_t wins = 0;
        for (int64_t t = 0; t < c.trials; ++t) {
          auto trial = RunDpSgdTrial(cfg, TrialSeed(seed, t));
          if (!trial.ok()) return trial.status();
          wins += trial->success();
          run.Emit(canary, sigma, t, trial->released_bprime,
                   trial->vote.guess == Guess::kDprime, trial->success(),
                   trial->vote.votes_b - trial->vote.votes_bprime);
        }
        Json p;
        p["sampler"] = name;
        p["canary"] = canary;
        p["sigma"] = sigma;
        // Single-release Gaussian mechanism: noise sigma L / S against
        // sensitivity 2 L / S.
        p["epsilon_single_release"] =
            std::sqrt(2.0 * std::log(1.25 / c.delta)) * 2.0 / sigma;
        p["trials"] = c.trials;
        p["success_rate"] = Ratio(wins, c.trials);
        p["p_value"] = BinomialUpperTail(wins, c.trials, 0.5);
        p["band_3sigma"] = Band3Sigma(c.trials);
        watch.Stamp(p, c.record_runtime);
        run.points.push_back(std::move(p));
      }
    }
  }
  return absl::OkStatus();
}

ProfileConfig MakeProfileConfig(const CampaignConfig& c, uint64_t seed) {
  ProfileConfig cfg;
  cfg.clock = c.clock;
  cfg.i_max = c.i_max;
  cfg.min_count = c.min_count;
  cfg.max_draws = c.max_draws;
  cfg.wall_repeats = c.wall_repeats;
  cfg.seed = seed;
  return cfg;
}

std::string SeriesName(const SamplerSpec& s) {
  return absl::StrCat(s.kind, "(", FormatParam(s.param), ")");
}

void AppendProfileRows(Run& run, const TimingProfile& profile,
                       const std::string& series) {
  for (int i = 0; i <= profile.i_max(); ++i) {
    const ProfileEntry& e = profile.entries[i];
    Json p;
    p["series"] = series;
    p["magnitude"] = profile.Magnitude(i);
    p["mean_time"] = e.mean;
    p["q25"] = e.q25;
    p["q75"] = e.q75;
    p["stddev"] = e.stddev;
    p["count"] = e.count;
    p["clock"] = std::string(ClockName(profile.clock));
    run.points.push_back(std::move(p));
  }
}

absl::Status RunProfile(Run& run) {
  const CampaignConfig& c = run.config;
  int64_t index = 0;
  for (const SamplerSpec& s : c.discrete) {
    auto sampler = MakeDiscreteSampler(*ParseDiscreteKind(s.kind), s.param);
    if (!sampler.ok()) return sampler.status();
    auto profile = BuildProfile(*sampler, s.kind, s.param,
                                MakeProfileConfig(c, run.PointSeed(index++)));
    if (!profile.ok()) return profile.status();
    AppendProfileRows(run, *profile, SeriesName(s));
  }
  return absl::OkStatus();
}

Json SamplerAttackRow(const std::string& sampler, double param,
                      const SamplerAttackReport& r) {
  Json p;
  p["sampler"] = sampler;
  p["param"] = param;
  p["trials"] = r.trials;
  p["exact_accuracy"] = r.exact_accuracy;
  p["approx_accuracy"] = r.approx_accuracy;
  p["baseline_exact"] = r.baseline_exact;
  p["baseline_approx"] = r.baseline_approx;
  p["exact_p_value"] = r.exact_p_value;
  p["approx_p_value"] = r.approx_p_value;
  return p;
}

absl::StatusOr<SamplerAttackReport> ProfileAndAttack(
    const Run& run, const DiscreteSampler& sampler, const std::string& id,
    double param, uint64_t seed, TimingProfile* profile_out = nullptr) {
  const CampaignConfig& c = run.config;
  auto profile =
      BuildProfile(sampler, id, param, MakeProfileConfig(c, TrialSeed(seed, 0)));
  if (!profile.ok()) return profile.status();
  if (profile_out != nullptr) *profile_out = *profile;
  int64_t trial = 0;
  const TimingTrialObserver observer =
      [&](int64_t truth, int64_t guess, bool correct, int64_t elapsed) {
        run.Emit(id, param, trial++, truth, guess, correct,
                 static_cast<double>(elapsed));
      };
  return SamplerAttackCampaign(sampler, *profile, c.trials, TrialSeed(seed, 1),
                               c.wall_repeats,
                               run.sink ? observer : TimingTrialObserver());
}

absl::Status RunSamplerTiming(Run& run) {
  const CampaignConfig& c = run.config;
  int64_t index = 0;
  for (const SamplerSpec& s : c.discrete) {
    const Stopwatch watch;
    auto sampler = MakeDiscreteSampler(*ParseDiscreteKind(s.kind), s.param);
    if (!sampler.ok()) return sampler.status();
    auto report =
        ProfileAndAttack(run, *sampler, s.kind, s.param, run.PointSeed(index++));
    if (!report.ok()) return report.status();
    Json p = SamplerAttackRow(s.kind, s.param, *report);
    p["clock"] = std::string(ClockName(c.clock));
    watch.Stamp(p, c.record_runtime);
    run.points.push_back(std::move(p));
  }
  return absl::OkStatus();
}

// D with the extra record at the cap, used to profile the private sum.
absl::StatusOr<Dataset> LoadSumBase(const CampaignConfig& c) {
  return LoadDataset(c.dataset);
}

absl::Status RunSumProfile(Run& run) {
  const CampaignConfig& c = run.config;
  auto base = LoadSumBase(c);
  if (!base.ok()) return base.status();
  Dataset d = *base;
  d.credits.push_back(c.cap);
  int64_t index = 0;
  for (const SamplerSpec& s : c.discrete) {
    for (double eps : c.epsilons) {
      const double lambda = static_cast<double>(c.cap) / eps;
      auto sampler = MakeDiscreteSampler(*ParseDiscreteKind(s.kind), lambda);
      if (!sampler.ok()) return sampler.status();
      ProfileConfig cfg = SumProfileConfig(lambda, c.cap, c.clock, c.min_count,
                                           run.PointSeed(index++));
      cfg.wall_repeats = c.wall_repeats;
      auto profile = BuildSumProfile(d, c.cap, *sampler, s.kind, lambda, cfg);
      if (!profile.ok()) return profile.status();
      AppendProfileRows(run, *profile,
                        absl::StrCat(s.kind, " eps=", FormatParam(eps)));
    }
  }
  return absl::OkStatus();
}

absl::Status RunSumTiming(Run& run) {
  const CampaignConfig& c = run.config;
  auto base = LoadSumBase(c);
  if (!base.ok()) return base.status();
  Dataset d = *base;
  d.credits.push_back(c.cap);
  int64_t index = 0;
  for (const SamplerSpec& s : c.discrete) {
    for (double eps : c.epsilons) {
      const Stopwatch watch;
      const uint64_t seed = run.PointSeed(index++);
      const double lambda = static_cast<double>(c.cap) / eps;
      auto sampler = MakeDiscreteSampler(*ParseDiscreteKind(s.kind), lambda);
      if (!sampler.ok()) return sampler.status();
      ProfileConfig cfg = SumProfileConfig(lambda, c.cap, c.clock, c.min_count,
                                           TrialSeed(seed, 0));
      cfg.wall_repeats = c.wall_repeats;
      auto profile = BuildSumProfile(d, c.cap, *sampler, s.kind, lambda, cfg);
      if (!profile.ok()) return profile.status();
      int64_t trial = 0;
      const TimingTrialObserver observer =
          [&](int64_t truth, int64_t guess, bool correct, int64_t elapsed) {
            run.Emit(s.kind, eps, trial++, truth, guess, correct,
                     static_cast<double>(elapsed));
          };
      auto report = PrivateSumCampaign(
          *base, c.cap, *sampler, *profile, c.clock, c.trials,
          TrialSeed(seed, 1), c.wall_repeats,
          run.sink ? observer : TimingTrialObserver());
      if (!report.ok()) return report.status();
      Json p;
      p["sampler"] = s.kind;
      p["epsilon"] = eps;
      p["lambda"] = lambda;
      p["trials"] = report->trials;
      p["success_rate"] = report->success_rate;
      p["p_value"] = report->p_value;
      p["clock"] = std::string(ClockName(c.clock));
      watch.Stamp(p, c.record_runtime);
      run.points.push_back(std::move(p));
    }
  }
  return absl::OkStatus();
}

Json MetricRow(std::string_view mitigation, std::string_view series,
               std::string_view metric, double value, double baseline) {
  Json p;
  p["mitigation"] = std::string(mitigation);
  p["series"] = std::string(series);
  p["metric"] = std::string(metric);
  p["value"] = value;
  p["baseline"] = baseline;
  return p;
}

constexpr int64_t kDistributionSamples = 1000000;
constexpr int kHistogramBound = 40;

// Chi-square homogeneity of two samplers over 10^6 draws each, tails pooled.
double DiscreteHomogeneity(const DiscreteSampler& a, const DiscreteSampler& b,
                           uint64_t seed) {
  std::vector<uint64_t> ha(2 * kHistogramBound + 1, 0);
  std::vector<uint64_t> hb = ha;
  RngStream sa(TrialSeed(seed, 0)), sb(TrialSeed(seed, 1));
  for (int64_t i = 0; i < kDistributionSamples; ++i) {
    ++ha[std::clamp<int64_t>(a(sa).value, -kHistogramBound, kHistogramBound) +
         kHistogramBound];
    ++hb[std::clamp<int64_t>(b(sb).value, -kHistogramBound, kHistogramBound) +
         kHistogramBound];
  }
  return ChiSquareHomogeneity(ha, hb).p_value;
}

// KS against N(0, sigma^2) over 10^6 draws.
double GaussianKs(GaussianSampler& sampler, double sigma) {
  std::vector<double> x(kDistributionSamples);
  for (double& v : x) v = sampler.Sample(sigma).value / sigma;
  return KsTest(std::move(x), StandardNormalCdf).p_value;
}

absl::Status RunTimingMitigation(Run& run, MitigationKind kind,
                                 const SamplerSpec& s, uint64_t seed) {
  const CampaignConfig& c = run.config;
  const std::string_view name = MitigationKindName(kind);
  const std::string series = SeriesName(s);
  auto inner = MakeDiscreteSampler(*ParseDiscreteKind(s.kind), s.param);
  if (!inner.ok()) return inner.status();
  DiscreteSampler wrapped = *inner;
  if (kind == MitigationKind::kPadTrials) {
    auto policy = CalibratePadding(*inner, PaddingMode::kTrialCount,
                                   TrialSeed(seed, 2));
    if (!policy.ok()) return policy.status();
    auto padded = MakePaddedSampler(*inner, *policy);
    if (!padded.ok()) return padded.status();
    wrapped = *padded;
    run.points.push_back(MetricRow(name, series, "threshold_trials",
                                   static_cast<double>(policy->threshold), 0));
    RngStream stream(TrialSeed(seed, 3));
    int64_t truncated = 0;
    for (int64_t i = 0; i < kDistributionSamples; ++i) {
      truncated += wrapped(stream).truncated;
    }
    run.points.push_back(MetricRow(name, series, "truncation_rate",
                                   Ratio(truncated, kDistributionSamples),
                                   0.005));
  } else if (kind == MitigationKind::kCache) {
    std::shared_ptr<NoiseCache> cache;
    auto cached = MakeCachedSampler(*inner, c.cache_k, &cache);
    if (!cached.ok()) return cached.status();
    run.points.push_back(MetricRow(
        name, series, "distribution_p_value",
        DiscreteHomogeneity(*inner, *cached, TrialSeed(seed, 4)), 0.001));
    // Observations at the positions that do not refill the cache.
    wrapped = [cache](RngStream& st) {
      DiscreteSample out = cache->Next(st);
      while (cache->last_call_refilled()) out = cache->Next(st);
      return out;
    };
  }
  if (kind == MitigationKind::kPadTrials) {
    run.points.push_back(MetricRow(
        name, series, "distribution_p_value",
        DiscreteHomogeneity(*inner, wrapped, TrialSeed(seed, 4)), 0.001));
  }
  TimingProfile profile;
  auto report = ProfileAndAttack(run, wrapped, s.kind, s.param, seed, &profile);
  if (!report.ok()) return report.status();
  run.points.push_back(MetricRow(name, series, "profile_flat",
                                 profile.Flat() ? 1.0 : 0.0, 1.0));
  run.points.push_back(MetricRow(name, series, "exact_accuracy",
                                 report->exact_accuracy,
                                 report->baseline_exact));
  run.points.push_back(MetricRow(name, series, "approx_accuracy",
                                 report->approx_accuracy,
                                 report->baseline_approx));
  return absl::OkStatus();
}

absl::Status RunPadTime(Run& run, const SamplerSpec& s, uint64_t seed) {
  constexpr int64_t kCalls = 10000;
  const std::string series = SeriesName(s);
  auto inner = MakeDiscreteSampler(*ParseDiscreteKind(s.kind), s.param);
  if (!inner.ok()) return inner.status();
  auto policy =
      CalibratePadding(*inner, PaddingMode::kWallTime, TrialSeed(seed, 0));
  if (!policy.ok()) return policy.status();
  PinCurrentThread();
  RngStream a(TrialSeed(seed, 1)), b(TrialSeed(seed, 1));
  std::vector<double> plain, padded;
  int64_t overruns = 0;
  for (int64_t i = 0; i < kCalls; ++i) {
    WallTimer t0;
    (*inner)(a);
    plain.push_back(static_cast<double>(t0.ElapsedNanos()));
    WallTimer t1;
    overruns += PaddedSampleTime(*inner, b, policy->threshold).truncated;
    padded.push_back(static_cast<double>(t1.ElapsedNanos()));
  }
  const double mean = Mean(padded);
  const std::string_view name = MitigationKindName(MitigationKind::kPadTime);
  run.points.push_back(MetricRow(name, series, "threshold_nanos",
                                 static_cast<double>(policy->threshold), 0));
  run.points.push_back(MetricRow(name, series, "elapsed_cv",
                                 std::sqrt(Variance(padded)) / mean, 0.05));
  run.points.push_back(
      MetricRow(name, series, "overhead", mean / Mean(plain) - 1.0, 0.105));
  run.points.push_back(MetricRow(name, series, "overrun_rate",
                                 Ratio(overruns, kCalls), 0.005));
  return absl::OkStatus();
}

absl::Status RunAverage(Run& run, GaussMethod method, uint64_t seed) {
  const CampaignConfig& c = run.config;
  const std::string series(GaussMethodName(method));
  const std::string_view name = MitigationKindName(MitigationKind::kAverage);
  constexpr double kSigma = 5.0;
  auto direct = MakeGaussianSampler(method, TrialSeed(seed, 0), run.res);
  auto averaged = MakeAveragedGaussian(
      MakeGaussianSampler(method, TrialSeed(seed, 1), run.res), c.average_m);
  if (!averaged.ok()) return averaged.status();
  int64_t direct_bad = 0, averaged_bad = 0;
  for (int64_t t = 0; t < c.trials; ++t) {
    const auto judge = [&](GaussianSampler& s) -> absl::StatusOr<bool> {
      const double a = s.Sample(kSigma).value;
      std::optional<double> b;
      if (method != GaussMethod::kZiggurat) b = s.Sample(kSigma).value;
      return IsFeasibleNoise(method, a, b, kSigma, run.res, c.search);
    };
    auto d = judge(*direct);
    auto v = judge(**averaged);
    if (!d.ok()) return d.status();
    if (!v.ok()) return v.status();
    direct_bad += !*d;
    averaged_bad += !*v;
  }
  run.points.push_back(MetricRow(name, series, "infeasible_rate_direct",
                                 Ratio(direct_bad, c.trials), 0.0));
  run.points.push_back(MetricRow(name, series, "infeasible_rate_averaged",
                                 Ratio(averaged_bad, c.trials), 0.0));
  auto check = MakeAveragedGaussian(
      MakeGaussianSampler(method, TrialSeed(seed, 2), Resolution::Default()),
      c.average_m);
  std::vector<double> x(kDistributionSamples);
  for (double& v : x) v = (*check)->Sample(1.0).value;
  run.points.push_back(
      MetricRow(name, series, "variance_ratio", Variance(x), 1.0));
  return absl::OkStatus();
}

absl::Status RunDiscardSecond(Run& run, GaussMethod method, uint64_t seed) {
  const CampaignConfig& c = run.config;
  const std::string series(GaussMethodName(method));
  const std::string_view name =
      MitigationKindName(MitigationKind::kDiscardSecond);
  auto pair = LoadCountPair(c);
  if (!pair.ok()) return pair.status();
  const std::vector<double> epsilons =
      c.epsilons.empty() ? std::vector<double>{1.0} : c.epsilons;
  int64_t index = 0;
  for (double eps : epsilons) {
    auto params = CalibrateGaussian(eps, c.delta, c.sensitivity);
    if (!params.ok()) return params.status();
    const uint64_t point_seed = TrialSeed(seed, index++);
    auto wrapped = MakeDiscardSecond(
        MakeGaussianSampler(method, TrialSeed(point_seed, 0), run.res));
    if (!wrapped.ok()) return wrapped.status();
    auto tally = CountGame(run, *pair, **wrapped, method, params->sigma,
                           point_seed, series, eps);
    if (!tally.ok()) return tally.status();
    Json p = MetricRow(name, absl::StrCat(series, " eps=", FormatParam(eps)),
                       "success_rate", Ratio(tally->wins, c.trials), 0.5);
    p["band_3sigma"] = Band3Sigma(c.trials);
    run.points.push_back(std::move(p));
  }
  auto check = MakeDiscardSecond(
      MakeGaussianSampler(method, TrialSeed(seed, 99), Resolution::Default()));
  run.points.push_back(MetricRow(name, series, "distribution_p_value",
                                 GaussianKs(**check, 1.0), 0.001));
  return absl::OkStatus();
}

absl::Status RunDiscretize(Run& run, uint64_t seed) {
  const CampaignConfig& c = run.config;
  const std::string_view name = MitigationKindName(MitigationKind::kDiscretize);
  constexpr int kDim = 64;
  constexpr int kBatch = 16;
  constexpr int kSteps = 1000;
  BlobData data(kDim, 4.0, TrialSeed(seed, 0));
  auto normal =
      MakeGaussianSampler(GaussMethod::kPolar, TrialSeed(seed, 1),
                          Resolution::Default());
  LogisticModel model{std::vector<double>(kDim), 0.3};
  for (double& w : model.w) w = normal->Sample(0.1).value;
  const CanaryPair pair = MakeCanaryPair(data, kBatch, CanaryKind::kDiffLabel);
  SgdConfig cfg;
  cfg.dim = kDim;
  cfg.sigma = 0.0;
  auto f = AverageClippedGradient(model, pair.b, cfg);
  if (!f.ok()) return f.status();
  RngStream stream(TrialSeed(seed, 2));
  std::vector<double> mean(kDim, 0.0);
  double off_grid = 0.0;
  for (int t = 0; t < kSteps; ++t) {
    auto step = DiscretizedDpSgdStep(model, pair.b, cfg, c.gamma, stream);
    if (!step.ok()) return step.status();
    const std::vector<double> sum = step->Sum();
    const std::vector<double> avg = step->Average();
    for (int k = 0; k < kDim; ++k) {
      mean[k] += avg[k] / kSteps;
      const double units = sum[k] / c.gamma;
      off_grid = std::max(off_grid, std::abs(units - std::round(units)));
    }
  }
  // Each rounding has standard deviation at most gamma / 2.
  const double se =
      c.gamma * 0.5 * std::sqrt(static_cast<double>(kBatch)) / kBatch /
      std::sqrt(static_cast<double>(kSteps));
  double worst = 0.0;
  for (int k = 0; k < kDim; ++k) {
    worst = std::max(worst, std::abs(mean[k] - (*f)[k]) / se);
  }
  const std::string series = absl::StrCat("gamma=", FormatParam(c.gamma));
  run.points.push_back(MetricRow(name, series, "max_grid_residual", off_grid, 0));
  run.points.push_back(MetricRow(name, series, "max_rounding_bias_z", worst, 3));
  return absl::OkStatus();
}

absl::Status RunMitigation(Run& run) {
  const CampaignConfig& c = run.config;
  int64_t index = 0;
  for (const std::string& m : c.mitigations) {
    const MitigationKind kind = *ParseMitigationKind(m);
    switch (kind) {
      case MitigationKind::kNone:
      case MitigationKind::kPadTrials:
      case MitigationKind::kCache:
        for (const SamplerSpec& s : c.discrete) {
          DPLEAK_RETURN_IF_ERROR(
              RunTimingMitigation(run, kind, s, run.PointSeed(index++)));
        }
        break;
      case MitigationKind::kPadTime:
        for (const SamplerSpec& s : c.discrete) {
          DPLEAK_RETURN_IF_ERROR(RunPadTime(run, s, run.PointSeed(index++)));
        }
        break;
      case MitigationKind::kAverage:
        for (const std::string& s : c.samplers) {
          DPLEAK_RETURN_IF_ERROR(
              RunAverage(run, *ParseGaussMethod(s), run.PointSeed(index++)));
        }
        break;
      case MitigationKind::kDiscardSecond:
        for (const std::string& s : c.samplers) {
          const GaussMethod method = *ParseGaussMethod(s);
          if (method == GaussMethod::kZiggurat) continue;
          DPLEAK_RETURN_IF_ERROR(
              RunDiscardSecond(run, method, run.PointSeed(index++)));
        }
        break;
      case MitigationKind::kDiscretize:
        DPLEAK_RETURN_IF_ERROR(RunDiscretize(run, run.PointSeed(index++)));
        break;
    }
  }
  return absl::OkStatus();
}

std::string CpuModel() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const size_t colon = line.find(':');
      if (colon != std::string::npos) {
        size_t start = line.find_first_not_of(' ', colon + 1);
        return start == std::string::npos ? "" : line.substr(start);
      }
    }
  }
  return "unknown";
}

std::string CsvField(const Json& v) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char ch : s) {
      if (ch == '"') quoted += '"';
      quoted += ch;
    }
    return quoted + "\"";
  }
  return v.dump();
}

}  // namespace

absl::StatusOr<Scenario> ParseScenario(std::string_view name) {
  for (const auto& [s, n] : kScenarioNames) {
    if (n == name) return s;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("Unknown scenario: ", std::string(name)));
}

std::string_view ScenarioName(Scenario scenario) {
  for (const auto& [s, n] : kScenarioNames) {
    if (s == scenario) return n;
  }
  return "count";
}

absl::StatusOr<CampaignConfig> ConfigFromJson(const std::string& text,
                                              const std::string& base_dir) {
  const nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return absl::InvalidArgumentError("Config is not a JSON object");
  }
  static const char* const kKeys[] = {
      "experiment", "scenario",   "samplers",     "discrete",
      "epsilons",   "sigmas",     "delta",        "sensitivity",
      "trials",     "seed",       "clock",        "log2_resolution",
      "search",     "canaries",   "mitigations",  "dataset",
      "count_threshold", "cap",   "min_count",    "max_draws",
      "i_max",      "wall_repeats", "cache_k",    "average_m",
      "gamma",      "scan_sigma", "scan_bin_width", "scan_repeats",
      "record_runtime", "description"};
  for (const auto& item : j.items()) {
    if (std::find_if(std::begin(kKeys), std::end(kKeys), [&](const char* k) {
          return item.key() == k;
        }) == std::end(kKeys)) {
      return absl::InvalidArgumentError(
          absl::StrCat("Unknown config field: ", item.key()));
    }
  }
  CampaignConfig c;
  std::string scenario = "count";
  std::string clock = "counter";
  DPLEAK_RETURN_IF_ERROR(Read(j, "experiment", c.experiment));
  DPLEAK_RETURN_IF_ERROR(Read(j, "scenario", scenario));
  DPLEAK_RETURN_IF_ERROR(Read(j, "samplers", c.samplers));
  DPLEAK_RETURN_IF_ERROR(Read(j, "epsilons", c.epsilons));
  DPLEAK_RETURN_IF_ERROR(Read(j, "sigmas", c.sigmas));
  DPLEAK_RETURN_IF_ERROR(Read(j, "delta", c.delta));
  DPLEAK_RETURN_IF_ERROR(Read(j, "sensitivity", c.sensitivity));
  DPLEAK_RETURN_IF_ERROR(Read(j, "trials", c.trials));
  DPLEAK_RETURN_IF_ERROR(Read(j, "seed", c.seed));
  DPLEAK_RETURN_IF_ERROR(Read(j, "clock", clock));
  DPLEAK_RETURN_IF_ERROR(Read(j, "log2_resolution", c.log2_resolution));
  DPLEAK_RETURN_IF_ERROR(Read(j, "canaries", c.canaries));
  DPLEAK_RETURN_IF_ERROR(Read(j, "mitigations", c.mitigations));
  DPLEAK_RETURN_IF_ERROR(Read(j, "dataset", c.dataset));
  DPLEAK_RETURN_IF_ERROR(Read(j, "count_threshold", c.count_threshold));
  DPLEAK_RETURN_IF_ERROR(Read(j, "cap", c.cap));
  DPLEAK_RETURN_IF_ERROR(Read(j, "min_count", c.min_count));
  DPLEAK_RETURN_IF_ERROR(Read(j, "max_draws", c.max_draws));
  DPLEAK_RETURN_IF_ERROR(Read(j, "i_max", c.i_max));
  DPLEAK_RETURN_IF_ERROR(Read(j, "wall_repeats", c.wall_repeats));
  DPLEAK_RETURN_IF_ERROR(Read(j, "cache_k", c.cache_k));
  DPLEAK_RETURN_IF_ERROR(Read(j, "average_m", c.average_m));
  DPLEAK_RETURN_IF_ERROR(Read(j, "gamma", c.gamma));
  DPLEAK_RETURN_IF_ERROR(Read(j, "scan_sigma", c.scan_sigma));
  DPLEAK_RETURN_IF_ERROR(Read(j, "scan_bin_width", c.scan_bin_width));
  DPLEAK_RETURN_IF_ERROR(Read(j, "scan_repeats", c.scan_repeats));
  DPLEAK_RETURN_IF_ERROR(Read(j, "record_runtime", c.record_runtime));
  if (j.contains("discrete")) {
    if (!j["discrete"].is_array()) {
      return absl::InvalidArgumentError("Config field 'discrete' must be a list");
    }
    for (const auto& item : j["discrete"]) {
      if (!item.is_object() || !item.contains("kind") ||
          !item.contains("param")) {
        return absl::InvalidArgumentError(
            "Each 'discrete' entry needs 'kind' and 'param'");
      }
      SamplerSpec s;
      DPLEAK_RETURN_IF_ERROR(Read(item, "kind", s.kind));
      DPLEAK_RETURN_IF_ERROR(Read(item, "param", s.param));
      c.discrete.push_back(std::move(s));
    }
  }
  if (j.contains("search")) {
    const auto& s = j["search"];
    if (!s.is_object()) {
      return absl::InvalidArgumentError("Config field 'search' must be an object");
    }
    std::string check(FeasibilityCheckName(c.search.check));
    DPLEAK_RETURN_IF_ERROR(Read(s, "width", c.search.width));
    DPLEAK_RETURN_IF_ERROR(
        Read(s, "integer_tolerance", c.search.integer_tolerance));
    DPLEAK_RETURN_IF_ERROR(Read(s, "check", check));
    auto parsed = ParseFeasibilityCheck(check);
    if (!parsed.ok()) return parsed.status();
    c.search.check = *parsed;
  }
  auto parsed_scenario = ParseScenario(scenario);
  if (!parsed_scenario.ok()) return parsed_scenario.status();
  c.scenario = *parsed_scenario;
  auto parsed_clock = ParseClock(clock);
  if (!parsed_clock.ok()) return parsed_clock.status();
  c.clock = *parsed_clock;
  if (!c.dataset.empty() && !base_dir.empty() &&
      std::filesystem::path(c.dataset).is_relative()) {
    c.dataset = (std::filesystem::path(base_dir) / c.dataset).string();
  }
  DPLEAK_RETURN_IF_ERROR(Validate(c));
  return c;
}

nlohmann::ordered_json ConfigToJson(const CampaignConfig& c) {
  Json j;
  j["experiment"] = c.experiment;
  j["scenario"] = std::string(ScenarioName(c.scenario));
  j["samplers"] = c.samplers;
  Json discrete = Json::array();
  for (const SamplerSpec& s : c.discrete) {
    discrete.push_back({{"kind", s.kind}, {"param", s.param}});
  }
  j["discrete"] = std::move(discrete);
  j["epsilons"] = c.epsilons;
  j["sigmas"] = c.sigmas;
  j["delta"] = c.delta;
  j["sensitivity"] = c.sensitivity;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["clock"] = std::string(ClockName(c.clock));
  j["log2_resolution"] = c.log2_resolution;
  j["search"] = {{"width", c.search.width},
                 {"integer_tolerance", c.search.integer_tolerance},
                 {"check", std::string(FeasibilityCheckName(c.search.check))}};
  j["canaries"] = c.canaries;
  j["mitigations"] = c.mitigations;
  j["dataset"] = c.dataset;
  j["count_threshold"] = c.count_threshold;
  j["cap"] = c.cap;
  j["min_count"] = c.min_count;
  j["max_draws"] = c.max_draws;
  j["i_max"] = c.i_max;
  j["wall_repeats"] = c.wall_repeats;
  j["cache_k"] = c.cache_k;
  j["average_m"] = c.average_m;
  j["gamma"] = c.gamma;
  j["scan_sigma"] = c.scan_sigma;
  j["scan_bin_width"] = c.scan_bin_width;
  j["scan_repeats"] = c.scan_repeats;
  j["record_runtime"] = c.record_runtime;
  return j;
}

nlohmann::ordered_json EnvironmentFingerprint(bool pinned) {
  Json env;
  env["cpu_model"] = CpuModel();
  env["logical_cpus"] = std::thread::hardware_concurrency();
  env["pinned"] = pinned;
#if defined(__VERSION__)
  env["compiler"] = __VERSION__;
#else
  env["compiler"] = "unknown";
#endif
  return env;
}

absl::StatusOr<nlohmann::ordered_json> RunCampaign(const CampaignConfig& config,
                                                   const TrialSink& sink) {
  DPLEAK_RETURN_IF_ERROR(Validate(config));
  bool pinned = false;
  if (config.clock == Clock::kWallNanos ||
      std::find(config.mitigations.begin(), config.mitigations.end(),
                "pad-time") != config.mitigations.end()) {
    pinned = PinCurrentThread();
  }
  Run run{config, sink, *Resolution::FromLog2(config.log2_resolution)};
  absl::Status status;
  switch (config.scenario) {
    case Scenario::kCount:
      status = RunCount(run);
      break;
    case Scenario::kScan:
      status = RunScan(run);
      break;
    case Scenario::kDpSgd:
      status = RunDpSgd(run);
      break;
    case Scenario::kProfile:
      status = RunProfile(run);
      break;
    case Scenario::kSumProfile:
      status = RunSumProfile(run);
      break;
    case Scenario::kSamplerTiming:
      status = RunSamplerTiming(run);
      break;
    case Scenario::kSumTiming:
      status = RunSumTiming(run);
      break;
    case Scenario::kMitigation:
      status = RunMitigation(run);
      break;
  }
  if (!status.ok()) return status;
  Json result;
  result["experiment"] = config.experiment;
  result["config"] = ConfigToJson(config);
  result["environment"] = EnvironmentFingerprint(pinned);
  result["points"] = std::move(run.points);
  return result;
}

absl::StatusOr<std::vector<std::string>> FigureColumns(std::string_view id) {
  for (const FigureSchema& s : Schemas()) {
    if (s.id == id) return s.columns;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("Unknown figure id: ", std::string(id)));
}

absl::StatusOr<std::string> EmitFigureData(const nlohmann::ordered_json& result,
                                           std::string_view figure_id) {
  auto columns = FigureColumns(figure_id);
  if (!columns.ok()) return columns.status();
  if (!result.is_object() || !result.contains("points") ||
      !result["points"].is_array()) {
    return absl::InvalidArgumentError("Result has no points array");
  }
  std::string out;
  for (size_t i = 0; i < columns->size(); ++i) {
    if (i > 0) out += ',';
    out += (*columns)[i];
  }
  out += '\n';
  int64_t row = 0;
  for (const auto& point : result["points"]) {
    for (size_t i = 0; i < columns->size(); ++i) {
      const std::string& col = (*columns)[i];
      if (!point.is_object() || !point.contains(col)) {
        return absl::InvalidArgumentError(
            absl::StrCat("Point ", row, " has no column '", col, "' for ",
                         std::string(figure_id)));
      }
      if (i > 0) out += ',';
      out += CsvField(point[col]);
    }
    out += '\n';
    ++row;
  }
  return out;
}

}  // namespace dpleak
