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

// Command-line front end. Exit codes: 0 success, 1 internal error, 2 usage
// or config error, 3 missing file, 4 malformed data, 5 insufficient data.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpleak/campaign.h"
#include "dpleak/clock.h"
#include "dpleak/discrete.h"
#include "dpleak/gauss.h"
#include "dpleak/gauss_sampler.h"
#include "dpleak/mechanisms.h"
#include "dpleak/mitigations.h"
#include "dpleak/rng.h"
#include "dpleak/timing.h"
#include "json.hpp"

namespace dpleak {
namespace {

using Json = nlohmann::ordered_json;

enum ExitCode {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kMissingFile = 3,
  kMalformedData = 4,
  kInsufficientData = 5,
};

// Maps a status to an exit code. `invalid` is the code for InvalidArgument,
// which means a bad config or a bad data file depending on the caller.
int Fail(const absl::Status& status, int invalid = kUsage) {
  std::cerr << "error: " << status.message() << "\n";
  switch (status.code()) {
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kOutOfRange:
      return invalid;
    case absl::StatusCode::kNotFound:
      return kMissingFile;
    case absl::StatusCode::kResourceExhausted:
      return kInsufficientData;
    default:
      return kInternal;
  }
}

uint64_t ResolveSeed(const std::optional<uint64_t>& seed) {
  if (seed) return *seed;
  std::random_device rd;
  return (static_cast<uint64_t>(rd()) << 32) ^ rd();
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError("Cannot open " + path);
  std::stringstream text;
  text << in.rdbuf();
  return text.str();
}

absl::Status WriteOutput(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return absl::OkStatus();
  }
  std::ofstream out(path);
  if (!out) return absl::NotFoundError("Cannot write " + path);
  out << text;
  return absl::OkStatus();
}

bool IsGaussian(const std::string& name) { return ParseGaussMethod(name).ok(); }

// Options shared by the sampler-facing subcommands.
struct SamplerOptions {
  std::string sampler = "polar";
  double param = 1.0;
  int log2_resolution = Resolution::kDefaultLog2;
  std::string wrap = "none";
  int cache_k = 8;
  int average_m = 4;
  std::optional<uint64_t> seed;

  void Add(CLI::App* app) {
    app->add_option("--sampler", sampler,
                    "polar|boxmuller|ziggurat|geom-loop|geom-bsearch|"
                    "dlaplace|dlaplace-bsearch|dgauss");
    app->add_option("--param", param,
                    "sigma for Gaussian samplers, p, lambda or sigma for "
                    "discrete ones");
    app->add_option("--log2-resolution", log2_resolution);
    app->add_option("--wrap", wrap,
                    "none|pad-trials|pad-time|cache|avg|discard2");
    app->add_option("--cache-k", cache_k);
    app->add_option("--average-m", average_m);
    app->add_option("--seed", seed, "Seed; OS entropy when omitted");
  }
};

absl::StatusOr<std::unique_ptr<GaussianSampler>> BuildGaussian(
    const SamplerOptions& o, uint64_t seed) {
  auto method = ParseGaussMethod(o.sampler);
  if (!method.ok()) return method.status();
  auto res = Resolution::FromLog2(o.log2_resolution);
  if (!res.ok()) return res.status();
  auto sampler = MakeGaussianSampler(*method, seed, *res);
  auto wrap = ParseMitigationKind(o.wrap);
  if (!wrap.ok()) return wrap.status();
  switch (*wrap) {
    case MitigationKind::kNone:
      return sampler;
    case MitigationKind::kAverage:
      return MakeAveragedGaussian(std::move(sampler), o.average_m);
    case MitigationKind::kDiscardSecond:
      return MakeDiscardSecond(std::move(sampler));
    default:
      return absl::InvalidArgumentError(
          "--wrap " + o.wrap + " does not apply to Gaussian samplers");
  }
}

absl::StatusOr<DiscreteSampler> BuildDiscrete(const SamplerOptions& o,
                                              double param, uint64_t seed) {
  auto kind = ParseDiscreteKind(o.sampler);
  if (!kind.ok()) return kind.status();
  auto sampler = MakeDiscreteSampler(*kind, param);
  if (!sampler.ok()) return sampler.status();
  auto wrap = ParseMitigationKind(o.wrap);
  if (!wrap.ok()) return wrap.status();
  switch (*wrap) {
    case MitigationKind::kNone:
      return sampler;
    case MitigationKind::kPadTrials:
    case MitigationKind::kPadTime: {
      const PaddingMode mode = *wrap == MitigationKind::kPadTrials
                                   ? PaddingMode::kTrialCount
                                   : PaddingMode::kWallTime;
      auto policy = CalibratePadding(*sampler, mode, TrialSeed(seed, 7));
      if (!policy.ok()) return policy.status();
      return MakePaddedSampler(*sampler, *policy);
    }
    case MitigationKind::kCache:
      return MakeCachedSampler(*sampler, o.cache_k);
    default:
      return absl::InvalidArgumentError(
          "--wrap " + o.wrap + " does not apply to discrete samplers");
  }
}

int RunSample(const SamplerOptions& o, int64_t count) {
  const uint64_t seed = ResolveSeed(o.seed);
  if (count < 1) return Fail(absl::InvalidArgumentError("--count must be >= 1"));
  std::string out;
  if (IsGaussian(o.sampler)) {
    auto sampler = BuildGaussian(o, seed);
    if (!sampler.ok()) return Fail(sampler.status());
    out = "value\n";
    for (int64_t i = 0; i < count; ++i) {
      std::ostringstream line;
      line.precision(17);
      line << (*sampler)->Sample(o.param).value << "\n";
      out += line.str();
    }
  } else {
    auto sampler = BuildDiscrete(o, o.param, seed);
    if (!sampler.ok()) return Fail(sampler.status());
    RngStream stream(seed);
    out = "value,cost,truncated\n";
    for (int64_t i = 0; i < count; ++i) {
      const DiscreteSample s = (*sampler)(stream);
      out += std::to_string(s.value) + "," + std::to_string(s.trace.Total()) +
             "," + (s.truncated ? "1" : "0") + "\n";
    }
  }
  std::cerr << "seed " << seed << "\n";
  std::cout << out;
  return kOk;
}

struct QueryOptions {
  std::string dataset;
  std::string query = "count";
  double epsilon = 1.0;
  double delta = 1e-5;
  int64_t threshold = 10000;
  int64_t cap = 5000;
  std::string clock = "counter";
};

int RunQuery(const SamplerOptions& o, const QueryOptions& q) {
  const uint64_t seed = ResolveSeed(o.seed);
  auto data = LoadDataset(q.dataset);
  if (!data.ok()) return Fail(data.status(), kMalformedData);
  Json j;
  j["query"] = q.query;
  j["records"] = data->credits.size();
  j["epsilon"] = q.epsilon;
  j["seed"] = seed;
  if (q.query == "count") {
    auto params = CalibrateGaussian(q.epsilon, q.delta, 1.0);
    if (!params.ok()) return Fail(params.status());
    auto sampler = BuildGaussian(o, seed);
    if (!sampler.ok()) return Fail(sampler.status());
    const int64_t threshold = q.threshold;
    const QueryResult r = PrivateCount(
        *data, [threshold](int64_t v) { return v >= threshold; }, *params,
        **sampler);
    j["delta"] = q.delta;
    j["sigma"] = r.sigma;
    j["value"] = r.value;
  } else if (q.query == "sum") {
    auto params = CalibrateLaplace(q.epsilon, static_cast<double>(q.cap));
    if (!params.ok()) return Fail(params.status());
    auto clock = ParseClock(q.clock);
    if (!clock.ok()) return Fail(clock.status());
    auto sampler = BuildDiscrete(o, params->lambda, seed);
    if (!sampler.ok()) return Fail(sampler.status());
    RngStream stream(seed);
    const SumResult r = PrivateSum(*data, q.cap, &*sampler, stream, *clock);
    j["cap"] = q.cap;
    j["lambda"] = params->lambda;
    j["value"] = r.value;
    j["elapsed"] = r.elapsed;
    j["clock"] = q.clock;
  } else {
    return Fail(absl::InvalidArgumentError("--query must be count or sum"));
  }
  std::cout << j.dump(2) << "\n";
  return kOk;
}

struct ProfileOptions {
  std::string clock = "counter";
  int i_max = 9;
  int64_t min_count = 10000;
  int64_t max_draws = 10000000;
  std::string out;
};

int RunProfileCommand(const SamplerOptions& o, const ProfileOptions& p) {
  const uint64_t seed = ResolveSeed(o.seed);
  auto sampler = BuildDiscrete(o, o.param, seed);
  if (!sampler.ok()) return Fail(sampler.status());
  auto clock = ParseClock(p.clock);
  if (!clock.ok()) return Fail(clock.status());
  ProfileConfig cfg;
  cfg.clock = *clock;
  cfg.i_max = p.i_max;
  cfg.min_count = p.min_count;
  cfg.max_draws = p.max_draws;
  cfg.seed = seed;
  auto profile = BuildProfile(*sampler, o.sampler, o.param, cfg);
  if (!profile.ok()) return Fail(profile.status());
  const absl::Status w = WriteOutput(p.out, ProfileToJson(*profile) + "\n");
  return w.ok() ? kOk : Fail(w);
}

// Runs a config built from flags and prints the result JSON.
int RunBuiltConfig(CampaignConfig c, const std::string& out,
                   const std::string& trials_csv) {
  auto valid = ConfigFromJson(ConfigToJson(c).dump());
  if (!valid.ok()) return Fail(valid.status());
  std::unique_ptr<std::ofstream> csv;
  TrialSink sink;
  if (!trials_csv.empty()) {
    csv = std::make_unique<std::ofstream>(trials_csv);
    if (!*csv) return Fail(absl::NotFoundError("Cannot write " + trials_csv));
    *csv << "series,x,trial,truth,guess,correct,observable\n";
    sink = [&csv](const TrialRow& r) {
      *csv << r.series << ',' << r.x << ',' << r.trial << ',' << r.truth << ','
           << r.guess << ',' << (r.correct ? 1 : 0) << ',' << r.observable
           << '\n';
    };
  }
  auto result = RunCampaign(*valid, sink);
  if (!result.ok()) return Fail(result.status(), kMalformedData);
  const absl::Status w = WriteOutput(out, result->dump(2) + "\n");
  return w.ok() ? kOk : Fail(w);
}

struct AttackOptions {
  std::string scenario = "count";
  std::vector<std::string> samplers = {"polar"};
  std::vector<double> epsilons;
  std::vector<double> sigmas;
  std::vector<std::string> canaries = {"diff", "sim"};
  double delta = 1e-5;
  int64_t trials = 10000;
  int log2_resolution = 10;
  int width = 50;
  std::string check = "forward";
  std::string dataset;
  std::string out;
  std::string trials_csv;
  std::optional<uint64_t> seed;
};

absl::StatusOr<CampaignConfig> FpConfig(const AttackOptions& a) {
  CampaignConfig c;
  auto scenario = ParseScenario(a.scenario);
  if (!scenario.ok()) return scenario.status();
  if (*scenario != Scenario::kCount && *scenario != Scenario::kDpSgd &&
      *scenario != Scenario::kScan) {
    return absl::InvalidArgumentError("--scenario must be count, dpsgd or scan");
  }
  c.experiment = "attack-fp";
  c.scenario = *scenario;
  c.samplers = a.samplers;
  c.epsilons = a.epsilons;
  c.sigmas = a.sigmas;
  if (c.scenario == Scenario::kCount && c.epsilons.empty() && c.sigmas.empty()) {
    c.epsilons = {1.0};
  }
  if (c.scenario == Scenario::kDpSgd) {
    c.canaries = a.canaries;
    if (c.sigmas.empty()) c.sigmas = {250.0};
  }
  if (c.scenario == Scenario::kScan && !a.sigmas.empty()) {
    c.scan_sigma = a.sigmas.front();
  }
  c.delta = a.delta;
  c.trials = a.trials;
  c.seed = ResolveSeed(a.seed);
  c.log2_resolution = a.log2_resolution;
  c.search.width = a.width;
  auto check = ParseFeasibilityCheck(a.check);
  if (!check.ok()) return check.status();
  c.search.check = *check;
  c.dataset = a.dataset;
  return c;
}

struct TimingOptions {
  std::string target = "sampler";
  std::vector<std::string> samplers = {"dlaplace"};
  std::vector<double> params = {1.0};
  std::vector<double> epsilons = {1.0};
  std::string profile;
  std::string dataset;
  int64_t cap = 5000;
  std::string clock = "counter";
  int64_t trials = 10000;
  int64_t min_count = 1000;
  int64_t max_draws = 100000000;
  std::string wrap = "none";
  std::string out;
  std::string trials_csv;
  std::optional<uint64_t> seed;
};

std::vector<SamplerSpec> Specs(const std::vector<std::string>& kinds,
                               const std::vector<double>& params) {
  std::vector<SamplerSpec> out;
  for (size_t i = 0; i < kinds.size(); ++i) {
    out.push_back({kinds[i], params.empty() ? 0.0
                                            : params[std::min(i, params.size() - 1)]});
  }
  return out;
}

// Attack with a profile loaded from disk.
int RunTimingWithProfile(const TimingOptions& t) {
  auto text = ReadFile(t.profile);
  if (!text.ok()) return Fail(text.status());
  auto profile = ProfileFromJson(*text);
  if (!profile.ok()) return Fail(profile.status(), kMalformedData);
  SamplerOptions o;
  o.sampler = profile->sampler_id;
  o.wrap = t.wrap;
  const uint64_t seed = ResolveSeed(t.seed);
  auto sampler = BuildDiscrete(o, profile->param, seed);
  if (!sampler.ok()) return Fail(sampler.status(), kMalformedData);
  auto report = SamplerAttackCampaign(*sampler, *profile, t.trials, seed);
  if (!report.ok()) return Fail(report.status());
  Json j;
  j["sampler"] = profile->sampler_id;
  j["param"] = profile->param;
  j["seed"] = seed;
  j["trials"] = report->trials;
  j["exact_accuracy"] = report->exact_accuracy;
  j["approx_accuracy"] = report->approx_accuracy;
  j["baseline_exact"] = report->baseline_exact;
  j["baseline_approx"] = report->baseline_approx;
  j["exact_p_value"] = report->exact_p_value;
  j["approx_p_value"] = report->approx_p_value;
  const absl::Status w = WriteOutput(t.out, j.dump(2) + "\n");
  return w.ok() ? kOk : Fail(w);
}

int RunTiming(const TimingOptions& t) {
  if (!t.profile.empty()) return RunTimingWithProfile(t);
  if (t.wrap != "none") {
    return Fail(absl::InvalidArgumentError(
        "--wrap needs --profile; use the mitigate subcommand otherwise"));
  }
  CampaignConfig c;
  c.experiment = "attack-timing";
  if (t.target == "sampler") {
    c.scenario = Scenario::kSamplerTiming;
  } else if (t.target == "sum") {
    c.scenario = Scenario::kSumTiming;
    c.epsilons = t.epsilons;
    c.dataset = t.dataset;
    c.cap = t.cap;
  } else {
    return Fail(absl::InvalidArgumentError("--target must be sampler or sum"));
  }
  c.discrete = Specs(t.samplers, t.params);
  auto clock = ParseClock(t.clock);
  if (!clock.ok()) return Fail(clock.status());
  c.clock = *clock;
  c.trials = t.trials;
  c.min_count = t.min_count;
  c.max_draws = t.max_draws;
  c.seed = ResolveSeed(t.seed);
  return RunBuiltConfig(c, t.out, t.trials_csv);
}

int RunCampaignFile(const std::string& path, const std::string& out,
                    const std::string& trials_csv) {
  auto text = ReadFile(path);
  if (!text.ok()) return Fail(text.status());
  auto config = ConfigFromJson(
      *text, std::filesystem::path(path).parent_path().string());
  if (!config.ok()) return Fail(config.status());
  return RunBuiltConfig(*config, out, trials_csv);
}

int EmitCampaign(const std::string& path, const std::string& figure,
                 const std::string& out) {
  auto text = ReadFile(path);
  if (!text.ok()) return Fail(text.status());
  const Json result = Json::parse(*text, nullptr, false);
  if (result.is_discarded()) {
    return Fail(absl::InvalidArgumentError(path + " is not JSON"),
                kMalformedData);
  }
  std::string id = figure;
  if (id.empty() && result.contains("experiment") &&
      result["experiment"].is_string()) {
    id = result["experiment"].get<std::string>();
  }
  if (id == "mitigations_wall") id = "mitigations";
  if (!FigureColumns(id).ok()) {
    return Fail(absl::InvalidArgumentError("Unknown figure id: " + id));
  }
  auto csv = EmitFigureData(result, id);
  if (!csv.ok()) return Fail(csv.status(), kMalformedData);
  const absl::Status w = WriteOutput(out, *csv);
  return w.ok() ? kOk : Fail(w);
}

int Main(int argc, char** argv) {
  CLI::App app{"Floating-point and timing side channels in DP noise samplers"};
  app.require_subcommand(1);

  SamplerOptions sample_opts;
  int64_t count = 10;
  CLI::App* sample = app.add_subcommand("sample", "Draw noise values");
  sample_opts.Add(sample);
  sample->add_option("--count", count, "Number of draws");

  SamplerOptions query_sampler;
  QueryOptions query_opts;
  CLI::App* query = app.add_subcommand("query", "Release a private count or sum");
  query_sampler.Add(query);
  query->add_option("--dataset", query_opts.dataset)->required();
  query->add_option("--query", query_opts.query, "count|sum");
  query->add_option("--epsilon", query_opts.epsilon);
  query->add_option("--delta", query_opts.delta);
  query->add_option("--threshold", query_opts.threshold,
                    "count predicate: credit >= threshold");
  query->add_option("--cap", query_opts.cap, "sum clipping cap");
  query->add_option("--clock", query_opts.clock, "counter|wall");

  SamplerOptions profile_sampler;
  profile_sampler.sampler = "dlaplace";
  ProfileOptions profile_opts;
  CLI::App* profile = app.add_subcommand("profile", "Build a timing profile");
  profile_sampler.Add(profile);
  profile->add_option("--clock", profile_opts.clock, "counter|wall");
  profile->add_option("--i-max", profile_opts.i_max);
  profile->add_option("--min-count", profile_opts.min_count);
  profile->add_option("--max-draws", profile_opts.max_draws);
  profile->add_option("--out", profile_opts.out, "Profile JSON path");

  AttackOptions fp;
  CLI::App* attack_fp =
      app.add_subcommand("attack-fp", "Floating-point feasibility attacks");
  attack_fp->add_option("--scenario", fp.scenario, "count|dpsgd|scan");
  attack_fp->add_option("--sampler", fp.samplers, "polar|boxmuller|ziggurat");
  attack_fp->add_option("--epsilon", fp.epsilons);
  attack_fp->add_option("--sigma", fp.sigmas);
  attack_fp->add_option("--canary", fp.canaries, "diff|sim");
  attack_fp->add_option("--delta", fp.delta);
  attack_fp->add_option("--trials", fp.trials);
  attack_fp->add_option("--log2-resolution", fp.log2_resolution);
  attack_fp->add_option("--width", fp.width, "Neighbour search width in ulps");
  attack_fp->add_option("--check", fp.check, "forward|literal");
  attack_fp->add_option("--dataset", fp.dataset);
  attack_fp->add_option("--out", fp.out);
  attack_fp->add_option("--trials-csv", fp.trials_csv);
  attack_fp->add_option("--seed", fp.seed);

  TimingOptions timing;
  CLI::App* attack_timing =
      app.add_subcommand("attack-timing", "Timing side-channel attacks");
  attack_timing->add_option("--target", timing.target, "sampler|sum");
  attack_timing->add_option("--sampler", timing.samplers);
  attack_timing->add_option("--param", timing.params);
  attack_timing->add_option("--epsilon", timing.epsilons);
  attack_timing->add_option("--profile", timing.profile,
                            "Profile JSON from the profile subcommand");
  attack_timing->add_option("--dataset", timing.dataset);
  attack_timing->add_option("--cap", timing.cap);
  attack_timing->add_option("--clock", timing.clock, "counter|wall");
  attack_timing->add_option("--trials", timing.trials);
  attack_timing->add_option("--min-count", timing.min_count);
  attack_timing->add_option("--max-draws", timing.max_draws);
  attack_timing->add_option("--wrap", timing.wrap,
                            "Wrapper applied to the attacked sampler");
  attack_timing->add_option("--out", timing.out);
  attack_timing->add_option("--trials-csv", timing.trials_csv);
  attack_timing->add_option("--seed", timing.seed);

  std::vector<std::string> wraps;
  TimingOptions mit;
  AttackOptions mit_fp;
  double gamma = 0.01;
  CLI::App* mitigate =
      app.add_subcommand("mitigate", "Re-attack samplers behind wrappers");
  mitigate->add_option("--wrap", wraps,
                       "none|pad-trials|pad-time|cache|avg|discard2|discretize")
      ->required();
  mitigate->add_option("--sampler", mit_fp.samplers, "Gaussian samplers");
  mitigate->add_option("--discrete", mit.samplers, "Discrete samplers");
  mitigate->add_option("--param", mit.params);
  mitigate->add_option("--epsilon", mit_fp.epsilons);
  mitigate->add_option("--trials", mit.trials);
  mitigate->add_option("--log2-resolution", mit_fp.log2_resolution);
  mitigate->add_option("--min-count", mit.min_count);
  mitigate->add_option("--gamma", gamma);
  mitigate->add_option("--out", mit.out);
  mitigate->add_option("--seed", mit.seed);

  std::string config_path, result_path, figure, campaign_out, trials_csv;
  CLI::App* campaign = app.add_subcommand("campaign", "Config-driven runs");
  campaign->require_subcommand(1);
  CLI::App* run = campaign->add_subcommand("run", "Run a config");
  run->add_option("config", config_path)->required();
  run->add_option("--out", campaign_out, "Result JSON path");
  run->add_option("--trials-csv", trials_csv, "Per-trial CSV path");
  CLI::App* emit = campaign->add_subcommand("emit", "Emit figure data");
  emit->add_option("result", result_path)->required();
  emit->add_option("--figure", figure, "Figure or table id");
  emit->add_option("--out", campaign_out, "CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (*sample) return RunSample(sample_opts, count);
  if (*query) return RunQuery(query_sampler, query_opts);
  if (*profile) return RunProfileCommand(profile_sampler, profile_opts);
  if (*attack_fp) {
    auto c = FpConfig(fp);
    if (!c.ok()) return Fail(c.status());
    return RunBuiltConfig(*c, fp.out, fp.trials_csv);
  }
  if (*attack_timing) return RunTiming(timing);
  if (*mitigate) {
    CampaignConfig c;
    c.experiment = "mitigations";
    c.scenario = Scenario::kMitigation;
    c.mitigations = wraps;
    c.samplers = mit_fp.samplers;
    c.discrete = Specs(mit.samplers, mit.params);
    c.epsilons = mit_fp.epsilons;
    c.trials = mit.trials;
    c.log2_resolution = mit_fp.log2_resolution;
    c.min_count = mit.min_count;
    c.gamma = gamma;
    c.seed = ResolveSeed(mit.seed);
    return RunBuiltConfig(c, mit.out, "");
  }
  if (*run) return RunCampaignFile(config_path, campaign_out, trials_csv);
  if (*emit) return EmitCampaign(result_path, figure, campaign_out);
  return kUsage;
}

}  // namespace
}  // namespace dpleak

int main(int argc, char** argv) {
  try {
    return dpleak::Main(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return dpleak::kInternal;
  }
}
