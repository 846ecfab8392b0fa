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

#ifndef DPLEAK_CAMPAIGN_H_
#define DPLEAK_CAMPAIGN_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dpleak/clock.h"
#include "dpleak/fp_attack.h"
#include "json.hpp"

namespace dpleak {

enum class Scenario {
  kCount,          // private count distinguisher over an epsilon or sigma sweep
  kScan,           // attackable-value scan
  kDpSgd,          // canary game over a sigma sweep
  kProfile,        // sampler timing profiles
  kSumProfile,     // private-sum timing profiles
  kSamplerTiming,  // sampler timing attack
  kSumTiming,      // private-sum timing attack over an epsilon sweep
  kMitigation,     // re-attacks against each wrapper in the stack
};

absl::StatusOr<Scenario> ParseScenario(std::string_view name);
std::string_view ScenarioName(Scenario scenario);

// A discrete sampler and its parameter, e.g. {"dlaplace-loop", 1.0}.
struct SamplerSpec {
  std::string kind;
  double param = 0.0;
};

struct CampaignConfig {
  // Figure or table id; selects the CSV schema of emit_figure_data.
  std::string experiment;
  Scenario scenario = Scenario::kCount;
  // Gaussian methods for kCount, kScan, kDpSgd and kMitigation.
  std::vector<std::string> samplers;
  // Discrete samplers for the timing scenarios and kMitigation.
  std::vector<SamplerSpec> discrete;
  // Sweep: kCount uses sigmas when set, else epsilons calibrated with
  // delta and sensitivity. kDpSgd uses sigmas as noise multipliers.
  std::vector<double> epsilons;
  std::vector<double> sigmas;
  double delta = 1e-5;
  double sensitivity = 1.0;
  int64_t trials = 0;
  uint64_t seed = 0;
  Clock clock = Clock::kCostCounter;
  int log2_resolution = 53;
  NeighborSearchConfig search;
  std::vector<std::string> canaries;
  std::vector<std::string> mitigations;
  // Dataset path; relative paths resolve against the config's directory.
  std::string dataset;
  int64_t count_threshold = 10000;
  int64_t cap = 5000;
  int64_t min_count = 1000;
  int64_t max_draws = 100000000;
  int i_max = 9;
  int wall_repeats = 5;
  int cache_k = 8;
  int average_m = 4;
  double gamma = 0.01;
  // Scan only.
  double scan_sigma = 114.0;
  double scan_bin_width = 0.8;
  int scan_repeats = 1;
  // Runtimes are left out of the result unless set, so that counter
  // campaigns stay byte-identical.
  bool record_runtime = false;
};

// Parses and validates a config. `base_dir` anchors a relative dataset path.
absl::StatusOr<CampaignConfig> ConfigFromJson(const std::string& text,
                                              const std::string& base_dir = "");
nlohmann::ordered_json ConfigToJson(const CampaignConfig& config);

// CPU model, logical CPU count, compiler and pinning status.
nlohmann::ordered_json EnvironmentFingerprint(bool pinned);

// One row per trial. `truth` and `guess` are 0/1 for D/D' games and the
// noise value and magnitude guess for the sampler attack. `observable` is the
// committed flag for counts, votes_b - votes_bprime for DP-SGD and the
// elapsed value for timing attacks.
struct TrialRow {
  std::string series;
  double x = 0.0;
  int64_t trial = 0;
  int64_t truth = 0;
  int64_t guess = 0;
  bool correct = false;
  double observable = 0.0;
};
using TrialSink = std::function<void(const TrialRow&)>;

// Runs the campaign. The result holds the config, the environment and one
// object per sweep point under "points".
absl::StatusOr<nlohmann::ordered_json> RunCampaign(
    const CampaignConfig& config, const TrialSink& sink = nullptr);

// Column list of a figure or table schema.
absl::StatusOr<std::vector<std::string>> FigureColumns(std::string_view id);

// Tidy CSV of the points of `result` under the schema of `figure_id`.
// Fails when a point lacks one of the columns.
absl::StatusOr<std::string> EmitFigureData(const nlohmann::ordered_json& result,
                                           std::string_view figure_id);

}  // namespace dpleak

#endif  // DPLEAK_CAMPAIGN_H_
