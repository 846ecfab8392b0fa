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

#include "dpleak/dpsgd.h"

#include <cmath>
#include <string>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace dpleak {

LogisticModel ConfidentModel(int dim, double bias) {
  return LogisticModel{std::vector<double>(dim, 0.0), bias};
}

BlobData::BlobData(int dim, double separation, uint64_t seed)
    : dim_(dim),
      offset_(separation / std::sqrt(static_cast<double>(dim))),
      normal_(MakeGaussianSampler(GaussMethod::kPolar, seed,
                                  Resolution::Default())) {}

Record BlobData::Draw(int label) {
  Record r;
  r.label = label;
  r.x.resize(dim_);
  const double mean = label == 1 ? offset_ : -offset_;
  for (double& v : r.x) v = mean + normal_->Sample(1.0).value;
  return r;
}

absl::StatusOr<std::vector<double>> PerRecordGradient(
    const LogisticModel& model, const Record& record) {
  if (record.x.size() != model.w.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("Record has ", record.x.size(), " features, model has ",
                     model.w.size()));
  }
  double z = model.bias;
  for (size_t k = 0; k < record.x.size(); ++k) z += model.w[k] * record.x[k];
  // p - y without cancellation: 1 - p = 1 / (1 + e^z).
  const double residual = record.label == 1 ? -1.0 / (1.0 + std::exp(z))
                                            : 1.0 / (1.0 + std::exp(-z));
  std::vector<double> g(record.x.size());
  for (size_t k = 0; k < g.size(); ++k) g[k] = residual * record.x[k];
  return g;
}

std::vector<double> ClipToNorm(std::vector<double> g, double clip_norm) {
  double sq = 0.0;
  for (double v : g) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm > clip_norm) {
    const double scale = clip_norm / norm;
    for (double& v : g) v *= scale;
  }
  return g;
}

absl::StatusOr<std::vector<double>> AverageClippedGradient(
    const LogisticModel& model, const Batch& batch, const SgdConfig& cfg) {
  if (batch.size() == 0) return absl::InvalidArgumentError("Empty batch");
  if (static_cast<int>(model.w.size()) != cfg.dim) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Model dimension ", model.w.size(), " does not match d=", cfg.dim));
  }
  if (!(cfg.clip_norm > 0.0)) {
    return absl::InvalidArgumentError("Clip norm must be positive");
  }
  std::vector<double> sum(cfg.dim, 0.0);
  for (const Record& r : batch.records) {
    absl::StatusOr<std::vector<double>> g = PerRecordGradient(model, r);
    if (!g.ok()) return g.status();
    const std::vector<double> clipped = ClipToNorm(*std::move(g), cfg.clip_norm);
    for (int k = 0; k < cfg.dim; ++k) sum[k] += clipped[k];
  }
  const double s = static_cast<double>(batch.size());
  for (double& v : sum) v /= s;
  return sum;
}

absl::StatusOr<std::vector<double>> DpSgdStep(const LogisticModel& model,
                                              const Batch& batch,
                                              const SgdConfig& cfg,
                                              GaussianSampler& sampler) {
  if (!(cfg.sigma > 0.0)) {
    return absl::InvalidArgumentError("Noise multiplier must be positive");
  }
  absl::StatusOr<std::vector<double>> f =
      AverageClippedGradient(model, batch, cfg);
  if (!f.ok()) return f.status();
  const double s = static_cast<double>(batch.size());
  const double scale = cfg.sigma * cfg.clip_norm;
  for (double& v : *f) v += sampler.Sample(scale).value / s;
  return f;
}

double L2Distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sq = 0.0;
  for (size_t k = 0; k < a.size() && k < b.size(); ++k) {
    const double d = a[k] - b[k];
    sq += d * d;
  }
  return std::sqrt(sq);
}

absl::StatusOr<CanaryKind> ParseCanaryKind(std::string_view name) {
  if (name == "sim") return CanaryKind::kSimLabel;
  if (name == "diff") return CanaryKind::kDiffLabel;
  return absl::InvalidArgumentError(
      absl::StrCat("Unknown canary kind: ", std::string(name)));
}

std::string_view CanaryKindName(CanaryKind kind) {
  return kind == CanaryKind::kSimLabel ? "sim" : "diff";
}

CanaryPair MakeCanaryPair(BlobData& data, int batch_size, CanaryKind kind) {
  CanaryPair pair;
  pair.b.records.reserve(batch_size);
  for (int n = 0; n < batch_size; ++n) pair.b.records.push_back(data.Draw(1));
  pair.bprime = pair.b;
  pair.bprime.records.back() =
      data.Draw(kind == CanaryKind::kSimLabel ? 1 : 0);
  return pair;
}

absl::StatusOr<DpSgdTrial> RunDpSgdTrial(const DpSgdTrialConfig& cfg,
                                         uint64_t seed) {
  if (cfg.batch_size < 1) {
    return absl::InvalidArgumentError("Batch size must be positive");
  }
  absl::StatusOr<Resolution> res = Resolution::FromLog2(cfg.log2_resolution);
  if (!res.ok()) return res.status();
  RngStream master(seed);
  const uint64_t data_seed = master.NextU64();
  const uint64_t noise_seed = master.NextU64();

  BlobData data(cfg.sgd.dim, cfg.separation, data_seed);
  const CanaryPair pair = MakeCanaryPair(data, cfg.batch_size, cfg.canary);
  const LogisticModel model = ConfidentModel(cfg.sgd.dim, cfg.model_bias);

  absl::StatusOr<std::vector<double>> f_b =
      AverageClippedGradient(model, pair.b, cfg.sgd);
  if (!f_b.ok()) return f_b.status();
  absl::StatusOr<std::vector<double>> f_bprime =
      AverageClippedGradient(model, pair.bprime, cfg.sgd);
  if (!f_bprime.ok()) return f_bprime.status();

  DpSgdTrial trial;
  trial.released_bprime = (master.NextU64() >> 63) != 0;
  auto sampler = MakeGaussianSampler(cfg.method, noise_seed, *res);
  absl::StatusOr<std::vector<double>> y =
      DpSgdStep(model, trial.released_bprime ? pair.bprime : pair.b, cfg.sgd,
                *sampler);
  if (!y.ok()) return y.status();

  absl::StatusOr<DpSgdVote> vote =
      DpSgdAttack(*y, *f_b, *f_bprime, cfg.batch_size, cfg.method,
                  cfg.sgd.sigma * cfg.sgd.clip_norm, *res, cfg.search, master);
  if (!vote.ok()) return vote.status();
  trial.vote = *vote;
  return trial;
}

}  // namespace dpleak
