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

#include "dpleak/mitigations.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpleak/clock.h"

namespace dpleak {

absl::StatusOr<PaddingPolicy> CalibratePadding(const DiscreteSampler& sampler,
                                               PaddingMode mode,
                                               uint64_t seed, int64_t draws,
                                               double quantile) {
  if (draws < 1) return absl::InvalidArgumentError("draws must be >= 1");
  if (!(quantile > 0.0 && quantile <= 1.0)) {
    return absl::InvalidArgumentError("quantile must be in (0, 1]");
  }
  RngStream stream(seed);
  std::vector<int64_t> costs;
  costs.reserve(draws);
  if (mode == PaddingMode::kWallTime) {
    PinCurrentThread();
    for (int i = 0; i < 1000; ++i) sampler(stream);
  }
  for (int64_t i = 0; i < draws; ++i) {
    if (mode == PaddingMode::kTrialCount) {
      costs.push_back(sampler(stream).trace.Total());
    } else {
      WallTimer timer;
      sampler(stream);
      costs.push_back(timer.ElapsedNanos());
    }
  }
  const auto rank = static_cast<int64_t>(
      std::ceil(quantile * static_cast<double>(draws))) - 1;
  const auto at = costs.begin() + std::clamp<int64_t>(rank, 0, draws - 1);
  std::nth_element(costs.begin(), at, costs.end());
  return PaddingPolicy{mode, std::max<int64_t>(*at, 1)};
}

DiscreteSample PaddedSampleTrials(const DiscreteSampler& sampler,
                                  RngStream& stream, int64_t threshold) {
  DiscreteSample s = sampler(stream);
  const int64_t used = s.trace.Total();
  for (int64_t i = used; i < threshold; ++i) DrawBernoulli(stream, 0.5);
  s.truncated = used > threshold;
  s.trace = CostTrace{};
  s.trace.bernoulli_trials = threshold;
  return s;
}

DiscreteSample PaddedSampleTime(const DiscreteSampler& sampler,
                                RngStream& stream, int64_t threshold_nanos) {
  WallTimer timer;
  DiscreteSample s = sampler(stream);
  s.truncated = timer.ElapsedNanos() > threshold_nanos;
  while (timer.ElapsedNanos() < threshold_nanos) {
  }
  return s;
}

absl::StatusOr<DiscreteSampler> MakePaddedSampler(DiscreteSampler sampler,
                                                  PaddingPolicy policy) {
  if (policy.threshold < 1) {
    return absl::InvalidArgumentError("padding threshold must be >= 1");
  }
  if (policy.mode == PaddingMode::kTrialCount) {
    return DiscreteSampler(
        [sampler = std::move(sampler), t = policy.threshold](RngStream& s) {
          return PaddedSampleTrials(sampler, s, t);
        });
  }
  return DiscreteSampler(
      [sampler = std::move(sampler), t = policy.threshold](RngStream& s) {
        return PaddedSampleTime(sampler, s, t);
      });
}

NoiseCache::NoiseCache(DiscreteSampler sampler, int k)
    : sampler_(std::move(sampler)), k_(std::max(k, 1)) {}

DiscreteSample NoiseCache::Next(RngStream& stream) {
  DiscreteSample out;
  last_refilled_ = remaining_.empty();
  if (last_refilled_) {
    ++refills_;
    for (int i = 0; i < k_; ++i) {
      const DiscreteSample s = sampler_(stream);
      out.trace += s.trace;
      distribution_ = s.distribution;
      remaining_.push_back(s.value);
    }
  }
  out.value = remaining_.front();
  out.distribution = distribution_;
  remaining_.pop_front();
  return out;
}

absl::StatusOr<DiscreteSampler> MakeCachedSampler(
    DiscreteSampler sampler, int k, std::shared_ptr<NoiseCache>* cache_out) {
  if (k < 1) return absl::InvalidArgumentError("cache size k must be >= 1");
  auto cache = std::make_shared<NoiseCache>(std::move(sampler), k);
  if (cache_out != nullptr) *cache_out = cache;
  return DiscreteSampler(
      [cache](RngStream& s) { return cache->Next(s); });
}

AveragedGaussianSampler::AveragedGaussianSampler(
    std::unique_ptr<GaussianSampler> inner, int m)
    : inner_(std::move(inner)), m_(std::max(m, 1)) {}

GaussSample AveragedGaussianSampler::Sample(double sigma) {
  if (m_ == 1) return inner_->Sample(sigma);
  const double scale = std::sqrt(static_cast<double>(m_)) * sigma;
  GaussSample out = inner_->Sample(scale);
  double sum = out.value;
  for (int i = 1; i < m_; ++i) {
    const GaussSample s = inner_->Sample(scale);
    sum += s.value;
    out.tail_used = out.tail_used || s.tail_used;
  }
  out.value = sum / m_;
  out.sigma = sigma;
  return out;
}

absl::StatusOr<std::unique_ptr<GaussianSampler>> MakeAveragedGaussian(
    std::unique_ptr<GaussianSampler> inner, int m) {
  if (m < 1) return absl::InvalidArgumentError("m must be >= 1");
  if (inner == nullptr) return absl::InvalidArgumentError("null sampler");
  return std::unique_ptr<GaussianSampler>(
      new AveragedGaussianSampler(std::move(inner), m));
}

GaussSample DiscardSecondSampler::Sample(double sigma) {
  const GaussSample s = inner_->Sample(sigma);
  inner_->DiscardCached();
  return s;
}

absl::StatusOr<std::unique_ptr<GaussianSampler>> MakeDiscardSecond(
    std::unique_ptr<GaussianSampler> inner) {
  if (inner == nullptr) return absl::InvalidArgumentError("null sampler");
  if (inner->method() == GaussMethod::kZiggurat) {
    return absl::InvalidArgumentError(
        "discard-second needs a polar or Box-Muller sampler");
  }
  return std::unique_ptr<GaussianSampler>(
      new DiscardSecondSampler(std::move(inner)));
}

int64_t RandomizedRound(double x, RngStream& stream) {
  const double lo = std::floor(x);
  return static_cast<int64_t>(lo) + (DrawBernoulli(stream, x - lo) ? 1 : 0);
}

std::vector<double> DiscretizedStep::Sum() const {
  std::vector<double> out(grid.size());
  for (size_t k = 0; k < grid.size(); ++k) {
    out[k] = gamma * static_cast<double>(grid[k]);
  }
  return out;
}

std::vector<double> DiscretizedStep::Average() const {
  std::vector<double> out = Sum();
  for (double& v : out) v /= batch_size;
  return out;
}

absl::StatusOr<DiscretizedStep> DiscretizedDpSgdStep(
    const LogisticModel& model, const Batch& batch, const SgdConfig& cfg,
    double gamma, RngStream& stream) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    return absl::InvalidArgumentError("gamma must be in (0, 1]");
  }
  if (cfg.sigma < 0.0) return absl::InvalidArgumentError("sigma must be >= 0");
  if (!(cfg.clip_norm > 0.0)) {
    return absl::InvalidArgumentError("clip_norm must be positive");
  }
  if (batch.records.empty()) return absl::InvalidArgumentError("empty batch");
  if (static_cast<int>(model.w.size()) != cfg.dim) {
    return absl::InvalidArgumentError("model dimension mismatch");
  }
  DiscretizedStep step;
  step.gamma = gamma;
  step.batch_size = batch.size();
  step.grid.assign(cfg.dim, 0);
  for (const Record& r : batch.records) {
    auto g = PerRecordGradient(model, r);
    if (!g.ok()) return g.status();
    const std::vector<double> clipped = ClipToNorm(*std::move(g), cfg.clip_norm);
    for (int k = 0; k < cfg.dim; ++k) {
      step.grid[k] += RandomizedRound(clipped[k] / gamma, stream);
    }
  }
  if (cfg.sigma > 0.0) {
    const double scale = cfg.sigma * cfg.clip_norm / gamma;
    for (int k = 0; k < cfg.dim; ++k) {
      auto z = DiscreteGaussian(stream, scale);
      if (!z.ok()) return z.status();
      step.grid[k] += z->value;
    }
  }
  return step;
}

namespace {

constexpr std::pair<MitigationKind, std::string_view> kMitigationNames[] = {
    {MitigationKind::kNone, "none"},
    {MitigationKind::kPadTrials, "pad-trials"},
    {MitigationKind::kPadTime, "pad-time"},
    {MitigationKind::kCache, "cache"},
    {MitigationKind::kAverage, "avg"},
    {MitigationKind::kDiscardSecond, "discard2"},
    {MitigationKind::kDiscretize, "discretize"},
};

}  // namespace

absl::StatusOr<MitigationKind> ParseMitigationKind(std::string_view name) {
  for (const auto& [kind, n] : kMitigationNames) {
    if (n == name) return kind;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("Unknown mitigation: ", std::string(name)));
}

std::string_view MitigationKindName(MitigationKind kind) {
  for (const auto& [k, n] : kMitigationNames) {
    if (k == kind) return n;
  }
  return "none";
}

}  // namespace dpleak
