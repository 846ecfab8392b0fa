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

#ifndef DPLEAK_MITIGATIONS_H_
#define DPLEAK_MITIGATIONS_H_

#include <cstdint>
#include <deque>
#include <memory>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dpleak/discrete.h"
#include "dpleak/dpsgd.h"
#include "dpleak/gauss_sampler.h"
#include "dpleak/rng.h"

namespace dpleak {

enum class PaddingMode { kTrialCount, kWallTime };

struct PaddingPolicy {
  PaddingMode mode = PaddingMode::kTrialCount;
  // Trials for kTrialCount, nanoseconds for kWallTime.
  int64_t threshold = 0;
};

// Sets the threshold to the `quantile` of the unpadded cost (trace total or
// wall nanoseconds) over `draws` calibration draws.
absl::StatusOr<PaddingPolicy> CalibratePadding(const DiscreteSampler& sampler,
                                               PaddingMode mode,
                                               uint64_t seed,
                                               int64_t draws = 100000,
                                               double quantile = 0.995);

// Runs the wrapped sampler, then draws blank Bernoulli trials until the
// total reaches T. The value is the wrapped sampler's. A call that needed
// more than T trials is flagged truncated and still reports T; the flagged
// fraction is the failure probability charged to delta.
DiscreteSample PaddedSampleTrials(const DiscreteSampler& sampler,
                                  RngStream& stream, int64_t threshold);

// Runs the wrapped sampler and spins until `threshold_nanos` have elapsed
// since the call began. Calls that overrun are flagged truncated.
DiscreteSample PaddedSampleTime(const DiscreteSampler& sampler,
                                RngStream& stream, int64_t threshold_nanos);

// DiscreteSampler view of either padding mode.
absl::StatusOr<DiscreteSampler> MakePaddedSampler(DiscreteSampler sampler,
                                                  PaddingPolicy policy);

// Pre-draws k values at once and hands them out one per call. The call that
// refills carries the cost of all k draws; the others cost nothing.
class NoiseCache {
 public:
  NoiseCache(DiscreteSampler sampler, int k);

  DiscreteSample Next(RngStream& stream);
  int k() const { return k_; }
  int64_t refills() const { return refills_; }
  bool last_call_refilled() const { return last_refilled_; }

 private:
  DiscreteSampler sampler_;
  int k_;
  std::deque<int64_t> remaining_;
  Distribution distribution_ = Distribution::kGeometric;
  int64_t refills_ = 0;
  bool last_refilled_ = false;
};

// DiscreteSampler backed by a shared NoiseCache. Fails for k < 1.
absl::StatusOr<DiscreteSampler> MakeCachedSampler(
    DiscreteSampler sampler, int k,
    std::shared_ptr<NoiseCache>* cache_out = nullptr);

// The mean of m draws of N(0, m sigma^2), which is N(0, sigma^2).
class AveragedGaussianSampler : public GaussianSampler {
 public:
  AveragedGaussianSampler(std::unique_ptr<GaussianSampler> inner, int m);

  GaussSample Sample(double sigma) override;
  GaussMethod method() const override { return inner_->method(); }
  RngStream& stream() override { return inner_->stream(); }
  void DiscardCached() override { inner_->DiscardCached(); }
  int m() const { return m_; }

 private:
  std::unique_ptr<GaussianSampler> inner_;
  int m_;
};

absl::StatusOr<std::unique_ptr<GaussianSampler>> MakeAveragedGaussian(
    std::unique_ptr<GaussianSampler> inner, int m);

// Returns the first output of every transform and drops the second, so no
// two released values share a uniform pair.
class DiscardSecondSampler : public GaussianSampler {
 public:
  explicit DiscardSecondSampler(std::unique_ptr<GaussianSampler> inner)
      : inner_(std::move(inner)) {}

  GaussSample Sample(double sigma) override;
  GaussMethod method() const override { return inner_->method(); }
  RngStream& stream() override { return inner_->stream(); }

 private:
  std::unique_ptr<GaussianSampler> inner_;
};

// Fails unless `inner` is a polar or Box-Muller sampler.
absl::StatusOr<std::unique_ptr<GaussianSampler>> MakeDiscardSecond(
    std::unique_ptr<GaussianSampler> inner);

// Rounds x up with probability equal to its fractional part.
int64_t RandomizedRound(double x, RngStream& stream);

struct DiscretizedStep {
  // Sum over records of the rounded scaled gradients, plus the integer
  // noise.
  std::vector<int64_t> grid;
  double gamma = 0.0;
  int batch_size = 0;

  // gamma * grid, on the gamma-grid.
  std::vector<double> Sum() const;
  // gamma * grid / S, the averaged release.
  std::vector<double> Average() const;
};

// Clips each per-record gradient to L, scales it by 1/gamma, rounds every
// coordinate randomly to an integer, sums over the batch and adds d draws
// of the discrete Gaussian with scale sigma L / gamma. sigma = 0 adds no
// noise.
absl::StatusOr<DiscretizedStep> DiscretizedDpSgdStep(
    const LogisticModel& model, const Batch& batch, const SgdConfig& cfg,
    double gamma, RngStream& stream);

enum class MitigationKind {
  kNone,
  kPadTrials,
  kPadTime,
  kCache,
  kAverage,
  kDiscardSecond,
  kDiscretize,
};

absl::StatusOr<MitigationKind> ParseMitigationKind(std::string_view name);
std::string_view MitigationKindName(MitigationKind kind);

}  // namespace dpleak

#endif  // DPLEAK_MITIGATIONS_H_
