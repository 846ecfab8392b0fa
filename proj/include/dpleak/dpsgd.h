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

#ifndef DPLEAK_DPSGD_H_
#define DPLEAK_DPSGD_H_

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dpleak/fp_attack.h"
#include "dpleak/gauss.h"
#include "dpleak/gauss_sampler.h"
#include "dpleak/rng.h"

namespace dpleak {

struct Record {
  std::vector<double> x;
  int label = 0;  // 0 or 1
};

struct Batch {
  std::vector<Record> records;

  int size() const { return static_cast<int>(records.size()); }
};

struct SgdConfig {
  double clip_norm = 1.0;  // L
  int dim = 256;           // d
  double sigma = 1.0;      // noise multiplier; each draw has scale sigma * L

  // Replacing one record moves the averaged clipped gradient by at most
  // 2L / S in l2 norm.
  double Sensitivity(int batch_size) const {
    return 2.0 * clip_norm / batch_size;
  }
};

// Logistic regression p(y = 1 | x) = 1 / (1 + exp(-(w . x + bias))). The
// bias is fixed; gradients are taken with respect to w only.
struct LogisticModel {
  std::vector<double> w;
  double bias = 0.0;
};

// A model that is already confident on class 1: w = 0 and a large bias. The
// class-1 records then have gradients of size about exp(-bias), while a
// class-0 record still has a gradient of norm about |x|.
LogisticModel ConfidentModel(int dim, double bias = 60.0);

// Two isotropic Gaussian blobs with means -mu and +mu, where mu has every
// coordinate equal to separation / sqrt(d) and unit per-coordinate spread.
class BlobData {
 public:
  BlobData(int dim, double separation, uint64_t seed);

  Record Draw(int label);
  int dim() const { return dim_; }

 private:
  int dim_;
  double offset_;
  std::unique_ptr<GaussianSampler> normal_;
};

// Gradient of the logistic loss of one record, (p - y) x.
absl::StatusOr<std::vector<double>> PerRecordGradient(
    const LogisticModel& model, const Record& record);

// g * min(1, L / ||g||).
std::vector<double> ClipToNorm(std::vector<double> g, double clip_norm);

// f(B) = (1 / S) sum of clipped per-record gradients.
absl::StatusOr<std::vector<double>> AverageClippedGradient(
    const LogisticModel& model, const Batch& batch, const SgdConfig& cfg);

// f(B) + Z / S with Z_k ~ N(0, (sigma L)^2) from `sampler`, drawn in
// coordinate order so that the polar and Box-Muller pairs occupy
// coordinates (2k, 2k + 1).
absl::StatusOr<std::vector<double>> DpSgdStep(const LogisticModel& model,
                                              const Batch& batch,
                                              const SgdConfig& cfg,
                                              GaussianSampler& sampler);

double L2Distance(const std::vector<double>& a, const std::vector<double>& b);

enum class CanaryKind {
  // The canary is a holdout record of the batch's own class.
  kSimLabel,
  // The batch is drawn from class 1 and the canary from class 0.
  kDiffLabel,
};

absl::StatusOr<CanaryKind> ParseCanaryKind(std::string_view name);
std::string_view CanaryKindName(CanaryKind kind);

// Neighboring batches B and B' of size S that differ in their last record,
// the replaced record b_r in B and the canary b_c in B'.
struct CanaryPair {
  Batch b;
  Batch bprime;
};

CanaryPair MakeCanaryPair(BlobData& data, int batch_size, CanaryKind kind);

struct DpSgdTrial {
  bool released_bprime = false;
  DpSgdVote vote;

  bool success() const {
    return (vote.guess == Guess::kDprime) == released_bprime;
  }
};

struct DpSgdTrialConfig {
  SgdConfig sgd;
  int batch_size = 64;
  double separation = 4.0;
  double model_bias = 60.0;  // bias of the ConfidentModel under attack
  CanaryKind canary = CanaryKind::kDiffLabel;
  GaussMethod method = GaussMethod::kPolar;
  int log2_resolution = 10;
  NeighborSearchConfig search;
};

// One round of the canary game: build B and B', release one of them by a
// fair coin through DpSgdStep, and run DpSgdAttack on the release. Every
// random choice derives from `seed`.
absl::StatusOr<DpSgdTrial> RunDpSgdTrial(const DpSgdTrialConfig& cfg,
                                         uint64_t seed);

}  // namespace dpleak

#endif  // DPLEAK_DPSGD_H_
