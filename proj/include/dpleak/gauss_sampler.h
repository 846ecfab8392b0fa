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

#ifndef DPLEAK_GAUSS_SAMPLER_H_
#define DPLEAK_GAUSS_SAMPLER_H_

#include <cstdint>
#include <memory>

#include "dpleak/gauss.h"
#include "dpleak/rng.h"
#include "dpleak/ziggurat.h"

namespace dpleak {

// Common interface over the continuous samplers so mechanisms and
// mitigations can be composed with any of them.
class GaussianSampler {
 public:
  virtual ~GaussianSampler() = default;
  virtual GaussSample Sample(double sigma) = 0;
  virtual GaussMethod method() const = 0;
  virtual RngStream& stream() = 0;
  // Drops a cached second output so the next call draws fresh uniforms.
  virtual void DiscardCached() {}
};

class PolarSampler : public GaussianSampler {
 public:
  explicit PolarSampler(PolarState state) : state_(std::move(state)) {}
  GaussSample Sample(double sigma) override {
    return PolarSample(state_, sigma);
  }
  GaussMethod method() const override { return GaussMethod::kPolar; }
  RngStream& stream() override { return state_.stream(); }
  void DiscardCached() override { state_.ClearCache(); }
  PolarState& state() { return state_; }

 private:
  PolarState state_;
};

class BoxMullerSampler : public GaussianSampler {
 public:
  explicit BoxMullerSampler(PolarState state) : state_(std::move(state)) {}
  GaussSample Sample(double sigma) override {
    return BoxMullerSample(state_, sigma);
  }
  GaussMethod method() const override { return GaussMethod::kBoxMuller; }
  RngStream& stream() override { return state_.stream(); }
  void DiscardCached() override { state_.ClearCache(); }
  PolarState& state() { return state_; }

 private:
  PolarState state_;
};

class ZigguratSampler : public GaussianSampler {
 public:
  explicit ZigguratSampler(RngStream stream)
      : stream_(std::move(stream)), tables_(CanonicalZigguratTables()) {}
  GaussSample Sample(double sigma) override {
    return ZigguratSample(stream_, tables_, sigma);
  }
  GaussMethod method() const override { return GaussMethod::kZiggurat; }
  RngStream& stream() override { return stream_; }

 private:
  RngStream stream_;
  const ZigguratTables& tables_;
};

// The resolution only affects the polar and Box-Muller methods.
std::unique_ptr<GaussianSampler> MakeGaussianSampler(GaussMethod method,
                                                     uint64_t seed,
                                                     Resolution res);

}  // namespace dpleak

#endif  // DPLEAK_GAUSS_SAMPLER_H_
