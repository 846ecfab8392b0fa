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

#ifndef DPLEAK_ZIGGURAT_H_
#define DPLEAK_ZIGGURAT_H_

#include <array>
#include <cstdint>
#include <optional>

#include "absl/status/statusor.h"
#include "dpleak/gauss.h"
#include "dpleak/rng.h"

namespace dpleak {

inline constexpr int kZigguratLayers = 128;

// Right edge of the widest rectangle; the tail starts here.
inline constexpr double kZigguratR = 3.442619855899;

// Common area of every layer.
inline constexpr double kZigguratV = 9.91256303526217e-3;

// Layer tables of the 128-layer normal ziggurat, scaled for 32-bit signed
// integer draws (m = 2^31).
struct ZigguratTables {
  int n = kZigguratLayers;
  std::array<double, kZigguratLayers> w;
  std::array<double, kZigguratLayers> f;
  std::array<uint32_t, kZigguratLayers> k;
};

// Runs the layer-area recurrence. Only n = 128 is supported.
absl::StatusOr<ZigguratTables> BuildZigguratTables(int n);

// The embedded constants, identical to BuildZigguratTables(128).
const ZigguratTables& CanonicalZigguratTables();

// Diagnostic record of one ziggurat draw.
struct ZigguratTrace {
  int32_t j = 0;     // the last signed draw
  int layer = 0;     // its low 7 bits
  int rounds = 0;    // signed draws consumed
  bool fast_path = false;
  bool tail_used = false;
};

// Layer index of a signed draw: its rightmost 7 bits.
inline int ZigguratLayer(int32_t j) { return j & 0x7F; }

// The fast exit: returns j * w[i] when |j| < k[i].
std::optional<double> ZigguratFastPath(int32_t j, const ZigguratTables& tables);

// Normal sample by the ziggurat method, scaled by sigma as the last step.
// The uniforms of the wedge and tail tests come from RandomFp at the default
// resolution.
GaussSample ZigguratSample(RngStream& stream, const ZigguratTables& tables,
                           double sigma, ZigguratTrace* trace = nullptr);

// Positive tail magnitude beyond kZigguratR, by exponential rejection.
double ZigguratTailMagnitude(RngStream& stream);

// Tail magnitude with a uniformly random sign.
double ZigguratTailSample(RngStream& stream);

}  // namespace dpleak

#endif  // DPLEAK_ZIGGURAT_H_
