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

#include "dpleak/ziggurat.h"

#include <cmath>
#include <cstdlib>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace dpleak {

absl::StatusOr<ZigguratTables> BuildZigguratTables(int n) {
  if (n != kZigguratLayers) {
    return absl::UnimplementedError(
        absl::StrCat("Only 128-layer tables are supported, got ", n));
  }
  const double m1 = 2147483648.0;
  double dn = kZigguratR;
  double tn = dn;
  const double vn = kZigguratV;
  ZigguratTables t;
  const double q = vn / std::exp(-0.5 * dn * dn);
  t.k[0] = static_cast<uint32_t>((dn / q) * m1);
  t.k[1] = 0;
  t.w[0] = q / m1;
  t.w[127] = dn / m1;
  t.f[0] = 1.0;
  t.f[127] = std::exp(-0.5 * dn * dn);
  for (int i = 126; i >= 1; --i) {
    dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
    t.k[i + 1] = static_cast<uint32_t>((dn / tn) * m1);
    tn = dn;
    t.f[i] = std::exp(-0.5 * dn * dn);
    t.w[i] = dn / m1;
  }
  return t;
}

std::optional<double> ZigguratFastPath(int32_t j,
                                       const ZigguratTables& tables) {
  const int i = ZigguratLayer(j);
  const uint32_t magnitude =
      j < 0 ? static_cast<uint32_t>(-static_cast<int64_t>(j))
            : static_cast<uint32_t>(j);
  if (magnitude < tables.k[i]) return static_cast<double>(j) * tables.w[i];
  return std::nullopt;
}

double ZigguratTailMagnitude(RngStream& stream) {
  const Resolution res = Resolution::Default();
  while (true) {
    const double x = -std::log(RandomFp(stream, res).value) / kZigguratR;
    const double y = -std::log(RandomFp(stream, res).value);
    if (y + y >= x * x) return kZigguratR + x;
  }
}

double ZigguratTailSample(RngStream& stream) {
  const bool negative = (stream.NextU64() >> 63) != 0;
  const double magnitude = ZigguratTailMagnitude(stream);
  return negative ? -magnitude : magnitude;
}

GaussSample ZigguratSample(RngStream& stream, const ZigguratTables& tables,
                           double sigma, ZigguratTrace* trace) {
  const Resolution res = Resolution::Default();
  ZigguratTrace local;
  while (true) {
    const int32_t j = static_cast<int32_t>(RandomU32(stream));
    const int i = ZigguratLayer(j);
    ++local.rounds;
    local.j = j;
    local.layer = i;
    const double x = static_cast<double>(j) * tables.w[i];
    if (ZigguratFastPath(j, tables).has_value()) {
      local.fast_path = true;
      if (trace != nullptr) *trace = local;
      return {sigma * x, sigma, GaussMethod::kZiggurat};
    }
    if (i == 0) {
      const double magnitude = ZigguratTailMagnitude(stream);
      local.tail_used = true;
      if (trace != nullptr) *trace = local;
      return {sigma * (j > 0 ? magnitude : -magnitude), sigma,
              GaussMethod::kZiggurat, true};
    }
    const double u = RandomFp(stream, res).value;
    if (tables.f[i] + u * (tables.f[i - 1] - tables.f[i]) <
        std::exp(-0.5 * x * x)) {
      if (trace != nullptr) *trace = local;
      return {sigma * x, sigma, GaussMethod::kZiggurat};
    }
  }
}

}  // namespace dpleak
