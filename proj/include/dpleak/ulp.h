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

#ifndef DPLEAK_ULP_H_
#define DPLEAK_ULP_H_

#include <bit>
#include <cstdint>
#include <limits>

namespace dpleak {

// Maps a double to an integer whose order matches the order of the doubles,
// so that adjacent doubles map to adjacent integers. +0 and -0 both map to 0.
inline int64_t OrderedBits(double x) {
  const int64_t bits = std::bit_cast<int64_t>(x);
  return bits < 0 ? std::numeric_limits<int64_t>::min() - bits : bits;
}

inline double FromOrderedBits(int64_t ordered) {
  const int64_t bits =
      ordered < 0 ? std::numeric_limits<int64_t>::min() - ordered : ordered;
  return std::bit_cast<double>(bits);
}

// Number of representable doubles between a and b.
inline uint64_t UlpDistance(double a, double b) {
  const int64_t ia = OrderedBits(a);
  const int64_t ib = OrderedBits(b);
  return ia > ib ? static_cast<uint64_t>(ia) - static_cast<uint64_t>(ib)
                 : static_cast<uint64_t>(ib) - static_cast<uint64_t>(ia);
}

// The double `steps` representable values away from x (negative steps move
// down).
inline double StepUlps(double x, int64_t steps) {
  return FromOrderedBits(OrderedBits(x) + steps);
}

}  // namespace dpleak

#endif  // DPLEAK_ULP_H_
