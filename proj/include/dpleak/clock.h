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

#ifndef DPLEAK_CLOCK_H_
#define DPLEAK_CLOCK_H_

#include <chrono>
#include <cstdint>
#include <string_view>

#include "absl/status/statusor.h"

namespace dpleak {

// kCostCounter reads the deterministic cost of a call (trials plus search
// steps plus records touched); kWallNanos reads std::chrono::steady_clock.
enum class Clock { kWallNanos, kCostCounter };

absl::StatusOr<Clock> ParseClock(std::string_view name);
std::string_view ClockName(Clock clock);

// Monotone nanosecond stopwatch.
class WallTimer {
 public:
  WallTimer() : start_(std::chrono::steady_clock::now()) {}
  int64_t ElapsedNanos() const {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Pins the calling thread to one CPU. Returns false when pinning is not
// available.
bool PinCurrentThread(int cpu = 0);

}  // namespace dpleak

#endif  // DPLEAK_CLOCK_H_
