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

#include "dpleak/clock.h"

#include <pthread.h>
#include <sched.h>

#include <string>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace dpleak {

absl::StatusOr<Clock> ParseClock(std::string_view name) {
  if (name == "wall") return Clock::kWallNanos;
  if (name == "counter") return Clock::kCostCounter;
  return absl::InvalidArgumentError(
      absl::StrCat("Unknown clock (expected wall or counter): ",
                   std::string(name)));
}

std::string_view ClockName(Clock clock) {
  return clock == Clock::kWallNanos ? "wall" : "counter";
}

bool PinCurrentThread(int cpu) {
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(cpu, &set);
  return pthread_setaffinity_np(pthread_self(), sizeof(set), &set) == 0;
}

}  // namespace dpleak
