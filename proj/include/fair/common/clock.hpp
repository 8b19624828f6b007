// Copyright 2026 The fairkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace fair {

using Timestamp = std::chrono::sys_seconds;

// Injectable time source. Every module that stamps records takes one of
// these so tests can pin time.
using ClockFn = std::function<Timestamp()>;

Timestamp system_now();
ClockFn system_clock();

// RFC 3339, UTC, second resolution: "2026-10-17T00:22:00Z".
std::string format_rfc3339(Timestamp t);
std::optional<Timestamp> parse_rfc3339(std::string_view text);

// Monotonic test clock; each call advances by `step`.
class SteppingClock {
 public:
  explicit SteppingClock(Timestamp start, std::chrono::seconds step = std::chrono::seconds{1})
      : now_(start), step_(step) {}
  Timestamp operator()() {
    auto t = now_;
    now_ += step_;
    return t;
  }

 private:
  Timestamp now_;
  std::chrono::seconds step_;
};

}  // namespace fair
