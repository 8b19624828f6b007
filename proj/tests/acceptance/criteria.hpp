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
#include <sstream>
#include <string>
#include <vector>

namespace fair::acceptance {

// Failed expectations of one criterion. A criterion passes when it runs to
// the end without recording any.
class Checker {
 public:
  bool expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
    return ok;
  }

  template <typename A, typename B>
  bool expect_eq(const A& actual, const B& expected, const std::string& what) {
    if (actual == expected) return true;
    std::ostringstream s;
    s << what << ": got " << actual << ", want " << expected;
    failures_.push_back(s.str());
    return false;
  }

  void fail(const std::string& what) { failures_.push_back(what); }
  [[nodiscard]] const std::vector<std::string>& failures() const noexcept { return failures_; }

 private:
  std::vector<std::string> failures_;
};

struct Criterion {
  std::string name;
  std::chrono::seconds budget{0};  // zero means unbounded
  std::function<void(Checker&)> run;
};

std::vector<Criterion> bag_criteria();
std::vector<Criterion> idspace_criteria();
std::vector<Criterion> catalog_criteria();
std::vector<Criterion> flow_criteria();
std::vector<Criterion> scenario_criteria();

}  // namespace fair::acceptance
