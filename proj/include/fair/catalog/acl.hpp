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

#include <map>
#include <set>
#include <string>
#include <string_view>

#include "fair/common/json.hpp"

namespace fair::catalog {

enum class Right { read = 1, write = 2, model_change = 3 };

std::string_view right_name(Right r) noexcept;

struct Principal {
  std::string name;
  std::set<std::string> roles;
};

// Role rights at catalog and per-table granularity. Rights are ordered:
// model_change implies write implies read, so a role's level is the highest
// right granted to it. Table grants add to catalog grants.
class AclPolicy {
 public:
  // Every principal holds every right.
  static AclPolicy open();

  // {"catalog": {role: [rights]}, "tables": {"schema:Table": {role: [rights]}}}
  static AclPolicy from_json(const Json& doc);
  [[nodiscard]] Json to_json() const;

  void grant(const std::string& role, Right right);
  void grant(const std::string& table, const std::string& role, Right right);

  [[nodiscard]] bool allows(const Principal& who, Right right, std::string_view table = {}) const;

  // Forbidden unless allowed.
  void require(const Principal& who, Right right, std::string_view table = {}) const;

 private:
  bool open_ = false;
  std::map<std::string, int> catalog_;
  std::map<std::string, std::map<std::string, int>, std::less<>> tables_;
};

}  // namespace fair::catalog
