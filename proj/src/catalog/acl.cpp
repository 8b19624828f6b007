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

#include "fair/catalog/acl.hpp"

#include <algorithm>

#include "fair/common/error.hpp"

namespace fair::catalog {
namespace {

Right right_from_name(const std::string& name) {
  if (name == "read") return Right::read;
  if (name == "write") return Right::write;
  if (name == "model_change") return Right::model_change;
  fail(Errc::BadRequest, "unknown right '" + name + "'");
}

std::map<std::string, int> parse_grants(const Json& doc) {
  std::map<std::string, int> out;
  if (!doc.is_object()) fail(Errc::BadRequest, "ACL grants must map roles to right lists");
  for (const auto& [role, rights] : doc.items()) {
    int level = 0;
    const auto add = [&](const Json& r) {
      if (!r.is_string()) fail(Errc::BadRequest, "right for role " + role + " must be a string");
      level = std::max(level, static_cast<int>(right_from_name(r.get<std::string>())));
    };
    if (rights.is_array()) {
      for (const auto& r : rights) add(r);
    } else {
      add(rights);
    }
    out[role] = level;
  }
  return out;
}

Json dump_grants(const std::map<std::string, int>& grants) {
  Json j = Json::object();
  for (const auto& [role, level] : grants) {
    Json rights = Json::array();
    for (int r = 1; r <= level; ++r) rights.push_back(std::string(right_name(static_cast<Right>(r))));
    j[role] = std::move(rights);
  }
  return j;
}

}  // namespace

std::string_view right_name(Right r) noexcept {
  switch (r) {
    case Right::read: return "read";
    case Right::write: return "write";
    case Right::model_change: return "model_change";
  }
  return "read";
}

AclPolicy AclPolicy::open() {
  AclPolicy p;
  p.open_ = true;
  return p;
}

AclPolicy AclPolicy::from_json(const Json& doc) {
  AclPolicy p;
  if (!doc.is_object()) fail(Errc::BadRequest, "ACL policy must be an object");
  if (doc.contains("catalog")) p.catalog_ = parse_grants(doc["catalog"]);
  if (doc.contains("tables")) {
    if (!doc["tables"].is_object()) fail(Errc::BadRequest, "ACL 'tables' must be an object");
    for (const auto& [table, grants] : doc["tables"].items()) p.tables_[table] = parse_grants(grants);
  }
  return p;
}

Json AclPolicy::to_json() const {
  Json j = Json::object();
  j["catalog"] = dump_grants(catalog_);
  Json tables = Json::object();
  for (const auto& [t, g] : tables_) tables[t] = dump_grants(g);
  j["tables"] = std::move(tables);
  return j;
}

void AclPolicy::grant(const std::string& role, Right right) {
  auto& level = catalog_[role];
  level = std::max(level, static_cast<int>(right));
}

void AclPolicy::grant(const std::string& table, const std::string& role, Right right) {
  auto& level = tables_[table][role];
  level = std::max(level, static_cast<int>(right));
}

bool AclPolicy::allows(const Principal& who, Right right, std::string_view table) const {
  if (open_) return true;
  const int need = static_cast<int>(right);
  const std::map<std::string, int>* per_table = nullptr;
  if (!table.empty()) {
    if (const auto it = tables_.find(table); it != tables_.end()) per_table = &it->second;
  }
  for (const auto& role : who.roles) {
    if (const auto it = catalog_.find(role); it != catalog_.end() && it->second >= need) return true;
    if (per_table != nullptr) {
      if (const auto it = per_table->find(role); it != per_table->end() && it->second >= need) return true;
    }
  }
  return false;
}

void AclPolicy::require(const Principal& who, Right right, std::string_view table) const {
  if (!allows(who, right, table)) {
    fail(Errc::Forbidden, who.name + " lacks " + std::string(right_name(right)) +
                              (table.empty() ? std::string(" on the catalog") : " on " + std::string(table)));
  }
}

}  // namespace fair::catalog
