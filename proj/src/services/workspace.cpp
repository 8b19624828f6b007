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

#include "fair/services/workspace.hpp"

#include <random>

#include "fair/common/digest.hpp"
#include "fair/common/error.hpp"

namespace fair::services {

namespace fs = std::filesystem;

namespace {

constexpr const char* kConfigFile = "config.json";
constexpr const char* kAclFile = "acl.json";

Json principal_json(const catalog::Principal& p) {
  Json roles = Json::array();
  for (const auto& r : p.roles) roles.push_back(r);
  return Json{{"name", p.name}, {"roles", std::move(roles)}};
}

catalog::Principal principal_from(const Json& j) {
  if (!j.is_object() || !j.contains("name") || !j["name"].is_string())
    fail(Errc::BadRequest, "principal needs a string name");
  catalog::Principal p{j["name"].get<std::string>(), {}};
  if (j.contains("roles")) {
    if (!j["roles"].is_array()) fail(Errc::BadRequest, "principal roles must be an array");
    for (const auto& r : j["roles"]) p.roles.insert(r.get<std::string>());
  }
  return p;
}

Json load_json(const fs::path& p) {
  try {
    return Json::parse(read_file(p));
  } catch (const Json::exception& e) {
    fail(Errc::BadRequest, p.string() + ": " + e.what());
  }
}

std::string new_token() {
  std::random_device rd;
  std::string seed;
  for (int i = 0; i < 8; ++i) seed += std::to_string(rd());
  return digest_hex(Algorithm::sha256, seed).substr(0, 40);
}

}  // namespace

Json to_json(const WorkspaceConfig& c) {
  return Json{{"version", 1},
              {"ids_namespace", c.ids_namespace},
              {"catalog_namespace", c.catalog_namespace},
              {"citation_base", c.citation_base},
              {"anonymous", principal_json(c.anonymous)},
              {"durable", c.durable}};
}

WorkspaceConfig config_from_json(const Json& j) {
  if (!j.is_object()) fail(Errc::BadRequest, "config must be a JSON object");
  WorkspaceConfig c;
  c.ids_namespace = j.value("ids_namespace", c.ids_namespace);
  c.catalog_namespace = j.value("catalog_namespace", c.catalog_namespace);
  c.citation_base = j.value("citation_base", c.citation_base);
  if (j.contains("anonymous")) c.anonymous = principal_from(j["anonymous"]);
  c.durable = j.value("durable", c.durable);
  return c;
}

AccessConfig AccessConfig::from_json(const Json& doc) {
  if (!doc.is_object()) fail(Errc::BadRequest, "acl file must be a JSON object");
  AccessConfig a;
  if (doc.contains("tokens")) {
    if (!doc["tokens"].is_object()) fail(Errc::BadRequest, "acl tokens must be an object");
    for (const auto& [tok, p] : doc["tokens"].items()) a.tokens.emplace(tok, principal_from(p));
  }
  Json grants = Json::object();
  if (doc.contains("catalog")) grants["catalog"] = doc["catalog"];
  if (doc.contains("tables")) grants["tables"] = doc["tables"];
  a.policy = catalog::AclPolicy::from_json(grants);
  return a;
}

Json AccessConfig::to_json() const {
  Json toks = Json::object();
  for (const auto& [tok, p] : tokens) toks[tok] = principal_json(p);
  Json out{{"tokens", std::move(toks)}};
  const Json grants = policy.to_json();
  for (const auto& [k, v] : grants.items()) out[k] = v;
  return out;
}

std::string init_workspace(const fs::path& dir, const WorkspaceConfig& config) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) fail(Errc::NotEmpty, dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir, ec)) fail(Errc::NotEmpty, dir.string() + " is not empty");
  }
  fs::create_directories(dir / "storage", ec);
  if (ec) fail(Errc::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  fs::create_directories(dir / "exports", ec);

  const std::string token = new_token();
  AccessConfig access;
  access.tokens.emplace(token, catalog::Principal{"admin", {"admin"}});
  access.policy.grant("admin", catalog::Right::model_change);
  for (const auto& role : config.anonymous.roles) access.policy.grant(role, catalog::Right::read);

  write_file_atomic(dir / kAclFile, access.to_json().dump(2) + "\n");
  for (const char* log : {"ids.log", "catalog.log", "flows.log"}) write_file_atomic(dir / log, "");
  // config.json last: its presence marks the directory as initialized.
  write_file_atomic(dir / kConfigFile, to_json(config).dump(2) + "\n");
  return token;
}

Workspace::Workspace(const fs::path& dir, Options options) : dir_(dir), options_(std::move(options)) {
  if (!fs::exists(dir_ / kConfigFile)) fail(Errc::NotInitialized, dir_.string() + " has no " + kConfigFile);
  if (options_.lock) lock_ = std::make_unique<FileLock>(dir_ / ".lock");
  config_ = config_from_json(load_json(dir_ / kConfigFile));
  const fs::path acl = options_.acl_file.value_or(dir_ / kAclFile);
  access_ = fs::exists(acl) ? AccessConfig::from_json(load_json(acl)) : AccessConfig{{}, catalog::AclPolicy::open()};

  idspace::Registry::Options ro;
  ro.default_namespace = config_.ids_namespace;
  ro.clock = options_.clock;
  ro.durable = config_.durable;
  registry_ = std::make_unique<idspace::Registry>(dir_ / "ids.log", ro);

  catalog::Catalog::Options co;
  co.ns = config_.catalog_namespace;
  co.clock = options_.clock;
  co.citation_base = config_.citation_base;
  co.durable = config_.durable;
  co.acl = access_.policy;
  catalog_ = std::make_unique<catalog::Catalog>(dir_ / "catalog.log", co);

  flows::FlowEngine::Options fo;
  fo.clock = options_.clock;
  fo.durable = config_.durable;
  flows_ = std::make_unique<flows::FlowEngine>(dir_ / "flows.log", fo);

  const auto base = bag::FetchResolver::with_defaults();
  resolver_ = base;
  idspace::add_minid_handler(resolver_, *registry_, base);
}

std::optional<catalog::Principal> Workspace::principal_for_token(std::string_view token) const {
  const auto it = access_.tokens.find(std::string(token));
  if (it == access_.tokens.end()) return std::nullopt;
  return it->second;
}

catalog::Principal Workspace::local_principal() { return {"admin", {"admin"}}; }

flows::FlowServices Workspace::flow_services(const catalog::Principal& actor) {
  flows::FlowServices s;
  s.registry = registry_.get();
  s.catalog = catalog_.get();
  s.storage = dir_ / "storage";
  s.creator = actor.name;
  s.actor = actor;
  return s;
}

}  // namespace fair::services
