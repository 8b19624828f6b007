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

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "fair/bag/fetch.hpp"
#include "fair/catalog/catalog.hpp"
#include "fair/common/files.hpp"
#include "fair/flows/runner.hpp"
#include "fair/idspace/registry.hpp"

namespace fair::services {

inline constexpr std::string_view kVersion = "0.1.0";

struct WorkspaceConfig {
  std::string ids_namespace = "MINID";
  std::string catalog_namespace = "CATALOG";
  std::string citation_base = "http://localhost:8080";
  catalog::Principal anonymous{"anonymous", {"anonymous"}};
  bool durable = true;
};

Json to_json(const WorkspaceConfig& c);
WorkspaceConfig config_from_json(const Json& j);

// Creates the data directory layout:
//
//   config.json  namespaces, citation base, anonymous principal
//   acl.json     bearer tokens and role grants
//   ids.log, catalog.log, flows.log, storage/
//
// NotEmpty when `dir` exists and has entries. Returns the admin bearer token
// written to acl.json.
std::string init_workspace(const std::filesystem::path& dir, const WorkspaceConfig& config = {});

// Bearer tokens mapped to principals, plus role grants.
struct AccessConfig {
  std::map<std::string, catalog::Principal> tokens;
  catalog::AclPolicy policy;

  static AccessConfig from_json(const Json& doc);
  [[nodiscard]] Json to_json() const;
};

// The opened stores of one data directory. Writers hold an exclusive lock on
// the directory for their lifetime; a second writer gets Locked.
class Workspace {
 public:
  struct Options {
    ClockFn clock = system_clock();
    std::optional<std::filesystem::path> acl_file;  // defaults to <dir>/acl.json
    bool lock = true;
  };

  Workspace(const std::filesystem::path& dir, Options options);
  explicit Workspace(const std::filesystem::path& dir) : Workspace(dir, Options{}) {}

  [[nodiscard]] const std::filesystem::path& dir() const noexcept { return dir_; }
  [[nodiscard]] const WorkspaceConfig& config() const noexcept { return config_; }
  [[nodiscard]] const AccessConfig& access() const noexcept { return access_; }

  idspace::Registry& registry() { return *registry_; }
  catalog::Catalog& catalog() { return *catalog_; }
  flows::FlowEngine& flows() { return *flows_; }
  [[nodiscard]] const bag::FetchResolver& resolver() const { return resolver_; }

  // nullopt for unknown tokens.
  [[nodiscard]] std::optional<catalog::Principal> principal_for_token(std::string_view token) const;
  // Local callers (offline CLI) act as the admin principal created by init.
  [[nodiscard]] static catalog::Principal local_principal();

  [[nodiscard]] flows::FlowServices flow_services(const catalog::Principal& actor);

 private:
  std::filesystem::path dir_;
  Options options_;
  std::unique_ptr<FileLock> lock_;
  WorkspaceConfig config_;
  AccessConfig access_;
  std::unique_ptr<idspace::Registry> registry_;
  std::unique_ptr<catalog::Catalog> catalog_;
  std::unique_ptr<flows::FlowEngine> flows_;
  bag::FetchResolver resolver_;
};

}  // namespace fair::services
