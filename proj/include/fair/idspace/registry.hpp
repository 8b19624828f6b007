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
#include <shared_mutex>
#include <string>
#include <vector>

#include "fair/common/append_log.hpp"
#include "fair/common/clock.hpp"
#include "fair/common/digest.hpp"
#include "fair/common/json.hpp"
#include "fair/idspace/id.hpp"

namespace fair::bag {
struct Bag;
class FetchResolver;
}  // namespace fair::bag

namespace fair::idspace {

struct Checksum {
  Algorithm algorithm = Algorithm::sha256;
  std::string digest;

  bool operator==(const Checksum&) const = default;
};

enum class Status { active, superseded };

// One version of a lightweight identifier record. Records are immutable
// values; every change appends a new version.
struct MinidRecord {
  IdString id;
  int version = 1;
  std::string creator;
  Timestamp created{};
  Checksum checksum;
  std::vector<std::string> locations;
  std::optional<std::string> title;
  Status status = Status::active;
  std::optional<std::string> superseded_by;
  Timestamp modified{};
  std::string actor;

  bool operator==(const MinidRecord&) const = default;
};

// Fixed key order: id, version, creator, created, checksum, locations, title,
// status, superseded_by, modified, actor.
Json to_json(const MinidRecord& r);
MinidRecord record_from_json(const Json& j);

struct MintRequest {
  std::string creator;
  std::string algorithm = "sha256";
  std::string digest;
  std::vector<std::string> locations;
  std::optional<std::string> title;
  std::string ns;  // empty means the registry default
  // Repeating a mint with the same key returns the first record instead of
  // minting again.
  std::optional<std::string> request_key;
};

class Registry {
 public:
  struct Options {
    std::string default_namespace = "MINID";
    ClockFn clock = system_clock();
    std::optional<std::uint64_t> seed;
    bool durable = false;
  };

  Registry(const std::filesystem::path& log_path, Options options);
  explicit Registry(const std::filesystem::path& log_path) : Registry(log_path, Options{}) {}

  MinidRecord mint(const MintRequest& request);
  [[nodiscard]] MinidRecord resolve(const IdString& id) const;
  [[nodiscard]] MinidRecord resolve(std::string_view id) const { return resolve(parse_id(id)); }
  [[nodiscard]] std::optional<MinidRecord> find(const IdString& id) const;
  MinidRecord update_locations(const IdString& id, const std::vector<std::string>& locations,
                               const std::string& actor);
  MinidRecord upgrade(const IdString& id, std::string_view doi, const std::string& actor);
  [[nodiscard]] std::vector<MinidRecord> history(const IdString& id) const;
  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] std::size_t log_lines() const;
  [[nodiscard]] const std::string& default_namespace() const noexcept { return options_.default_namespace; }

 private:
  void append_locked(const MinidRecord& r, const std::optional<std::string>& request_key);

  Options options_;
  SuffixGenerator suffixes_;
  std::unique_ptr<AppendLog> log_;
  mutable std::shared_mutex mu_;
  std::map<IdString, std::vector<MinidRecord>> versions_;
  std::map<std::string, IdString> by_request_key_;
  std::size_t lines_ = 0;
};

// sha256 of the deterministic tar form of the bag (payload and tag files).
Checksum bag_checksum(const bag::Bag& bag);

struct BindRequest {
  std::string creator;
  std::vector<std::string> locations;
  std::optional<std::string> title;
  std::string ns;
  std::optional<std::string> request_key;
};

MinidRecord bind_bag(Registry& registry, const bag::Bag& bag, const BindRequest& request);

// Registers a "minid:" fetch handler that resolves the identifier and fetches
// the first location the base resolver can serve.
void add_minid_handler(bag::FetchResolver& target, const Registry& registry, bag::FetchResolver base);

}  // namespace fair::idspace
