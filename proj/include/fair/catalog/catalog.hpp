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

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "fair/catalog/acl.hpp"
#include "fair/catalog/model.hpp"
#include "fair/common/append_log.hpp"
#include "fair/common/clock.hpp"
#include "fair/idspace/id.hpp"

namespace fair::catalog {

using SnapshotId = std::uint64_t;

// One immutable version of one row. `seq` is the snapshot that produced it.
struct RecordVersion {
  SnapshotId seq = 0;
  std::string table;  // qualified
  idspace::IdString rid;
  std::map<Cid, Json> values;  // user columns only
  Timestamp rct{};
  Timestamp rmt{};
  int model_version = 0;
  bool deleted = false;
  std::string actor;

  [[nodiscard]] const Json* value(Cid cid) const;
};

struct Resolution {
  std::string table;
  RecordVersion head;
  std::string citation;
};

// A column filter written "col<op>value" with op one of = != < <= > >= ~
// (~ is case-insensitive substring). A facet may also be a bare column name,
// which only requests counts.
struct Filter {
  std::string column;
  std::string op;
  std::string value;
};

Filter parse_filter(std::string_view text);

struct Query {
  // "schema:Table" segments joined by '/', optionally interleaved with
  // filter segments that constrain the table before them.
  std::string path;
  std::vector<std::string> filters;
  std::vector<std::string> facets;
  std::optional<SnapshotId> snapshot;
  std::optional<std::string> after;  // RID cursor
  std::size_t limit = 100;
};

struct FacetCount {
  Json value;
  std::size_t count = 0;
};

struct QueryResult {
  SnapshotId snapshot = 0;
  int model_version = 0;
  std::string table;
  std::size_t count = 0;  // matches before pagination
  std::vector<Json> records;
  std::vector<std::pair<std::string, std::vector<FacetCount>>> facets;
  std::optional<std::string> next;

  [[nodiscard]] Json to_json() const;
};

// Evolvable entity-relationship catalog persisted as an operation log. Every
// write appends one log line and advances the snapshot id; reads may pin any
// earlier snapshot. Read operations do not consult the ACL; callers serving
// untrusted principals check read rights with require_read().
class Catalog {
 public:
  struct Options {
    std::string ns = "CATALOG";
    ClockFn clock = system_clock();
    std::string citation_base = "http://localhost:8080";
    bool durable = false;
    AclPolicy acl = AclPolicy::open();
  };

  Catalog(const std::filesystem::path& log_path, Options options);
  explicit Catalog(const std::filesystem::path& log_path) : Catalog(log_path, Options{}) {}

  // --- model ---
  [[nodiscard]] CatalogModel model() const;
  [[nodiscard]] CatalogModel model_at(SnapshotId snapshot) const;
  CatalogModel apply_model_change(const ModelChange& change, const Principal& actor);

  // --- records ---
  // With a request key, a repeated insert returns the row the first one
  // created instead of adding another.
  RecordVersion insert(std::string_view table, const Json& values, const Principal& actor,
                       const std::optional<std::string>& request_key = std::nullopt);
  // `table` selects an extension row sharing the RID; empty means the RID's
  // own table.
  RecordVersion update(const idspace::IdString& rid, const Json& values, const Principal& actor,
                       std::string_view table = {});
  RecordVersion remove(const idspace::IdString& rid, const Principal& actor, std::string_view table = {});

  [[nodiscard]] std::optional<RecordVersion> get(const idspace::IdString& rid,
                                                 std::optional<SnapshotId> snapshot = std::nullopt,
                                                 std::string_view table = {}) const;
  [[nodiscard]] std::vector<RecordVersion> history(const idspace::IdString& rid, std::string_view table = {}) const;
  [[nodiscard]] Resolution resolve_rid(const idspace::IdString& rid) const;
  [[nodiscard]] std::string citation_url(const idspace::IdString& rid) const;

  // Live rows of a table at a snapshot, RID ascending.
  [[nodiscard]] std::vector<RecordVersion> rows(std::string_view table,
                                                std::optional<SnapshotId> snapshot = std::nullopt) const;

  // Record as JSON under the model of the given snapshot: RID, RCT, RMT, then
  // columns in model order.
  [[nodiscard]] Json render(const RecordVersion& v, std::optional<SnapshotId> snapshot = std::nullopt) const;

  [[nodiscard]] std::string normalize_term(std::string_view vocabulary, std::string_view raw) const;
  [[nodiscard]] QueryResult query(const Query& q) const;

  [[nodiscard]] SnapshotId head() const;
  [[nodiscard]] const std::string& ns() const noexcept { return options_.ns; }
  [[nodiscard]] std::uint64_t log_bytes() const { return log_->size_bytes(); }

  void set_acl(AclPolicy acl);
  [[nodiscard]] AclPolicy acl() const;
  void require_read(const Principal& who, std::string_view table = {}) const;

  [[nodiscard]] std::string rid_string(std::uint64_t n) const;
  // nullopt when the id is not in this catalog's namespace.
  [[nodiscard]] std::optional<std::uint64_t> rid_number(const idspace::IdString& rid) const;

 private:
  struct Row {
    std::vector<RecordVersion> versions;
  };

  void replay(const Json& line);
  void commit(Json line);
  const RecordVersion* at(const std::string& table, std::uint64_t rid, SnapshotId s) const;
  const std::shared_ptr<const CatalogModel>& model_ptr(SnapshotId s) const;
  std::map<Cid, Json> coerce_values(const CatalogModel& m, const TableDef& t, const Json& values, bool insert,
                                    std::optional<std::uint64_t>* rid_out) const;
  void check_constraints(const CatalogModel& m, const TableDef& t, std::uint64_t rid,
                         const std::map<Cid, Json>& values) const;
  std::string home_table(std::uint64_t rid, std::string_view table) const;
  std::uint64_t require_rid(const idspace::IdString& rid) const;

  Options options_;
  std::unique_ptr<AppendLog> log_;
  mutable std::shared_mutex mu_;
  SnapshotId head_ = 0;
  std::uint64_t next_rid_ = 1;
  std::vector<std::pair<SnapshotId, std::shared_ptr<const CatalogModel>>> models_;
  std::map<std::string, std::map<std::uint64_t, Row>, std::less<>> rows_;
  std::map<std::uint64_t, std::string> rid_home_;
  std::map<std::string, std::pair<std::string, std::uint64_t>, std::less<>> by_request_key_;
};

}  // namespace fair::catalog
