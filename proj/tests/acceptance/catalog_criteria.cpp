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

#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "criteria.hpp"
#include "fair/catalog/catalog.hpp"
#include "fair/common/clock.hpp"
#include "fair/common/error.hpp"
#include "fixtures.hpp"
#include "testing.hpp"

namespace fair::acceptance {
namespace {

using namespace fair::catalog;

const Principal kCurator{"curator", {"admin"}};

// --- oracle ----------------------------------------------------------------
//
// A deliberately naive model of the catalog: every snapshot is a full copy of
// all rows. Columns are tracked by a stable key (their first name) so renames
// only change how a snapshot labels them.

struct OColumn {
  std::string key;
  std::string name;
  std::string type;
};

struct OTable {
  std::vector<OColumn> columns;

  [[nodiscard]] const OColumn* by_name(const std::string& name) const {
    for (const auto& c : columns) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
  // Current name or any earlier one; earlier names equal the stable key
  // because each column is renamed at most once here.
  [[nodiscard]] const OColumn* resolve(const std::string& name) const {
    if (const auto* c = by_name(name)) return c;
    for (const auto& c : columns) {
      if (c.key == name) return &c;
    }
    return nullptr;
  }
};

using ORow = std::map<std::string, Json>;  // stable key -> non-null value

struct OState {
  std::map<std::string, OTable> tables;
  std::map<std::string, std::map<std::uint64_t, ORow>> rows;  // rid number ascending
};

struct OFilter {
  std::string column;  // as written in the query
  std::string op;
  Json operand;

  [[nodiscard]] std::string text() const {
    return column + op + (operand.is_string() ? operand.get<std::string>() : operand.dump());
  }
};

int cmp(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>();
    const double y = b.get<double>();
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  const auto x = a.get<std::string>();
  const auto y = b.get<std::string>();
  return x < y ? -1 : (x > y ? 1 : 0);
}

// Null cells match only "!=".
bool holds(const std::optional<Json>& cell, const OFilter& f) {
  if (!cell) return f.op == "!=";
  const int c = cmp(*cell, f.operand);
  if (f.op == "=") return c == 0;
  if (f.op == "!=") return c != 0;
  if (f.op == "<") return c < 0;
  if (f.op == "<=") return c <= 0;
  if (f.op == ">") return c > 0;
  return c >= 0;
}

// Rows of `table` rendered the way that snapshot names its columns, minus
// the timestamp columns.
Json expected_rows(const Catalog& c, const OState& s, const std::string& table, const std::vector<OFilter>& filters) {
  const OTable& t = s.tables.at(table);
  Json out = Json::array();
  for (const auto& [rid, row] : s.rows.at(table)) {
    bool keep = true;
    for (const auto& f : filters) {
      const OColumn* col = t.resolve(f.column);
      const auto it = row.find(col->key);
      keep = keep && holds(it == row.end() ? std::nullopt : std::optional<Json>(it->second), f);
    }
    if (!keep) continue;
    Json r = Json::object();
    r["RID"] = c.rid_string(rid);
    for (const auto& col : t.columns) {
      const auto it = row.find(col.key);
      r[col.name] = it == row.end() ? Json() : it->second;
    }
    out.push_back(std::move(r));
  }
  return out;
}

Json actual_rows(const Catalog& c, const std::string& table, SnapshotId s, const std::vector<OFilter>& filters) {
  Query q{table};
  for (const auto& f : filters) q.filters.push_back(f.text());
  q.snapshot = s;
  q.limit = 100'000;
  Json out = Json::array();
  for (auto r : c.query(q).records) {
    r.erase("RCT");
    r.erase("RMT");
    out.push_back(std::move(r));
  }
  return out;
}

// --- workload --------------------------------------------------------------

struct Workload {
  std::mt19937_64 rng{5150};
  Catalog& c;
  OState state;
  std::map<SnapshotId, OState> sampled;
  std::vector<std::pair<SnapshotId, std::pair<std::string, std::vector<OFilter>>>> pre_rename_queries;
  std::size_t model_changes = 0;
  std::size_t renames = 0;

  explicit Workload(Catalog& cat) : c(cat) {}

  void model(Json doc) {
    c.apply_model_change(ModelChange{doc}, kCurator);
    const auto str = [&](const Json& j) { return j.get<std::string>(); };
    const std::string op = str(doc["op"]);
    if (op == "add_table") {
      OTable t;
      for (const auto& col : doc["columns"]) t.columns.push_back({str(col["name"]), str(col["name"]), str(col["type"])});
      const std::string q = str(doc["schema"]) + ":" + str(doc["name"]);
      state.tables[q] = t;
      state.rows[q];
    } else if (op == "add_column") {
      const auto& col = doc["column"];
      state.tables.at(str(doc["table"])).columns.push_back({str(col["name"]), str(col["name"]), str(col["type"])});
    } else if (op == "rename_column") {
      for (auto& col : state.tables.at(str(doc["table"])).columns) {
        if (col.name == str(doc["from"])) col.name = str(doc["to"]);
      }
    }
  }

  Json random_value(const std::string& type) {
    if (type == "integer") return static_cast<int>(rng() % 100);
    if (type == "float") return static_cast<double>(rng() % 200) * 0.5;
    return "v" + std::to_string(rng() % 20);
  }

  OFilter random_filter(const std::string& table) {
    static const char* kOps[] = {"=", "!=", "<", "<=", ">", ">="};
    const auto& cols = state.tables.at(table).columns;
    const auto& col = cols[rng() % cols.size()];
    return {col.name, col.type == "text" ? "=" : kOps[rng() % 6], random_value(col.type)};
  }

  std::string random_table() {
    auto it = state.tables.begin();
    std::advance(it, static_cast<long>(rng() % state.tables.size()));
    return it->first;
  }

  void data_op() {
    const std::string table = random_table();
    auto& rows = state.rows.at(table);
    const auto& cols = state.tables.at(table).columns;
    const auto roll = rng() % 100;
    if (rows.empty() || roll < 45) {
      Json values = Json::object();
      ORow row;
      for (const auto& col : cols) {
        if (rng() % 5 == 0) continue;
        const Json v = random_value(col.type);
        values[col.name] = v;
        row[col.key] = v;
      }
      const auto v = c.insert(table, values, kCurator);
      rows[*c.rid_number(v.rid)] = row;
      return;
    }
    auto it = rows.begin();
    std::advance(it, static_cast<long>(rng() % rows.size()));
    const auto rid = idspace::parse_id(c.rid_string(it->first));
    if (roll < 80) {
      Json values = Json::object();
      for (int k = 0; k < 2; ++k) {
        const auto& col = cols[rng() % cols.size()];
        const Json v = rng() % 10 == 0 ? Json() : random_value(col.type);
        values[col.name] = v;
        if (v.is_null()) {
          it->second.erase(col.key);
        } else {
          it->second[col.key] = v;
        }
      }
      c.update(rid, values, kCurator);
    } else {
      c.remove(rid, kCurator);
      rows.erase(it);
    }
  }

  // Queries written against the current names, to be replayed after the
  // next rename.
  void remember_queries() {
    sampled[c.head()] = state;
    for (const auto& [table, t] : state.tables) {
      pre_rename_queries.push_back({c.head(), {table, {random_filter(table)}}});
      pre_rename_queries.push_back({c.head(), {table, {random_filter(table), random_filter(table)}}});
    }
  }

  void run(int ops) {
    const std::map<int, Json> schedule{
        {50, {{"op", "add_column"}, {"table", "isa:Sample"}, {"column", {{"name", "Site"}, {"type", "text"}}}}},
        {110, {{"op", "rename_column"}, {"table", "isa:Sample"}, {"from", "Count"}, {"to", "Cell_Count"}}},
        {170, {{"op", "add_table"}, {"schema", "isa"}, {"name", "Plate"},
               {"columns", Json::array({Json{{"name", "Code"}, {"type", "text"}}})}}},
        {230, {{"op", "add_column"}, {"table", "isa:Batch"}, {"column", {{"name", "Owner"}, {"type", "text"}}}}},
        {290, {{"op", "rename_column"}, {"table", "isa:Batch"}, {"from", "Label"}, {"to", "Batch_Label"}}},
        {350, {{"op", "add_column"}, {"table", "isa:Plate"}, {"column", {{"name", "Wells"}, {"type", "integer"}}}}},
        {410, {{"op", "add_column"}, {"table", "isa:Sample"}, {"column", {{"name", "Weight"}, {"type", "float"}}}}},
    };
    for (int i = 0; i < ops; ++i) {
      const auto planned = schedule.find(i);
      if (planned != schedule.end()) {
        if (planned->second["op"] == "rename_column") {
          remember_queries();
          ++renames;
        } else {
          ++model_changes;
        }
        model(planned->second);
      } else {
        data_op();
      }
      if (i % 4 == 0 || planned != schedule.end() || (i > 0 && schedule.count(i - 1))) sampled[c.head()] = state;
    }
    sampled[c.head()] = state;
  }
};

void compare(Checker& check, const Catalog& c, const Workload& w, const std::string& label) {
  std::mt19937_64 rng(99);
  std::size_t compared = 0;
  for (const auto& [s, st] : w.sampled) {
    for (const auto& [table, t] : st.tables) {
      std::vector<std::vector<OFilter>> queries{{}};
      for (int k = 0; k < 2; ++k) {
        const auto& col = t.columns[rng() % t.columns.size()];
        queries.push_back({{col.name, col.type == "text" ? "=" : ">=",
                            col.type == "text" ? Json("v" + std::to_string(rng() % 20)) : Json(static_cast<int>(rng() % 100))}});
      }
      for (const auto& q : queries) {
        const Json want = expected_rows(c, st, table, q);
        const Json got = actual_rows(c, table, s, q);
        ++compared;
        if (want != got) {
          std::string f;
          for (const auto& x : q) f += " " + x.text();
          check.fail(label + ": snapshot " + std::to_string(s) + " " + table + f + ": " + std::to_string(got.size()) +
                     " rows, oracle " + std::to_string(want.size()));
        }
      }
    }
  }
  check.expect(compared > 300, label + ": only " + std::to_string(compared) + " queries compared");

  // Queries written before a rename, asked of the snapshot they were written
  // against and of the head, where the old names are aliases.
  const SnapshotId head = c.head();
  const OState& now = w.sampled.at(head);
  for (const auto& [s, q] : w.pre_rename_queries) {
    const auto& [table, filters] = q;
    std::string f;
    for (const auto& x : filters) f += " " + x.text();
    try {
      const auto& then = w.sampled.at(s);
      check.expect(actual_rows(c, table, s, filters) == expected_rows(c, then, table, filters),
                   label + ": pre-rename query" + f + " at its snapshot " + std::to_string(s));
      check.expect(actual_rows(c, table, head, filters) == expected_rows(c, now, table, filters),
                   label + ": pre-rename query" + f + " at head");
    } catch (const Error& e) {
      check.fail(label + ": pre-rename query" + f + " failed: " + std::string(e.code_name()) + " " + e.detail());
    }
  }
}

void snapshot_oracle(Checker& check) {
  fair::testing::TempDir tmp;
  Catalog::Options o;
  o.ns = "SYNAPSE";
  o.clock = SteppingClock(Timestamp{std::chrono::seconds{1'790'000'000}});
  const auto log = tmp / "catalog.log";
  std::optional<Workload> w;
  {
    Catalog c(log, o);
    w.emplace(c);
    w->model({{"op", "add_table"}, {"schema", "isa"}, {"name", "Sample"},
              {"columns", Json::array({Json{{"name", "Name"}, {"type", "text"}},
                                       Json{{"name", "Count"}, {"type", "integer"}},
                                       Json{{"name", "Note"}, {"type", "text"}}})}});
    w->model({{"op", "add_table"}, {"schema", "isa"}, {"name", "Batch"},
              {"columns", Json::array({Json{{"name", "Label"}, {"type", "text"}},
                                       Json{{"name", "Size"}, {"type", "integer"}}})}});
    const SnapshotId before = c.head();
    w->run(500);
    check.expect_eq(c.head() - before, SnapshotId{500}, "operations in the workload");
    check.expect_eq(w->model_changes, std::size_t{5}, "model changes");
    check.expect_eq(w->renames, std::size_t{2}, "renames");
    compare(check, c, *w, "live");
  }
  Catalog replayed(log, o);
  compare(check, replayed, *w, "replayed");
}

void vocabulary_closure(Checker& check) {
  fair::testing::TempDir tmp;
  Catalog c(tmp / "catalog.log");
  fair::testing::build_lab_model(c, kCurator);
  const auto& spellings = fair::testing::completed_spellings();
  check.expect_eq(spellings.size(), std::size_t{12}, "raw spellings in the fixture");
  for (std::size_t i = 0; i < spellings.size(); ++i) {
    c.insert("isa:Subject", {{"Name", "fish " + std::to_string(i)}, {"Status", spellings[i]}}, kCurator);
  }
  std::set<std::string> stored;
  for (const auto& row : c.rows("isa:Subject")) stored.insert(c.render(row)["Status"].get<std::string>());
  check.expect(stored == std::set<std::string>{"completed"},
               "distinct stored values: " + std::to_string(stored.size()));

  Query q{"isa:Subject"};
  q.facets = {"Status"};
  const auto r = c.query(q);
  check.expect(r.facets.size() == 1 && r.facets[0].second.size() == 1 && r.facets[0].second[0].count == 12,
               "facet over Status is not a single value counting 12 rows");
  check.expect_eq(c.query({"isa:Subject", {"Status=completed"}}).count, std::size_t{12}, "rows matching the canonical term");
}

}  // namespace

std::vector<Criterion> catalog_criteria() {
  return {
      {"catalog-snapshot-oracle", {}, snapshot_oracle},
      {"vocabulary-closure", {}, vocabulary_closure},
  };
}

}  // namespace fair::acceptance
