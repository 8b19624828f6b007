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

#include "fair/catalog/exchange.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "fair/bag/fetch.hpp"
#include "fair/common/error.hpp"

namespace fair::catalog {
namespace {

std::string frictionless_type(ValueType t) {
  switch (t) {
    case ValueType::integer: return "integer";
    case ValueType::floating: return "number";
    case ValueType::timestamp: return "datetime";
    case ValueType::boolean: return "boolean";
    default: return "string";
  }
}

std::string resource_name(const TableDef& t) { return t.schema + "." + t.name; }

bag::Cell to_cell(const Json& v) {
  if (v.is_null()) return std::nullopt;
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

bool rid_reference(const ForeignKey& fk) { return fk.remote_columns.size() == 1 && fk.remote_columns[0] == "RID"; }

std::string filename_for(const Json& row) {
  std::string name;
  if (row.contains("Filename") && row["Filename"].is_string()) name = row["Filename"].get<std::string>();
  if (name.empty()) {
    std::string url = row["URL"].get<std::string>();
    url = url.substr(0, url.find_first_of("?#"));
    name = url.substr(url.find_last_of('/') + 1);
  }
  name = name.substr(name.find_last_of('/') + 1);
  if (name.empty() || name == "." || name == "..") name = "asset";
  return name;
}

struct Selection {
  // table -> RID text -> rendered row
  std::map<std::string, std::map<std::string, Json>> rows;
  std::map<std::string, RecordVersion> versions;  // keyed by table + "\n" + RID

  bool add(const RecordVersion& v, const Json& rendered) {
    auto& t = rows[v.table];
    if (!t.emplace(v.rid.str(), rendered).second) return false;
    versions.emplace(v.table + "\n" + v.rid.str(), v);
    return true;
  }
};

}  // namespace

bag::Bag export_bag(const Catalog& catalog, const bag::FetchResolver& resolver, const ExportRequest& request) {
  const SnapshotId s = request.snapshot.value_or(catalog.head());
  const CatalogModel m = catalog.model_at(s);
  Selection sel;
  std::map<std::string, std::vector<std::pair<RecordVersion, Json>>> table_rows;
  const auto rows_of = [&](const std::string& table) -> const std::vector<std::pair<RecordVersion, Json>>& {
    auto it = table_rows.find(table);
    if (it == table_rows.end()) {
      std::vector<std::pair<RecordVersion, Json>> rendered;
      for (auto& v : catalog.rows(table, s)) {
        Json j = catalog.render(v, s);
        rendered.emplace_back(std::move(v), std::move(j));
      }
      it = table_rows.emplace(table, std::move(rendered)).first;
    }
    return it->second;
  };

  std::deque<RecordVersion> frontier;
  const auto take = [&](const RecordVersion& v, std::deque<RecordVersion>& into) {
    if (!sel.add(v, catalog.render(v, s))) return;
    into.push_back(v);
    // Extension rows ride along with their parent.
    for (const auto& [q, t] : m.tables) {
      if (t.extends != v.table) continue;
      if (auto ext = catalog.get(v.rid, s, q); ext && !ext->deleted) {
        if (sel.add(*ext, catalog.render(*ext, s))) into.push_back(*ext);
      }
    }
  };

  for (const auto& root : request.roots) {
    const auto id = idspace::parse_id(root);
    const auto v = catalog.get(id, s);
    if (!v || v->deleted) fail(Errc::NotFound, root);
    take(*v, frontier);
  }

  for (int level = 0; level < request.depth && !frontier.empty(); ++level) {
    std::deque<RecordVersion> next;
    for (const auto& v : frontier) {
      const TableDef& t = m.tables.at(v.table);
      const Json& row = sel.rows.at(v.table).at(v.rid.str());
      for (const auto& fk : t.foreign_keys) {
        std::vector<Json> local;
        for (const auto& c : fk.columns) local.push_back(row.at(c));
        if (std::any_of(local.begin(), local.end(), [](const Json& j) { return j.is_null(); })) continue;
        for (const auto& [r, rendered] : rows_of(fk.table)) {
          bool same = true;
          for (std::size_t i = 0; i < fk.remote_columns.size() && same; ++i) same = rendered.at(fk.remote_columns[i]) == local[i];
          if (same) take(r, next);
        }
      }
      if (!request.inbound) continue;
      for (const auto& [q, other] : m.tables) {
        for (const auto& fk : other.foreign_keys) {
          if (fk.table != v.table) continue;
          std::vector<Json> remote;
          for (const auto& c : fk.remote_columns) remote.push_back(row.at(c));
          for (const auto& [r, rendered] : rows_of(q)) {
            bool same = true;
            for (std::size_t i = 0; i < fk.columns.size() && same; ++i) same = rendered.at(fk.columns[i]) == remote[i];
            if (same) take(r, next);
          }
        }
      }
    }
    frontier = std::move(next);
  }

  bag::Bag b;
  std::vector<bag::CsvTable> tables;
  Json resources = Json::array();
  std::set<std::string> vocabularies;
  const auto order = [&](const std::string& x, const std::string& y) {
    return *catalog.rid_number(idspace::parse_id(x)) < *catalog.rid_number(idspace::parse_id(y));
  };
  for (const auto& [qualified, rows] : sel.rows) {
    const TableDef& t = m.tables.at(qualified);
    bag::CsvTable csv;
    csv.name = resource_name(t);
    for (const auto& c : t.columns) csv.header.push_back(c.name);
    std::vector<std::string> rids;
    for (const auto& [rid, _] : rows) rids.push_back(rid);
    std::sort(rids.begin(), rids.end(), order);
    for (const auto& rid : rids) {
      const Json& row = rows.at(rid);
      bag::Row cells;
      for (const auto& c : t.columns) cells.push_back(to_cell(row.at(c.name)));
      csv.rows.push_back(std::move(cells));
      if (t.kind != TableKind::asset) continue;
      if (!row.at("URL").is_string() || !row.at("Checksum").is_string() || !row.at("Length").is_number_integer()) {
        fail(Errc::InvalidOperation, "asset " + rid + " lacks URL, Length or Checksum");
      }
      const auto url = row.at("URL").get<std::string>();
      if (!resolver.reachable(url)) fail(Errc::UnreachableAsset, rid + ": " + url);
      const auto suffix = idspace::parse_id(rid).suffix;
      const auto path = "data/assets/" + t.name + "/" + suffix + "/" + filename_for(row);
      b.manifests[Algorithm::sha256].push_back({Algorithm::sha256, row.at("Checksum").get<std::string>(), path});
      b.fetch.push_back({url, row.at("Length").get<std::uint64_t>(), path});
    }

    Json fields = Json::array();
    for (const auto& c : t.columns) {
      Json f = Json::object();
      f["name"] = c.name;
      f["type"] = frictionless_type(c.type);
      f["valueType"] = std::string(value_type_name(c.type));
      f["constraints"] = Json{{"required", !c.nullable}};
      if (c.type == ValueType::term) {
        f["vocabulary"] = c.vocabulary;
        vocabularies.insert(c.vocabulary);
      }
      fields.push_back(std::move(f));
    }
    Json fks = Json::array();
    for (const auto& fk : t.foreign_keys) {
      const TableDef& remote = m.tables.at(fk.table);
      fks.push_back(Json{{"fields", fk.columns},
                         {"reference", Json{{"resource", resource_name(remote)}, {"fields", fk.remote_columns}}}});
    }
    Json r = Json::object();
    r["name"] = csv.name;
    r["path"] = "tables/" + csv.name + ".csv";
    r["profile"] = "tabular-data-resource";
    r["table"] = qualified;
    r["kind"] = std::string(table_kind_name(t.kind));
    r["schema"] = Json{{"fields", std::move(fields)}, {"primaryKey", Json::array({"RID"})}, {"foreignKeys", std::move(fks)}};
    r["model"] = to_json(t);
    resources.push_back(std::move(r));
    tables.push_back(std::move(csv));
  }
  for (const auto& v : vocabularies) {
    const TableDef& t = m.tables.at(v);
    Json r = Json::object();
    r["name"] = resource_name(t);
    r["table"] = v;
    r["kind"] = "vocabulary";
    r["model"] = to_json(t);
    resources.push_back(std::move(r));
  }

  Json descriptor = Json::object();
  descriptor["profile"] = "tabular-data-package";
  descriptor["name"] = "catalog-export";
  descriptor["snapshot"] = s;
  descriptor["model_version"] = m.version;
  descriptor["roots"] = request.roots;
  descriptor["resources"] = std::move(resources);

  b.manifests[Algorithm::sha256];  // present even when there are no assets
  b.bag_info = request.info;
  if (!b.info("BagIt-Profile-Identifier")) b.bag_info.emplace_back("BagIt-Profile-Identifier", std::string(bag::kBdbagProfile));
  b.metadata[bag::MetadataMechanism::table_schema] = bag::MetadataBlock::table_schema(std::move(descriptor), std::move(tables));
  bag::seal(b);
  return b;
}

ExportResult export_dataset(const Catalog& catalog, idspace::Registry& registry, const bag::FetchResolver& resolver,
                            const ExportRequest& request, const idspace::BindRequest& bind) {
  ExportResult r;
  r.bag = export_bag(catalog, resolver, request);
  r.minid = idspace::bind_bag(registry, r.bag, bind);
  return r;
}

namespace {

Json column_docs(const Json& table_doc, bool skip_builtin) {
  static const std::set<std::string> kBuiltin{"RID", "RCT", "RMT", "URL", "Length", "Checksum", "Filename"};
  Json cols = Json::array();
  const bool asset = table_doc.at("kind") == "asset";
  for (const auto& c : table_doc.at("columns")) {
    const auto name = c.at("name").get<std::string>();
    if (c.at("system").get<bool>()) continue;
    if (skip_builtin && asset && kBuiltin.count(name)) continue;
    Json d = Json::object();
    d["name"] = name;
    d["type"] = c.at("type");
    d["nullable"] = c.at("nullable");
    if (c.contains("vocabulary")) d["vocabulary"] = c["vocabulary"];
    cols.push_back(std::move(d));
  }
  return cols;
}

}  // namespace

ImportResult import_dataset(Catalog& catalog, const bag::Bag& bag, const Principal& actor) {
  const auto block = bag.metadata.find(bag::MetadataMechanism::table_schema);
  if (block == bag.metadata.end()) fail(Errc::InvalidOperation, "bag carries no table-schema metadata");
  const Json& descriptor = block->second.document;
  if (!descriptor.contains("resources") || !descriptor["resources"].is_array()) {
    fail(Errc::InvalidOperation, "table-schema descriptor lists no resources");
  }
  ImportResult result;

  // Model: vocabularies, then plain tables, then extensions, then links.
  std::vector<Json> created;
  const auto missing = [&](const Json& r) { return !catalog.model().find_table(r.at("table").get<std::string>()); };
  const auto change = [&](Json doc) {
    catalog.apply_model_change(ModelChange{std::move(doc)}, actor);
    ++result.model_changes;
  };
  try {
    for (const auto& r : descriptor["resources"]) {
      if (r.at("kind") != "vocabulary" || !missing(r)) continue;
      const Json& t = r.at("model");
      Json terms = Json::array();
      for (const auto& term : t.at("terms")) terms.push_back(term);
      change(Json{{"op", "add_vocabulary"}, {"schema", t.at("schema")}, {"name", t.at("name")}, {"terms", terms}});
    }
    for (const auto& kind : {"entity", "asset", "extension"}) {
      for (const auto& r : descriptor["resources"]) {
        if (r.at("kind") != kind || !missing(r)) continue;
        const Json& t = r.at("model");
        Json doc = Json::object();
        doc["op"] = std::string(kind) == "extension" ? "add_extension_table" : "add_table";
        doc["schema"] = t.at("schema");
        doc["name"] = t.at("name");
        if (std::string(kind) == "extension") {
          doc["extends"] = t.at("extends");
        } else {
          doc["kind"] = kind;
        }
        doc["columns"] = column_docs(t, true);
        doc["keys"] = t.at("keys");
        change(std::move(doc));
        created.push_back(t);
      }
    }
    for (const auto& t : created) {
      for (const auto& fk : t.at("foreign_keys")) {
        if (!catalog.model().find_table(fk.at("table").get<std::string>())) continue;
        change(Json{{"op", "add_foreign_key"},
                    {"table", t.at("schema").get<std::string>() + ":" + t.at("name").get<std::string>()},
                    {"columns", fk.at("columns")},
                    {"references", fk.at("table")},
                    {"remote_columns", fk.at("remote_columns")}});
      }
    }
  } catch (const Json::exception& e) {
    fail(Errc::InvalidOperation, std::string("table-schema descriptor: ") + e.what());
  }

  // Rows, inserted once every RID they reference has been remapped.
  struct Pending {
    std::string table;
    Json values;  // by column name, as text
    std::string old_rid;
  };
  std::vector<Pending> pending;
  std::set<std::string> exported;
  for (const auto& r : descriptor["resources"]) {
    if (!r.contains("path")) continue;
    const auto name = r.at("name").get<std::string>();
    const bag::CsvTable* csv = block->second.table(name);
    if (csv == nullptr) fail(Errc::InvalidOperation, "missing table file for resource " + name);
    for (const auto& row : csv->rows) {
      Pending p;
      p.table = r.at("table").get<std::string>();
      p.values = Json::object();
      for (std::size_t i = 0; i < csv->header.size(); ++i) {
        const auto& col = csv->header[i];
        if (col == "RCT" || col == "RMT") continue;
        if (col == "RID") {
          p.old_rid = row[i].value_or("");
          continue;
        }
        p.values[col] = row[i] ? Json(*row[i]) : Json(nullptr);
      }
      exported.insert(p.old_rid);
      pending.push_back(std::move(p));
    }
  }

  while (!pending.empty()) {
    const CatalogModel m = catalog.model();
    std::vector<Pending> deferred;
    for (auto& p : pending) {
      const TableDef& t = *m.find_table(p.table);
      Json values = p.values;
      bool ready = true;
      if (t.kind == TableKind::extension) {
        const auto it = result.rid_map.find(p.old_rid);
        if (it == result.rid_map.end()) {
          ready = false;
        } else {
          values["RID"] = it->second;
        }
      }
      for (const auto& fk : t.foreign_keys) {
        if (!rid_reference(fk) || !values.contains(fk.columns[0])) continue;
        Json& cell = values[fk.columns[0]];
        if (cell.is_null()) continue;
        const auto old = cell.get<std::string>();
        if (const auto it = result.rid_map.find(old); it != result.rid_map.end()) {
          cell = it->second;
        } else if (exported.count(old)) {
          ready = false;
        } else {
          cell = nullptr;  // outside the exported closure
        }
      }
      if (!ready) {
        deferred.push_back(std::move(p));
        continue;
      }
      const auto v = catalog.insert(p.table, values, actor);
      if (t.kind != TableKind::extension) result.rid_map[p.old_rid] = v.rid.str();
    }
    if (deferred.size() == pending.size()) fail(Errc::DanglingReference, "cyclic references among imported rows");
    pending = std::move(deferred);
  }
  return result;
}

}  // namespace fair::catalog
