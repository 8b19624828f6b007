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

#include "fair/catalog/model.hpp"

#include <algorithm>
#include <set>

#include "fair/common/error.hpp"

namespace fair::catalog {
namespace {

const std::set<std::string, std::less<>> kSystemNames{"RID", "RCT", "RMT"};
const std::set<std::string, std::less<>> kAssetNames{"URL", "Length", "Checksum", "Filename"};

std::string str_field(const Json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_string()) {
    fail(Errc::BadRequest, std::string("model change needs string '") + key + "'");
  }
  return doc[key].get<std::string>();
}

std::vector<std::string> str_list(const Json& doc, const char* key) {
  if (!doc.contains(key)) return {};
  const Json& v = doc[key];
  if (!v.is_array()) fail(Errc::BadRequest, std::string("'") + key + "' must be a list of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) fail(Errc::BadRequest, std::string("'") + key + "' must be a list of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

void check_name(std::string_view what, const std::string& name) {
  if (!is_identifier_name(name)) {
    fail(Errc::BadRequest, std::string(what) + " name '" + name + "' must match [A-Za-z_][A-Za-z0-9_]*");
  }
}

std::vector<ColumnDef> system_columns() {
  return {{kRidCid, "RID", ValueType::identifier, false, "", true},
          {kRctCid, "RCT", ValueType::timestamp, false, "", true},
          {kRmtCid, "RMT", ValueType::timestamp, false, "", true}};
}

TableDef& mutable_table(CatalogModel& m, const std::string& ref) {
  const TableDef* t = m.find_table(ref);
  if (t == nullptr) fail(Errc::UnknownTable, ref);
  return m.tables.at(t->qualified());
}

bool name_taken(const TableDef& t, std::string_view name) {
  return t.column(name) != nullptr || t.aliases.count(std::string(name)) != 0;
}

ColumnDef parse_column(CatalogModel& m, const Json& doc) {
  if (!doc.is_object()) fail(Errc::BadRequest, "column definition must be an object");
  ColumnDef c;
  c.name = str_field(doc, "name");
  check_name("column", c.name);
  if (kSystemNames.count(c.name)) fail(Errc::DuplicateName, c.name + " is a system column");
  const auto type = value_type_from_name(doc.value("type", std::string("text")));
  if (!type) fail(Errc::BadRequest, "column " + c.name + ": unknown type " + doc.value("type", std::string()));
  c.type = *type;
  c.nullable = doc.value("nullable", true);
  if (c.type == ValueType::term) {
    const auto vocab = str_field(doc, "vocabulary");
    const TableDef* v = m.find_table(vocab);
    if (v == nullptr || v->kind != TableKind::vocabulary) {
      fail(Errc::DanglingReference, "column " + c.name + " references missing vocabulary " + vocab);
    }
    c.vocabulary = v->qualified();
  } else if (doc.contains("vocabulary") && !doc["vocabulary"].is_null()) {
    fail(Errc::BadRequest, "column " + c.name + ": only term columns take a vocabulary");
  }
  c.cid = m.next_cid++;
  return c;
}

void add_columns(CatalogModel& m, TableDef& t, const Json& doc) {
  if (!doc.contains("columns")) return;
  if (!doc["columns"].is_array()) fail(Errc::BadRequest, "'columns' must be a list");
  for (const auto& cd : doc["columns"]) {
    ColumnDef c = parse_column(m, cd);
    if (name_taken(t, c.name)) fail(Errc::DuplicateName, t.qualified() + "." + c.name);
    t.columns.push_back(std::move(c));
  }
}

void check_key(const TableDef& t, const std::vector<std::string>& cols) {
  if (cols.empty()) fail(Errc::BadRequest, "empty key on " + t.qualified());
  for (const auto& c : cols) {
    if (t.column(c) == nullptr) fail(Errc::DanglingReference, "key column " + t.qualified() + "." + c);
  }
}

ForeignKey parse_fk(const CatalogModel& m, const TableDef& local, const Json& doc) {
  ForeignKey fk;
  fk.columns = str_list(doc, "columns");
  const auto target = doc.contains("references") ? str_field(doc, "references") : str_field(doc, "table");
  fk.remote_columns = str_list(doc, "remote_columns");
  if (fk.remote_columns.empty()) fk.remote_columns = {"RID"};
  if (fk.columns.empty() || fk.columns.size() != fk.remote_columns.size()) {
    fail(Errc::BadRequest, "foreign key on " + local.qualified() + " needs matching column lists");
  }
  for (const auto& c : fk.columns) {
    if (local.column(c) == nullptr) fail(Errc::DanglingReference, "foreign key column " + local.qualified() + "." + c);
  }
  const TableDef* remote = target == local.qualified() || target == local.name ? &local : m.find_table(target);
  if (remote == nullptr) fail(Errc::DanglingReference, "foreign key target table " + target);
  for (const auto& c : fk.remote_columns) {
    if (remote->column(c) == nullptr) fail(Errc::DanglingReference, "foreign key target column " + target + "." + c);
  }
  fk.table = remote->qualified();
  return fk;
}

void check_term_free(const TableDef& v, std::string_view spelling, const VocabularyTerm* owner) {
  const auto folded = fold_term(spelling);
  if (folded.empty()) fail(Errc::BadRequest, "empty term");
  for (const auto& t : v.terms) {
    if (&t == owner) continue;
    if (fold_term(t.canonical) == folded) fail(Errc::DuplicateName, "term '" + std::string(spelling) + "' in " + v.qualified());
    for (const auto& s : t.synonyms) {
      if (fold_term(s) == folded) fail(Errc::DuplicateName, "synonym '" + std::string(spelling) + "' in " + v.qualified());
    }
  }
}

void add_term(TableDef& v, const Json& doc) {
  VocabularyTerm term;
  term.canonical = doc.contains("canonical") ? str_field(doc, "canonical") : str_field(doc, "term");
  term.description = doc.value("description", std::string());
  check_term_free(v, term.canonical, nullptr);
  v.terms.push_back(term);
  VocabularyTerm& placed = v.terms.back();
  for (const auto& s : str_list(doc, "synonyms")) {
    const auto folded = fold_term(s);
    const bool repeat = folded == fold_term(placed.canonical) ||
                        std::any_of(placed.synonyms.begin(), placed.synonyms.end(),
                                    [&](const auto& x) { return fold_term(x) == folded; });
    if (repeat) continue;
    check_term_free(v, s, &placed);
    placed.synonyms.push_back(s);
  }
}

TableDef& require_vocabulary(CatalogModel& m, const std::string& ref) {
  TableDef& v = mutable_table(m, ref);
  if (v.kind != TableKind::vocabulary) fail(Errc::DanglingReference, ref + " is not a vocabulary");
  return v;
}

void rename_everywhere(CatalogModel& m, const std::string& table, const std::string& from, const std::string& to) {
  for (auto& [qname, t] : m.tables) {
    for (auto& fk : t.foreign_keys) {
      if (qname == table) std::replace(fk.columns.begin(), fk.columns.end(), from, to);
      if (fk.table == table) std::replace(fk.remote_columns.begin(), fk.remote_columns.end(), from, to);
    }
    if (qname == table) {
      for (auto& key : t.keys) std::replace(key.begin(), key.end(), from, to);
    }
  }
}

}  // namespace

CatalogModel apply_change_unchecked(const CatalogModel& model, const ModelChange& change);

std::string_view value_type_name(ValueType t) noexcept {
  switch (t) {
    case ValueType::text: return "text";
    case ValueType::integer: return "integer";
    case ValueType::floating: return "float";
    case ValueType::timestamp: return "timestamp";
    case ValueType::boolean: return "boolean";
    case ValueType::identifier: return "identifier";
    case ValueType::term: return "term";
  }
  return "text";
}

std::optional<ValueType> value_type_from_name(std::string_view name) noexcept {
  for (auto t : {ValueType::text, ValueType::integer, ValueType::floating, ValueType::timestamp, ValueType::boolean,
                 ValueType::identifier, ValueType::term}) {
    if (value_type_name(t) == name) return t;
  }
  return std::nullopt;
}

std::string_view table_kind_name(TableKind k) noexcept {
  switch (k) {
    case TableKind::entity: return "entity";
    case TableKind::asset: return "asset";
    case TableKind::vocabulary: return "vocabulary";
    case TableKind::extension: return "extension";
  }
  return "entity";
}

std::optional<TableKind> table_kind_from_name(std::string_view name) noexcept {
  for (auto k : {TableKind::entity, TableKind::asset, TableKind::vocabulary, TableKind::extension}) {
    if (table_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

bool is_identifier_name(std::string_view name) noexcept {
  if (name.empty()) return false;
  const auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  if (!alpha(name.front())) return false;
  return std::all_of(name.begin(), name.end(), [&](char c) { return alpha(c) || (c >= '0' && c <= '9'); });
}

const ColumnDef* TableDef::column(std::string_view n) const {
  for (const auto& c : columns) {
    if (c.name == n) return &c;
  }
  return nullptr;
}

const ColumnDef* TableDef::column_by_cid(Cid cid) const {
  for (const auto& c : columns) {
    if (c.cid == cid) return &c;
  }
  return nullptr;
}

const ColumnDef* TableDef::resolve_column(std::string_view n) const {
  if (const auto* c = column(n)) return c;
  const auto it = aliases.find(std::string(n));
  return it == aliases.end() ? nullptr : column_by_cid(it->second);
}

const VocabularyTerm* TableDef::find_term(std::string_view canonical) const {
  for (const auto& t : terms) {
    if (t.canonical == canonical) return &t;
  }
  return nullptr;
}

const TableDef* CatalogModel::find_table(std::string_view ref) const {
  if (ref.find(':') != std::string_view::npos) {
    const auto it = tables.find(std::string(ref));
    return it == tables.end() ? nullptr : &it->second;
  }
  const TableDef* found = nullptr;
  for (const auto& [q, t] : tables) {
    if (t.name == ref) {
      if (found != nullptr) return nullptr;  // ambiguous across schemas
      found = &t;
    }
  }
  return found;
}

std::vector<std::string> CatalogModel::schemas() const {
  std::set<std::string> s;
  for (const auto& [q, t] : tables) s.insert(t.schema);
  return {s.begin(), s.end()};
}

std::string fold_term(std::string_view raw) {
  const auto b = raw.find_first_not_of(" \t\r\n\v\f");
  if (b == std::string_view::npos) return {};
  const auto e = raw.find_last_not_of(" \t\r\n\v\f");
  std::string out(raw.substr(b, e - b + 1));
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string normalize_term(const TableDef& vocabulary, std::string_view raw) {
  const auto folded = fold_term(raw);
  if (!folded.empty()) {
    for (const auto& t : vocabulary.terms) {
      if (fold_term(t.canonical) == folded) return t.canonical;
      for (const auto& s : t.synonyms) {
        if (fold_term(s) == folded) return t.canonical;
      }
    }
  }
  fail(Errc::UnknownTerm, vocabulary.qualified() + ": '" + std::string(raw) + "'");
}

CatalogModel apply_change(const CatalogModel& model, const ModelChange& change) {
  try {
    return apply_change_unchecked(model, change);
  } catch (const Json::exception& e) {
    fail(Errc::BadRequest, std::string("model change: ") + e.what());
  }
}

CatalogModel apply_change_unchecked(const CatalogModel& model, const ModelChange& change) {
  const Json& doc = change.doc;
  if (!doc.is_object()) fail(Errc::BadRequest, "model change must be an object");
  const auto op = str_field(doc, "op");
  CatalogModel m = model;

  if (op == "add_table" || op == "add_vocabulary" || op == "add_extension_table") {
    TableDef t;
    t.schema = str_field(doc, "schema");
    t.name = str_field(doc, "name");
    check_name("schema", t.schema);
    check_name("table", t.name);
    if (m.tables.count(t.qualified())) fail(Errc::DuplicateName, t.qualified());
    t.columns = system_columns();
    if (op == "add_vocabulary") {
      t.kind = TableKind::vocabulary;
      t.columns.push_back({m.next_cid++, "Name", ValueType::text, false, "", false});
      t.columns.push_back({m.next_cid++, "Description", ValueType::text, true, "", false});
      if (doc.contains("terms")) {
        if (!doc["terms"].is_array()) fail(Errc::BadRequest, "'terms' must be a list");
        for (const auto& term : doc["terms"]) add_term(t, term);
      }
    } else if (op == "add_extension_table") {
      t.kind = TableKind::extension;
      const auto parent_ref = str_field(doc, "extends");
      const TableDef* parent = m.find_table(parent_ref);
      if (parent == nullptr || parent->kind == TableKind::vocabulary || parent->kind == TableKind::extension) {
        fail(Errc::DanglingReference, "extension parent " + parent_ref);
      }
      t.extends = parent->qualified();
      add_columns(m, t, doc);
    } else {
      const auto kind = table_kind_from_name(doc.value("kind", std::string("entity")));
      if (!kind || (*kind != TableKind::entity && *kind != TableKind::asset)) {
        fail(Errc::BadRequest, "add_table kind must be entity or asset");
      }
      t.kind = *kind;
      if (t.kind == TableKind::asset) {
        t.columns.push_back({m.next_cid++, "URL", ValueType::text, false, "", false});
        t.columns.push_back({m.next_cid++, "Length", ValueType::integer, true, "", false});
        t.columns.push_back({m.next_cid++, "Checksum", ValueType::text, true, "", false});
        t.columns.push_back({m.next_cid++, "Filename", ValueType::text, true, "", false});
      }
      add_columns(m, t, doc);
    }
    if (doc.contains("keys")) {
      for (const auto& k : doc["keys"]) {
        std::vector<std::string> cols;
        if (!k.is_array()) fail(Errc::BadRequest, "'keys' must be a list of column lists");
        for (const auto& c : k) cols.push_back(c.get<std::string>());
        check_key(t, cols);
        t.keys.push_back(cols);
      }
    }
    if (doc.contains("foreign_keys")) {
      for (const auto& f : doc["foreign_keys"]) t.foreign_keys.push_back(parse_fk(m, t, f));
    }
    m.tables.emplace(t.qualified(), std::move(t));
  } else if (op == "add_column") {
    TableDef& t = mutable_table(m, str_field(doc, "table"));
    if (!doc.contains("column")) fail(Errc::BadRequest, "add_column needs 'column'");
    ColumnDef c = parse_column(m, doc["column"]);
    if (name_taken(t, c.name)) fail(Errc::DuplicateName, t.qualified() + "." + c.name);
    t.columns.push_back(std::move(c));
  } else if (op == "add_foreign_key") {
    TableDef& t = mutable_table(m, str_field(doc, "table"));
    ForeignKey fk = parse_fk(m, t, doc);
    if (std::find(t.foreign_keys.begin(), t.foreign_keys.end(), fk) != t.foreign_keys.end()) {
      fail(Errc::DuplicateName, "foreign key already declared on " + t.qualified());
    }
    t.foreign_keys.push_back(std::move(fk));
  } else if (op == "add_term") {
    add_term(require_vocabulary(m, str_field(doc, "vocabulary")), doc);
  } else if (op == "add_synonym") {
    TableDef& v = require_vocabulary(m, str_field(doc, "vocabulary"));
    const auto term = str_field(doc, "term");
    const auto synonym = str_field(doc, "synonym");
    auto it = std::find_if(v.terms.begin(), v.terms.end(), [&](const auto& t) { return t.canonical == term; });
    if (it == v.terms.end()) fail(Errc::UnknownTerm, v.qualified() + ": '" + term + "'");
    check_term_free(v, synonym, nullptr);
    it->synonyms.push_back(synonym);
  } else if (op == "rename_column") {
    TableDef& t = mutable_table(m, str_field(doc, "table"));
    const auto from = str_field(doc, "from");
    const auto to = str_field(doc, "to");
    check_name("column", to);
    ColumnDef* c = nullptr;
    for (auto& col : t.columns) {
      if (col.name == from) c = &col;
    }
    if (c == nullptr) fail(Errc::UnknownColumn, t.qualified() + "." + from);
    if (c->system || (t.kind == TableKind::asset && kAssetNames.count(from)) ||
        (t.kind == TableKind::vocabulary && (from == "Name" || from == "Description"))) {
      fail(Errc::InvalidOperation, "cannot rename built-in column " + from);
    }
    if (name_taken(t, to) || kSystemNames.count(to)) fail(Errc::DuplicateName, t.qualified() + "." + to);
    t.aliases[from] = c->cid;
    c->name = to;
    rename_everywhere(m, t.qualified(), from, to);
  } else {
    fail(Errc::BadRequest, "unknown model change op '" + op + "'");
  }
  m.version = model.version + 1;
  return m;
}

Json to_json(const TableDef& t) {
  Json j = Json::object();
  j["schema"] = t.schema;
  j["name"] = t.name;
  j["kind"] = std::string(table_kind_name(t.kind));
  Json cols = Json::array();
  for (const auto& c : t.columns) {
    Json cj = Json::object();
    cj["name"] = c.name;
    cj["type"] = std::string(value_type_name(c.type));
    cj["nullable"] = c.nullable;
    cj["system"] = c.system;
    if (c.type == ValueType::term) cj["vocabulary"] = c.vocabulary;
    cols.push_back(std::move(cj));
  }
  j["columns"] = std::move(cols);
  j["keys"] = t.keys;
  Json fks = Json::array();
  for (const auto& fk : t.foreign_keys) {
    fks.push_back(Json{{"columns", fk.columns}, {"table", fk.table}, {"remote_columns", fk.remote_columns}});
  }
  j["foreign_keys"] = std::move(fks);
  j["extends"] = t.extends.empty() ? Json(nullptr) : Json(t.extends);
  Json aliases = Json::object();
  for (const auto& [old, cid] : t.aliases) {
    const auto* c = t.column_by_cid(cid);
    aliases[old] = c ? c->name : std::string();
  }
  j["aliases"] = std::move(aliases);
  if (t.kind == TableKind::vocabulary) {
    Json terms = Json::array();
    for (const auto& term : t.terms) {
      terms.push_back(Json{{"canonical", term.canonical}, {"synonyms", term.synonyms}, {"description", term.description}});
    }
    j["terms"] = std::move(terms);
  }
  return j;
}

Json to_json(const CatalogModel& model) {
  Json j = Json::object();
  j["version"] = model.version;
  Json schemas = Json::object();
  for (const auto& [q, t] : model.tables) {
    if (!schemas.contains(t.schema)) schemas[t.schema] = Json{{"tables", Json::object()}};
    schemas[t.schema]["tables"][t.name] = to_json(t);
  }
  j["schemas"] = std::move(schemas);
  return j;
}

}  // namespace fair::catalog
