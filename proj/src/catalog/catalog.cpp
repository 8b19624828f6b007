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

#include "fair/catalog/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <mutex>
#include <set>

#include "fair/common/digest.hpp"
#include "fair/common/error.hpp"

namespace fair::catalog {
namespace {

constexpr std::string_view kCrockford = "0123456789ABCDEFGHJKMNPQRSTVWXYZ";

std::string col_ref(const TableDef& t, const ColumnDef& c) { return t.qualified() + "." + c.name; }

[[noreturn]] void type_violation(const TableDef& t, const ColumnDef& c, const std::string& why) {
  fail(Errc::TypeViolation, col_ref(t, c) + ": " + why);
}

Json coerce(const CatalogModel& m, const TableDef& t, const ColumnDef& c, const Json& v) {
  if (v.is_null()) return v;
  switch (c.type) {
    case ValueType::text:
      if (!v.is_string()) type_violation(t, c, "expected text");
      if (t.kind == TableKind::asset && c.name == kAssetChecksum &&
          !is_well_formed_digest(Algorithm::sha256, v.get<std::string>())) {
        type_violation(t, c, "expected a lowercase sha256 hex digest");
      }
      return v;
    case ValueType::integer: {
      if (v.is_number_integer()) return v;
      if (v.is_string()) {
        const auto s = v.get<std::string>();
        std::int64_t n = 0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
        if (ec == std::errc() && p == s.data() + s.size() && !s.empty()) return Json(n);
      }
      type_violation(t, c, "expected an integer");
    }
    case ValueType::floating: {
      double d = 0;
      if (v.is_number()) {
        d = v.get<double>();
      } else if (v.is_string()) {
        const auto s = v.get<std::string>();
        std::size_t used = 0;
        try {
          d = std::stod(s, &used);
        } catch (const std::exception&) {
          type_violation(t, c, "expected a number");
        }
        if (used != s.size()) type_violation(t, c, "expected a number");
      } else {
        type_violation(t, c, "expected a number");
      }
      if (!std::isfinite(d)) type_violation(t, c, "expected a finite number");
      return Json(d);
    }
    case ValueType::boolean:
      if (v.is_boolean()) return v;
      if (v == "true") return Json(true);
      if (v == "false") return Json(false);
      type_violation(t, c, "expected true or false");
    case ValueType::timestamp: {
      if (!v.is_string()) type_violation(t, c, "expected an RFC 3339 timestamp");
      const auto ts = parse_rfc3339(v.get<std::string>());
      if (!ts) type_violation(t, c, "expected an RFC 3339 timestamp");
      return Json(format_rfc3339(*ts));
    }
    case ValueType::identifier:
      if (!v.is_string()) type_violation(t, c, "expected an identifier");
      try {
        return Json(idspace::parse_id(v.get<std::string>()).str());
      } catch (const Error& e) {
        type_violation(t, c, e.detail());
      }
    case ValueType::term: {
      if (!v.is_string()) type_violation(t, c, "expected a term");
      const TableDef* vocab = m.find_table(c.vocabulary);
      if (vocab == nullptr) fail(Errc::DanglingReference, c.vocabulary);
      try {
        return Json(normalize_term(*vocab, v.get<std::string>()));
      } catch (const Error& e) {
        fail(Errc::UnknownTerm, col_ref(t, c) + ": " + e.detail());
      }
    }
  }
  type_violation(t, c, "unsupported type");
}

// Ordering used by < <= > >=: numbers numerically, everything else by its
// string form.
int compare(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>();
    const double y = b.get<double>();
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  const auto x = a.is_string() ? a.get<std::string>() : a.dump();
  const auto y = b.is_string() ? b.get<std::string>() : b.dump();
  return x.compare(y) < 0 ? -1 : (x == y ? 0 : 1);
}

std::string lower(std::string s) {
  for (auto& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

struct BoundFilter {
  const ColumnDef* column = nullptr;
  std::string op;
  Json operand;
  std::string raw;
};

Json cell_of(const RecordVersion& v, Cid cid, const std::string& rid_text) {
  switch (cid) {
    case kRidCid: return rid_text;
    case kRctCid: return format_rfc3339(v.rct);
    case kRmtCid: return format_rfc3339(v.rmt);
    default: {
      const Json* p = v.value(cid);
      return p ? *p : Json(nullptr);
    }
  }
}

bool matches(const Json& cell, const BoundFilter& f) {
  if (f.op == "~") {
    if (cell.is_null()) return false;
    const auto text = cell.is_string() ? cell.get<std::string>() : cell.dump();
    return lower(text).find(lower(f.raw)) != std::string::npos;
  }
  if (f.op == "!=") return cell.is_null() || compare(cell, f.operand) != 0;
  if (cell.is_null()) return false;
  const int c = compare(cell, f.operand);
  if (f.op == "=") return c == 0;
  if (f.op == "<") return c < 0;
  if (f.op == "<=") return c <= 0;
  if (f.op == ">") return c > 0;
  if (f.op == ">=") return c >= 0;
  return false;
}

}  // namespace

const Json* RecordVersion::value(Cid cid) const {
  const auto it = values.find(cid);
  return it == values.end() ? nullptr : &it->second;
}

Filter parse_filter(std::string_view text) {
  const auto pos = text.find_first_of("!<>=~");
  Filter f;
  if (pos == std::string_view::npos) {
    f.column = std::string(text);
    return f;
  }
  f.column = std::string(text.substr(0, pos));
  std::size_t len = 1;
  if (pos + 1 < text.size() && text[pos + 1] == '=' && (text[pos] == '!' || text[pos] == '<' || text[pos] == '>')) len = 2;
  f.op = std::string(text.substr(pos, len));
  if (f.op == "!") fail(Errc::BadRequest, "bad filter '" + std::string(text) + "'");
  f.value = std::string(text.substr(pos + len));
  if (f.column.empty()) fail(Errc::BadRequest, "filter without a column: '" + std::string(text) + "'");
  return f;
}

Json QueryResult::to_json() const {
  Json j = Json::object();
  j["snapshot"] = snapshot;
  j["model_version"] = model_version;
  j["table"] = table;
  j["count"] = count;
  j["records"] = records;
  Json f = Json::object();
  for (const auto& [name, counts] : facets) {
    Json list = Json::array();
    for (const auto& c : counts) list.push_back(Json{{"value", c.value}, {"count", c.count}});
    f[name] = std::move(list);
  }
  j["facets"] = std::move(f);
  j["next"] = next ? Json(*next) : Json(nullptr);
  return j;
}

Catalog::Catalog(const std::filesystem::path& log_path, Options options) : options_(std::move(options)) {
  if (!idspace::is_namespace_token(options_.ns)) fail(Errc::MalformedId, "bad catalog namespace '" + options_.ns + "'");
  models_.emplace_back(0, std::make_shared<const CatalogModel>());
  log_ = std::make_unique<AppendLog>(log_path, AppendLog::Options{options_.durable});
  std::size_t line_no = 0;
  for (const auto& line : log_->take_recovered()) {
    ++line_no;
    try {
      replay(line);
    } catch (const Error& e) {
      if (e.code() == Errc::CorruptLog) throw;
      fail(Errc::CorruptLog, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Json::exception& e) {
      fail(Errc::CorruptLog, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string Catalog::rid_string(std::uint64_t n) const {
  std::string digits;
  do {
    digits.insert(digits.begin(), kCrockford[n & 31u]);
    n >>= 5;
  } while (n != 0);
  std::string grouped;
  const std::size_t head = digits.size() % 4 == 0 ? 4 : digits.size() % 4;
  grouped = digits.substr(0, head);
  for (std::size_t i = head; i < digits.size(); i += 4) grouped += "-" + digits.substr(i, 4);
  return options_.ns + ":" + grouped;
}

std::optional<std::uint64_t> Catalog::rid_number(const idspace::IdString& rid) const {
  if (rid.ns != options_.ns) return std::nullopt;
  std::uint64_t n = 0;
  for (char c : rid.suffix) {
    if (c == '-') continue;
    const auto d = kCrockford.find(c);
    if (d == std::string_view::npos || n > (~0ull >> 5)) return std::nullopt;
    n = (n << 5) | d;
  }
  return n;
}

std::uint64_t Catalog::require_rid(const idspace::IdString& rid) const {
  const auto n = rid_number(rid);
  if (!n || rid_home_.count(*n) == 0) fail(Errc::NotFound, rid.str());
  return *n;
}

const std::shared_ptr<const CatalogModel>& Catalog::model_ptr(SnapshotId s) const {
  auto it = std::upper_bound(models_.begin(), models_.end(), s,
                             [](SnapshotId v, const auto& e) { return v < e.first; });
  return std::prev(it)->second;
}

const RecordVersion* Catalog::at(const std::string& table, std::uint64_t rid, SnapshotId s) const {
  const auto t = rows_.find(table);
  if (t == rows_.end()) return nullptr;
  const auto r = t->second.find(rid);
  if (r == t->second.end()) return nullptr;
  const RecordVersion* found = nullptr;
  for (const auto& v : r->second.versions) {
    if (v.seq > s) break;
    found = &v;
  }
  return found;
}

void Catalog::replay(const Json& line) {
  const SnapshotId seq = line.at("seq").get<SnapshotId>();
  if (seq != head_ + 1) {
    fail(Errc::CorruptLog, "sequence " + std::to_string(seq) + " follows " + std::to_string(head_));
  }
  const auto ts = parse_rfc3339(line.at("ts").get<std::string>());
  if (!ts) fail(Errc::CorruptLog, "bad timestamp at sequence " + std::to_string(seq));
  const auto op = line.at("op").get<std::string>();
  const auto actor = line.at("actor").get<std::string>();
  const CatalogModel& m = *models_.back().second;

  if (op == "model") {
    auto next = std::make_shared<const CatalogModel>(apply_change(m, ModelChange{line.at("change")}));
    models_.emplace_back(seq, std::move(next));
    head_ = seq;
    return;
  }

  const auto table = line.at("table").get<std::string>();
  const auto rid = idspace::parse_id(line.at("rid").get<std::string>());
  const auto n = rid_number(rid);
  if (!n) fail(Errc::CorruptLog, "foreign RID " + rid.str());
  const auto read_values = [&](std::map<Cid, Json>& into) {
    for (const auto& [k, v] : line.at("values").items()) into[std::stoi(k)] = v;
  };

  if (op == "insert") {
    const TableDef* t = m.find_table(table);
    if (t == nullptr) fail(Errc::CorruptLog, "insert into unknown table " + table);
    auto& row = rows_[table][*n];
    if (!row.versions.empty() && !row.versions.back().deleted) fail(Errc::CorruptLog, "duplicate insert " + rid.str());
    RecordVersion v;
    v.seq = seq;
    v.table = table;
    v.rid = rid;
    read_values(v.values);
    v.rct = v.rmt = *ts;
    v.model_version = m.version;
    v.actor = actor;
    row.versions.push_back(std::move(v));
    if (t->kind != TableKind::extension) rid_home_.emplace(*n, table);
    if (const auto k = line.find("request_key"); k != line.end() && k->is_string()) {
      by_request_key_.emplace(k->get<std::string>(), std::make_pair(table, *n));
    }
    next_rid_ = std::max(next_rid_, *n + 1);
  } else if (op == "update" || op == "delete") {
    const auto t = rows_.find(table);
    if (t == rows_.end() || t->second.count(*n) == 0) fail(Errc::CorruptLog, op + " of unknown row " + rid.str());
    auto& versions = t->second.at(*n).versions;
    RecordVersion v = versions.back();
    v.seq = seq;
    if (op == "update") {
      read_values(v.values);
    } else {
      v.deleted = true;
    }
    // Strictly increasing per row, so RMT also serves as a version token for
    // optimistic concurrency even when two writes share a clock second.
    v.rmt = std::max(*ts, v.rmt + std::chrono::seconds{1});
    v.model_version = m.version;
    v.actor = actor;
    versions.push_back(std::move(v));
  } else {
    fail(Errc::CorruptLog, "unknown op " + op);
  }
  head_ = seq;
}

void Catalog::commit(Json line) {
  Json full = Json::object();
  full["seq"] = head_ + 1;
  full["ts"] = format_rfc3339(options_.clock());
  for (auto& [k, v] : line.items()) full[k] = v;
  log_->append(full);
  replay(full);
}

CatalogModel Catalog::model() const {
  std::shared_lock lock(mu_);
  return *models_.back().second;
}

CatalogModel Catalog::model_at(SnapshotId snapshot) const {
  std::shared_lock lock(mu_);
  if (snapshot > head_) fail(Errc::NotFound, "snapshot " + std::to_string(snapshot));
  return *model_ptr(snapshot);
}

CatalogModel Catalog::apply_model_change(const ModelChange& change, const Principal& actor) {
  std::unique_lock lock(mu_);
  const std::string table = change.doc.is_object() && change.doc.contains("table") && change.doc["table"].is_string()
                                ? change.doc["table"].get<std::string>()
                                : std::string();
  options_.acl.require(actor, Right::model_change, table);
  // Validate before logging so a rejected change leaves no trace.
  CatalogModel next = apply_change(*models_.back().second, change);
  Json line = Json::object();
  line["actor"] = actor.name;
  line["op"] = "model";
  line["change"] = change.doc;
  commit(std::move(line));
  return next;
}

std::map<Cid, Json> Catalog::coerce_values(const CatalogModel& m, const TableDef& t, const Json& values, bool insert,
                                           std::optional<std::uint64_t>* rid_out) const {
  if (!values.is_object()) fail(Errc::BadRequest, "record values must be a JSON object");
  std::map<Cid, Json> out;
  for (const auto& [name, v] : values.items()) {
    const ColumnDef* c = t.resolve_column(name);
    if (c == nullptr) fail(Errc::UnknownColumn, t.qualified() + "." + name);
    if (c->system) {
      if (c->cid == kRidCid && insert && t.kind == TableKind::extension && rid_out != nullptr && v.is_string()) {
        const auto parsed = idspace::parse_id(v.get<std::string>());
        const auto n = rid_number(parsed);
        if (!n) fail(Errc::DanglingReference, t.qualified() + ": RID " + parsed.str() + " is not in this catalog");
        *rid_out = *n;
        continue;
      }
      type_violation(t, *c, "system column is managed by the catalog");
    }
    out[c->cid] = coerce(m, t, *c, v);
  }
  for (const auto& c : t.columns) {
    if (c.system || c.nullable) continue;
    const auto it = out.find(c.cid);
    if (insert && (it == out.end() || it->second.is_null())) type_violation(t, c, "value required");
    if (!insert && it != out.end() && it->second.is_null()) type_violation(t, c, "value required");
  }
  return out;
}

void Catalog::check_constraints(const CatalogModel& m, const TableDef& t, std::uint64_t rid,
                                const std::map<Cid, Json>& values) const {
  const auto value_of = [&](const std::map<Cid, Json>& vals, const RecordVersion* v, Cid cid) -> Json {
    if (cid == kRidCid) return v ? v->rid.str() : rid_string(rid);
    const auto it = vals.find(cid);
    return it == vals.end() ? Json(nullptr) : it->second;
  };
  const auto live = rows_.find(t.qualified());
  for (const auto& key : t.keys) {
    std::vector<Cid> cids;
    for (const auto& name : key) cids.push_back(t.column(name)->cid);
    if (std::any_of(cids.begin(), cids.end(), [&](Cid c) { return value_of(values, nullptr, c).is_null(); })) continue;
    if (live == rows_.end()) continue;
    for (const auto& [other, row] : live->second) {
      if (other == rid || row.versions.back().deleted) continue;
      const auto& ov = row.versions.back();
      const bool same = std::all_of(cids.begin(), cids.end(),
                                    [&](Cid c) { return value_of(ov.values, &ov, c) == value_of(values, nullptr, c); });
      if (same) fail(Errc::DuplicateKey, t.qualified() + " key (" + key.front() + (key.size() > 1 ? ", ..." : "") + ")");
    }
  }
  for (const auto& fk : t.foreign_keys) {
    std::vector<Json> local;
    for (const auto& name : fk.columns) local.push_back(value_of(values, nullptr, t.column(name)->cid));
    if (std::any_of(local.begin(), local.end(), [](const Json& j) { return j.is_null(); })) continue;
    const TableDef& remote = m.tables.at(fk.table);
    bool found = false;
    if (fk.remote_columns.size() == 1 && fk.remote_columns[0] == "RID") {
      try {
        const auto n = rid_number(idspace::parse_id(local[0].get<std::string>()));
        const RecordVersion* v = n ? at(remote.qualified(), *n, head_) : nullptr;
        found = (v != nullptr && !v->deleted) || (n && *n == rid && remote.qualified() == t.qualified());
      } catch (const Error&) {
        found = false;
      }
    } else if (const auto rrows = rows_.find(remote.qualified()); rrows != rows_.end()) {
      for (const auto& [other, row] : rrows->second) {
        const auto& ov = row.versions.back();
        if (ov.deleted) continue;
        bool all = true;
        for (std::size_t i = 0; i < fk.remote_columns.size() && all; ++i) {
          all = value_of(ov.values, &ov, remote.column(fk.remote_columns[i])->cid) == local[i];
        }
        if (all) {
          found = true;
          break;
        }
      }
    }
    if (!found) fail(Errc::DanglingReference, t.qualified() + " -> " + fk.table + ": " + local[0].dump());
  }
}

RecordVersion Catalog::insert(std::string_view table, const Json& values, const Principal& actor,
                              const std::optional<std::string>& request_key) {
  std::unique_lock lock(mu_);
  const CatalogModel& m = *models_.back().second;
  const TableDef* t = m.find_table(table);
  if (t == nullptr) fail(Errc::UnknownTable, std::string(table));
  options_.acl.require(actor, Right::write, t->qualified());
  if (request_key) {
    if (const auto it = by_request_key_.find(*request_key); it != by_request_key_.end()) {
      return rows_.at(it->second.first).at(it->second.second).versions.back();
    }
  }
  if (t->kind == TableKind::vocabulary) {
    fail(Errc::InvalidOperation, t->qualified() + " is a vocabulary; add terms with a model change");
  }
  std::optional<std::uint64_t> parent;
  auto coerced = coerce_values(m, *t, values, true, &parent);
  std::uint64_t n = next_rid_;
  if (t->kind == TableKind::extension) {
    if (!parent) fail(Errc::DanglingReference, t->qualified() + " rows need the RID of a " + t->extends + " row");
    const RecordVersion* p = at(t->extends, *parent, head_);
    if (p == nullptr || p->deleted) fail(Errc::DanglingReference, t->qualified() + ": no live parent " + rid_string(*parent));
    const RecordVersion* existing = at(t->qualified(), *parent, head_);
    if (existing != nullptr && !existing->deleted) fail(Errc::DuplicateKey, t->qualified() + " already extends " + rid_string(*parent));
    n = *parent;
  }
  check_constraints(m, *t, n, coerced);
  Json vals = Json::object();
  for (const auto& [cid, v] : coerced) vals[std::to_string(cid)] = v;
  Json line = Json::object();
  line["actor"] = actor.name;
  line["op"] = "insert";
  line["table"] = t->qualified();
  line["rid"] = rid_string(n);
  line["values"] = std::move(vals);
  if (request_key) line["request_key"] = *request_key;
  commit(std::move(line));
  return rows_.at(t->qualified()).at(n).versions.back();
}

std::string Catalog::home_table(std::uint64_t rid, std::string_view table) const {
  if (table.empty()) return rid_home_.at(rid);
  const TableDef* t = models_.back().second->find_table(table);
  if (t == nullptr) fail(Errc::UnknownTable, std::string(table));
  return t->qualified();
}

RecordVersion Catalog::update(const idspace::IdString& rid, const Json& values, const Principal& actor,
                              std::string_view table) {
  std::unique_lock lock(mu_);
  const auto n = require_rid(rid);
  const auto qualified = home_table(n, table);
  const CatalogModel& m = *models_.back().second;
  const TableDef& t = m.tables.at(qualified);
  options_.acl.require(actor, Right::write, qualified);
  const RecordVersion* cur = at(qualified, n, head_);
  if (cur == nullptr || cur->deleted) fail(Errc::NotFound, rid.str() + " in " + qualified);
  auto changed = coerce_values(m, t, values, false, nullptr);
  auto merged = cur->values;
  for (const auto& [cid, v] : changed) merged[cid] = v;
  check_constraints(m, t, n, merged);
  Json vals = Json::object();
  for (const auto& [cid, v] : changed) vals[std::to_string(cid)] = v;
  Json line = Json::object();
  line["actor"] = actor.name;
  line["op"] = "update";
  line["table"] = qualified;
  line["rid"] = rid_string(n);
  line["values"] = std::move(vals);
  commit(std::move(line));
  return rows_.at(qualified).at(n).versions.back();
}

RecordVersion Catalog::remove(const idspace::IdString& rid, const Principal& actor, std::string_view table) {
  std::unique_lock lock(mu_);
  const auto n = require_rid(rid);
  const auto qualified = home_table(n, table);
  options_.acl.require(actor, Right::write, qualified);
  const RecordVersion* cur = at(qualified, n, head_);
  if (cur == nullptr || cur->deleted) fail(Errc::NotFound, rid.str() + " in " + qualified);
  Json line = Json::object();
  line["actor"] = actor.name;
  line["op"] = "delete";
  line["table"] = qualified;
  line["rid"] = rid_string(n);
  commit(std::move(line));
  return rows_.at(qualified).at(n).versions.back();
}

std::optional<RecordVersion> Catalog::get(const idspace::IdString& rid, std::optional<SnapshotId> snapshot,
                                          std::string_view table) const {
  std::shared_lock lock(mu_);
  const auto n = rid_number(rid);
  if (!n || rid_home_.count(*n) == 0) return std::nullopt;
  const RecordVersion* v = at(home_table(*n, table), *n, snapshot.value_or(head_));
  if (v == nullptr) return std::nullopt;
  return *v;
}

std::vector<RecordVersion> Catalog::history(const idspace::IdString& rid, std::string_view table) const {
  std::shared_lock lock(mu_);
  const auto n = require_rid(rid);
  const auto qualified = home_table(n, table);
  const auto t = rows_.find(qualified);
  if (t == rows_.end() || t->second.count(n) == 0) fail(Errc::NotFound, rid.str() + " in " + qualified);
  return t->second.at(n).versions;
}

std::string Catalog::citation_url(const idspace::IdString& rid) const {
  return options_.citation_base + "/v1/id/" + rid.str();
}

Resolution Catalog::resolve_rid(const idspace::IdString& rid) const {
  std::shared_lock lock(mu_);
  const auto n = require_rid(rid);
  const auto& table = rid_home_.at(n);
  return Resolution{table, rows_.at(table).at(n).versions.back(), citation_url(rid)};
}

std::vector<RecordVersion> Catalog::rows(std::string_view table, std::optional<SnapshotId> snapshot) const {
  std::shared_lock lock(mu_);
  const SnapshotId s = snapshot.value_or(head_);
  const TableDef* t = model_ptr(s)->find_table(table);
  if (t == nullptr) fail(Errc::UnknownTable, std::string(table));
  std::vector<RecordVersion> out;
  if (const auto it = rows_.find(t->qualified()); it != rows_.end()) {
    for (const auto& [n, row] : it->second) {
      const RecordVersion* v = at(t->qualified(), n, s);
      if (v != nullptr && !v->deleted) out.push_back(*v);
    }
  }
  return out;
}

Json Catalog::render(const RecordVersion& v, std::optional<SnapshotId> snapshot) const {
  std::shared_lock lock(mu_);
  const CatalogModel& m = *model_ptr(snapshot.value_or(head_));
  const TableDef* t = m.find_table(v.table);
  if (t == nullptr) t = models_.back().second->find_table(v.table);
  Json j = Json::object();
  const auto rid_text = v.rid.str();
  for (const auto& c : t->columns) j[c.name] = cell_of(v, c.cid, rid_text);
  return j;
}

std::string Catalog::normalize_term(std::string_view vocabulary, std::string_view raw) const {
  std::shared_lock lock(mu_);
  const TableDef* v = models_.back().second->find_table(vocabulary);
  if (v == nullptr || v->kind != TableKind::vocabulary) fail(Errc::UnknownTable, std::string(vocabulary));
  return catalog::normalize_term(*v, raw);
}

QueryResult Catalog::query(const Query& q) const {
  std::shared_lock lock(mu_);
  const SnapshotId s = q.snapshot.value_or(head_);
  if (s > head_) fail(Errc::NotFound, "snapshot " + std::to_string(s));
  const CatalogModel& m = *model_ptr(s);
  const CatalogModel& latest = *models_.back().second;

  const auto bind_column = [&](const TableDef& t, const std::string& name) -> const ColumnDef* {
    if (const auto* c = t.resolve_column(name)) return c;
    // Names introduced after this snapshot still identify the same column.
    if (const TableDef* now = latest.find_table(t.qualified())) {
      if (const auto* c = now->resolve_column(name)) {
        if (const auto* then = t.column_by_cid(c->cid)) return then;
      }
    }
    fail(Errc::UnknownColumn, t.qualified() + "." + name);
  };
  const auto bind = [&](const TableDef& t, const Filter& f) {
    BoundFilter b;
    b.column = bind_column(t, f.column);
    b.op = f.op;
    b.raw = f.value;
    if (!f.op.empty() && f.op != "~") b.operand = coerce(m, t, *b.column, Json(f.value));
    return b;
  };
  const auto live = [&](const TableDef& t) {
    std::vector<const RecordVersion*> out;
    if (const auto it = rows_.find(t.qualified()); it != rows_.end()) {
      for (const auto& [n, row] : it->second) {
        const RecordVersion* v = at(t.qualified(), n, s);
        if (v != nullptr && !v->deleted) out.push_back(v);
      }
    }
    return out;
  };
  const auto apply = [&](std::vector<const RecordVersion*> in, const std::vector<BoundFilter>& fs) {
    std::vector<const RecordVersion*> out;
    for (const auto* v : in) {
      const auto rid_text = v->rid.str();
      if (std::all_of(fs.begin(), fs.end(), [&](const auto& f) { return matches(cell_of(*v, f.column->cid, rid_text), f); })) {
        out.push_back(v);
      }
    }
    return out;
  };

  // Walk the path.
  std::vector<std::string> segments;
  {
    std::string_view rest = q.path;
    while (!rest.empty()) {
      const auto slash = rest.find('/');
      const auto seg = rest.substr(0, slash);
      if (!seg.empty()) segments.emplace_back(seg);
      if (slash == std::string_view::npos) break;
      rest.remove_prefix(slash + 1);
    }
  }
  if (segments.empty()) fail(Errc::UnknownPath, "empty path");
  const TableDef* current = nullptr;
  std::vector<const RecordVersion*> set;
  std::vector<BoundFilter> pending;
  const auto flush = [&] {
    set = apply(std::move(set), pending);
    pending.clear();
  };
  for (const auto& seg : segments) {
    if (seg.find_first_of("!<>=~") != std::string::npos) {
      if (current == nullptr) fail(Errc::UnknownPath, "path must start with a table: " + q.path);
      pending.push_back(bind(*current, parse_filter(seg)));
      continue;
    }
    const TableDef* next = m.find_table(seg);
    if (next == nullptr) fail(Errc::UnknownPath, seg + " at snapshot " + std::to_string(s));
    if (current == nullptr) {
      current = next;
      set = live(*next);
      continue;
    }
    flush();
    const TableDef& a = *current;
    const TableDef& b = *next;
    std::vector<const RecordVersion*> joined;
    const auto cells = [&](const RecordVersion& v, const TableDef& t, const std::vector<std::string>& cols) {
      std::vector<Json> out;
      const auto rid_text = v.rid.str();
      for (const auto& c : cols) out.push_back(cell_of(v, t.column(c)->cid, rid_text));
      return out;
    };
    if (b.extends == a.qualified() || a.extends == b.qualified()) {
      std::set<std::string> rids;
      for (const auto* v : set) rids.insert(v->rid.str());
      for (const auto* v : live(b)) {
        if (rids.count(v->rid.str())) joined.push_back(v);
      }
    } else {
      const ForeignKey* fk = nullptr;
      bool forward = true;  // b references a
      for (const auto& f : b.foreign_keys) {
        if (f.table == a.qualified() && fk == nullptr) fk = &f;
      }
      if (fk == nullptr) {
        forward = false;
        for (const auto& f : a.foreign_keys) {
          if (f.table == b.qualified() && fk == nullptr) fk = &f;
        }
      }
      if (fk == nullptr) fail(Errc::UnknownPath, "no link between " + a.qualified() + " and " + b.qualified());
      std::set<std::string> keys;
      for (const auto* v : set) {
        keys.insert(Json(forward ? cells(*v, a, fk->remote_columns) : cells(*v, a, fk->columns)).dump());
      }
      for (const auto* v : live(b)) {
        const auto k = Json(forward ? cells(*v, b, fk->columns) : cells(*v, b, fk->remote_columns)).dump();
        if (keys.count(k)) joined.push_back(v);
      }
    }
    current = next;
    set = std::move(joined);
  }
  for (const auto& f : q.filters) pending.push_back(bind(*current, parse_filter(f)));
  flush();

  // Facets: constraints on one column are alternatives; across columns they
  // all apply. Each column's counts ignore that column's own constraints.
  struct FacetGroup {
    std::string name;
    const ColumnDef* column = nullptr;
    std::vector<BoundFilter> constraints;
  };
  std::vector<FacetGroup> groups;
  for (const auto& text : q.facets) {
    const Filter f = parse_filter(text);
    const BoundFilter b = bind(*current, f);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.column->cid == b.column->cid; });
    if (it == groups.end()) {
      groups.push_back({f.column, b.column, {}});
      it = std::prev(groups.end());
    }
    if (!f.op.empty()) it->constraints.push_back(b);
  }
  const auto passes = [&](const RecordVersion& v, const FacetGroup* skip) {
    const auto rid_text = v.rid.str();
    for (const auto& g : groups) {
      if (&g == skip || g.constraints.empty()) continue;
      const Json cell = cell_of(v, g.column->cid, rid_text);
      if (std::none_of(g.constraints.begin(), g.constraints.end(), [&](const auto& f) { return matches(cell, f); })) {
        return false;
      }
    }
    return true;
  };

  QueryResult r;
  r.snapshot = s;
  r.model_version = m.version;
  r.table = current->qualified();
  for (const auto& g : groups) {
    std::map<std::string, FacetCount> counts;
    for (const auto* v : set) {
      if (!passes(*v, &g)) continue;
      const Json cell = cell_of(*v, g.column->cid, v->rid.str());
      auto& fc = counts[cell.dump()];
      fc.value = cell;
      ++fc.count;
    }
    std::vector<FacetCount> list;
    for (auto& [k, fc] : counts) list.push_back(std::move(fc));
    std::stable_sort(list.begin(), list.end(), [](const auto& x, const auto& y) { return x.count > y.count; });
    r.facets.emplace_back(g.name, std::move(list));
  }
  std::vector<const RecordVersion*> result;
  for (const auto* v : set) {
    if (passes(*v, nullptr)) result.push_back(v);
  }
  r.count = result.size();
  std::optional<std::uint64_t> after;
  if (q.after) {
    after = rid_number(idspace::parse_id(*q.after));
    if (!after) fail(Errc::BadRequest, "cursor " + *q.after + " is not a RID of this catalog");
  }
  const std::size_t limit = q.limit == 0 ? 100 : q.limit;
  std::size_t emitted = 0;
  for (const auto* v : result) {
    const auto n = *rid_number(v->rid);
    if (after && n <= *after) continue;
    if (emitted == limit) {
      r.next = r.records.back().at("RID").get<std::string>();
      break;
    }
    Json j = Json::object();
    const auto rid_text = v->rid.str();
    for (const auto& c : current->columns) j[c.name] = cell_of(*v, c.cid, rid_text);
    r.records.push_back(std::move(j));
    ++emitted;
  }
  return r;
}

SnapshotId Catalog::head() const {
  std::shared_lock lock(mu_);
  return head_;
}

void Catalog::set_acl(AclPolicy acl) {
  std::unique_lock lock(mu_);
  options_.acl = std::move(acl);
}

AclPolicy Catalog::acl() const {
  std::shared_lock lock(mu_);
  return options_.acl;
}

void Catalog::require_read(const Principal& who, std::string_view table) const {
  std::shared_lock lock(mu_);
  options_.acl.require(who, Right::read, table);
}

}  // namespace fair::catalog
