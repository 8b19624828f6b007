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

#include "fair/services/api.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>

#include "fair/bag/bag.hpp"
#include "fair/catalog/exchange.hpp"
#include "fair/common/digest.hpp"
#include "fair/common/files.hpp"
#include "fair/flows/flow.hpp"
#include "fair/services/workspace.hpp"

namespace fair::services {

namespace {

using catalog::Principal;
using catalog::Right;

struct Call {
  const Request& req;
  const Principal& who;
  std::vector<std::string> args;  // placeholder values in pattern order
};

using Handler = std::function<Response(Workspace&, Call&)>;

struct Entry {
  Route route;
  Handler handler;
};

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    if (path[i] == '/') {
      ++i;
      continue;
    }
    const auto j = path.find('/', i);
    out.emplace_back(path.substr(i, j == std::string_view::npos ? std::string_view::npos : j - i));
    if (j == std::string_view::npos) break;
    i = j;
  }
  return out;
}

bool match(const std::string& pattern, const std::vector<std::string>& segs, std::vector<std::string>& args) {
  const auto pat = split_path(pattern);
  if (pat.size() != segs.size()) return false;
  std::vector<std::string> got;
  for (std::size_t i = 0; i < pat.size(); ++i) {
    if (pat[i].front() == '{') {
      if (segs[i].empty()) return false;
      got.push_back(percent_decode(segs[i]));
    } else if (pat[i] != segs[i]) {
      return false;
    }
  }
  args = std::move(got);
  return true;
}

Response json_response(const Json& j, int status = 200) {
  Response r;
  r.status = status;
  r.body = canonical(j);
  return r;
}

Json body_json(const Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const Json::parse_error& e) {
    fail(Errc::BadRequest, std::string("request body is not JSON: ") + e.what());
  }
}

std::optional<catalog::SnapshotId> snapshot_param(const Request& req) {
  const auto s = req.param("snapshot");
  if (!s || s->empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(*s, &used);
    if (used != s->size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    fail(Errc::BadRequest, "snapshot must be a non-negative integer, got '" + *s + "'");
  }
}

std::size_t limit_param(const Request& req) {
  const auto s = req.param("limit");
  if (!s) return 100;
  try {
    std::size_t used = 0;
    const auto v = std::stoul(*s, &used);
    if (used != s->size() || v == 0) throw std::invalid_argument("limit");
    return v;
  } catch (const std::exception&) {
    fail(Errc::BadRequest, "limit must be a positive integer, got '" + *s + "'");
  }
}

void require(Workspace& ws, const Principal& who, Right right, std::string_view table = {}) {
  ws.catalog().acl().require(who, right, table);
}

// --- HTML landing pages ---------------------------------------------------

bool wants_html(const Request& req) {
  if (const auto f = req.param("format")) return *f == "html";
  const auto accept = req.header("accept");
  if (!accept) return false;
  const auto html = accept->find("text/html");
  if (html == std::string::npos) return false;
  const auto json = accept->find("application/json");
  return json == std::string::npos || html < json;
}

std::string escape_html(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string cell(const Json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    const auto scheme = url_scheme(s);
    if (scheme == "http" || scheme == "https") return "<a href=\"" + escape_html(s) + "\">" + escape_html(s) + "</a>";
    return escape_html(s);
  }
  if (v.is_null()) return "";
  return escape_html(v.dump());
}

Response html_page(const std::string& title, const std::vector<std::pair<std::string, std::string>>& rows) {
  std::string b = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" + escape_html(title) +
                  "</title></head>\n<body>\n<h1>" + escape_html(title) + "</h1>\n<table>\n";
  for (const auto& [k, v] : rows) b += "<tr><th>" + escape_html(k) + "</th><td>" + v + "</td></tr>\n";
  b += "</table>\n</body></html>\n";
  Response r;
  r.content_type = "text/html; charset=utf-8";
  r.body = std::move(b);
  return r;
}

Response minid_page(const idspace::MinidRecord& rec) {
  std::vector<std::pair<std::string, std::string>> rows;
  const Json j = to_json(rec);
  for (const auto& [k, v] : j.items()) {
    if (k == "locations") {
      std::string links;
      for (const auto& loc : v) links += cell(loc) + "<br>";
      rows.emplace_back(k, links);
    } else if (k == "checksum") {
      rows.emplace_back(k, escape_html(v.value("algorithm", std::string()) + ":" + v.value("digest", std::string())));
    } else {
      rows.emplace_back(k, cell(v));
    }
  }
  return html_page(rec.title.value_or(rec.id.str()), rows);
}

Response record_page(const std::string& table, const Json& record, const std::string& citation) {
  std::vector<std::pair<std::string, std::string>> rows{{"table", escape_html(table)},
                                                        {"citation", cell(Json(citation))}};
  for (const auto& [k, v] : record.items()) rows.emplace_back(k, cell(v));
  return html_page(table + " " + record.value("RID", std::string()), rows);
}

// --- handlers -------------------------------------------------------------

Response healthz(Workspace&, Call&) { return json_response({{"status", "ok"}, {"version", std::string(kVersion)}}); }

std::vector<std::string> string_list(const Json& j, const char* field) {
  if (!j.contains(field)) return {};
  if (!j[field].is_array()) fail(Errc::BadRequest, std::string(field) + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j[field]) {
    if (!v.is_string()) fail(Errc::BadRequest, std::string(field) + " must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

Response id_mint(Workspace& ws, Call& c) {
  require(ws, c.who, Right::write);
  const Json b = body_json(c.req);
  idspace::MintRequest m;
  m.creator = c.who.name;
  const Json& sum = b.contains("checksum") ? b["checksum"] : b;
  if (!sum.is_object()) fail(Errc::BadRequest, "checksum must be an object");
  m.algorithm = sum.value("algorithm", std::string("sha256"));
  m.digest = sum.value("digest", std::string());
  m.locations = string_list(b, "locations");
  if (b.contains("title") && !b["title"].is_null()) m.title = b["title"].get<std::string>();
  m.ns = b.value("namespace", std::string());
  if (b.contains("request_key") && !b["request_key"].is_null()) m.request_key = b["request_key"].get<std::string>();
  return json_response(to_json(ws.registry().mint(m)), 201);
}

Response id_get(Workspace& ws, Call& c) {
  const auto id = idspace::parse_id(c.args.at(0));
  if (ws.catalog().rid_number(id)) {
    const auto res = ws.catalog().resolve_rid(id);
    ws.catalog().require_read(c.who, res.table);
    const Json rec = ws.catalog().render(res.head);
    if (wants_html(c.req)) return record_page(res.table, rec, res.citation);
    return json_response(
        {{"rid", id.str()}, {"table", res.table}, {"citation", res.citation}, {"snapshot", res.head.seq}, {"record", rec}});
  }
  ws.catalog().require_read(c.who);
  const auto rec = ws.registry().resolve(id);
  if (wants_html(c.req)) return minid_page(rec);
  return json_response(to_json(rec));
}

Response id_locations(Workspace& ws, Call& c) {
  require(ws, c.who, Right::write);
  const auto id = idspace::parse_id(c.args.at(0));
  const Json b = body_json(c.req);
  if (!b.contains("locations")) fail(Errc::BadRequest, "body needs 'locations'");
  return json_response(to_json(ws.registry().update_locations(id, string_list(b, "locations"), c.who.name)));
}

Response id_upgrade(Workspace& ws, Call& c) {
  require(ws, c.who, Right::write);
  const auto id = idspace::parse_id(c.args.at(0));
  const Json b = body_json(c.req);
  if (!b.contains("doi") || !b["doi"].is_string()) fail(Errc::BadRequest, "body needs a string 'doi'");
  return json_response(to_json(ws.registry().upgrade(id, b["doi"].get<std::string>(), c.who.name)));
}

Response model_get(Workspace& ws, Call& c) {
  ws.catalog().require_read(c.who);
  const auto s = snapshot_param(c.req);
  return json_response(to_json(s ? ws.catalog().model_at(*s) : ws.catalog().model()));
}

Response model_post(Workspace& ws, Call& c) {
  const Json b = body_json(c.req);
  return json_response(to_json(ws.catalog().apply_model_change(catalog::ModelChange{b}, c.who)));
}

Response entity_insert(Workspace& ws, Call& c) {
  const std::string table = c.args.at(0) + ":" + c.args.at(1);
  const auto key = c.req.header("idempotency-key");
  const auto v = ws.catalog().insert(table, body_json(c.req), c.who, key);
  return json_response(ws.catalog().render(v), 201);
}

Response entity_update(Workspace& ws, Call& c) {
  const auto rid = idspace::parse_id(c.args.at(0));
  const std::string table = c.req.param("table").value_or("");
  Json values = body_json(c.req);
  if (values.is_object() && values.contains("RMT")) {
    // Optimistic concurrency: the caller sends back the RMT it read.
    const auto current = ws.catalog().get(rid, std::nullopt, table);
    if (!current) fail(Errc::NotFound, rid.str());
    const Json seen = values["RMT"];
    const Json now = ws.catalog().render(*current).value("RMT", Json());
    if (seen != now)
      fail(Errc::Conflict, rid.str() + " was modified at " + now.dump() + " after the read at " + seen.dump());
    values.erase("RMT");
  }
  // Full records sent back as read may carry the other system columns.
  if (values.is_object() && values.contains("RID")) {
    if (values["RID"] != Json(rid.str())) fail(Errc::BadRequest, "body RID does not match " + rid.str());
    values.erase("RID");
  }
  if (values.is_object()) values.erase("RCT");
  const auto v = ws.catalog().update(rid, values, c.who, table);
  return json_response(ws.catalog().render(v));
}

Response entity_get(Workspace& ws, Call& c) {
  const auto rid = idspace::parse_id(c.args.at(0));
  const auto snap = snapshot_param(c.req);
  const std::string table = c.req.param("table").value_or("");
  const auto v = ws.catalog().get(rid, snap, table);
  if (!v) fail(Errc::NotFound, rid.str() + (snap ? " at snapshot " + std::to_string(*snap) : std::string()));
  ws.catalog().require_read(c.who, v->table);
  const Json rec = ws.catalog().render(*v, snap);
  if (wants_html(c.req)) return record_page(v->table, rec, ws.catalog().citation_url(rid));
  return json_response(rec);
}

Response run_query(Workspace& ws, Call& c, catalog::Query q) {
  q.filters = c.req.params("filter");
  q.facets = c.req.params("facet");
  q.after = c.req.param("after");
  q.limit = limit_param(c.req);
  const auto model = q.snapshot ? ws.catalog().model_at(*q.snapshot) : ws.catalog().model();
  bool any = false;
  for (const auto& seg : split_path(q.path)) {
    if (const auto* t = model.find_table(seg)) {
      ws.catalog().require_read(c.who, t->qualified());
      any = true;
    }
  }
  if (!any) ws.catalog().require_read(c.who);
  return json_response(ws.catalog().query(q).to_json());
}

Response query(Workspace& ws, Call& c) {
  catalog::Query q;
  q.path = c.req.param("path").value_or("");
  if (q.path.empty()) fail(Errc::BadRequest, "query needs a 'path' parameter");
  q.snapshot = snapshot_param(c.req);
  return run_query(ws, c, std::move(q));
}

Response snapshot_query(Workspace& ws, Call& c) {
  catalog::Query q;
  try {
    std::size_t used = 0;
    q.snapshot = std::stoull(c.args.at(0), &used);
    if (used != c.args.at(0).size()) throw std::invalid_argument("sid");
  } catch (const std::exception&) {
    fail(Errc::BadRequest, "snapshot id must be a non-negative integer, got '" + c.args.at(0) + "'");
  }
  q.path = c.args.at(1) + ":" + c.args.at(2);
  return run_query(ws, c, std::move(q));
}

Response export_dataset(Workspace& ws, Call& c) {
  ws.catalog().require_read(c.who);
  const Json b = body_json(c.req);
  catalog::ExportRequest er;
  er.roots = string_list(b, "roots");
  if (er.roots.empty()) fail(Errc::BadRequest, "export needs at least one root RID");
  er.depth = b.value("depth", 1);
  er.inbound = b.value("inbound", false);
  if (b.contains("snapshot") && !b["snapshot"].is_null()) er.snapshot = b["snapshot"].get<catalog::SnapshotId>();
  const std::string format = b.value("format", std::string("tar"));
  if (format != "tar" && format != "zip") fail(Errc::BadRequest, "format must be tar or zip");
  const bool bind = b.value("bind", true);
  if (bind) require(ws, c.who, Right::write);

  const auto bag = catalog::export_bag(ws.catalog(), ws.resolver(), er);
  const auto fmt = format == "tar" ? bag::ArchiveFormat::tar : bag::ArchiveFormat::zip;
  Response r;
  r.body = bag::archive_bytes(bag, fmt, true, "bag");
  r.content_type = format == "tar" ? "application/x-tar" : "application/zip";
  const std::string sha = digest_hex(Algorithm::sha256, r.body);
  r.headers["X-Content-SHA256"] = sha;
  std::string name = "dataset";
  if (bind) {
    const auto stored = ws.dir() / "exports" / (sha + "." + format);
    if (!std::filesystem::exists(stored)) write_file_atomic(stored, r.body);
    idspace::BindRequest br;
    br.creator = c.who.name;
    br.locations = {file_url(stored)};
    if (b.contains("title") && b["title"].is_string()) br.title = b["title"].get<std::string>();
    const auto rec = idspace::bind_bag(ws.registry(), bag, br);
    r.headers["X-Minid"] = rec.id.str();
    name = rec.id.suffix;
  }
  r.headers["Content-Disposition"] = "attachment; filename=\"" + name + "." + format + "\"";
  return r;
}

Response flow_define(Workspace& ws, Call& c) {
  require(ws, c.who, Right::write);
  const auto def = flows::define_flow(body_json(c.req));
  ws.flows().save_flow(def);
  return json_response(flows::to_json(def), 201);
}

Response flow_run(Workspace& ws, Call& c) {
  require(ws, c.who, Right::write);
  const Json b = body_json(c.req);
  if (!b.contains("flow")) fail(Errc::BadRequest, "body needs 'flow' (a name or a flow document)");
  flows::FlowDef def;
  if (b["flow"].is_string()) {
    const auto name = b["flow"].get<std::string>();
    auto found = ws.flows().find_flow(name);
    if (!found) fail(Errc::NotFound, "flow '" + name + "'");
    def = std::move(*found);
  } else {
    def = flows::define_flow(b["flow"]);
  }
  const Json params = b.value("params", Json::object());
  flows::RunOptions opts;
  opts.idempotent = b.value("idempotent", true);
  return json_response(flows::to_json(ws.flows().run(def, params, ws.flow_services(c.who), opts)));
}

Response flow_resume(Workspace& ws, Call& c) {
  require(ws, c.who, Right::write);
  return json_response(flows::to_json(ws.flows().resume(c.args.at(0), ws.flow_services(c.who))));
}

Response flow_audit(Workspace& ws, Call& c) {
  ws.catalog().require_read(c.who);
  const auto run = ws.flows().get(c.args.at(0));
  Json events = Json::array();
  for (const auto& e : run.audit) events.push_back(flows::to_json(e));
  return json_response({{"run_id", run.run_id.str()},
                        {"flow", run.flow.name},
                        {"status", std::string(flows::status_name(run.status))},
                        {"well_formed", flows::audit_well_formed(run.audit)},
                        {"events", std::move(events)}});
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table{
      {{"GET", "/v1/healthz"}, healthz},
      {{"POST", "/v1/id/mint"}, id_mint},
      {{"GET", "/v1/id/{id}"}, id_get},
      {{"PATCH", "/v1/id/{id}/locations"}, id_locations},
      {{"POST", "/v1/id/{id}/upgrade"}, id_upgrade},
      {{"GET", "/v1/catalog/model"}, model_get},
      {{"POST", "/v1/catalog/model"}, model_post},
      {{"POST", "/v1/catalog/entity/{schema}/{table}"}, entity_insert},
      {{"PATCH", "/v1/catalog/entity/{rid}"}, entity_update},
      {{"GET", "/v1/catalog/entity/{rid}"}, entity_get},
      {{"GET", "/v1/catalog/query"}, query},
      {{"GET", "/v1/catalog/snapshot/{sid}/entity/{schema}/{table}"}, snapshot_query},
      {{"POST", "/v1/catalog/export"}, export_dataset},
      {{"POST", "/v1/flow/define"}, flow_define},
      {{"POST", "/v1/flow/run"}, flow_run},
      {{"POST", "/v1/flow/{run_id}/resume"}, flow_resume},
      {{"GET", "/v1/flow/{run_id}/audit"}, flow_audit},
  };
  return table;
}

Response error_response(Errc code, std::string_view detail) {
  return json_response(api_error_json(code, detail), http_status(code));
}

}  // namespace

std::optional<std::string> Request::header(const std::string& lower_name) const {
  const auto it = headers.find(lower_name);
  if (it == headers.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> Request::param(const std::string& name) const {
  const auto it = query.find(name);
  if (it == query.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Request::params(const std::string& name) const {
  std::vector<std::string> out;
  const auto [lo, hi] = query.equal_range(name);
  for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  return out;
}

const std::vector<Route>& route_table() {
  static const std::vector<Route> routes = [] {
    std::vector<Route> r;
    for (const auto& e : entries()) r.push_back(e.route);
    return r;
  }();
  return routes;
}

int http_status(Errc code) noexcept {
  switch (code) {
    case Errc::Forbidden: return 403;
    case Errc::NotFound:
    case Errc::UnknownRoute:
    case Errc::UnknownTable:
    case Errc::NotInitialized: return 404;
    case Errc::DuplicateName:
    case Errc::DuplicateKey:
    case Errc::DanglingReference:
    case Errc::SupersededImmutable:
    case Errc::NotResumable:
    case Errc::Conflict:
    case Errc::InvalidOperation:
    case Errc::NotEmpty:
    case Errc::Locked:
    case Errc::DestinationExists: return 409;
    case Errc::QualityCheckFailed: return 422;
    case Errc::FetchFailed:
    case Errc::UnreachableAsset:
    case Errc::Connectivity:
    case Errc::DigestMismatchAfterFetch:
    case Errc::NoHandler: return 502;
    case Errc::IoFailure:
    case Errc::CorruptLog:
    case Errc::BindFailure:
    case Errc::Internal: return 500;
    default: return 400;
  }
}

Json api_error_json(Errc code, std::string_view detail) {
  return Json{{"http_status", http_status(code)}, {"code", std::string(errc_name(code))}, {"detail", std::string(detail)}};
}

Error error_from_response(const Response& r) {
  try {
    const Json j = Json::parse(r.body);
    if (j.is_object() && j.contains("code") && j["code"].is_string()) {
      if (const auto code = errc_from_name(j["code"].get<std::string>()))
        return Error(*code, j.value("detail", std::string()));
    }
  } catch (const Json::exception&) {
  }
  return Error(Errc::Internal, "HTTP " + std::to_string(r.status) + ": " + r.body.substr(0, 200));
}

Response Api::handle(const Request& req, const std::optional<Principal>& as) {
  try {
    const auto segs = split_path(req.path);
    const Entry* found = nullptr;
    bool path_known = false;
    std::vector<std::string> args;
    for (const auto& e : entries()) {
      std::vector<std::string> a;
      if (!match(e.route.pattern, segs, a)) continue;
      path_known = true;
      if (e.route.method == req.method) {
        found = &e;
        args = std::move(a);
        break;
      }
    }
    if (!found) {
      return error_response(Errc::UnknownRoute, req.method + " " + req.path +
                                                     (path_known ? " (method not supported on this path)" : ""));
    }

    Principal who;
    if (as) {
      who = *as;
    } else if (const auto auth = req.header("authorization")) {
      constexpr std::string_view kBearer = "Bearer ";
      if (auth->compare(0, kBearer.size(), kBearer) != 0) fail(Errc::Forbidden, "only Bearer authorization is accepted");
      const auto p = ws_.principal_for_token(auth->substr(kBearer.size()));
      if (!p) fail(Errc::Forbidden, "unknown bearer token");
      who = *p;
    } else {
      who = ws_.config().anonymous;
    }

    Call call{req, who, std::move(args)};
    return found->handler(ws_, call);
  } catch (const Error& e) {
    return error_response(e.code(), e.detail());
  } catch (const Json::exception& e) {
    return error_response(Errc::BadRequest, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return error_response(Errc::IoFailure, e.what());
  } catch (const std::exception& e) {
    return error_response(Errc::Internal, e.what());
  }
}

}  // namespace fair::services
