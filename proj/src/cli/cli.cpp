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

#include "fair/cli/cli.hpp"

#include <CLI11.hpp>
#include <array>
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <set>

#include "fair/bag/bag.hpp"
#include "fair/bag/fetch.hpp"
#include "fair/common/digest.hpp"
#include "fair/common/error.hpp"
#include "fair/common/files.hpp"
#include "fair/idspace/registry.hpp"
#include "fair/services/api.hpp"
#include "fair/services/server.hpp"
#include "fair/services/workspace.hpp"

extern char** environ;

namespace fair::cli {

namespace fs = std::filesystem;
using services::Request;
using services::Response;

Environment Environment::from_process() {
  Environment e;
  for (char** p = environ; p != nullptr && *p != nullptr; ++p) {
    const std::string kv(*p);
    const auto eq = kv.find('=');
    if (eq != std::string::npos) e.vars.emplace(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return e;
}

const std::string* Environment::get(const std::string& name) const {
  const auto it = vars.find(name);
  return it == vars.end() || it->second.empty() ? nullptr : &it->second;
}

namespace {

struct Globals {
  std::string config;
  std::string url;
  std::string token;
  std::string data_dir;
  bool json = false;
};

// Where service-backed commands go: a running service or a local directory.
class Backend {
 public:
  Backend(std::string url, std::string data_dir, std::string token)
      : url_(std::move(url)), data_dir_(std::move(data_dir)), token_(std::move(token)) {}

  Response call(Request req) {
    Response r;
    if (!url_.empty()) {
      if (!token_.empty()) req.headers["authorization"] = "Bearer " + token_;
      r = services::http_call(url_, req);
    } else {
      if (!ws_) {
        ws_ = std::make_unique<services::Workspace>(data_dir_);
        api_ = std::make_unique<services::Api>(*ws_);
      }
      std::optional<catalog::Principal> who = services::Workspace::local_principal();
      if (!token_.empty()) {
        who = ws_->principal_for_token(token_);
        if (!who) fail(Errc::Forbidden, "unknown bearer token");
      }
      r = api_->handle(req, who);
    }
    if (r.status >= 400) throw services::error_from_response(r);
    return r;
  }

 private:
  std::string url_;
  std::string data_dir_;
  std::string token_;
  std::unique_ptr<services::Workspace> ws_;
  std::unique_ptr<services::Api> api_;
};

// What a command produced: a JSON document, its human rendering, and the
// exit code.
struct Outcome {
  Json json;
  std::string human;  // empty: pretty-printed json
  int code = kOk;
};

std::string segment(std::string_view s) { return percent_encode(s, ":"); }

std::string read_input(const std::string& path) {
  if (path == "-") return std::string(std::istreambuf_iterator<char>(std::cin), {});
  if (!fs::exists(path)) fail(Errc::UnreadableSource, path + ": no such file");
  return read_file(path);
}

Json parse_json_arg(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(Errc::UsageError, what + " is not valid JSON: " + e.what());
  }
}

Request request(std::string method, std::string path, const Json& body = nullptr) {
  Request r;
  r.method = std::move(method);
  r.path = std::move(path);
  if (!body.is_null()) {
    r.body = canonical(body);
    r.headers["content-type"] = "application/json";
  }
  return r;
}

std::pair<std::string, std::string> split_kv(const std::string& kv, const char* flag) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) fail(Errc::UsageError, std::string(flag) + " expects KEY=VALUE, got '" + kv + "'");
  return {kv.substr(0, eq), kv.substr(eq + 1)};
}

Json record_values(const std::string& values_json, const std::vector<std::string>& sets) {
  Json v = values_json.empty() ? Json::object() : parse_json_arg(values_json, "--values");
  if (!v.is_object()) fail(Errc::UsageError, "--values must be a JSON object");
  for (const auto& kv : sets) {
    auto [k, val] = split_kv(kv, "--set");
    v[k] = val;
  }
  return v;
}

std::optional<Algorithm> algorithm_arg(const std::string& name) {
  const auto a = algorithm_from_name(name);
  if (!a) fail(Errc::UnsupportedAlgorithm, name);
  return a;
}

bag::ArchiveFormat format_for(const std::string& format, const fs::path& dest) {
  std::string f = format;
  if (f.empty()) {
    const auto ext = dest.extension().string();
    f = ext == ".tar" ? "tar" : ext == ".zip" ? "zip" : "directory";
  }
  if (f == "directory") return bag::ArchiveFormat::directory;
  if (f == "tar") return bag::ArchiveFormat::tar;
  if (f == "zip") return bag::ArchiveFormat::zip;
  fail(Errc::UsageError, "format must be directory, tar or zip");
}

std::string_view format_name(bag::ArchiveFormat f) {
  switch (f) {
    case bag::ArchiveFormat::tar: return "tar";
    case bag::ArchiveFormat::zip: return "zip";
    default: return "directory";
  }
}

Json bag_summary(const bag::Bag& b, const fs::path& path, bag::ArchiveFormat format) {
  const auto sum = idspace::bag_checksum(b);
  const auto oxum = bag::compute_oxum(b);
  return Json{{"path", fs::absolute(path).lexically_normal().string()},
              {"format", std::string(format_name(format))},
              {"payload_files", b.payload.size()},
              {"fetch_entries", b.fetch.size()},
              {"oxum", oxum ? Json(*oxum) : Json()},
              {"checksum", {{"algorithm", "sha256"}, {"digest", sum.digest}}}};
}

Json report_json(const bag::BagValidationReport& r) {
  Json problems = Json::array();
  for (const auto& p : r.problems) {
    problems.push_back({{"severity", p.severity == bag::Severity::error ? "error" : "warning"},
                        {"code", p.code},
                        {"path", p.path},
                        {"detail", p.detail}});
  }
  return Json{{"is_complete", r.is_complete}, {"is_valid", r.is_valid}, {"problems", std::move(problems)}};
}

std::string report_human(const bag::BagValidationReport& r, bool want_valid) {
  const bool ok = want_valid ? r.is_valid : r.is_complete;
  std::string s = ok ? (want_valid ? "valid\n" : "complete\n") : (want_valid ? "invalid\n" : "incomplete\n");
  for (const auto& p : r.problems) {
    s += "  " + p.code + " " + p.path;
    if (!p.detail.empty()) s += ": " + p.detail;
    s += "\n";
  }
  return s;
}

void serve_until_signal(services::Workspace& ws, const services::ServeConfig& cfg, std::ostream& out, bool json) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  // Block before the server spawns threads so only sigwait sees them.
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  services::Api api(ws);
  services::Server server(api, cfg);
  if (json) {
    out << canonical(Json{{"url", server.base_url()}, {"version", std::string(services::kVersion)}}) << "\n";
  } else {
    out << "fair " << services::kVersion << " listening on " << server.base_url() << "\n";
  }
  out.flush();
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  pthread_sigmask(SIG_UNBLOCK, &set, nullptr);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Environment& env) {
  CLI::App app{"FAIR data toolkit: bags, identifiers, catalog and flows", "fair"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "JSON config file with url, token, data_dir, output");
  app.add_option("--url", g.url, "Service base URL (online mode)");
  app.add_option("--token", g.token, "Bearer token");
  app.add_option("--data-dir", g.data_dir, "Local data directory (offline mode)");
  app.add_flag("--json", g.json, "Emit canonical JSON only");

  // --- bag ---
  auto* bag_cmd = app.add_subcommand("bag", "Create, check and transform bags (local)")->require_subcommand(1);
  std::string b_src, b_dest, b_format, b_level = "valid", b_base;
  std::vector<std::string> b_algs{"sha256"}, b_info, b_paths;
  auto* b_create = bag_cmd->add_subcommand("create", "Bag a directory");
  b_create->add_option("source", b_src, "Directory to bag")->required();
  b_create->add_option("dest", b_dest, "Output directory or .tar/.zip")->required();
  b_create->add_option("--algorithm", b_algs, "Manifest algorithm (repeatable)");
  b_create->add_option("--info", b_info, "bag-info Label=Value (repeatable)");
  b_create->add_option("--format", b_format, "directory, tar or zip (default from dest)");
  auto* b_validate = bag_cmd->add_subcommand("validate", "Check a bag directory or archive");
  b_validate->add_option("path", b_src, "Bag")->required();
  b_validate->add_option("--level", b_level, "complete or valid")->check(CLI::IsMember({"complete", "valid"}));
  auto* b_holey = bag_cmd->add_subcommand("holey", "Replace payload files with fetch entries");
  b_holey->add_option("source", b_src, "Bag")->required();
  b_holey->add_option("dest", b_dest, "Output bag")->required();
  b_holey->add_option("--base-url", b_base, "URL prefix the externalized files are served from")->required();
  b_holey->add_option("--path", b_paths, "Payload path to externalize, relative to data/ (repeatable; default all)");
  b_holey->add_option("--format", b_format, "directory, tar or zip (default from dest)");
  auto* b_mat = bag_cmd->add_subcommand("materialize", "Fetch and verify every fetch entry");
  b_mat->add_option("path", b_src, "Holey bag")->required();
  b_mat->add_option("--dest", b_dest, "Write the filled bag here instead of in place");
  auto* b_archive = bag_cmd->add_subcommand("archive", "Serialize a bag as tar or zip");
  b_archive->add_option("source", b_src, "Bag")->required();
  b_archive->add_option("dest", b_dest, "Output archive")->required();
  b_archive->add_option("--format", b_format, "tar or zip (default from dest)");

  // --- id ---
  auto* id_cmd = app.add_subcommand("id", "Mint and resolve identifiers")->require_subcommand(1);
  std::string i_id, i_file, i_digest, i_alg = "sha256", i_title, i_ns, i_doi;
  std::vector<std::string> i_locs;
  auto* i_mint = id_cmd->add_subcommand("mint", "Mint an identifier for content");
  i_mint->add_option("--file", i_file, "Compute the checksum of this file, or of this bag directory");
  i_mint->add_option("--digest", i_digest, "Hex checksum");
  i_mint->add_option("--algorithm", i_alg, "Checksum algorithm");
  i_mint->add_option("--location", i_locs, "Location URL (repeatable)")->required();
  i_mint->add_option("--title", i_title, "Title");
  i_mint->add_option("--namespace", i_ns, "Identifier namespace");
  auto* i_resolve = id_cmd->add_subcommand("resolve", "Show an identifier record");
  i_resolve->add_option("id", i_id, "Identifier")->required();
  auto* i_update = id_cmd->add_subcommand("update", "Replace the locations of an identifier");
  i_update->add_option("id", i_id, "Identifier")->required();
  i_update->add_option("--location", i_locs, "Location URL (repeatable)")->required();
  auto* i_upgrade = id_cmd->add_subcommand("upgrade", "Supersede an identifier with a DOI");
  i_upgrade->add_option("id", i_id, "Identifier")->required();
  i_upgrade->add_option("--doi", i_doi, "DOI")->required();

  // --- catalog ---
  auto* cat_cmd = app.add_subcommand("catalog", "Model, records, queries and export")->require_subcommand(1);
  std::string c_apply, c_table, c_rid, c_values, c_key, c_rmt, c_path, c_after, c_out, c_format = "tar", c_title;
  std::optional<std::uint64_t> c_snapshot;
  std::size_t c_limit = 100;
  int c_depth = 1;
  bool c_inbound = false, c_no_bind = false;
  std::vector<std::string> c_sets, c_filters, c_facets, c_roots;
  auto* c_model = cat_cmd->add_subcommand("model", "Show the model or apply model changes");
  c_model->add_option("--apply", c_apply, "File with a change or an array of changes ('-' for stdin)");
  c_model->add_option("--snapshot", c_snapshot, "Model as of this snapshot");
  auto* c_insert = cat_cmd->add_subcommand("insert", "Insert a record");
  c_insert->add_option("table", c_table, "schema:Table")->required();
  c_insert->add_option("--values", c_values, "JSON object of column values");
  c_insert->add_option("--set", c_sets, "Column=value, as text (repeatable)");
  c_insert->add_option("--idempotency-key", c_key, "Repeat-safe request key");
  auto* c_update = cat_cmd->add_subcommand("update", "Update a record");
  c_update->add_option("rid", c_rid, "Record id")->required();
  c_update->add_option("--values", c_values, "JSON object of column values");
  c_update->add_option("--set", c_sets, "Column=value, as text (repeatable)");
  c_update->add_option("--rmt", c_rmt, "Fail with Conflict unless the record's RMT still equals this");
  c_update->add_option("--table", c_table, "Extension table sharing the RID");
  auto* c_query = cat_cmd->add_subcommand("query", "Query a table path");
  c_query->add_option("path", c_path, "schema:Table[/filter][/schema:Other]...")->required();
  c_query->add_option("--filter", c_filters, "col<op>value (repeatable)");
  c_query->add_option("--facet", c_facets, "Facet column (repeatable)");
  c_query->add_option("--snapshot", c_snapshot, "Snapshot id");
  c_query->add_option("--after", c_after, "Cursor from a previous page");
  c_query->add_option("--limit", c_limit, "Page size");
  auto* c_export = cat_cmd->add_subcommand("export", "Export records as a dataset bag");
  c_export->add_option("--root", c_roots, "Root RID (repeatable)")->required();
  c_export->add_option("--out", c_out, "Archive path (default <id>.<format>)");
  c_export->add_option("--format", c_format, "tar or zip")->check(CLI::IsMember({"tar", "zip"}));
  c_export->add_option("--depth", c_depth, "Foreign-key hops");
  c_export->add_flag("--inbound", c_inbound, "Also follow references pointing at selected rows");
  c_export->add_flag("--no-bind", c_no_bind, "Do not mint an identifier for the bag");
  c_export->add_option("--title", c_title, "Identifier title");
  c_export->add_option("--snapshot", c_snapshot, "Snapshot id");

  // --- flow ---
  auto* flow_cmd = app.add_subcommand("flow", "Define, run and inspect flows")->require_subcommand(1);
  std::string f_file, f_flow, f_run;
  std::vector<std::string> f_params;
  bool f_not_idempotent = false;
  auto* f_define = flow_cmd->add_subcommand("define", "Store a flow definition");
  f_define->add_option("file", f_file, "Flow document ('-' for stdin)")->required();
  auto* f_runc = flow_cmd->add_subcommand("run", "Run a flow");
  f_runc->add_option("flow", f_flow, "Flow document file or stored flow name")->required();
  f_runc->add_option("--param", f_params, "name=value (repeatable); local file values become absolute paths");
  f_runc->add_flag("--not-idempotent", f_not_idempotent, "Do not reuse outputs of earlier runs");
  auto* f_resume = flow_cmd->add_subcommand("resume", "Resume a failed run");
  f_resume->add_option("run_id", f_run, "Run id")->required();
  auto* f_audit = flow_cmd->add_subcommand("audit", "Show a run's audit log");
  f_audit->add_option("run_id", f_run, "Run id")->required();

  // --- init / serve ---
  std::string n_dir, n_ids_ns = "MINID", n_cat_ns = "CATALOG", n_cite = "http://localhost:8080", s_acl;
  auto* init_cmd = app.add_subcommand("init", "Initialize a data directory");
  init_cmd->add_option("dir", n_dir, "Directory (default --data-dir)");
  init_cmd->add_option("--ids-namespace", n_ids_ns, "Namespace for minted identifiers");
  init_cmd->add_option("--catalog-namespace", n_cat_ns, "Namespace for record ids");
  init_cmd->add_option("--citation-base", n_cite, "Public base URL used in citation links");
  services::ServeConfig serve_cfg;
  auto* serve_cmd = app.add_subcommand("serve", "Serve a data directory over HTTP");
  serve_cmd->add_option("--host", serve_cfg.host, "Bind address");
  serve_cmd->add_option("--port", serve_cfg.port, "Port (0 picks a free one)");
  serve_cmd->add_option("--threads", serve_cfg.threads, "Worker threads");
  serve_cmd->add_option("--acl", s_acl, "ACL file (default <data-dir>/acl.json)");

  const auto print_error = [&](Errc code, const std::string& detail) {
    if (g.json) {
      out << canonical(services::api_error_json(code, detail)) << "\n";
    } else {
      err << "error: " << errc_name(code) << ": " << detail << "\n";
    }
  };

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    print_error(Errc::UsageError, e.what());
    return kUsage;
  }

  try {
    // Flags, then environment, then config file; the first layer that names
    // a target decides the mode.
    Json config = Json::object();
    if (!g.config.empty()) {
      config = parse_json_arg(read_input(g.config), "--config");
      if (!config.is_object()) fail(Errc::UsageError, "--config must hold a JSON object");
      if (config.value("output", std::string()) == "json") g.json = true;
    }
    std::string url, dir;
    if (!g.url.empty() || !g.data_dir.empty()) {
      url = g.url;
      dir = g.data_dir;
    } else if (env.get("FAIR_URL")) {
      url = *env.get("FAIR_URL");
    } else {
      url = config.value("url", std::string());
      dir = config.value("data_dir", std::string());
    }
    if (!url.empty() && !dir.empty()) fail(Errc::UsageError, "set either a service URL or a data directory, not both");
    std::string token = g.token;
    if (token.empty() && env.get("FAIR_TOKEN")) token = *env.get("FAIR_TOKEN");
    if (token.empty()) token = config.value("token", std::string());

    Backend backend(url, dir, token);
    const auto need_backend = [&] {
      if (url.empty() && dir.empty())
        fail(Errc::UsageError, "no target: pass --url (or FAIR_URL) or --data-dir");
    };

    Outcome o;
    if (bag_cmd->parsed()) {
      const fs::path src = b_src;
      if (b_create->parsed()) {
        bag::CreateOptions co;
        co.algorithms.clear();
        for (const auto& a : b_algs) co.algorithms.insert(*algorithm_arg(a));
        for (const auto& kv : b_info) co.info.push_back(split_kv(kv, "--info"));
        const auto b = bag::create_bag(src, co);
        const auto fmt = format_for(b_format, b_dest);
        bag::write_bag(b, b_dest, {fmt, true, {}});
        o.json = bag_summary(b, b_dest, fmt);
      } else if (b_validate->parsed()) {
        const bool valid = b_level == "valid";
        const auto r = bag::check(src, valid ? bag::CheckLevel::valid : bag::CheckLevel::complete);
        o.json = report_json(r);
        o.human = report_human(r, valid);
        o.code = (valid ? r.is_valid : r.is_complete) ? kOk : kOperationError;
      } else if (b_holey->parsed()) {
        const auto b = bag::read_bag(src);
        std::set<std::string> only;
        for (const auto& p : b_paths) only.insert("data/" + p);
        std::string base = b_base;
        while (!base.empty() && base.back() == '/') base.pop_back();
        const auto holey = bag::make_holey(
            b, [&](const std::string& p) { return only.empty() || only.count(p) > 0; },
            [&](const std::string& p) -> std::optional<std::string> {
              return base + "/" + percent_encode(p.substr(5), "/");
            });
        const auto fmt = format_for(b_format, b_dest);
        bag::write_bag(holey, b_dest, {fmt, true, {}});
        o.json = bag_summary(holey, b_dest, fmt);
      } else if (b_mat->parsed()) {
        const auto resolver = bag::FetchResolver::with_defaults();
        if (b_dest.empty()) {
          if (!fs::is_directory(src)) fail(Errc::UsageError, "in-place materialize needs a bag directory; use --dest");
          const auto b = bag::materialize_directory(src, resolver);
          o.json = bag_summary(b, src, bag::ArchiveFormat::directory);
        } else {
          const auto b = bag::materialize(bag::read_bag(src), resolver);
          const auto fmt = format_for("", b_dest);
          bag::write_bag(b, b_dest, {fmt, true, {}});
          o.json = bag_summary(b, b_dest, fmt);
        }
      } else if (b_archive->parsed()) {
        const auto b = bag::read_bag(src);
        const auto fmt = format_for(b_format, b_dest);
        if (fmt == bag::ArchiveFormat::directory) fail(Errc::UsageError, "archive format must be tar or zip");
        bag::write_bag(b, b_dest, {fmt, true, {}});
        o.json = bag_summary(b, b_dest, fmt);
      }
    } else if (id_cmd->parsed()) {
      need_backend();
      const std::string base = "/v1/id/" + segment(i_id);
      if (i_mint->parsed()) {
        if (i_file.empty() == i_digest.empty()) fail(Errc::UsageError, "give exactly one of --file or --digest");
        std::string digest = i_digest;
        if (!i_file.empty() && fs::is_directory(i_file)) {
          if (i_alg != "sha256") fail(Errc::UsageError, "bag checksums are sha256");
          digest = idspace::bag_checksum(bag::read_bag(i_file)).digest;
        } else if (!i_file.empty()) {
          const auto alg = *algorithm_arg(i_alg);
          if (!fs::is_regular_file(i_file)) fail(Errc::UnreadableSource, i_file);
          const std::array<Algorithm, 1> algs{alg};
          digest = digest_file(i_file, algs).at(0);
        }
        Json body{{"checksum", {{"algorithm", i_alg}, {"digest", digest}}}, {"locations", i_locs}};
        if (!i_title.empty()) body["title"] = i_title;
        if (!i_ns.empty()) body["namespace"] = i_ns;
        o.json = backend.call(request("POST", "/v1/id/mint", body)).json();
      } else if (i_resolve->parsed()) {
        o.json = backend.call(request("GET", base)).json();
      } else if (i_update->parsed()) {
        o.json = backend.call(request("PATCH", base + "/locations", {{"locations", i_locs}})).json();
      } else if (i_upgrade->parsed()) {
        o.json = backend.call(request("POST", base + "/upgrade", {{"doi", i_doi}})).json();
      }
    } else if (cat_cmd->parsed()) {
      need_backend();
      if (c_model->parsed()) {
        if (!c_apply.empty()) {
          Json doc = parse_json_arg(read_input(c_apply), "--apply");
          if (!doc.is_array()) doc = Json::array({doc});
          for (const auto& change : doc) o.json = backend.call(request("POST", "/v1/catalog/model", change)).json();
        } else {
          auto r = request("GET", "/v1/catalog/model");
          if (c_snapshot) r.query.emplace("snapshot", std::to_string(*c_snapshot));
          o.json = backend.call(r).json();
        }
      } else if (c_insert->parsed()) {
        const auto colon = c_table.find(':');
        if (colon == std::string::npos) fail(Errc::UsageError, "table must be schema:Table");
        auto r = request("POST",
                         "/v1/catalog/entity/" + segment(c_table.substr(0, colon)) + "/" + segment(c_table.substr(colon + 1)),
                         record_values(c_values, c_sets));
        if (!c_key.empty()) r.headers["idempotency-key"] = c_key;
        o.json = backend.call(r).json();
      } else if (c_update->parsed()) {
        Json values = record_values(c_values, c_sets);
        if (!c_rmt.empty()) values["RMT"] = c_rmt;
        auto r = request("PATCH", "/v1/catalog/entity/" + segment(c_rid), values);
        if (!c_table.empty()) r.query.emplace("table", c_table);
        o.json = backend.call(r).json();
      } else if (c_query->parsed()) {
        auto r = request("GET", "/v1/catalog/query");
        r.query.emplace("path", c_path);
        for (const auto& f : c_filters) r.query.emplace("filter", f);
        for (const auto& f : c_facets) r.query.emplace("facet", f);
        if (c_snapshot) r.query.emplace("snapshot", std::to_string(*c_snapshot));
        if (!c_after.empty()) r.query.emplace("after", c_after);
        r.query.emplace("limit", std::to_string(c_limit));
        o.json = backend.call(r).json();
      } else if (c_export->parsed()) {
        Json body{{"roots", c_roots}, {"depth", c_depth}, {"inbound", c_inbound}, {"format", c_format},
                  {"bind", !c_no_bind}};
        if (c_snapshot) body["snapshot"] = *c_snapshot;
        if (!c_title.empty()) body["title"] = c_title;
        const auto r = backend.call(request("POST", "/v1/catalog/export", body));
        const auto minid = r.headers.count("X-Minid") ? r.headers.at("X-Minid") : std::string();
        fs::path dest = c_out;
        if (dest.empty()) {
          std::string stem = minid.empty() ? "dataset" : minid.substr(minid.find(':') + 1);
          dest = stem + "." + c_format;
        }
        if (fs::exists(dest)) fail(Errc::DestinationExists, dest.string());
        write_file_atomic(dest, r.body);
        o.json = Json{{"path", fs::absolute(dest).lexically_normal().string()},
                      {"format", c_format},
                      {"bytes", r.body.size()},
                      {"sha256", digest_hex(Algorithm::sha256, r.body)},
                      {"minid", minid.empty() ? Json() : Json(minid)}};
      }
    } else if (flow_cmd->parsed()) {
      need_backend();
      if (f_define->parsed()) {
        o.json = backend.call(request("POST", "/v1/flow/define", parse_json_arg(read_input(f_file), f_file))).json();
      } else if (f_runc->parsed() || f_resume->parsed()) {
        Response r;
        if (f_runc->parsed()) {
          Json params = Json::object();
          for (const auto& kv : f_params) {
            auto [k, v] = split_kv(kv, "--param");
            if (!v.empty() && fs::is_regular_file(v)) v = fs::absolute(v).lexically_normal().string();
            params[k] = v;
          }
          Json flow = fs::is_regular_file(f_flow) ? parse_json_arg(read_file(f_flow), f_flow) : Json(f_flow);
          r = backend.call(request("POST", "/v1/flow/run",
                                   {{"flow", std::move(flow)}, {"params", params}, {"idempotent", !f_not_idempotent}}));
        } else {
          r = backend.call(request("POST", "/v1/flow/" + segment(f_run) + "/resume"));
        }
        o.json = r.json();
        const auto status = o.json.value("status", std::string());
        o.code = status == "completed" ? kOk : kOperationError;
        o.human = "run_id: " + o.json.value("run_id", std::string()) + "\nstatus: " + status + "\n";
        if (status != "completed") o.human += "failed_step: " + o.json.value("failed_step", std::string()) + "\n";
        for (const auto& step : o.json.value("steps", Json::array())) {
          const auto& outs = step.value("outputs", Json::object());
          if (outs.contains("rid")) o.human += "rid: " + outs["rid"].get<std::string>() + "\n";
          if (outs.contains("id")) o.human += "id: " + outs["id"].get<std::string>() + "\n";
          if (step.contains("error") && !step["error"].get<std::string>().empty())
            o.human += "error: " + step["error"].get<std::string>() + "\n";
        }
      } else if (f_audit->parsed()) {
        o.json = backend.call(request("GET", "/v1/flow/" + segment(f_run) + "/audit")).json();
      }
    } else if (init_cmd->parsed()) {
      const std::string target = n_dir.empty() ? g.data_dir : n_dir;
      if (target.empty()) fail(Errc::UsageError, "init needs a directory");
      services::WorkspaceConfig wc;
      wc.ids_namespace = n_ids_ns;
      wc.catalog_namespace = n_cat_ns;
      wc.citation_base = n_cite;
      const auto tok = services::init_workspace(target, wc);
      o.json = Json{{"data_dir", fs::absolute(target).lexically_normal().string()}, {"token", tok}};
      o.human = "initialized " + o.json["data_dir"].get<std::string>() + "\nadmin token: " + tok + "\n";
    } else if (serve_cmd->parsed()) {
      if (dir.empty()) fail(Errc::UsageError, "serve needs --data-dir");
      services::Workspace::Options wo;
      if (!s_acl.empty()) wo.acl_file = s_acl;
      services::Workspace ws(dir, wo);
      serve_until_signal(ws, serve_cfg, out, g.json);
      return kOk;
    }

    if (g.json) {
      out << canonical(o.json) << "\n";
    } else if (!o.human.empty()) {
      out << o.human;
    } else {
      out << o.json.dump(2) << "\n";
    }
    return o.code;
  } catch (const Error& e) {
    print_error(e.code(), e.detail());
    if (e.code() == Errc::Connectivity) return kConnectivity;
    if (e.code() == Errc::UsageError) return kUsage;
    return kOperationError;
  } catch (const std::filesystem::filesystem_error& e) {
    print_error(Errc::IoFailure, e.what());
    return kOperationError;
  } catch (const Json::exception& e) {
    print_error(Errc::BadRequest, e.what());
    return kOperationError;
  }
}

}  // namespace fair::cli
