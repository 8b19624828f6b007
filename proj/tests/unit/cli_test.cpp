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

#include <gtest/gtest.h>

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <sstream>

#include "fair/catalog/catalog.hpp"
#include "fair/cli/cli.hpp"
#include "fair/common/digest.hpp"
#include "fair/common/error.hpp"
#include "fair/common/files.hpp"
#include "fair/idspace/registry.hpp"
#include "fair/services/api.hpp"
#include "fair/services/server.hpp"
#include "fair/services/workspace.hpp"
#include "fixtures.hpp"
#include "testing.hpp"

namespace fair::cli {
namespace {

namespace fs = std::filesystem;
using fair::testing::TempDir;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;

  [[nodiscard]] Json json() const { return Json::parse(out); }
};

Outcome fair(const std::vector<std::string>& args, const Environment& env = {}) {
  std::ostringstream out, err;
  Outcome r;
  r.code = dispatch(args, out, err, env);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Writes the lab model as a change list for `catalog model --apply`.
fs::path lab_model_file(const fs::path& dir) {
  const auto p = dir / "lab-model.json";
  fair::testing::write_file(p, fair::testing::lab_model_changes().dump(2));
  return p;
}

// Blanks the wall-clock fields that differ between two otherwise equal runs.
Json without_times(Json j) {
  if (j.is_object()) {
    for (auto& [k, v] : j.items()) {
      if (k == "RCT" || k == "RMT" || k == "created" || k == "modified" || k == "timestamp") {
        v = "*";
      } else {
        v = without_times(v);
      }
    }
  } else if (j.is_array()) {
    for (auto& v : j) v = without_times(v);
  }
  return j;
}

TEST(Usage, BadInvocationsExitTwo) {
  EXPECT_EQ(fair({}).code, kUsage);
  EXPECT_EQ(fair({"id"}).code, kUsage);
  EXPECT_EQ(fair({"id", "resolve"}).code, kUsage);
  EXPECT_EQ(fair({"catalog", "query", "isa:X", "--no-such-flag"}).code, kUsage);

  const auto r = fair({"--json", "id", "resolve"});
  EXPECT_EQ(r.code, kUsage);
  EXPECT_TRUE(r.err.empty());
  EXPECT_EQ(r.json()["code"], "UsageError");

  // A service command with no target.
  const auto none = fair({"--json", "id", "resolve", "MINID:1"});
  EXPECT_EQ(none.code, kUsage);
  EXPECT_EQ(none.json()["code"], "UsageError");
  EXPECT_EQ(fair({"--url", "http://127.0.0.1:9", "--data-dir", "/tmp", "id", "resolve", "MINID:1"}).code, kUsage);
  EXPECT_EQ(fair({"--help"}).code, kOk);
}

TEST(Init, TwiceIsNotEmpty) {
  TempDir tmp;
  const auto d = (tmp / "data").string();
  const auto first = fair({"--json", "init", d});
  ASSERT_EQ(first.code, kOk) << first.err;
  EXPECT_EQ(first.json()["token"].get<std::string>().size(), 40u);
  const auto again = fair({"--json", "init", d});
  EXPECT_EQ(again.code, kOperationError);
  EXPECT_EQ(again.json()["code"], "NotEmpty");
  EXPECT_EQ(fair({"--json", "--data-dir", (tmp / "nothing").string(), "catalog", "model"}).json()["code"],
            "NotInitialized");
}

TEST(Bag, CreateTamperValidate) {
  TempDir tmp;
  fair::testing::write_tree(tmp / "src", {{"a.txt", "alpha"}, {"sub/b.txt", "beta"}});
  const auto bag = (tmp / "bag").string();
  const auto made = fair({"--json", "bag", "create", (tmp / "src").string(), bag, "--info", "Source-Organization=Lab"});
  ASSERT_EQ(made.code, kOk) << made.out << made.err;
  EXPECT_EQ(made.json()["payload_files"], 2);
  EXPECT_EQ(made.json()["oxum"], "9.2");
  EXPECT_EQ(fair({"bag", "validate", bag}).out, "valid\n");

  fair::testing::write_file(tmp / "bag" / "data" / "sub" / "b.txt", "bexa");
  const auto bad = fair({"--json", "bag", "validate", bag});
  EXPECT_EQ(bad.code, kOperationError);
  EXPECT_TRUE(bad.err.empty());
  const Json rep = bad.json();
  EXPECT_FALSE(rep["is_valid"].get<bool>());
  ASSERT_EQ(rep["problems"].size(), 1u);
  EXPECT_EQ(rep["problems"][0]["code"], "ChecksumMismatch");
  EXPECT_EQ(rep["problems"][0]["path"], "data/sub/b.txt");

  const auto human = fair({"bag", "validate", bag});
  EXPECT_NE(human.out.find("ChecksumMismatch data/sub/b.txt"), std::string::npos);
  // Completeness does not look at digests.
  EXPECT_EQ(fair({"bag", "validate", bag, "--level", "complete"}).code, kOk);
}

TEST(Bag, HoleyMaterializeArchive) {
  TempDir tmp;
  fair::testing::write_tree(tmp / "src", {{"big.bin", std::string(4096, 'x')}, {"small.txt", "s"}});
  fair::testing::write_tree(tmp / "mirror", {{"big.bin", std::string(4096, 'x')}});
  const auto full = (tmp / "full").string();
  const auto holey = (tmp / "holey").string();
  ASSERT_EQ(fair({"bag", "create", (tmp / "src").string(), full}).code, kOk);
  const auto h = fair({"--json", "bag", "holey", full, holey, "--base-url", file_url(tmp / "mirror"), "--path", "big.bin"});
  ASSERT_EQ(h.code, kOk) << h.out << h.err;
  EXPECT_EQ(h.json()["fetch_entries"], 1);
  EXPECT_FALSE(fs::exists(tmp / "holey" / "data" / "big.bin"));
  EXPECT_EQ(fair({"bag", "validate", holey, "--level", "complete"}).code, kOk);
  EXPECT_EQ(fair({"bag", "validate", holey}).code, kOperationError);

  const auto m = fair({"--json", "bag", "materialize", holey});
  ASSERT_EQ(m.code, kOk) << m.out;
  EXPECT_EQ(m.json()["fetch_entries"], 0);
  EXPECT_EQ(fair({"bag", "validate", holey}).code, kOk);
  EXPECT_EQ(m.json()["checksum"], fair({"--json", "bag", "archive", full, (tmp / "full.tar").string()}).json()["checksum"]);

  const auto zip = (tmp / "full.zip").string();
  ASSERT_EQ(fair({"bag", "archive", full, zip}).code, kOk);
  EXPECT_EQ(fair({"bag", "validate", zip}).code, kOk);
  EXPECT_EQ(fair({"bag", "archive", full, (tmp / "x.tar").string(), "--format", "directory"}).code, kUsage);

  // A bag directory mints under the checksum of its deterministic archive.
  const auto data = (tmp / "data").string();
  ASSERT_EQ(fair({"init", data}).code, kOk);
  const auto id = fair({"--json", "--data-dir", data, "id", "mint", "--file", full, "--location", "https://example.org/b.tar"});
  ASSERT_EQ(id.code, kOk) << id.out;
  EXPECT_EQ(id.json()["checksum"], m.json()["checksum"]);
}

TEST(Id, ResolvesTheFixtureRecord) {
  TempDir tmp;
  const auto d = tmp / "data";
  services::WorkspaceConfig cfg;
  cfg.ids_namespace = "SYNAPSE";
  services::init_workspace(d, cfg);
  idspace::MinidRecord rec;
  rec.id = idspace::parse_id("SYNAPSE:1-1ACR");
  rec.creator = "lab";
  rec.created = rec.modified = Timestamp{std::chrono::seconds{1'500'000'000}};
  rec.checksum = {Algorithm::sha256, digest_hex(Algorithm::sha256, "panel")};
  rec.locations = {"https://example.org/fin-panel"};
  rec.title = "Fin regeneration panel";
  rec.actor = "lab";
  write_file_atomic(d / "ids.log", canonical(idspace::to_json(rec)) + "\n");

  const auto r = fair({"--json", "--data-dir", d.string(), "id", "resolve", "SYNAPSE:1-1ACR"});
  ASSERT_EQ(r.code, kOk) << r.out << r.err;
  EXPECT_EQ(r.json(), idspace::to_json(rec));
  EXPECT_EQ(fair({"--data-dir", d.string(), "id", "resolve", "synapse:1-1acr"}).code, kOk);
  const auto bad = fair({"--json", "--data-dir", d.string(), "id", "resolve", "SYNAPSE:1-1ACU"});
  EXPECT_EQ(bad.json()["code"], "MalformedId");
}

// A data directory with the lab model and a few records, written offline.
struct Seeded {
  TempDir tmp;
  fs::path data = tmp / "data";
  std::string token;
  std::string protocol, subject, minid;
  fs::path image = tmp / "instrument" / "img001.tif";

  Seeded() {
    token = fair({"--json", "init", data.string(), "--catalog-namespace", "SYNAPSE"}).json()["token"];
    const auto off = offline();
    EXPECT_EQ(fair(with(off, {"catalog", "model", "--apply", lab_model_file(tmp.path()).string()})).code, kOk);
    protocol = fair(with(off, {"--json", "catalog", "insert", "isa:Protocol", "--set", "Name=Imaging"})).json()["RID"];
    subject = fair(with(off, {"--json", "catalog", "insert", "isa:Subject", "--set", "Name=Fish 1", "--set",
                              "Protocol=" + protocol, "--set", "Status=Done"}))
                  .json()["RID"];
    fair::testing::write_file(image, "tiff bytes");
    minid = fair(with(off, {"--json", "id", "mint", "--file", image.string(), "--location", file_url(image)}))
                .json()["id"];
  }

  [[nodiscard]] std::vector<std::string> offline() const { return {"--data-dir", data.string()}; }

  static std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  }
};

// Serves a data directory in-process for online commands.
struct Online {
  services::Workspace ws;
  services::Api api;
  services::Server server;
  explicit Online(const fs::path& data) : ws(data), api(ws), server(api, {"127.0.0.1", 0, 2}) {}
};

TEST(Equivalence, ReadsMatchOfflineAndOnline) {
  Seeded s;
  const std::vector<std::vector<std::string>> reads{
      {"--json", "catalog", "model"},
      {"--json", "catalog", "query", "isa:Subject", "--facet", "Status"},
      {"--json", "catalog", "query", "isa:Protocol/isa:Subject", "--filter", "Name~fish"},
      {"--json", "catalog", "query", "isa:Subject", "--snapshot", "7"},
      {"--json", "catalog", "model", "--snapshot", "3"},
      {"--json", "id", "resolve", s.minid},
      {"--json", "id", "resolve", s.subject},
      {"--json", "id", "resolve", "MINID:ZZZZ-ZZZZ"},
      {"--json", "catalog", "query", "isa:Nope"},
      {"catalog", "query", "isa:Subject"},
  };
  std::vector<Outcome> offline;
  for (const auto& r : reads) offline.push_back(fair(Seeded::with(s.offline(), r)));

  Online on(s.data);
  const std::vector<std::string> url{"--url", on.server.base_url(), "--token", s.token};
  for (std::size_t i = 0; i < reads.size(); ++i) {
    const auto online = fair(Seeded::with(url, reads[i]));
    EXPECT_EQ(online.out, offline[i].out) << reads[i][2];
    EXPECT_EQ(online.code, offline[i].code) << reads[i][2];
  }
  // init, insert offline, serve, query: one record.
  const auto q = fair(Seeded::with(url, {"--json", "catalog", "query", "isa:Protocol"})).json();
  EXPECT_EQ(q["count"], 1);
}

TEST(Equivalence, WritesMatchOfflineAndOnline) {
  Seeded s;
  const auto copy = s.tmp / "copy";
  fs::copy(s.data, copy, fs::copy_options::recursive);
  fs::remove(copy / ".lock");

  auto flow_file = s.tmp / "publish.flow";
  fair::testing::write_file(flow_file, fair::testing::publish_flow_doc().dump(2));
  const std::vector<std::vector<std::string>> writes{
      {"--json", "catalog", "insert", "isa:Protocol", "--set", "Name=Staining", "--set", "Description=x"},
      {"--json", "catalog", "update", s.subject, "--values", R"({"Age_Days": 5})"},
      {"--json", "catalog", "model", "--apply", "-"},
      {"--json", "id", "update", s.minid, "--location", "https://mirror.example.org/img001.tif"},
      {"--json", "id", "upgrade", s.minid, "--doi", "10.25551/1/1-1F6W"},
      {"--json", "flow", "define", flow_file.string()},
      {"--json", "catalog", "insert", "isa:Subject", "--set", "Status=finnished"},
  };
  // --apply - reads stdin; use a file instead for both modes.
  const auto change = s.tmp / "change.json";
  fair::testing::write_file(change, R"({"op":"add_column","table":"isa:Subject","column":{"name":"Sex","type":"text"}})");
  auto patched = writes;
  patched[2].back() = change.string();

  std::vector<Outcome> offline;
  for (const auto& w : patched) offline.push_back(fair(Seeded::with(s.offline(), w)));
  Online on(copy);
  const std::vector<std::string> url{"--url", on.server.base_url(), "--token", s.token};
  for (std::size_t i = 0; i < patched.size(); ++i) {
    const auto online = fair(Seeded::with(url, patched[i]));
    EXPECT_EQ(online.code, offline[i].code) << patched[i][2];
    EXPECT_EQ(without_times(online.json()), without_times(offline[i].json())) << patched[i][2];
  }
}

TEST(ScriptSafety, JsonModeEmitsOneDocumentOnly) {
  Seeded s;
  const std::vector<std::vector<std::string>> cmds{
      {"--json", "catalog", "model"},
      {"--json", "catalog", "insert", "isa:Nope", "--set", "a=b"},
      {"--json", "catalog", "insert", "isa:Protocol", "--values", "{not json"},
      {"--json", "id", "resolve", "nonsense"},
      {"--json", "flow", "audit", "RUN:0000"},
      {"--json", "bag", "validate", (s.tmp / "missing").string()},
  };
  for (const auto& c : cmds) {
    const auto r = fair(Seeded::with(s.offline(), c));
    EXPECT_TRUE(r.err.empty()) << c[2] << ": " << r.err;
    ASSERT_FALSE(r.out.empty()) << c[2];
    EXPECT_EQ(r.out.back(), '\n');
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1) << c[2];
    EXPECT_TRUE(Json::accept(r.out)) << c[2];
  }
}

TEST(Config, FlagsThenEnvironmentThenConfigFile) {
  Seeded s;
  Online on(s.data);
  const auto url = on.server.base_url();
  Environment env;
  env.vars["FAIR_URL"] = url;
  env.vars["FAIR_TOKEN"] = s.token;
  const std::vector<std::string> mint{"--json", "id", "mint", "--digest", digest_hex(Algorithm::sha256, "q"),
                                      "--location", "https://example.org/q"};
  EXPECT_EQ(fair(mint, env).code, kOk);

  // The environment token is used; a wrong flag token overrides it.
  auto wrong = mint;
  wrong.insert(wrong.begin(), {"--token", "nope"});
  EXPECT_EQ(fair(wrong, env).json()["code"], "Forbidden");
  // No token: anonymous may read, not write.
  Environment anon;
  anon.vars["FAIR_URL"] = url;
  EXPECT_EQ(fair(mint, anon).json()["code"], "Forbidden");
  EXPECT_EQ(fair({"--json", "id", "resolve", s.minid}, anon).code, kOk);

  const auto cfg = s.tmp / "fair.json";
  fair::testing::write_file(cfg, Json{{"url", url}, {"token", s.token}, {"output", "json"}}.dump());
  const auto via_config = fair({"--config", cfg.string(), "id", "resolve", s.minid});
  EXPECT_EQ(via_config.code, kOk);
  EXPECT_EQ(via_config.json()["id"], s.minid);

  // Environment beats the config file.
  Environment dead;
  dead.vars["FAIR_URL"] = "http://127.0.0.1:9";
  EXPECT_EQ(fair({"--config", cfg.string(), "id", "resolve", s.minid}, dead).code, kConnectivity);
}

TEST(Offline, ConcurrentWriterIsLocked) {
  Seeded s;
  services::Workspace holder(s.data);
  const auto r = fair(Seeded::with(s.offline(), {"--json", "catalog", "model"}));
  EXPECT_EQ(r.code, kOperationError);
  EXPECT_EQ(r.json()["code"], "Locked");
}

TEST(Flow, RunPrintsRunIdAndRid) {
  Seeded s;
  const auto flow_file = s.tmp / "publish.flow";
  fair::testing::write_file(flow_file, fair::testing::publish_flow_doc().dump(2));
  const auto r = fair(Seeded::with(
      s.offline(), {"flow", "run", flow_file.string(), "--param", "source=" + s.image.string(), "--param",
                    "subject=" + s.subject}));
  ASSERT_EQ(r.code, kOk) << r.out << r.err;
  EXPECT_NE(r.out.find("run_id: RUN:"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("status: completed"), std::string::npos);
  EXPECT_NE(r.out.find("rid: SYNAPSE:"), std::string::npos) << r.out;

  const auto run_id = r.out.substr(8, r.out.find('\n') - 8);
  const auto audit = fair(Seeded::with(s.offline(), {"--json", "flow", "audit", run_id})).json();
  EXPECT_EQ(audit["well_formed"], true);
  EXPECT_EQ(fair(Seeded::with(s.offline(), {"--json", "flow", "resume", run_id})).json()["code"], "NotResumable");

  // A failing run exits 1 and names the step.
  const auto failed = fair(Seeded::with(
      s.offline(), {"flow", "run", flow_file.string(), "--param", "source=/nonexistent/x.tif", "--param",
                    "subject=" + s.subject}));
  EXPECT_EQ(failed.code, kOperationError);
  EXPECT_NE(failed.out.find("failed_step: capture"), std::string::npos) << failed.out;
}

TEST(Catalog, ExportWritesBoundArchive) {
  Seeded s;
  const auto out = s.tmp / "ds.tar";
  const auto r = fair(Seeded::with(s.offline(), {"--json", "catalog", "export", "--root", s.subject, "--out",
                                                 out.string(), "--title", "Fish 1"}));
  ASSERT_EQ(r.code, kOk) << r.out;
  const auto res = fair(Seeded::with(s.offline(), {"--json", "id", "resolve", r.json()["minid"]})).json();
  EXPECT_EQ(res["checksum"]["digest"], digest_hex(Algorithm::sha256, read_file(out)));
  EXPECT_EQ(res["title"], "Fish 1");
  EXPECT_EQ(fair({"bag", "validate", out.string()}).code, kOk);
  // Refuses to overwrite.
  EXPECT_EQ(fair(Seeded::with(s.offline(), {"--json", "catalog", "export", "--root", s.subject, "--out", out.string()}))
                .json()["code"],
            "DestinationExists");
}

TEST(Catalog, UpdateWithStaleRmtIsConflict) {
  Seeded s;
  const auto rec = fair(Seeded::with(s.offline(), {"--json", "id", "resolve", s.protocol})).json()["record"];
  const auto rmt = rec["RMT"].get<std::string>();
  EXPECT_EQ(fair(Seeded::with(s.offline(), {"catalog", "update", s.protocol, "--set", "Description=a", "--rmt", rmt})).code,
            kOk);
  // Every version of a row gets a later RMT, even within one clock second.
  const auto now = fair(Seeded::with(s.offline(), {"--json", "id", "resolve", s.protocol})).json()["record"]["RMT"];
  EXPECT_NE(now, rmt);
  const auto clash =
      fair(Seeded::with(s.offline(), {"--json", "catalog", "update", s.protocol, "--set", "Description=b", "--rmt", rmt}));
  EXPECT_EQ(clash.json()["code"], "Conflict");
}

TEST(Serve, ProcessServesHealthzAndStopsOnSigterm) {
  TempDir tmp;
  const auto d = (tmp / "data").string();
  ASSERT_EQ(fair({"init", d}).code, kOk);
  int pipefd[2];
  ASSERT_EQ(pipe(pipefd), 0);
  const pid_t pid = fork();
  if (pid == 0) {
    dup2(pipefd[1], 1);
    close(pipefd[0]);
    execl(FAIR_BINARY, FAIR_BINARY, "--json", "--data-dir", d.c_str(), "serve", "--port", "0", nullptr);
    _exit(127);
  }
  close(pipefd[1]);
  FILE* f = fdopen(pipefd[0], "r");
  char line[512] = {0};
  ASSERT_NE(fgets(line, sizeof line, f), nullptr);
  const Json hello = Json::parse(line);
  const auto url = hello["url"].get<std::string>();

  services::Request h;
  h.method = "GET";
  h.path = "/v1/healthz";
  const auto r = services::http_call(url, h);
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.json()["status"], "ok");

  // While served, offline writers are locked out.
  EXPECT_EQ(fair({"--json", "--data-dir", d, "catalog", "model"}).json()["code"], "Locked");

  kill(pid, SIGTERM);
  int status = 0;
  waitpid(pid, &status, 0);
  fclose(f);
  EXPECT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
  // The lock is released on shutdown.
  EXPECT_EQ(fair({"--data-dir", d, "catalog", "model"}).code, kOk);
}

}  // namespace
}  // namespace fair::cli
