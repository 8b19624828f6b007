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

#include <fstream>

#include "fair/bag/fetch.hpp"
#include "fair/catalog/catalog.hpp"
#include "fair/catalog/exchange.hpp"
#include "fair/common/error.hpp"
#include "fair/common/files.hpp"
#include "testing.hpp"

namespace fair::catalog {
namespace {

using fair::testing::TempDir;

const Principal kAdmin{"admin", {"admin"}};

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::Internal;
}

Catalog::Options options() {
  Catalog::Options o;
  o.ns = "SYNAPSE";
  o.clock = SteppingClock(Timestamp{std::chrono::seconds{1'790'000'000}});
  o.citation_base = "https://synapse.example.org";
  return o;
}

void change(Catalog& c, Json doc) { c.apply_model_change(ModelChange{std::move(doc)}, kAdmin); }

void build_model(Catalog& c) {
  change(c, {{"op", "add_vocabulary"},
             {"schema", "isa"},
             {"name", "Status"},
             {"terms", Json::array({Json{{"canonical", "completed"}, {"synonyms", {"done", "finished", "complete"}}},
                                    Json{{"canonical", "in-progress"}, {"synonyms", {"ongoing"}}}})}});
  change(c, {{"op", "add_table"},
             {"schema", "isa"},
             {"name", "Protocol"},
             {"columns", Json::array({Json{{"name", "Name"}, {"type", "text"}, {"nullable", false}},
                                      Json{{"name", "Description"}, {"type", "text"}}})},
             {"keys", Json::array({Json::array({"Name"})})}});
  change(c, {{"op", "add_table"},
             {"schema", "isa"},
             {"name", "Subject"},
             {"columns", Json::array({Json{{"name", "Name"}, {"type", "text"}},
                                      Json{{"name", "Protocol"}, {"type", "identifier"}},
                                      Json{{"name", "Status"}, {"type", "term"}, {"vocabulary", "isa:Status"}},
                                      Json{{"name", "Age"}, {"type", "integer"}}})},
             {"foreign_keys", Json::array({Json{{"columns", {"Protocol"}}, {"table", "isa:Protocol"}}})}});
  change(c, {{"op", "add_table"},
             {"schema", "isa"},
             {"name", "Image"},
             {"kind", "asset"},
             {"columns", Json::array({Json{{"name", "Subject"}, {"type", "identifier"}}})},
             {"foreign_keys", Json::array({Json{{"columns", {"Subject"}}, {"table", "isa:Subject"}}})}});
}

TEST(Model, ChangesAndErrors) {
  TempDir tmp;
  Catalog c(tmp / "catalog.log", options());
  build_model(c);
  const auto m = c.model();
  EXPECT_EQ(m.version, 4);
  const TableDef* image = m.find_table("Image");
  ASSERT_NE(image, nullptr);
  EXPECT_EQ(image->kind, TableKind::asset);
  EXPECT_NE(image->column("URL"), nullptr);
  EXPECT_NE(image->column("Checksum"), nullptr);
  EXPECT_NE(image->column("RID"), nullptr);

  EXPECT_EQ(code_of([&] {
              change(c, {{"op", "add_table"}, {"schema", "isa"}, {"name", "X"},
                         {"columns", Json::array({Json{{"name", "S"}, {"type", "term"}, {"vocabulary", "isa:Nope"}}})}});
            }),
            Errc::DanglingReference);
  EXPECT_EQ(code_of([&] { change(c, {{"op", "add_table"}, {"schema", "isa"}, {"name", "Subject"}}); }), Errc::DuplicateName);
  EXPECT_EQ(code_of([&] { change(c, {{"op", "add_column"}, {"table", "isa:Subject"}, {"column", {{"name", "Age"}}}}); }),
            Errc::DuplicateName);
  EXPECT_EQ(code_of([&] { change(c, {{"op", "add_foreign_key"}, {"table", "isa:Subject"}, {"columns", {"Name"}}, {"references", "isa:Ghost"}}); }),
            Errc::DanglingReference);
  EXPECT_EQ(c.model().version, 4);  // rejected changes leave no version behind
}

TEST(Model, RenameKeepsAliasAndLinks) {
  TempDir tmp;
  Catalog c(tmp / "catalog.log", options());
  build_model(c);
  change(c, {{"op", "rename_column"}, {"table", "isa:Subject"}, {"from", "Protocol"}, {"to", "Protocol_RID"}});
  const auto m = c.model();
  const TableDef& s = *m.find_table("isa:Subject");
  EXPECT_EQ(s.foreign_keys[0].columns, std::vector<std::string>{"Protocol_RID"});
  EXPECT_EQ(s.resolve_column("Protocol")->name, "Protocol_RID");
  EXPECT_EQ(to_json(s)["aliases"]["Protocol"], "Protocol_RID");
  EXPECT_EQ(code_of([&] { change(c, {{"op", "add_column"}, {"table", "isa:Subject"}, {"column", {{"name", "Protocol"}}}}); }),
            Errc::DuplicateName);
  EXPECT_EQ(code_of([&] { change(c, {{"op", "rename_column"}, {"table", "isa:Subject"}, {"from", "RID"}, {"to", "Id"}}); }),
            Errc::InvalidOperation);
}

TEST(Terms, NormalizationIsStrict) {
  TempDir tmp;
  Catalog c(tmp / "catalog.log", options());
  build_model(c);
  EXPECT_EQ(c.normalize_term("isa:Status", "completed"), "completed");
  EXPECT_EQ(c.normalize_term("isa:Status", "  Done "), "completed");
  EXPECT_EQ(c.normalize_term("isa:Status", "ONGOING"), "in-progress");
  EXPECT_EQ(code_of([&] { (void)c.normalize_term("isa:Status", "finnished"); }), Errc::UnknownTerm);
  EXPECT_EQ(code_of([&] { change(c, {{"op", "add_synonym"}, {"vocabulary", "isa:Status"}, {"term", "in-progress"}, {"synonym", "DONE"}}); }),
            Errc::DuplicateName);
  change(c, {{"op", "add_synonym"}, {"vocabulary", "isa:Status"}, {"term", "completed"}, {"synonym", "finalized"}});
  EXPECT_EQ(c.normalize_term("isa:Status", "Finalized"), "completed");
}

TEST(Records, InsertGetAndTypes) {
  TempDir tmp;
  Catalog c(tmp / "catalog.log", options());
  build_model(c);
  const auto p = c.insert("isa:Protocol", {{"Name", "Imaging"}, {"Description", "SPIM"}}, kAdmin);
  EXPECT_EQ(p.rid.ns, "SYNAPSE");
  const auto s = c.insert("isa:Subject", {{"Name", "Fish 1"}, {"Protocol", p.rid.str()}, {"Status", "done"}, {"Age", "12"}}, kAdmin);
  const Json j = c.render(*c.get(s.rid));
  EXPECT_EQ(j["Status"], "completed");
  EXPECT_EQ(j["Age"], 12);
  EXPECT_EQ(j["Protocol"], p.rid.str());
  EXPECT_EQ(j["RCT"], j["RMT"]);

  EXPECT_EQ(code_of([&] { c.insert("isa:Subject", {{"Age", "twelve"}}, kAdmin); }), Errc::TypeViolation);
  EXPECT_EQ(code_of([&] { c.insert("isa:Subject", {{"Status", "finnished"}}, kAdmin); }), Errc::UnknownTerm);
  EXPECT_EQ(code_of([&] { c.insert("isa:Subject", {{"Nope", "x"}}, kAdmin); }), Errc::UnknownColumn);
  EXPECT_EQ(code_of([&] { c.insert("isa:Subject", {{"RID", "SYNAPSE:1"}}, kAdmin); }), Errc::TypeViolation);
  EXPECT_EQ(code_of([&] { c.insert("isa:Protocol", {{"Description", "no name"}}, kAdmin); }), Errc::TypeViolation);
  EXPECT_EQ(code_of([&] { c.insert("isa:Protocol", {{"Name", "Imaging"}}, kAdmin); }), Errc::DuplicateKey);
  EXPECT_EQ(code_of([&] { c.insert("isa:Subject", {{"Protocol", "SYNAPSE:ZZZZ"}}, kAdmin); }), Errc::DanglingReference);
  EXPECT_EQ(code_of([&] { c.insert("isa:Image", {{"URL", "file:///x"}, {"Checksum", "abc"}}, kAdmin); }), Errc::TypeViolation);
  EXPECT_EQ(code_of([&] { c.insert("isa:Status", {{"Name", "x"}}, kAdmin); }), Errc::InvalidOperation);
  EXPECT_EQ(code_of([&] { c.insert("isa:Nothing", {}, kAdmin); }), Errc::UnknownTable);
}

TEST(Records, RidShape) {
  TempDir tmp;
  Catalog c(tmp / "catalog.log", options());
  EXPECT_EQ(c.rid_string(1), "SYNAPSE:1");
  EXPECT_EQ(c.rid_string(32), "SYNAPSE:10");
  EXPECT_EQ(c.rid_string(1048576), "SYNAPSE:1-0000");
  EXPECT_EQ(c.rid_number(idspace::parse_id("SYNAPSE:1-1ACR")), 1u * 1048576 + 1 * 32768 + 10 * 1024 + 12 * 32 + 24);
  EXPECT_EQ(c.rid_number(idspace::parse_id("OTHER:1")), std::nullopt);
}

TEST(Records, UpdateHistoryAndSnapshots) {
  TempDir tmp;
  Catalog c(tmp / "catalog.log", options());
  build_model(c);
  const auto s = c.insert("isa:Subject", {{"Name", "Fish"}, {"Status", "ongoing"}}, kAdmin);
  const auto before = c.head();
  c.update(s.rid, {{"Status", "Complete"}}, kAdmin);
  EXPECT_EQ(c.history(s.rid).size(), 2u);
  EXPECT_EQ(c.render(*c.get(s.rid, before))["Status"], "in-progress");
  EXPECT_EQ(c.render(*c.get(s.rid))["Status"], "completed");
  Query q{"isa:Subject", {"Status=in-progress"}, {}, before};
  EXPECT_EQ(c.query(q).count, 1u);
  q.snapshot.reset();
  EXPECT_EQ(c.query(q).count, 0u);

  c.update(s.rid, {{"Age", 3}}, kAdmin);
  const auto last = c.update(s.rid, {{"Age", 4}}, kAdmin);
  const auto res = c.resolve_rid(s.rid);
  EXPECT_EQ(res.table, "isa:Subject");
  EXPECT_EQ(res.head.rmt, last.rmt);
  EXPECT_GT(res.head.rmt, res.head.rct);
  EXPECT_EQ(res.citation, "https://synapse.example.org/v1/id/" + s.rid.str());

  c.remove(s.rid, kAdmin);
  EXPECT_EQ(code_of([&] { c.update(s.rid, {{"Age", 5}}, kAdmin); }), Errc::NotFound);
  EXPECT_EQ(code_of([&] { (void)c.resolve_rid(idspace::parse_id("SYNAPSE:ZZZZ")); }), Errc::NotFound);
  EXPECT_EQ(c.history(s.rid).size(), 5u);
}

TEST(Records, RmtIncreasesPerVersionUnderAFrozenClock) {
  TempDir tmp;
  auto o = options();
  const Timestamp frozen{std::chrono::seconds{1'790'000'000}};
  o.clock = [frozen] { return frozen; };
  std::vector<Timestamp> seen;
  {
    Catalog c(tmp / "catalog.log", o);
    build_model(c);
    const auto p = c.insert("isa:Protocol", {{"Name", "P"}}, kAdmin);
    for (int i = 0; i < 6; ++i) c.update(p.rid, {{"Description", std::to_string(i)}}, kAdmin);
    for (const auto& v : c.history(p.rid)) seen.push_back(v.rmt);
  }
  ASSERT_EQ(seen.size(), 7u);
  EXPECT_EQ(seen.front(), frozen);
  for (std::size_t i = 1; i < seen.size(); ++i) EXPECT_GT(seen[i], seen[i - 1]);
  // Derived on replay, not stored, so a reopened catalog agrees.
  Catalog again(tmp / "catalog.log", o);
  const auto rows = again.rows("isa:Protocol");
  ASSERT_EQ(rows.size(), 1u);
  std::vector<Timestamp> replayed;
  for (const auto& v : again.history(rows[0].rid)) replayed.push_back(v.rmt);
  EXPECT_EQ(replayed, seen);
}

TEST(Query, ConservationFacetsAndPaging) {
  TempDir tmp;
  Catalog c(tmp / "catalog.log", options());
  build_model(c);
  std::vector<idspace::IdString> rids;
  for (const char* status : {"completed", "done", "Finished", "in-progress", "ongoing"}) {
    rids.push_back(c.insert("isa:Subject", {{"Status", status}}, kAdmin).rid);
  }
  c.remove(rids[1], kAdmin);
  Query q{"isa:Subject"};
  q.facets = {"Status"};
  const auto all = c.query(q);
  EXPECT_EQ(all.count, 4u);
  ASSERT_EQ(all.facets.size(), 1u);
  ASSERT_EQ(all.facets[0].second.size(), 2u);
  EXPECT_EQ(all.facets[0].second[0].value, "completed");
  EXPECT_EQ(all.facets[0].second[0].count, 2u);
  EXPECT_EQ(all.facets[0].second[1].value, "in-progress");
  EXPECT_EQ(all.facets[0].second[1].count, 2u);

  // A facet constraint narrows the records but not its own counts.
  q.facets = {"Status=done"};
  const auto picked = c.query(q);
  EXPECT_EQ(picked.count, 2u);
  EXPECT_EQ(picked.facets[0].second.size(), 2u);

  Query paged{"isa:Subject"};
  paged.limit = 3;
  const auto page1 = c.query(paged);
  ASSERT_EQ(page1.records.size(), 3u);
  ASSERT_TRUE(page1.next);
  paged.after = page1.next;
  const auto page2 = c.query(paged);
  EXPECT_EQ(page2.records.size(), 1u);
  EXPECT_FALSE(page2.next);
  EXPECT_EQ(page1.records[0]["RID"], rids[0].str());

  EXPECT_EQ(code_of([&] { (void)c.query({"isa:Ghost"}); }), Errc::UnknownPath);
  EXPECT_EQ(code_of([&] { (void)c.query({"isa:Subject", {"Ghost=1"}}); }), Errc::UnknownColumn);
  EXPECT_EQ(code_of([&] { (void)c.query({"isa:Subject/isa:Status"}); }), Errc::UnknownPath);
}

TEST(Query, AliasResolvesAcrossRename) {
  TempDir tmp;
  Catalog c(tmp / "catalog.log", options());
  build_model(c);
  c.insert("isa:Subject", {{"Name", "a"}, {"Age", 5}}, kAdmin);
  const auto before = c.head();
  change(c, {{"op", "rename_column"}, {"table", "isa:Subject"}, {"from", "Age"}, {"to", "Age_Days"}});
  c.insert("isa:Subject", {{"Name", "b"}, {"Age_Days", 7}}, kAdmin);
  Query old{"isa:Subject", {"Age>=5"}, {}, before};
  const auto r = c.query(old);
  EXPECT_EQ(r.count, 1u);
  EXPECT_EQ(r.records[0]["Age"], 5);  // rendered under that snapshot's model
  Query now{"isa:Subject", {"Age>=5"}};
  const auto r2 = c.query(now);
  EXPECT_EQ(r2.count, 2u);
  EXPECT_EQ(r2.records[1]["Age_Days"], 7);
  Query new_name_old_snapshot{"isa:Subject", {"Age_Days>=5"}, {}, before};
  EXPECT_EQ(c.query(new_name_old_snapshot).count, 1u);
}

TEST(Query, AddedColumnIsNullForOldRecords) {
  TempDir tmp;
  Catalog c(tmp / "catalog.log", options());
  build_model(c);
  const auto s = c.insert("isa:Subject", {{"Name", "a"}}, kAdmin);
  change(c, {{"op", "add_column"}, {"table", "isa:Subject"}, {"column", {{"name", "Sex"}, {"type", "text"}}}});
  const Json j = c.render(*c.get(s.rid));
  EXPECT_TRUE(j.contains("Sex"));
  EXPECT_TRUE(j["Sex"].is_null());
  EXPECT_EQ(j["Name"], "a");
}

TEST(Query, JoinsFollowForeignKeysAndExtensions) {
  TempDir tmp;
  Catalog c(tmp / "catalog.log", options());
  build_model(c);
  change(c, {{"op", "add_table"}, {"schema", "isa"}, {"name", "Zebrafish"}, {"columns", Json::array({Json{{"name", "Tag"}}})}});
  change(c, {{"op", "add_extension_table"}, {"schema", "isa"}, {"name", "Zebrafish_Genotype"}, {"extends", "isa:Zebrafish"},
             {"columns", Json::array({Json{{"name", "Allele"}}})}});
  std::vector<idspace::IdString> fish;
  for (int i = 0; i < 5; ++i) fish.push_back(c.insert("isa:Zebrafish", {{"Tag", "z" + std::to_string(i)}}, kAdmin).rid);
  for (int i : {0, 2, 4}) c.insert("isa:Zebrafish_Genotype", {{"RID", fish[i].str()}, {"Allele", "a" + std::to_string(i)}}, kAdmin);
  EXPECT_EQ(code_of([&] { c.insert("isa:Zebrafish_Genotype", {{"RID", fish[0].str()}}, kAdmin); }), Errc::DuplicateKey);
  EXPECT_EQ(code_of([&] { c.insert("isa:Zebrafish_Genotype", {{"Allele", "x"}}, kAdmin); }), Errc::DanglingReference);

  const auto joined = c.query({"isa:Zebrafish/isa:Zebrafish_Genotype"});
  ASSERT_EQ(joined.count, 3u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(joined.records[k]["RID"], fish[k * 2].str());
  EXPECT_EQ(c.query({"isa:Zebrafish/Tag=z2/isa:Zebrafish_Genotype"}).count, 1u);
  EXPECT_EQ(c.query({"isa:Zebrafish/Tag=z1/isa:Zebrafish_Genotype"}).count, 0u);
  EXPECT_EQ(c.resolve_rid(fish[2]).table, "isa:Zebrafish");
  EXPECT_EQ(c.render(*c.get(fish[2], std::nullopt, "isa:Zebrafish_Genotype"))["Allele"], "a2");

  const auto p = c.insert("isa:Protocol", {{"Name", "P"}}, kAdmin);
  c.insert("isa:Subject", {{"Protocol", p.rid.str()}}, kAdmin);
  c.insert("isa:Subject", {{"Protocol", p.rid.str()}}, kAdmin);
  c.insert("isa:Subject", Json::object(), kAdmin);
  EXPECT_EQ(c.query({"isa:Protocol/Name=P/isa:Subject"}).count, 2u);
  EXPECT_EQ(c.query({"isa:Subject/isa:Protocol"}).count, 1u);
}

TEST(Persistence, ReplayRestoresEverySnapshot) {
  TempDir tmp;
  std::vector<Json> live;
  SnapshotId head = 0;
  {
    Catalog c(tmp / "catalog.log", options());
    build_model(c);
    const auto a = c.insert("isa:Subject", {{"Name", "a"}, {"Status", "done"}}, kAdmin);
    c.update(a.rid, {{"Age", 9}}, kAdmin);
    change(c, {{"op", "rename_column"}, {"table", "isa:Subject"}, {"from", "Name"}, {"to", "Label"}});
    c.insert("isa:Subject", {{"Label", "b"}}, kAdmin);
    c.remove(a.rid, kAdmin);
    head = c.head();
    for (SnapshotId s = 0; s <= head; ++s) live.push_back(s < 3 ? Json() : c.query({"isa:Subject", {}, {}, s}).to_json());
  }
  {
    std::ofstream out(tmp / "catalog.log", std::ios::app | std::ios::binary);
    out << R"({"seq":99,"ts":"2026)";
  }
  Catalog again(tmp / "catalog.log", options());
  EXPECT_EQ(again.head(), head);
  for (SnapshotId s = 3; s <= head; ++s) {
    EXPECT_EQ(canonical(again.query({"isa:Subject", {}, {}, s}).to_json()), canonical(live[s])) << "snapshot " << s;
  }
}

TEST(Persistence, CorruptLineIsReported) {
  TempDir tmp;
  {
    Catalog c(tmp / "catalog.log", options());
    build_model(c);
  }
  auto text = read_file(tmp / "catalog.log");
  text.insert(text.find('\n') + 1, "{not json}\n");
  fair::testing::write_file(tmp / "catalog.log", text);
  try {
    Catalog c(tmp / "catalog.log", options());
    FAIL() << "expected CorruptLog";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::CorruptLog);
    EXPECT_NE(e.detail().find("line 2"), std::string::npos) << e.detail();
  }
}

TEST(Acl, RightsAreMonotone) {
  TempDir tmp;
  auto o = options();
  o.acl = AclPolicy::from_json(
      {{"catalog", {{"reader", {"read"}}, {"writer", {"write"}}, {"curator", {"model_change"}}}},
       {"tables", {{"isa:Protocol", {{"protocol_editor", {"write"}}}}}}});
  Catalog c(tmp / "catalog.log", o);
  const Principal curator{"cu", {"curator"}};
  c.apply_model_change(ModelChange{{{"op", "add_table"}, {"schema", "isa"}, {"name", "Protocol"}}}, curator);
  c.apply_model_change(ModelChange{{{"op", "add_table"}, {"schema", "isa"}, {"name", "Subject"}}}, curator);

  const std::vector<Principal> ladder{{"anon", {}}, {"r", {"reader"}}, {"w", {"writer"}}, curator};
  const std::vector<std::function<void(const Principal&)>> ops{
      [&](const Principal& p) { c.insert("isa:Subject", Json::object(), p); },
      [&](const Principal& p) {
        c.apply_model_change(ModelChange{{{"op", "add_column"}, {"table", "isa:Subject"},
                                          {"column", {{"name", "C" + std::to_string(c.head())}}}}},
                             p);
      },
  };
  for (const auto& op : ops) {
    bool rejected_above = false;
    for (auto it = ladder.rbegin(); it != ladder.rend(); ++it) {
      bool rejected = false;
      try {
        op(*it);
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::Forbidden);
        rejected = true;
      }
      if (rejected_above) EXPECT_TRUE(rejected) << it->name;
      rejected_above = rejected_above || rejected;
    }
  }
  const Principal editor{"pe", {"protocol_editor"}};
  c.insert("isa:Protocol", Json::object(), editor);
  EXPECT_EQ(code_of([&] { c.insert("isa:Subject", Json::object(), editor); }), Errc::Forbidden);
  EXPECT_EQ(code_of([&] { c.require_read({"anon", {}}); }), Errc::Forbidden);
  c.require_read({"r", {"reader"}}, "isa:Subject");
}

TEST(Exchange, ExportMaterializeAndReimport) {
  TempDir tmp;
  Catalog c(tmp / "catalog.log", options());
  build_model(c);
  const std::string bytes = "fake tiff bytes";
  fair::testing::write_file(tmp / "files" / "img001.tif", bytes);
  const auto p = c.insert("isa:Protocol", {{"Name", "Imaging"}}, kAdmin);
  const auto s = c.insert("isa:Subject", {{"Name", "Fish"}, {"Protocol", p.rid.str()}, {"Status", "done"}, {"Age", 4}}, kAdmin);
  const auto img = c.insert("isa:Image",
                            {{"URL", file_url(tmp / "files" / "img001.tif")},
                             {"Length", static_cast<std::int64_t>(bytes.size())},
                             {"Checksum", digest_hex(Algorithm::sha256, bytes)},
                             {"Filename", "img001.tif"},
                             {"Subject", s.rid.str()}},
                            kAdmin);

  const auto resolver = fair::bag::FetchResolver::with_defaults();
  ExportRequest one;
  one.roots = {img.rid.str()};
  one.depth = 0;
  const auto only = export_bag(c, resolver, one);
  EXPECT_EQ(only.fetch.size(), 1u);
  const auto& block = only.metadata.at(fair::bag::MetadataMechanism::table_schema);
  ASSERT_EQ(block.tables.size(), 1u);
  EXPECT_EQ(block.tables[0].rows.size(), 1u);

  ExportRequest closure;
  closure.roots = {img.rid.str()};
  closure.depth = 2;
  const auto bag = export_bag(c, resolver, closure);
  EXPECT_EQ(bag.metadata.at(fair::bag::MetadataMechanism::table_schema).tables.size(), 3u);
  fair::bag::write_bag(bag, tmp / "export", {});
  const auto full = fair::bag::materialize_directory(tmp / "export", resolver);
  EXPECT_TRUE(fair::bag::check(tmp / "export", fair::bag::CheckLevel::valid).is_valid);
  EXPECT_EQ(read_file(tmp / "export" / "data" / "assets" / "Image" / img.rid.suffix / "img001.tif"), bytes);

  Catalog fresh(tmp / "fresh.log", [] {
    auto o = options();
    o.ns = "COPY";
    return o;
  }());
  const auto imported = import_dataset(fresh, fair::bag::read_bag(tmp / "export"), kAdmin);
  ASSERT_EQ(imported.rid_map.size(), 3u);
  for (const auto& [old_rid, new_rid] : imported.rid_map) {
    Json a = c.render(*c.get(idspace::parse_id(old_rid)));
    Json b = fresh.render(*fresh.get(idspace::parse_id(new_rid)));
    for (auto* j : {&a, &b}) {
      j->erase("RID");
      j->erase("RCT");
      j->erase("RMT");
      for (auto& [k, v] : j->items()) {
        if (v.is_string() && imported.rid_map.count(v.get<std::string>())) v = imported.rid_map.at(v.get<std::string>());
      }
    }
    EXPECT_EQ(canonical(a), canonical(b)) << old_rid;
  }

  c.update(img.rid, {{"URL", file_url(tmp / "files" / "gone.tif")}}, kAdmin);
  EXPECT_EQ(code_of([&] { export_bag(c, resolver, one); }), Errc::UnreachableAsset);
  ExportRequest missing;
  missing.roots = {"SYNAPSE:ZZZZ"};
  EXPECT_EQ(code_of([&] { export_bag(c, resolver, missing); }), Errc::NotFound);
}

}  // namespace
}  // namespace fair::catalog
