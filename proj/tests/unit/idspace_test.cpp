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
#include <set>
#include <thread>

#include "fair/bag/bag.hpp"
#include "fair/bag/fetch.hpp"
#include "fair/common/error.hpp"
#include "fair/common/files.hpp"
#include "fair/idspace/registry.hpp"
#include "testing.hpp"

namespace fair::idspace {
namespace {

using fair::testing::TempDir;

constexpr const char* kDigest = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855";

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::Internal;
}

Registry::Options pinned(std::uint64_t seed = 1) {
  Registry::Options o;
  o.default_namespace = "SYNAPSE";
  o.clock = SteppingClock(Timestamp{std::chrono::seconds{1'790'000'000}});
  o.seed = seed;
  return o;
}

MintRequest request(std::vector<std::string> locations = {"https://example.org/a"}) {
  MintRequest m;
  m.creator = "0000-0002-1825-0097";
  m.digest = kDigest;
  m.locations = std::move(locations);
  return m;
}

TEST(ParseId, CanonicalExample) {
  const auto id = parse_id("SYNAPSE:1-1ACR");
  EXPECT_EQ(id.ns, "SYNAPSE");
  EXPECT_EQ(id.suffix, "1-1ACR");
  EXPECT_EQ(id.str(), "SYNAPSE:1-1ACR");
  EXPECT_EQ(parse_id("synapse:1-1acr"), id);
}

TEST(ParseId, RejectsWithPosition) {
  const auto position = [](std::string_view text) -> std::string {
    try {
      parse_id(text);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::MalformedId);
      return e.detail().substr(0, e.detail().find(' ', 9));
    }
    return "accepted";
  };
  EXPECT_EQ(position("SYNAPSE:"), "position 8");
  EXPECT_EQ(position("SYNAPSE:1-1ACU"), "position 13");  // U is excluded
  EXPECT_EQ(position("SYNAPSE:1-IACR"), "position 10");
  EXPECT_EQ(position("SYNAPSE:12345"), "position 12");
  EXPECT_EQ(position("SYNAPSE:1--1"), "position 10");
  EXPECT_EQ(position(":1"), "position 0");
  EXPECT_EQ(position("9X:1"), "position 0");
  EXPECT_EQ(position("NOCOLON"), "position 7");
}

TEST(Suffix, CrockfordMatchesReference) {
  EXPECT_EQ(crockford_encode(1234567890, 7), "14SC0PJ");
  EXPECT_EQ(crockford_encode(~0ull, 13), "FZZZZZZZZZZZZ");
}

TEST(Suffix, ShapeAndParse) {
  SuffixGenerator gen(42);
  for (int i = 0; i < 1000; ++i) {
    const auto s = gen.next();
    ASSERT_EQ(s.size(), 19u);
    EXPECT_EQ(parse_id("X:" + s).suffix, s);
  }
}

TEST(Doi, Grammar) {
  EXPECT_TRUE(is_doi("10.25551/1/1-1F6W"));
  EXPECT_TRUE(is_doi("doi:10.25551/1/1-1F6W"));
  EXPECT_TRUE(is_doi("10.1000.10/abc"));
  EXPECT_FALSE(is_doi("doi.org/xyz"));
  EXPECT_FALSE(is_doi("10./x"));
  EXPECT_FALSE(is_doi("10.123/"));
  EXPECT_FALSE(is_doi("10.123/a b"));
}

TEST(Registry, MintResolveRoundTrip) {
  TempDir tmp;
  Registry reg(tmp / "registry.log", pinned());
  auto m = request({"https://a", "https://b", "https://c"});
  m.title = "Synapse images";
  const auto r = reg.mint(m);
  EXPECT_EQ(r.id.ns, "SYNAPSE");
  EXPECT_EQ(reg.resolve(r.id), r);
  EXPECT_EQ(reg.resolve(r.id.str()).locations, (std::vector<std::string>{"https://a", "https://b", "https://c"}));
  EXPECT_EQ(r.status, Status::active);
  EXPECT_FALSE(r.superseded_by);
}

TEST(Registry, MintErrors) {
  TempDir tmp;
  Registry reg(tmp / "registry.log", pinned());
  EXPECT_EQ(code_of([&] { reg.mint(request({})); }), Errc::EmptyLocations);
  auto bad = request();
  bad.digest = "XYZ";
  EXPECT_EQ(code_of([&] { reg.mint(bad); }), Errc::MalformedDigest);
  bad.digest = std::string(kDigest).substr(1);
  EXPECT_EQ(code_of([&] { reg.mint(bad); }), Errc::MalformedDigest);
  bad = request();
  bad.algorithm = "crc32";
  EXPECT_EQ(code_of([&] { reg.mint(bad); }), Errc::MalformedDigest);
  EXPECT_EQ(code_of([&] { (void)reg.resolve(parse_id("SYNAPSE:1-1ACR")); }), Errc::NotFound);
  EXPECT_EQ(reg.size(), 0u);
}

TEST(Registry, UpdateAppendsVersions) {
  TempDir tmp;
  Registry reg(tmp / "registry.log", pinned());
  const auto r = reg.mint(request());
  reg.update_locations(r.id, {"https://b"}, "curator");
  const auto u = reg.update_locations(r.id, {"https://c", "https://d"}, "curator");
  EXPECT_EQ(u.version, 3);
  EXPECT_EQ(u.checksum, r.checksum);
  EXPECT_EQ(reg.resolve(r.id).locations, (std::vector<std::string>{"https://c", "https://d"}));
  EXPECT_EQ(reg.history(r.id).size(), 3u);
  EXPECT_EQ(fair::testing::count_lines(tmp / "registry.log"), 3u);
  EXPECT_EQ(code_of([&] { reg.update_locations(r.id, {}, "x"); }), Errc::EmptyLocations);
}

TEST(Registry, UpgradeSupersedes) {
  TempDir tmp;
  Registry reg(tmp / "registry.log", pinned());
  const auto r = reg.mint(request());
  EXPECT_EQ(code_of([&] { reg.upgrade(r.id, "doi.org/xyz", "curator"); }), Errc::MalformedDoi);
  const auto up = reg.upgrade(r.id, "10.25551/1/1-1F6W", "curator");
  EXPECT_EQ(up.status, Status::superseded);
  EXPECT_EQ(up.superseded_by, "10.25551/1/1-1F6W");
  EXPECT_EQ(reg.resolve(r.id).superseded_by, "10.25551/1/1-1F6W");
  EXPECT_EQ(code_of([&] { reg.update_locations(r.id, {"https://z"}, "x"); }), Errc::SupersededImmutable);
  EXPECT_EQ(code_of([&] { reg.upgrade(parse_id("SYNAPSE:0"), "10.1/x", "x"); }), Errc::NotFound);
}

TEST(Registry, RestartRebuildsIndex) {
  TempDir tmp;
  std::vector<MinidRecord> minted;
  {
    Registry reg(tmp / "registry.log", pinned());
    for (int i = 0; i < 50; ++i) minted.push_back(reg.mint(request()));
    minted[3] = reg.update_locations(minted[3].id, {"https://moved"}, "curator");
    minted[7] = reg.upgrade(minted[7].id, "10.25551/1/1-1F6W", "curator");
  }
  Registry again(tmp / "registry.log", pinned(2));
  EXPECT_EQ(again.size(), 50u);
  for (const auto& r : minted) EXPECT_EQ(again.resolve(r.id), r);
}

TEST(Registry, TornTailIsDiscarded) {
  TempDir tmp;
  IdString id;
  {
    Registry reg(tmp / "registry.log", pinned());
    id = reg.mint(request()).id;
  }
  {
    std::ofstream out(tmp / "registry.log", std::ios::app | std::ios::binary);
    out << R"({"id":"SYNAPSE:ABCD","vers)";
  }
  Registry again(tmp / "registry.log", pinned());
  EXPECT_EQ(again.size(), 1u);
  EXPECT_EQ(again.resolve(id).id, id);
  again.mint(request());
  Registry third(tmp / "registry.log", pinned());
  EXPECT_EQ(third.size(), 2u);
}

TEST(Registry, RequestKeyIsIdempotentAcrossRestart) {
  TempDir tmp;
  auto m = request();
  m.request_key = "flow-step-key";
  MinidRecord first;
  {
    Registry reg(tmp / "registry.log", pinned());
    first = reg.mint(m);
    EXPECT_EQ(reg.mint(m), first);
  }
  Registry again(tmp / "registry.log", pinned(9));
  EXPECT_EQ(again.mint(m), first);
  EXPECT_EQ(again.size(), 1u);
}

TEST(Registry, ConcurrentMintsAreDistinct) {
  TempDir tmp;
  Registry reg(tmp / "registry.log", pinned());
  std::vector<std::thread> threads;
  std::vector<std::vector<std::string>> ids(4);
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 250; ++i) ids[t].push_back(reg.mint(request()).id.str());
    });
  }
  for (auto& th : threads) th.join();
  std::set<std::string> all;
  for (const auto& v : ids) all.insert(v.begin(), v.end());
  EXPECT_EQ(all.size(), 1000u);
  EXPECT_EQ(Registry(tmp / "registry.log", pinned()).size(), 1000u);
}

TEST(BindBag, ChecksumTracksContent) {
  TempDir tmp;
  Registry reg(tmp / "registry.log", pinned());
  const auto bag = fair::bag::create_bag_from_memory({{"a.txt", "alpha"}, {"b.txt", "beta"}}, {});
  BindRequest b{"creator", {"https://example.org/bag.zip"}, std::nullopt, "", std::nullopt};
  const auto one = bind_bag(reg, bag, b);
  const auto two = bind_bag(reg, bag, b);
  EXPECT_NE(one.id, two.id);
  EXPECT_EQ(one.checksum, two.checksum);

  const auto altered = fair::bag::create_bag_from_memory({{"a.txt", "alphb"}, {"b.txt", "beta"}}, {});
  EXPECT_NE(bag_checksum(altered), one.checksum);
}

TEST(BindBag, MaterializedHoleyBagHasSameChecksum) {
  TempDir tmp;
  fair::testing::write_tree(tmp / "src", {{"x.bin", "some bytes"}, {"y.bin", "more"}});
  const auto bag = fair::bag::create_bag(tmp / "src", {});
  const auto holey = fair::bag::make_holey(
      bag, [](const std::string&) { return true; },
      [&](const std::string& p) { return std::optional<std::string>(file_url(tmp / "src" / p.substr(5))); });
  EXPECT_NE(bag_checksum(holey), bag_checksum(bag));
  const auto full = fair::bag::materialize(holey, fair::bag::FetchResolver::with_defaults());
  EXPECT_EQ(bag_checksum(full), bag_checksum(bag));
}

TEST(MinidHandler, FetchesFirstLiveLocation) {
  TempDir tmp;
  fair::testing::write_file(tmp / "blob", "content");
  Registry reg(tmp / "registry.log", pinned());
  auto m = request({file_url(tmp / "gone"), file_url(tmp / "blob")});
  const auto r = reg.mint(m);
  fair::bag::FetchResolver resolver = fair::bag::FetchResolver::with_defaults();
  add_minid_handler(resolver, reg, fair::bag::FetchResolver::with_defaults());
  EXPECT_EQ(resolver.fetch("minid:" + r.id.str()), "content");
  EXPECT_TRUE(resolver.reachable("minid:" + r.id.str()));
  EXPECT_FALSE(resolver.reachable("minid:SYNAPSE:0000"));
  EXPECT_EQ(code_of([&] { (void)resolver.fetch("minid:SYNAPSE:0000"); }), Errc::FetchFailed);
}

}  // namespace
}  // namespace fair::idspace
