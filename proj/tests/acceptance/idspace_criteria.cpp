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
#include <set>
#include <string>
#include <vector>

#include "criteria.hpp"
#include "fair/common/digest.hpp"
#include "fair/common/error.hpp"
#include "fair/idspace/id.hpp"
#include "fair/idspace/registry.hpp"
#include "testing.hpp"

namespace fair::acceptance {
namespace {

using namespace fair::idspace;

constexpr int kMints = 10'000;
constexpr const char* kDoi = "10.25551/1/1-1F6W";

void identifiers(Checker& check) {
  fair::testing::TempDir tmp;
  const auto log = tmp / "ids.log";
  std::map<IdString, MinidRecord> minted;
  IdString upgraded;
  {
    Registry reg(log, Registry::Options{"SYNAPSE"});
    for (int i = 0; i < kMints; ++i) {
      MintRequest m;
      m.creator = "0000-0002-1825-0097";
      m.digest = digest_hex(Algorithm::sha256, std::to_string(i));
      m.locations = {"https://data.example.org/" + std::to_string(i)};
      const auto r = reg.mint(m);
      if (!minted.emplace(r.id, r).second) check.fail("duplicate id " + r.id.str());
    }
    check.expect_eq(minted.size(), static_cast<std::size_t>(kMints), "distinct ids");
    check.expect_eq(reg.size(), static_cast<std::size_t>(kMints), "registry size");

    upgraded = minted.begin()->first;
    const auto up = reg.upgrade(upgraded, kDoi, "curator");
    check.expect(up.status == Status::superseded, "upgrade did not mark superseded");
    check.expect(up.superseded_by == std::optional<std::string>(kDoi), "superseded_by not the DOI");
    minted[upgraded] = up;
  }

  // A fresh registry over the same log stands in for a restarted process.
  Registry again(log, Registry::Options{"SYNAPSE"});
  check.expect_eq(again.size(), static_cast<std::size_t>(kMints), "size after restart");
  std::size_t unresolved = 0;
  for (const auto& [id, record] : minted) {
    const auto found = again.find(id);
    if (!found || *found != record) ++unresolved;
  }
  check.expect_eq(unresolved, std::size_t{0}, "ids not resolving to their record after restart");

  const auto old = again.resolve(upgraded.str());
  check.expect(old.status == Status::superseded, "superseded status lost on restart");
  check.expect(old.superseded_by == std::optional<std::string>(kDoi), "DOI lost on restart");
  check.expect_eq(again.history(upgraded).size(), std::size_t{2}, "versions of the upgraded id");
  try {
    again.update_locations(upgraded, {"https://elsewhere.example.org"}, "curator");
    check.fail("superseded record accepted a location update");
  } catch (const Error& e) {
    check.expect(e.code() == Errc::SupersededImmutable, "wrong error for superseded update");
  }

  const auto fig = parse_id("SYNAPSE:1-1ACR");
  check.expect_eq(fig.ns, std::string("SYNAPSE"), "namespace of SYNAPSE:1-1ACR");
  check.expect_eq(fig.suffix, std::string("1-1ACR"), "suffix of SYNAPSE:1-1ACR");
  check.expect_eq(fig.str(), std::string("SYNAPSE:1-1ACR"), "round trip of SYNAPSE:1-1ACR");
  for (const char* bad : {"SYNAPSE:1-1ACRU", "SYNAPSE1-1ACR", ":1-1ACR", "SYNAPSE:", "SYNAPSE:1--1ACR"}) {
    try {
      (void)parse_id(bad);
      check.fail(std::string("parse_id accepted ") + bad);
    } catch (const Error& e) {
      check.expect(e.code() == Errc::MalformedId, std::string("wrong error for ") + bad);
    }
  }
}

}  // namespace

std::vector<Criterion> idspace_criteria() { return {{"identifier-suite", {}, identifiers}}; }

}  // namespace fair::acceptance
