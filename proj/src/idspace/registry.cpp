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

#include "fair/idspace/registry.hpp"

#include <mutex>

#include "fair/bag/bag.hpp"
#include "fair/bag/fetch.hpp"
#include "fair/common/error.hpp"

namespace fair::idspace {
namespace {

std::string_view status_name(Status s) { return s == Status::active ? "active" : "superseded"; }

Timestamp timestamp_field(const Json& j, const char* key) {
  const auto t = parse_rfc3339(j.at(key).get<std::string>());
  if (!t) fail(Errc::CorruptLog, std::string("bad timestamp in '") + key + "'");
  return *t;
}

void check_locations(const std::vector<std::string>& locations) {
  if (locations.empty()) fail(Errc::EmptyLocations, "at least one location is required");
  for (const auto& l : locations) {
    if (l.empty()) fail(Errc::EmptyLocations, "empty location string");
  }
}

}  // namespace

Json to_json(const MinidRecord& r) {
  Json j = Json::object();
  j["id"] = r.id.str();
  j["version"] = r.version;
  j["creator"] = r.creator;
  j["created"] = format_rfc3339(r.created);
  j["checksum"] = Json{{"algorithm", std::string(algorithm_name(r.checksum.algorithm))},
                       {"digest", r.checksum.digest}};
  j["locations"] = r.locations;
  j["title"] = r.title ? Json(*r.title) : Json(nullptr);
  j["status"] = std::string(status_name(r.status));
  j["superseded_by"] = r.superseded_by ? Json(*r.superseded_by) : Json(nullptr);
  j["modified"] = format_rfc3339(r.modified);
  j["actor"] = r.actor;
  return j;
}

MinidRecord record_from_json(const Json& j) {
  try {
    MinidRecord r;
    r.id = parse_id(j.at("id").get<std::string>());
    r.version = j.at("version").get<int>();
    r.creator = j.at("creator").get<std::string>();
    r.created = timestamp_field(j, "created");
    const auto alg = algorithm_from_name(j.at("checksum").at("algorithm").get<std::string>());
    if (!alg) fail(Errc::CorruptLog, "unknown checksum algorithm");
    r.checksum = {*alg, j.at("checksum").at("digest").get<std::string>()};
    r.locations = j.at("locations").get<std::vector<std::string>>();
    if (!j.at("title").is_null()) r.title = j.at("title").get<std::string>();
    const auto status = j.at("status").get<std::string>();
    if (status != "active" && status != "superseded") fail(Errc::CorruptLog, "bad status " + status);
    r.status = status == "active" ? Status::active : Status::superseded;
    if (!j.at("superseded_by").is_null()) r.superseded_by = j.at("superseded_by").get<std::string>();
    r.modified = j.contains("modified") ? timestamp_field(j, "modified") : r.created;
    r.actor = j.value("actor", r.creator);
    return r;
  } catch (const Json::exception& e) {
    fail(Errc::CorruptLog, std::string("record: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::CorruptLog) throw;
    fail(Errc::CorruptLog, std::string("record: ") + e.what());
  }
}

Registry::Registry(const std::filesystem::path& log_path, Options options)
    : options_(std::move(options)),
      suffixes_(options_.seed.value_or(random_seed())) {
  if (!is_namespace_token(options_.default_namespace)) {
    fail(Errc::MalformedId, "bad default namespace '" + options_.default_namespace + "'");
  }
  log_ = std::make_unique<AppendLog>(log_path, AppendLog::Options{options_.durable});
  for (const auto& line : log_->take_recovered()) {
    ++lines_;
    MinidRecord r = record_from_json(line);
    auto& chain = versions_[r.id];
    const int expected = chain.empty() ? 1 : chain.back().version + 1;
    if (r.version != expected) {
      fail(Errc::CorruptLog, "line " + std::to_string(lines_) + ": version " + std::to_string(r.version) +
                                 " of " + r.id.str() + ", expected " + std::to_string(expected));
    }
    if (!chain.empty() && !(chain.front().checksum == r.checksum)) {
      fail(Errc::CorruptLog, "line " + std::to_string(lines_) + ": checksum of " + r.id.str() + " changed");
    }
    if (line.contains("request_key") && line["request_key"].is_string()) {
      by_request_key_.emplace(line["request_key"].get<std::string>(), r.id);
    }
    chain.push_back(std::move(r));
  }
}

void Registry::append_locked(const MinidRecord& r, const std::optional<std::string>& request_key) {
  Json line = to_json(r);
  if (request_key) line["request_key"] = *request_key;
  log_->append(line);
  ++lines_;
  versions_[r.id].push_back(r);
  if (request_key) by_request_key_.emplace(*request_key, r.id);
}

MinidRecord Registry::mint(const MintRequest& request) {
  check_locations(request.locations);
  const auto alg = algorithm_from_name(request.algorithm);
  if (!alg || !is_well_formed_digest(*alg, request.digest)) {
    fail(Errc::MalformedDigest, request.algorithm + ":" + request.digest);
  }
  const std::string ns = request.ns.empty() ? options_.default_namespace : request.ns;
  if (!is_namespace_token(ns)) fail(Errc::MalformedId, "bad namespace '" + ns + "'");

  std::unique_lock lock(mu_);
  if (request.request_key) {
    if (const auto it = by_request_key_.find(*request.request_key); it != by_request_key_.end()) {
      return versions_.at(it->second).back();
    }
  }
  MinidRecord r;
  do {
    r.id = IdString{ns, suffixes_.next()};
  } while (versions_.count(r.id) != 0);
  r.creator = request.creator;
  r.created = options_.clock();
  r.checksum = {*alg, request.digest};
  r.locations = request.locations;
  r.title = request.title;
  r.modified = r.created;
  r.actor = request.creator;
  append_locked(r, request.request_key);
  return r;
}

std::optional<MinidRecord> Registry::find(const IdString& id) const {
  std::shared_lock lock(mu_);
  const auto it = versions_.find(id);
  if (it == versions_.end()) return std::nullopt;
  return it->second.back();
}

MinidRecord Registry::resolve(const IdString& id) const {
  auto r = find(id);
  if (!r) fail(Errc::NotFound, id.str());
  return *std::move(r);
}

MinidRecord Registry::update_locations(const IdString& id, const std::vector<std::string>& locations,
                                       const std::string& actor) {
  check_locations(locations);
  std::unique_lock lock(mu_);
  const auto it = versions_.find(id);
  if (it == versions_.end()) fail(Errc::NotFound, id.str());
  MinidRecord r = it->second.back();
  if (r.status == Status::superseded) fail(Errc::SupersededImmutable, id.str());
  r.version += 1;
  r.locations = locations;
  r.modified = options_.clock();
  r.actor = actor;
  append_locked(r, std::nullopt);
  return r;
}

MinidRecord Registry::upgrade(const IdString& id, std::string_view doi, const std::string& actor) {
  if (!is_doi(doi)) fail(Errc::MalformedDoi, std::string(doi));
  if (doi.substr(0, 4) == "doi:") doi.remove_prefix(4);
  std::unique_lock lock(mu_);
  const auto it = versions_.find(id);
  if (it == versions_.end()) fail(Errc::NotFound, id.str());
  MinidRecord r = it->second.back();
  if (r.status == Status::superseded) fail(Errc::SupersededImmutable, id.str());
  r.version += 1;
  r.status = Status::superseded;
  r.superseded_by = std::string(doi);
  r.modified = options_.clock();
  r.actor = actor;
  append_locked(r, std::nullopt);
  return r;
}

std::vector<MinidRecord> Registry::history(const IdString& id) const {
  std::shared_lock lock(mu_);
  const auto it = versions_.find(id);
  if (it == versions_.end()) fail(Errc::NotFound, id.str());
  return it->second;
}

std::size_t Registry::size() const {
  std::shared_lock lock(mu_);
  return versions_.size();
}

std::size_t Registry::log_lines() const {
  std::shared_lock lock(mu_);
  return lines_;
}

Checksum bag_checksum(const bag::Bag& bag) {
  return {Algorithm::sha256, digest_hex(Algorithm::sha256, bag::archive_bytes(bag, bag::ArchiveFormat::tar, true, "bag"))};
}

MinidRecord bind_bag(Registry& registry, const bag::Bag& bag, const BindRequest& request) {
  const Checksum sum = bag_checksum(bag);
  MintRequest m;
  m.creator = request.creator;
  m.algorithm = std::string(algorithm_name(sum.algorithm));
  m.digest = sum.digest;
  m.locations = request.locations;
  m.title = request.title;
  m.ns = request.ns;
  m.request_key = request.request_key;
  return registry.mint(m);
}

void add_minid_handler(bag::FetchResolver& target, const Registry& registry, bag::FetchResolver base) {
  auto shared_base = std::make_shared<bag::FetchResolver>(std::move(base));
  const auto locations = [&registry](const std::string& url) {
    std::string_view ref = url;
    ref.remove_prefix(ref.find(':') + 1);
    return registry.resolve(parse_id(ref)).locations;
  };
  target.add(
      "minid",
      [shared_base, locations](const std::string& url) {
        std::vector<std::string> candidates;
        try {
          candidates = locations(url);
        } catch (const Error& e) {
          fail(Errc::FetchFailed, url + ": " + e.what());
        }
        std::string last;
        for (const auto& loc : candidates) {
          try {
            return shared_base->fetch(loc);
          } catch (const Error& e) {
            last = e.what();
          }
        }
        fail(Errc::FetchFailed, url + ": no location served the content (" + last + ")");
      },
      [shared_base, locations](const std::string& url) {
        try {
          for (const auto& loc : locations(url)) {
            if (shared_base->reachable(loc)) return true;
          }
        } catch (const Error&) {
        }
        return false;
      });
}

}  // namespace fair::idspace
