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

#include "steps.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <system_error>

#include "fair/bag/bag.hpp"
#include "fair/common/digest.hpp"
#include "fair/common/error.hpp"
#include "fair/common/files.hpp"

namespace fair::flows {

namespace fs = std::filesystem;

Json basic_metadata(const fs::path& file) {
  std::error_code ec;
  const auto size = fs::file_size(file, ec);
  if (ec) fail(Errc::UnreadableSource, file.string() + ": " + ec.message());
  std::string name = file.filename().string();
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  static const std::array<std::pair<std::string_view, std::string_view>, 10> kTypes{{
      {".ome.tiff", "image/tiff"},
      {".ome.tif", "image/tiff"},
      {".tiff", "image/tiff"},
      {".tif", "image/tiff"},
      {".png", "image/png"},
      {".csv", "text/csv"},
      {".json", "application/json"},
      {".txt", "text/plain"},
      {".h5", "application/x-hdf5"},
      {".zip", "application/zip"},
  }};
  std::string extension = file.extension().string();
  std::string media = "application/octet-stream";
  for (const auto& [suffix, type] : kTypes) {
    if (lower.size() >= suffix.size() && lower.compare(lower.size() - suffix.size(), suffix.size(), suffix) == 0) {
      extension = name.substr(name.size() - suffix.size());
      media = std::string(type);
      break;
    }
  }
  Json j = Json::object();
  j["filename"] = name;
  j["extension"] = extension;
  j["length"] = size;
  j["media_type"] = media;
  return j;
}

namespace detail {

namespace {

fs::path as_path(const Json& v, const std::string& what) {
  if (!v.is_string()) fail(Errc::BadRequest, what + " must be a path or file URL");
  const auto s = v.get<std::string>();
  if (url_scheme(s) == "file") return path_from_file_url(s);
  return fs::path(s);
}

fs::path require_file(const Json& v, const std::string& what) {
  const auto p = as_path(v, what);
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) fail(Errc::UnreadableSource, what + " " + p.string() + " is not a readable file");
  return p;
}

// Copies through a sibling temporary so a crash never leaves a partial file
// under the final name.
void copy_into(const fs::path& from, const fs::path& to) {
  std::error_code ec;
  fs::create_directories(to.parent_path(), ec);
  if (ec) fail(Errc::IoFailure, to.parent_path().string() + ": " + ec.message());
  const fs::path tmp = to.string() + ".part";
  fs::remove(tmp, ec);
  fs::copy_file(from, tmp, ec);
  if (ec) fail(Errc::IoFailure, "copy " + from.string() + ": " + ec.message());
  fs::rename(tmp, to, ec);
  if (ec) fail(Errc::IoFailure, "rename " + tmp.string() + ": " + ec.message());
}

// Stores `file` content-addressed under storage/area and returns the stored
// path, its sha256 and length.
std::tuple<fs::path, std::string, std::uint64_t> store(const fs::path& file, const fs::path& storage,
                                                       const std::string& area) {
  const std::array<Algorithm, 1> algs{Algorithm::sha256};
  std::uint64_t length = 0;
  const auto sha = digest_file(file, algs, &length).at(0);
  const fs::path dest = storage / area / sha.substr(0, 2) / sha / file.filename();
  std::error_code ec;
  if (!fs::exists(dest, ec) || fs::file_size(dest, ec) != length) copy_into(file, dest);
  return {dest, sha, length};
}

std::vector<fs::path> file_list(const Json& v) {
  std::vector<fs::path> out;
  if (v.is_array()) {
    for (const auto& f : v) out.push_back(require_file(f, "file"));
  } else {
    out.push_back(require_file(v, "file"));
  }
  if (out.empty()) fail(Errc::BadRequest, "no files to package");
  return out;
}

std::string short_key(const std::string& key) { return key.substr(0, 16); }

fs::path fresh_dir(const fs::path& dir) {
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir.parent_path(), ec);
  if (ec) fail(Errc::IoFailure, dir.parent_path().string() + ": " + ec.message());
  return dir;
}

Json bag_outputs(const bag::Bag& b, const fs::path& path) {
  Json out = Json::object();
  out["path"] = path.string();
  out["checksum"] = idspace::bag_checksum(b).digest;
  out["oxum"] = bag::compute_oxum(b).value_or("");
  return out;
}

Json ingest(const StepDef& step, const Json& inputs, const FlowServices& services) {
  const auto source = require_file(inputs.at("source"), "source");
  const auto area = step.params.value("area", std::string("staging"));
  if (area.empty() || area.find("..") != std::string::npos || area.front() == '/') {
    fail(Errc::BadRequest, "area must be a relative directory name");
  }
  const auto [dest, sha, length] = store(source, services.storage, area);
  Json out = Json::object();
  out["path"] = dest.string();
  out["url"] = file_url(dest);
  out["filename"] = dest.filename().string();
  out["length"] = length;
  out["sha256"] = sha;
  return out;
}

Json checksum(const StepDef& step, const Json& inputs) {
  const auto file = require_file(inputs.at("file"), "file");
  std::vector<Algorithm> algs;
  for (const auto& a : step.params.value("algorithms", Json::array({"sha256"}))) {
    algs.push_back(*algorithm_from_name(a.get<std::string>()));
  }
  std::uint64_t length = 0;
  const auto digests = digest_file(file, algs, &length);
  Json out = Json::object();
  out["length"] = length;
  for (std::size_t i = 0; i < algs.size(); ++i) out[std::string(algorithm_name(algs[i]))] = digests[i];
  return out;
}

Json extract(const StepDef& step, const Json& inputs, const FlowServices& services) {
  const auto file = require_file(inputs.at("file"), "file");
  const auto name = step.params.value("extractor", std::string("basic"));
  Json meta;
  if (const auto it = services.extractors.find(name); it != services.extractors.end()) {
    meta = it->second(file);
  } else {
    meta = basic_metadata(file);
  }
  if (!meta.is_object()) fail(Errc::BadRequest, "extractor '" + name + "' did not return an object");
  return Json{{"metadata", std::move(meta)}};
}

Json build(const StepDef& step, const Json& inputs, const std::string& key, const FlowServices& services) {
  const auto files = file_list(inputs.at("file"));
  const fs::path work = services.storage / "bags" / short_key(key);
  const fs::path src = fresh_dir(work / "src");
  std::error_code ec;
  fs::create_directories(src, ec);
  for (const auto& f : files) {
    const auto dest = src / f.filename();
    if (fs::exists(dest, ec)) fail(Errc::BadRequest, "two inputs named " + f.filename().string());
    fs::create_hard_link(f, dest, ec);
    if (ec) {
      ec.clear();
      fs::copy_file(f, dest, ec);
      if (ec) fail(Errc::IoFailure, "copy " + f.string() + ": " + ec.message());
    }
  }

  bag::CreateOptions opts;
  if (step.params.contains("info") && step.params["info"].is_object()) {
    for (const auto& [k, v] : step.params["info"].items()) opts.info.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
  }
  Json ro = Json::object();
  ro["@context"] = "https://w3id.org/bundle/context";
  ro["@id"] = "../";
  ro["aggregates"] = Json::array();
  for (const auto& f : files) ro["aggregates"].push_back(Json{{"uri", "../data/" + f.filename().string()}});
  if (inputs.contains("metadata")) ro["describes"] = inputs["metadata"];
  opts.metadata = bag::MetadataBlock::research_object(std::move(ro));

  const auto b = bag::create_bag(src, opts);
  const fs::path dest = fresh_dir(work / step.params.value("name", std::string("bag")));
  bag::write_bag(b, dest, {});
  Json out = bag_outputs(b, dest);
  out["files"] = files.size();
  if (files.size() == 1) out["payload_sha256"] = *b.digest_of(Algorithm::sha256, "data/" + files[0].filename().string());
  fs::remove_all(src, ec);
  return out;
}

Json holey(const StepDef& step, const Json& inputs, const std::string& key, const FlowServices& services) {
  const auto source = as_path(inputs.at("bag"), "bag");
  const auto b = bag::read_bag(source);
  const auto base = step.params.value("base_url", std::string());
  const std::string area = step.params.value("area", std::string("objects"));
  std::map<std::string, std::string> urls;
  for (const auto& p : b.payload) {
    if (!base.empty()) {
      urls[p.path] = base + (base.back() == '/' ? "" : "/") + p.path.substr(5);
      continue;
    }
    const fs::path file = source / fs::path(p.path);
    const auto [stored, sha, length] = store(file, services.storage, area);
    urls[p.path] = file_url(stored);
  }
  const auto h = bag::make_holey(
      b, [](const std::string&) { return true; },
      [&](const std::string& path) -> std::optional<std::string> { return urls.at(path); });
  const fs::path dest = fresh_dir(services.storage / "bags" / short_key(key) / (source.filename().string() + "-holey"));
  bag::write_bag(h, dest, {});
  Json out = bag_outputs(h, dest);
  out["fetch"] = h.fetch.size();
  return out;
}

Json mint(const StepDef& step, const Json& inputs, const std::string& key, const FlowServices& services) {
  std::vector<std::string> locations;
  if (step.params.contains("locations")) locations = step.params["locations"].get<std::vector<std::string>>();
  if (inputs.contains("location")) locations.push_back(inputs["location"].get<std::string>());
  std::optional<std::string> title;
  if (step.params.contains("title")) title = step.params["title"].get<std::string>();
  if (inputs.contains("title")) title = inputs["title"].get<std::string>();
  const std::string ns = step.params.value("namespace", std::string());

  idspace::MinidRecord r;
  if (inputs.contains("bag")) {
    const auto path = as_path(inputs["bag"], "bag");
    if (locations.empty()) locations.push_back(file_url(path));
    r = idspace::bind_bag(*services.registry, bag::read_bag(path),
                          idspace::BindRequest{services.creator, locations, title, ns, key});
  } else {
    idspace::MintRequest m;
    m.creator = services.creator;
    m.digest = inputs.at("digest").get<std::string>();
    m.locations = locations;
    m.title = title;
    m.ns = ns;
    m.request_key = key;
    r = services.registry->mint(m);
  }
  return Json{{"id", r.id.str()}, {"checksum", r.checksum.digest}};
}

Json register_record(const StepDef& step, const Json& inputs, const std::string& key, const FlowServices& services) {
  Json values = step.params.value("values", Json::object());
  for (const auto& [k, v] : inputs.items()) values[k] = v;
  const auto table = step.params.at("table").get<std::string>();
  const auto v = services.catalog->insert(table, values, services.actor, key);
  return Json{{"rid", v.rid.str()}, {"table", v.table}, {"citation", services.catalog->citation_url(v.rid)}};
}

}  // namespace

std::string content_digest(const fs::path& path) {
  std::error_code ec;
  const std::array<Algorithm, 1> algs{Algorithm::sha256};
  if (fs::is_regular_file(path, ec)) return digest_file(path, algs).at(0);
  std::vector<std::pair<std::string, std::string>> listing;
  for (auto it = fs::recursive_directory_iterator(path, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (it->is_regular_file()) {
      listing.emplace_back(fs::relative(it->path(), path).generic_string(), digest_file(it->path(), algs).at(0));
    }
  }
  std::sort(listing.begin(), listing.end());
  Hasher h(Algorithm::sha256);
  for (const auto& [rel, d] : listing) {
    h.update(rel);
    h.update(std::string_view("\0", 1));
    h.update(d);
    h.update("\n");
  }
  return h.hex_digest();
}

void check_binding(const StepDef& step, const FlowServices& services) {
  const auto need = [&](bool ok, const char* what) {
    if (!ok) fail(Errc::BindingError, "step '" + step.name + "' needs " + what);
  };
  switch (step.kind) {
    case StepKind::ingest_file:
    case StepKind::build_bag:
    case StepKind::make_holey:
      need(!services.storage.empty(), "a storage directory");
      break;
    case StepKind::mint_id:
      need(services.registry != nullptr, "an identifier registry");
      break;
    case StepKind::register_record:
      need(services.catalog != nullptr, "a catalog");
      break;
    case StepKind::extract_metadata: {
      const auto name = step.params.value("extractor", std::string("basic"));
      need(name == "basic" || services.extractors.count(name) != 0, ("extractor '" + name + "'").c_str());
      break;
    }
    default:
      break;
  }
}

Json run_step(const StepDef& step, const Json& inputs, const std::string& key, const FlowServices& services,
              const Predicate::Lookup& lookup) {
  switch (step.kind) {
    case StepKind::ingest_file: return ingest(step, inputs, services);
    case StepKind::compute_checksum: return checksum(step, inputs);
    case StepKind::extract_metadata: return extract(step, inputs, services);
    case StepKind::build_bag: return build(step, inputs, key, services);
    case StepKind::make_holey: return holey(step, inputs, key, services);
    case StepKind::mint_id: return mint(step, inputs, key, services);
    case StepKind::register_record: return register_record(step, inputs, key, services);
    case StepKind::quality_check:
      if (!step.predicate->evaluate(lookup)) {
        fail(Errc::QualityCheckFailed, "predicate is false: " + step.predicate->text());
      }
      return Json{{"passed", true}};
  }
  fail(Errc::Internal, "unhandled step kind");
}

}  // namespace detail
}  // namespace fair::flows
