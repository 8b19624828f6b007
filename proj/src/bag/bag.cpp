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

#include "fair/bag/bag.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <future>
#include <thread>

#include "fair/bag/archive.hpp"
#include "fair/bag/fetch.hpp"
#include "fair/bag/format.hpp"
#include "fair/common/error.hpp"
#include "fair/common/files.hpp"

namespace fair::bag {
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kDataPrefix = "data/";
constexpr std::string_view kDeclaration = "bagit.txt";
constexpr std::string_view kBagInfo = "bag-info.txt";
constexpr std::string_view kFetch = "fetch.txt";

// A bag as a flat set of files, independent of where it was read from.
struct Tree {
  struct Node {
    std::uint64_t size = 0;
    ContentSource source;
  };
  std::map<std::string, Node> files;

  [[nodiscard]] bool has(const std::string& p) const { return files.count(p) != 0; }
  [[nodiscard]] std::string read(const std::string& p) const { return files.at(p).source.read(); }
};

std::string manifest_name(Algorithm alg, bool tag) {
  return std::string(tag ? "tagmanifest-" : "manifest-") + std::string(algorithm_name(alg)) + ".txt";
}

// Parses "manifest-<alg>.txt" / "tagmanifest-<alg>.txt". `known` is false
// for well-shaped names with an algorithm we do not implement.
bool is_manifest_name(std::string_view name, bool& tag, std::optional<Algorithm>& alg) {
  std::string_view stem;
  if (name.substr(0, 12) == "tagmanifest-") {
    tag = true;
    stem = name.substr(12);
  } else if (name.substr(0, 9) == "manifest-") {
    tag = false;
    stem = name.substr(9);
  } else {
    return false;
  }
  if (stem.size() < 5 || stem.substr(stem.size() - 4) != ".txt" || stem.find('/') != std::string_view::npos) {
    return false;
  }
  alg = algorithm_from_name(stem.substr(0, stem.size() - 4));
  return true;
}

bool is_safe_relative(std::string_view p) {
  if (p.empty() || p.front() == '/' || p.find('\0') != std::string_view::npos) return false;
  std::size_t start = 0;
  while (start <= p.size()) {
    auto end = p.find('/', start);
    if (end == std::string_view::npos) end = p.size();
    const auto seg = p.substr(start, end - start);
    if (seg.empty() || seg == "." || seg == "..") return false;
    start = end + 1;
  }
  return true;
}

bool is_payload_path(std::string_view p) {
  return p.size() > kDataPrefix.size() && p.substr(0, kDataPrefix.size()) == kDataPrefix && is_safe_relative(p);
}

template <typename T>
void sort_by_path(std::vector<T>& v) {
  std::sort(v.begin(), v.end(), [](const T& a, const T& b) { return a.path < b.path; });
}

void set_info(InfoPairs& info, std::string_view label, std::string value) {
  for (auto& [l, v] : info) {
    if (l == label) {
      v = std::move(value);
      return;
    }
  }
  info.emplace_back(std::string(label), std::move(value));
}

void erase_info(InfoPairs& info, std::string_view label) {
  info.erase(std::remove_if(info.begin(), info.end(), [&](const auto& p) { return p.first == label; }), info.end());
}

std::vector<Algorithm> payload_algorithms(const Bag& bag) {
  std::vector<Algorithm> algs;
  for (const auto& [alg, _] : bag.manifests) algs.push_back(alg);
  return algs;
}

// Digest a list of sources, spreading the work over a few threads.
std::vector<std::vector<std::string>> digest_all(const std::vector<const ContentSource*>& sources,
                                                 const std::vector<Algorithm>& algs) {
  std::vector<std::vector<std::string>> out(sources.size());
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 8);
  if (sources.size() < 8 || workers == 1) {
    for (std::size_t i = 0; i < sources.size(); ++i) out[i] = sources[i]->digests(algs);
    return out;
  }
  std::vector<std::future<void>> tasks;
  for (std::size_t w = 0; w < workers; ++w) {
    tasks.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < sources.size(); i += workers) out[i] = sources[i]->digests(algs);
    }));
  }
  for (auto& t : tasks) t.get();
  return out;
}

Tree tree_from_directory(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    fail(Errc::NotABag, root.string() + " is not a directory");
  }
  Tree t;
  for (auto it = fs::recursive_directory_iterator(root, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    const auto rel = fs::relative(it->path(), root).generic_string();
    t.files[rel] = Tree::Node{it->file_size(), ContentSource::file(it->path())};
  }
  if (ec) {
    fail(Errc::IoFailure, "walking " + root.string() + ": " + ec.message());
  }
  return t;
}

Tree tree_from_archive(std::string_view bytes) {
  std::vector<archive::Member> members;
  switch (archive::sniff(bytes)) {
    case archive::Kind::tar: members = archive::read_tar(bytes); break;
    case archive::Kind::zip: members = archive::read_zip(bytes); break;
    case archive::Kind::unknown: fail(Errc::NotABag, "not a tar or zip archive");
  }
  if (members.empty()) {
    fail(Errc::NotABag, "empty archive");
  }
  const auto slash = members.front().path.find('/');
  if (slash == std::string::npos) {
    fail(Errc::NotABag, "archive members must share one top-level directory");
  }
  const auto root = members.front().path.substr(0, slash + 1);
  Tree t;
  for (auto& m : members) {
    if (m.path.compare(0, root.size(), root) != 0) {
      fail(Errc::NotABag, "archive member outside bag root: " + m.path);
    }
    const auto size = m.bytes.size();
    t.files[m.path.substr(root.size())] = Tree::Node{size, ContentSource::memory(std::move(m.bytes))};
  }
  return t;
}

Tree tree_from_location(const fs::path& location) {
  if (fs::is_directory(location)) {
    return tree_from_directory(location);
  }
  if (!fs::exists(location)) {
    fail(Errc::NotABag, location.string() + " does not exist");
  }
  return tree_from_archive(read_file(location));
}

Bag assemble(const Tree& tree) {
  if (!tree.has(std::string(kDeclaration))) {
    fail(Errc::NotABag, "missing bagit.txt");
  }
  Bag bag;
  bag.version = format::parse_declaration(tree.read(std::string(kDeclaration)));

  std::map<std::string, std::string> metadata_files;
  for (const auto& [path, node] : tree.files) {
    if (path == kDeclaration) continue;
    if (path.compare(0, kDataPrefix.size(), kDataPrefix) == 0) {
      bag.payload.push_back(PayloadEntry{path, node.size, node.source});
      continue;
    }
    bool tag = false;
    std::optional<Algorithm> alg;
    if (is_manifest_name(path, tag, alg) && alg) {
      const auto text = node.source.read();
      std::vector<ManifestEntry> entries;
      try {
        entries = format::parse_manifest(text, *alg);
      } catch (const Error& e) {
        fail(e.code(), path + " " + e.detail());
      }
      for (const auto& e : entries) {
        if (!is_safe_relative(e.path)) {
          fail(Errc::UnsafePath, path + " lists '" + e.path + "'");
        }
      }
      sort_by_path(entries);
      (tag ? bag.tag_manifests : bag.manifests)[*alg] = std::move(entries);
    } else if (path == kBagInfo) {
      try {
        bag.bag_info = format::parse_info(node.source.read());
      } catch (const Error& e) {
        fail(e.code(), path + " " + e.detail());
      }
    } else if (path == kFetch) {
      try {
        bag.fetch = format::parse_fetch(node.source.read());
      } catch (const Error& e) {
        fail(e.code(), path + " " + e.detail());
      }
      for (const auto& f : bag.fetch) {
        if (!is_payload_path(f.path)) {
          fail(Errc::UnsafePath, "fetch.txt lists '" + f.path + "'");
        }
      }
      sort_by_path(bag.fetch);
    } else if (path.compare(0, 9, "metadata/") == 0) {
      metadata_files[path] = node.source.read();
    } else {
      bag.extra_tags.push_back(TagFile{path, node.source.read()});
    }
  }
  std::vector<std::string> unclaimed;
  bag.metadata = parse_metadata(metadata_files, &unclaimed);
  for (const auto& p : unclaimed) {
    bag.extra_tags.push_back(TagFile{p, metadata_files.at(p)});
  }
  sort_by_path(bag.payload);
  sort_by_path(bag.extra_tags);
  return bag;
}

void require_structurally_complete(const Bag& bag) {
  if (bag.manifests.empty()) {
    fail(Errc::InvalidBag, "bag has no payload manifest");
  }
  for (const auto& [alg, entries] : bag.manifests) {
    std::set<std::string_view> listed;
    for (const auto& e : entries) {
      if (!is_payload_path(e.path)) {
        fail(Errc::UnsafePath, e.path);
      }
      if (!bag.find_payload(e.path) && !bag.find_fetch(e.path)) {
        fail(Errc::InvalidBag, "manifest path has no payload or fetch entry: " + e.path);
      }
      listed.insert(e.path);
    }
    for (const auto& p : bag.payload) {
      if (!listed.count(p.path)) {
        fail(Errc::InvalidBag, "payload file missing from manifest-" + std::string(algorithm_name(alg)) +
                                   ".txt: " + p.path);
      }
    }
  }
}

std::vector<archive::Member> members_of(const Bag& bag, std::string_view root) {
  std::vector<archive::Member> members;
  const std::string prefix = std::string(root) + "/";
  for (const auto& p : bag.payload) {
    members.push_back({prefix + p.path, p.source.read()});
  }
  for (auto& t : serialize_tag_files(bag)) {
    members.push_back({prefix + t.path, std::move(t.bytes)});
  }
  for (const auto& [alg, entries] : bag.tag_manifests) {
    members.push_back({prefix + manifest_name(alg, true), format::write_manifest(entries)});
  }
  std::sort(members.begin(), members.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  return members;
}

void add_problem(BagValidationReport& r, std::string code, std::string path, std::string detail,
                 Severity sev = Severity::error) {
  r.problems.push_back(Problem{sev, std::move(code), std::move(path), std::move(detail)});
}

BagValidationReport check_tree(const Tree& tree, CheckLevel level) {
  BagValidationReport report;
  auto finish = [&](bool complete) {
    report.is_complete = complete;
    report.is_valid = complete && report.problems.empty();
    return report;
  };

  if (!tree.has(std::string(kDeclaration))) {
    add_problem(report, "NotABag", std::string(kDeclaration), "missing bag declaration");
    return finish(false);
  }
  try {
    format::parse_declaration(tree.read(std::string(kDeclaration)));
  } catch (const Error& e) {
    add_problem(report, std::string(e.code_name()), std::string(kDeclaration), e.detail());
    return finish(false);
  }

  Manifests manifests;
  Manifests tag_manifests;
  std::vector<FetchEntry> fetch;
  InfoPairs info;
  for (const auto& [path, node] : tree.files) {
    bool tag = false;
    std::optional<Algorithm> alg;
    if (!is_manifest_name(path, tag, alg)) continue;
    if (!alg) {
      add_problem(report, "UnsupportedAlgorithm", path, "manifest algorithm not recognised",
                  Severity::warning);
      continue;
    }
    try {
      (tag ? tag_manifests : manifests)[*alg] = format::parse_manifest(node.source.read(), *alg);
    } catch (const Error& e) {
      add_problem(report, std::string(e.code_name()), path, e.detail());
    }
  }
  if (tree.has(std::string(kBagInfo))) {
    try {
      info = format::parse_info(tree.read(std::string(kBagInfo)));
    } catch (const Error& e) {
      add_problem(report, std::string(e.code_name()), std::string(kBagInfo), e.detail());
    }
  }
  if (tree.has(std::string(kFetch))) {
    try {
      fetch = format::parse_fetch(tree.read(std::string(kFetch)));
    } catch (const Error& e) {
      add_problem(report, std::string(e.code_name()), std::string(kFetch), e.detail());
    }
  }
  if (manifests.empty() && report.problems.empty()) {
    add_problem(report, "MissingManifest", "", "no payload manifest");
  }

  // --- completeness -------------------------------------------------------
  std::set<std::string> fetch_paths;
  for (const auto& f : fetch) {
    if (!is_payload_path(f.path)) {
      add_problem(report, "UnsafePath", f.path, "fetch path escapes the payload directory");
      continue;
    }
    fetch_paths.insert(f.path);
  }
  std::set<std::string> manifest_paths;
  for (const auto& [alg, entries] : manifests) {
    std::set<std::string> listed;
    for (const auto& e : entries) {
      if (!is_payload_path(e.path)) {
        add_problem(report, "UnsafePath", e.path, "manifest path escapes the payload directory");
        continue;
      }
      listed.insert(e.path);
      if (manifest_paths.insert(e.path).second && !tree.has(e.path) && !fetch_paths.count(e.path)) {
        add_problem(report, "MissingPayload", e.path, "listed in manifest but not present");
      }
    }
    for (const auto& [path, node] : tree.files) {
      if (path.compare(0, kDataPrefix.size(), kDataPrefix) == 0 && !listed.count(path)) {
        add_problem(report, "UnlistedPayload", path,
                    "not listed in manifest-" + std::string(algorithm_name(alg)) + ".txt");
      }
    }
  }
  for (const auto& p : fetch_paths) {
    if (!manifest_paths.count(p)) {
      add_problem(report, "FetchNotInManifest", p, "fetch entry cannot be verified");
    }
  }
  for (const auto& [alg, entries] : tag_manifests) {
    for (const auto& e : entries) {
      if (!is_safe_relative(e.path)) {
        add_problem(report, "UnsafePath", e.path, "tag manifest path escapes the bag");
      } else if (!tree.has(e.path)) {
        add_problem(report, "MissingTagFile", e.path, "listed in tag manifest but not present");
      }
    }
  }
  for (const auto& [label, value] : info) {
    if (label != "Payload-Oxum") continue;
    const auto dot = value.find('.');
    std::uint64_t octets = 0;
    std::uint64_t count = 0;
    const auto a = std::from_chars(value.data(), value.data() + (dot == std::string::npos ? 0 : dot), octets);
    const auto b = dot == std::string::npos
                       ? std::from_chars_result{value.data(), std::errc::invalid_argument}
                       : std::from_chars(value.data() + dot + 1, value.data() + value.size(), count);
    if (dot == std::string::npos || a.ec != std::errc() || b.ec != std::errc() ||
        a.ptr != value.data() + dot || b.ptr != value.data() + value.size()) {
      add_problem(report, "MalformedTagFile", std::string(kBagInfo), "bad Payload-Oxum '" + value + "'");
      continue;
    }
    std::uint64_t have_octets = 0;
    std::uint64_t have_count = 0;
    bool known = true;
    for (const auto& [path, node] : tree.files) {
      if (path.compare(0, kDataPrefix.size(), kDataPrefix) == 0) {
        have_octets += node.size;
        ++have_count;
      }
    }
    for (const auto& f : fetch) {
      if (tree.has(f.path) || !fetch_paths.count(f.path)) continue;
      ++have_count;
      if (f.length) {
        have_octets += *f.length;
      } else {
        known = false;
      }
    }
    if (known && (have_octets != octets || have_count != count)) {
      add_problem(report, "OxumMismatch", std::string(kBagInfo),
                  "Payload-Oxum " + value + " but found " + std::to_string(have_octets) + "." +
                      std::to_string(have_count));
    }
  }
  const bool complete = std::none_of(report.problems.begin(), report.problems.end(),
                                     [](const Problem& p) { return p.severity == Severity::error; });
  if (level == CheckLevel::complete) {
    return finish(complete);
  }

  // --- validity -----------------------------------------------------------
  // One problem per path, whichever algorithms disagree.
  std::map<std::string, std::vector<std::pair<Algorithm, std::string>>> expected;
  for (const auto* group : {&manifests, &tag_manifests}) {
    for (const auto& [alg, entries] : *group) {
      for (const auto& e : entries) {
        if (tree.has(e.path)) expected[e.path].emplace_back(alg, e.digest);
      }
    }
  }
  std::vector<const ContentSource*> sources;
  std::vector<std::string> paths;
  std::vector<std::vector<Algorithm>> algs_per;
  for (const auto& [path, want] : expected) {
    sources.push_back(&tree.files.at(path).source);
    paths.push_back(path);
  }
  // All files of one bag share an algorithm set in practice; hash with the
  // union and compare per entry.
  std::set<Algorithm> all_algs;
  for (const auto& [_, want] : expected) {
    for (const auto& [alg, __] : want) all_algs.insert(alg);
  }
  const std::vector<Algorithm> alg_list(all_algs.begin(), all_algs.end());
  const auto digests = digest_all(sources, alg_list);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    std::string bad;
    for (const auto& [alg, digest] : expected[paths[i]]) {
      const auto idx = static_cast<std::size_t>(
          std::find(alg_list.begin(), alg_list.end(), alg) - alg_list.begin());
      if (digests[i][idx] != digest) {
        if (!bad.empty()) bad += ", ";
        bad += algorithm_name(alg);
      }
    }
    if (!bad.empty()) {
      add_problem(report, "ChecksumMismatch", paths[i], "digest mismatch (" + bad + ")");
    }
  }
  for (const auto& p : fetch_paths) {
    if (!tree.has(p)) {
      add_problem(report, "UnfetchedPayload", p, "fetch entry not yet materialized");
    }
  }
  return finish(complete);
}

}  // namespace

// --- ContentSource --------------------------------------------------------

std::string ContentSource::read() const {
  if (const auto* p = std::get_if<fs::path>(&v_)) {
    return read_file(*p);
  }
  if (const auto* m = std::get_if<std::shared_ptr<const std::string>>(&v_)) {
    return **m;
  }
  fail(Errc::Internal, "payload entry has no content source");
}

std::vector<std::string> ContentSource::digests(std::span<const Algorithm> algs) const {
  if (const auto* p = std::get_if<fs::path>(&v_)) {
    return digest_file(*p, algs);
  }
  const auto bytes = read();
  std::vector<std::string> out;
  for (auto alg : algs) out.push_back(digest_hex(alg, bytes));
  return out;
}

// --- Bag accessors --------------------------------------------------------

const PayloadEntry* Bag::find_payload(std::string_view path) const {
  const auto it = std::lower_bound(payload.begin(), payload.end(), path,
                                   [](const PayloadEntry& e, std::string_view p) { return e.path < p; });
  return it != payload.end() && it->path == path ? &*it : nullptr;
}

const FetchEntry* Bag::find_fetch(std::string_view path) const {
  for (const auto& f : fetch) {
    if (f.path == path) return &f;
  }
  return nullptr;
}

std::optional<std::string> Bag::info(std::string_view label) const {
  for (const auto& [l, v] : bag_info) {
    if (l == label) return v;
  }
  return std::nullopt;
}

std::optional<std::string> Bag::digest_of(Algorithm alg, std::string_view path) const {
  const auto it = manifests.find(alg);
  if (it == manifests.end()) return std::nullopt;
  for (const auto& e : it->second) {
    if (e.path == path) return e.digest;
  }
  return std::nullopt;
}

std::set<std::string> Bag::manifest_paths() const {
  std::set<std::string> out;
  for (const auto& [_, entries] : manifests) {
    for (const auto& e : entries) out.insert(e.path);
  }
  return out;
}

std::set<std::string> BagValidationReport::problem_paths() const {
  std::set<std::string> out;
  for (const auto& p : problems) out.insert(p.path);
  return out;
}

bool BagValidationReport::has(std::string_view code, std::string_view path) const {
  return std::any_of(problems.begin(), problems.end(),
                     [&](const Problem& p) { return p.code == code && (path.empty() || p.path == path); });
}

// --- sealing --------------------------------------------------------------

std::optional<std::string> compute_oxum(const Bag& bag) {
  std::uint64_t octets = 0;
  std::uint64_t count = 0;
  for (const auto& p : bag.payload) {
    octets += p.length;
    ++count;
  }
  for (const auto& f : bag.fetch) {
    if (bag.find_payload(f.path)) continue;
    if (!f.length) return std::nullopt;
    octets += *f.length;
    ++count;
  }
  return std::to_string(octets) + "." + std::to_string(count);
}

std::vector<TagFile> serialize_tag_files(const Bag& bag) {
  std::vector<TagFile> out;
  out.push_back({std::string(kDeclaration), format::write_declaration(bag.version)});
  if (!bag.bag_info.empty()) {
    out.push_back({std::string(kBagInfo), format::write_info(bag.bag_info)});
  }
  for (const auto& [alg, entries] : bag.manifests) {
    out.push_back({manifest_name(alg, false), format::write_manifest(entries)});
  }
  if (!bag.fetch.empty()) {
    out.push_back({std::string(kFetch), format::write_fetch(bag.fetch)});
  }
  for (const auto& [_, block] : bag.metadata) {
    for (auto& [path, bytes] : block.files()) out.push_back({path, std::move(bytes)});
  }
  for (const auto& t : bag.extra_tags) out.push_back(t);
  sort_by_path(out);
  return out;
}

void seal(Bag& bag) {
  sort_by_path(bag.payload);
  sort_by_path(bag.fetch);
  for (auto& [_, entries] : bag.manifests) sort_by_path(entries);
  if (const auto oxum = compute_oxum(bag)) {
    set_info(bag.bag_info, "Payload-Oxum", *oxum);
  } else {
    erase_info(bag.bag_info, "Payload-Oxum");
  }
  std::set<Algorithm> algs;
  for (const auto& [alg, _] : bag.manifests) algs.insert(alg);
  for (const auto& [alg, _] : bag.tag_manifests) {
    if (is_producible(alg)) algs.insert(alg);
  }
  algs.erase(Algorithm::md5);
  if (algs.empty()) algs.insert(Algorithm::sha256);
  const auto files = serialize_tag_files(bag);
  bag.tag_manifests.clear();
  for (auto alg : algs) {
    auto& entries = bag.tag_manifests[alg];
    for (const auto& f : files) entries.push_back({alg, digest_hex(alg, f.bytes), f.path});
  }
}

// --- create ---------------------------------------------------------------

namespace {

Bag finish_create(std::vector<PayloadEntry> payload, const CreateOptions& options) {
  std::set<Algorithm> algs = options.algorithms;
  if (algs.empty()) {
    fail(Errc::UnsupportedAlgorithm, "no checksum algorithm requested");
  }
  for (auto alg : algs) {
    if (!is_producible(alg)) {
      fail(Errc::UnsupportedAlgorithm, std::string(algorithm_name(alg)) + " is accepted on read only");
    }
  }
  algs.insert(Algorithm::sha256);
  const std::vector<Algorithm> alg_list(algs.begin(), algs.end());

  Bag bag;
  bag.payload = std::move(payload);
  sort_by_path(bag.payload);
  std::vector<const ContentSource*> sources;
  for (const auto& p : bag.payload) sources.push_back(&p.source);
  const auto digests = digest_all(sources, alg_list);
  for (std::size_t a = 0; a < alg_list.size(); ++a) {
    auto& entries = bag.manifests[alg_list[a]];
    for (std::size_t i = 0; i < bag.payload.size(); ++i) {
      entries.push_back({alg_list[a], digests[i][a], bag.payload[i].path});
    }
  }
  bag.bag_info = options.info;
  if (!bag.info("BagIt-Profile-Identifier")) {
    bag.bag_info.emplace_back("BagIt-Profile-Identifier", std::string(kBdbagProfile));
  }
  if (options.metadata) {
    bag.metadata[options.metadata->mechanism] = *options.metadata;
  }
  seal(bag);
  return bag;
}

}  // namespace

Bag create_bag(const fs::path& source_dir, const CreateOptions& options) {
  std::error_code ec;
  if (!fs::is_directory(source_dir, ec)) {
    fail(Errc::UnreadableSource, source_dir.string() + " is not a readable directory");
  }
  std::vector<PayloadEntry> payload;
  for (auto it = fs::recursive_directory_iterator(source_dir, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    const auto rel = fs::relative(it->path(), source_dir).generic_string();
    payload.push_back(PayloadEntry{std::string(kDataPrefix) + rel, it->file_size(), ContentSource::file(it->path())});
  }
  if (ec) {
    fail(Errc::UnreadableSource, "walking " + source_dir.string() + ": " + ec.message());
  }
  return finish_create(std::move(payload), options);
}

Bag create_bag_from_memory(const std::map<std::string, std::string>& files, const CreateOptions& options) {
  std::vector<PayloadEntry> payload;
  for (const auto& [rel, bytes] : files) {
    const std::string path = std::string(kDataPrefix) + rel;
    if (!is_payload_path(path)) {
      fail(Errc::UnsafePath, rel);
    }
    payload.push_back(PayloadEntry{path, bytes.size(), ContentSource::memory(bytes)});
  }
  return finish_create(std::move(payload), options);
}

// --- write ----------------------------------------------------------------

std::string archive_bytes(const Bag& bag, ArchiveFormat format, bool deterministic, std::string_view root_name) {
  require_structurally_complete(bag);
  const auto members = members_of(bag, root_name);
  const std::int64_t mtime =
      deterministic ? 0 : std::chrono::duration_cast<std::chrono::seconds>(
                              std::chrono::system_clock::now().time_since_epoch())
                              .count();
  switch (format) {
    case ArchiveFormat::tar: return archive::write_tar(members, mtime);
    case ArchiveFormat::zip: return archive::write_zip(members, mtime);
    case ArchiveFormat::directory: break;
  }
  fail(Errc::InvalidBag, "directory is not an archive format");
}

void write_bag(const Bag& bag, const fs::path& dest, const WriteOptions& options) {
  if (fs::exists(dest)) {
    fail(Errc::DestinationExists, dest.string());
  }
  if (options.format != ArchiveFormat::directory) {
    const auto root = options.root_name.empty() ? dest.stem().string() : options.root_name;
    const auto bytes = archive_bytes(bag, options.format, options.deterministic, root);
    if (dest.has_parent_path()) fs::create_directories(dest.parent_path());
    write_file_atomic(dest, bytes);
    return;
  }

  require_structurally_complete(bag);
  // Build beside the destination and rename, so a failed write leaves nothing.
  auto staging = dest;
  staging += ".partial";
  std::error_code ec;
  fs::remove_all(staging, ec);
  try {
    const auto members = members_of(bag, "");
    for (const auto& m : members) {
      const fs::path target = staging / fs::path(m.path.substr(1));
      fs::create_directories(target.parent_path());
      std::ofstream out(target, std::ios::binary | std::ios::trunc);
      out.write(m.bytes.data(), static_cast<std::streamsize>(m.bytes.size()));
      if (!out) {
        fail(Errc::IoFailure, "writing " + target.string());
      }
    }
    fs::create_directories(staging / "data");
    fs::rename(staging, dest);
  } catch (const fs::filesystem_error& e) {
    fs::remove_all(staging, ec);
    fail(Errc::IoFailure, e.what());
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }
}

// --- read -----------------------------------------------------------------

Bag read_bag(const fs::path& source) { return assemble(tree_from_location(source)); }

Bag read_bag_archive_bytes(std::string_view bytes) { return assemble(tree_from_archive(bytes)); }

// --- check ----------------------------------------------------------------

BagValidationReport check(const fs::path& location, CheckLevel level) {
  try {
    return check_tree(tree_from_location(location), level);
  } catch (const Error& e) {
    BagValidationReport r;
    add_problem(r, std::string(e.code_name()), location.filename().string(), e.detail());
    return r;
  }
}

BagValidationReport check_archive_bytes(std::string_view bytes, CheckLevel level) {
  try {
    return check_tree(tree_from_archive(bytes), level);
  } catch (const Error& e) {
    BagValidationReport r;
    add_problem(r, std::string(e.code_name()), "", e.detail());
    return r;
  }
}

// --- holey ----------------------------------------------------------------

Bag make_holey(const Bag& bag, const PathPredicate& externalize, const UrlMapper& url_for) {
  Bag out = bag;
  out.payload.clear();
  for (const auto& p : bag.payload) {
    if (!externalize(p.path)) {
      out.payload.push_back(p);
      continue;
    }
    auto url = url_for(p.path);
    if (!url || url->empty()) {
      fail(Errc::MissingUrl, p.path);
    }
    if (url->find_first_of(" \t\r\n") != std::string::npos) {
      fail(Errc::MalformedFetchLine, "URL for " + p.path + " contains whitespace; percent-encode it");
    }
    out.fetch.push_back(FetchEntry{std::move(*url), p.length, p.path});
  }
  if (out.fetch.size() == bag.fetch.size()) {
    return bag;
  }
  seal(out);
  return out;
}

Bag materialize(const Bag& bag, const FetchResolver& resolvers) {
  for (const auto& f : bag.fetch) {
    const auto scheme = url_scheme(f.url);
    if (!resolvers.handles(scheme)) {
      fail(Errc::NoHandler, scheme.empty() ? f.url : scheme);
    }
  }
  Bag out = bag;
  out.fetch.clear();
  for (const auto& f : bag.fetch) {
    if (bag.find_payload(f.path)) continue;
    std::vector<std::pair<Algorithm, std::string>> want;
    for (const auto& [alg, _] : bag.manifests) {
      if (auto d = bag.digest_of(alg, f.path)) want.emplace_back(alg, std::move(*d));
    }
    if (want.empty()) {
      fail(Errc::InvalidBag, "fetch entry is not covered by any manifest: " + f.path);
    }
    std::string bytes = resolvers.fetch(f.url);
    if (f.length && *f.length != bytes.size()) {
      fail(Errc::DigestMismatchAfterFetch,
           f.path + ": expected " + std::to_string(*f.length) + " octets, got " + std::to_string(bytes.size()));
    }
    for (const auto& [alg, digest] : want) {
      if (digest_hex(alg, bytes) != digest) {
        fail(Errc::DigestMismatchAfterFetch, f.path + " (" + std::string(algorithm_name(alg)) + ")");
      }
    }
    const auto size = bytes.size();
    out.payload.push_back(PayloadEntry{f.path, size, ContentSource::memory(std::move(bytes))});
  }
  seal(out);
  return out;
}

Bag materialize_directory(const fs::path& bag_dir, const FetchResolver& resolvers) {
  const Bag before = read_bag(bag_dir);
  Bag after = materialize(before, resolvers);
  for (const auto& p : after.payload) {
    if (before.find_payload(p.path)) continue;
    const auto target = bag_dir / fs::path(p.path);
    fs::create_directories(target.parent_path());
    write_file_atomic(target, p.source.read());
  }
  std::error_code ec;
  fs::remove(bag_dir / kFetch, ec);
  for (const auto& t : serialize_tag_files(after)) {
    write_file_atomic(bag_dir / fs::path(t.path), t.bytes);
  }
  for (const auto& [alg, entries] : after.tag_manifests) {
    write_file_atomic(bag_dir / manifest_name(alg, true), format::write_manifest(entries));
  }
  return read_bag(bag_dir);
}

}  // namespace fair::bag
