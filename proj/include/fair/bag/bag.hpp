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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fair/bag/metadata.hpp"
#include "fair/common/digest.hpp"

namespace fair::bag {

inline constexpr std::string_view kBagItVersion = "1.0";
inline constexpr std::string_view kBdbagProfile =
    "https://raw.githubusercontent.com/fair-research/bdbag/master/profiles/bdbag-profile.json";

// Where a payload file's bytes live: a file on disk or an in-memory buffer.
// Equality of payload entries never looks at the source; the manifests bind
// content.
class ContentSource {
 public:
  ContentSource() = default;
  static ContentSource file(std::filesystem::path p) {
    ContentSource s;
    s.v_ = std::move(p);
    return s;
  }
  static ContentSource memory(std::string bytes) {
    ContentSource s;
    s.v_ = std::make_shared<const std::string>(std::move(bytes));
    return s;
  }

  [[nodiscard]] bool empty() const noexcept { return std::holds_alternative<std::monostate>(v_); }
  [[nodiscard]] std::string read() const;
  [[nodiscard]] std::vector<std::string> digests(std::span<const Algorithm> algs) const;

 private:
  std::variant<std::monostate, std::filesystem::path, std::shared_ptr<const std::string>> v_;
};

struct PayloadEntry {
  std::string path;  // bag-relative, always under data/
  std::uint64_t length = 0;
  ContentSource source;

  bool operator==(const PayloadEntry& o) const { return path == o.path && length == o.length; }
};

struct ManifestEntry {
  Algorithm algorithm = Algorithm::sha256;
  std::string digest;
  std::string path;

  bool operator==(const ManifestEntry&) const = default;
};

struct FetchEntry {
  std::string url;
  std::optional<std::uint64_t> length;  // nullopt serializes as "-"
  std::string path;

  bool operator==(const FetchEntry&) const = default;
};

struct TagFile {
  std::string path;
  std::string bytes;

  bool operator==(const TagFile&) const = default;
};

using InfoPairs = std::vector<std::pair<std::string, std::string>>;
using Manifests = std::map<Algorithm, std::vector<ManifestEntry>>;

// An aggregation of payload files, checksum manifests and tag metadata.
// Lists are kept sorted by path (byte-wise) so that equal bags serialize to
// equal bytes.
struct Bag {
  std::string version{kBagItVersion};
  std::vector<PayloadEntry> payload;
  Manifests manifests;
  Manifests tag_manifests;
  InfoPairs bag_info;
  std::vector<FetchEntry> fetch;
  std::map<MetadataMechanism, MetadataBlock> metadata;
  std::vector<TagFile> extra_tags;  // unknown tag files, kept verbatim

  [[nodiscard]] const PayloadEntry* find_payload(std::string_view path) const;
  [[nodiscard]] const FetchEntry* find_fetch(std::string_view path) const;
  [[nodiscard]] std::optional<std::string> info(std::string_view label) const;
  [[nodiscard]] std::optional<std::string> digest_of(Algorithm alg, std::string_view path) const;
  [[nodiscard]] std::set<std::string> manifest_paths() const;
  [[nodiscard]] bool is_holey() const noexcept { return !fetch.empty(); }

  bool operator==(const Bag&) const = default;
};

// Payload-Oxum over the logical payload: present files plus fetch entries of
// known length. nullopt when some pending fetch entry has unknown length.
std::optional<std::string> compute_oxum(const Bag& bag);

// Recomputes Payload-Oxum and every tag manifest from the serialized tag
// files. Called after any structural change.
void seal(Bag& bag);

// All tag files except tag manifests, exactly as write_bag emits them.
std::vector<TagFile> serialize_tag_files(const Bag& bag);

// --- create ---------------------------------------------------------------

struct CreateOptions {
  std::set<Algorithm> algorithms{Algorithm::sha256};
  InfoPairs info;
  std::optional<MetadataBlock> metadata;
};

Bag create_bag(const std::filesystem::path& source_dir, const CreateOptions& options);

// Builds a bag from in-memory files keyed by payload-relative path (without
// the data/ prefix).
Bag create_bag_from_memory(const std::map<std::string, std::string>& files,
                           const CreateOptions& options);

// --- serialize ------------------------------------------------------------

enum class ArchiveFormat { directory, tar, zip };

struct WriteOptions {
  ArchiveFormat format = ArchiveFormat::directory;
  bool deterministic = true;
  std::string root_name;  // top-level directory inside archives; defaults to dest stem
};

void write_bag(const Bag& bag, const std::filesystem::path& dest, const WriteOptions& options);

// Archive bytes without touching the filesystem.
std::string archive_bytes(const Bag& bag, ArchiveFormat format, bool deterministic,
                          std::string_view root_name);

// --- parse ----------------------------------------------------------------

// Accepts a bag directory or a .tar/.zip archive holding one.
Bag read_bag(const std::filesystem::path& source);
Bag read_bag_archive_bytes(std::string_view bytes);

// --- check ----------------------------------------------------------------

enum class CheckLevel { complete, valid };
enum class Severity { warning, error };

struct Problem {
  Severity severity = Severity::error;
  std::string code;
  std::string path;
  std::string detail;

  bool operator==(const Problem&) const = default;
};

struct BagValidationReport {
  bool is_complete = false;
  bool is_valid = false;
  std::vector<Problem> problems;

  [[nodiscard]] std::set<std::string> problem_paths() const;
  [[nodiscard]] bool has(std::string_view code, std::string_view path = {}) const;
};

BagValidationReport check(const std::filesystem::path& location, CheckLevel level);
BagValidationReport check_archive_bytes(std::string_view bytes, CheckLevel level);

// --- holey bags -----------------------------------------------------------

using PathPredicate = std::function<bool(const std::string& path)>;
using UrlMapper = std::function<std::optional<std::string>(const std::string& path)>;

Bag make_holey(const Bag& bag, const PathPredicate& externalize, const UrlMapper& url_for);

class FetchResolver;

// Fetches every fetch entry, verifying all manifest digests before accepting
// the bytes. The returned bag has an empty fetch list and in-memory sources
// for the fetched files.
Bag materialize(const Bag& bag, const FetchResolver& resolvers);

// Same, in place on a bag directory; fetch.txt is removed and tag manifests
// are rewritten once every entry verified.
Bag materialize_directory(const std::filesystem::path& bag_dir, const FetchResolver& resolvers);

}  // namespace fair::bag
