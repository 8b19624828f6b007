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

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fair/common/json.hpp"

namespace fair::bag {

// How a bag describes its contents beyond the manifests. Each mechanism owns
// a fixed location under metadata/ and its own parse rules:
//
//   research_object  metadata/manifest.json          one JSON object
//   key_value        metadata/key-value.txt          "Label: value" lines
//   table_schema     metadata/datapackage.json       descriptor (resources)
//                    metadata/tables/<name>.csv      one file per resource
//
// Adding a mechanism means adding a case to files()/parse_metadata().
enum class MetadataMechanism { research_object, key_value, table_schema };

std::string_view mechanism_name(MetadataMechanism m) noexcept;
std::optional<MetadataMechanism> mechanism_from_name(std::string_view name) noexcept;

using Cell = std::optional<std::string>;  // nullopt is SQL-style null
using Row = std::vector<Cell>;

struct CsvTable {
  std::string name;
  std::vector<std::string> header;
  std::vector<Row> rows;

  bool operator==(const CsvTable&) const = default;
};

struct MetadataBlock {
  MetadataMechanism mechanism = MetadataMechanism::key_value;
  Json document;                                          // research_object, table_schema
  std::vector<std::pair<std::string, std::string>> pairs;  // key_value
  std::vector<CsvTable> tables;                           // table_schema

  static MetadataBlock research_object(Json doc);
  static MetadataBlock key_value(std::vector<std::pair<std::string, std::string>> pairs);
  static MetadataBlock table_schema(Json descriptor, std::vector<CsvTable> tables);

  // (bag-relative path, bytes), sorted by path.
  [[nodiscard]] std::vector<std::pair<std::string, std::string>> files() const;

  [[nodiscard]] const CsvTable* table(std::string_view name) const;

  bool operator==(const MetadataBlock& other) const;
};

// True for bag-relative paths owned by some mechanism.
bool is_metadata_path(std::string_view path) noexcept;

// Rebuilds the blocks present in a set of metadata/ files. Files under
// metadata/ that no mechanism claims are returned in `unclaimed`.
std::map<MetadataMechanism, MetadataBlock> parse_metadata(
    const std::map<std::string, std::string>& files, std::vector<std::string>* unclaimed);

std::string write_csv(const CsvTable& table);
CsvTable parse_csv(std::string_view name, std::string_view text);

}  // namespace fair::bag
