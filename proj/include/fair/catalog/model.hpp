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
#include <vector>

#include "fair/common/json.hpp"

namespace fair::catalog {

enum class ValueType { text, integer, floating, timestamp, boolean, identifier, term };
enum class TableKind { entity, asset, vocabulary, extension };

std::string_view value_type_name(ValueType t) noexcept;
std::optional<ValueType> value_type_from_name(std::string_view name) noexcept;
std::string_view table_kind_name(TableKind k) noexcept;
std::optional<TableKind> table_kind_from_name(std::string_view name) noexcept;

// Column ids are allocated once and never reused; record values are keyed by
// cid so a rename never touches stored data.
using Cid = int;

inline constexpr Cid kRidCid = 0;
inline constexpr Cid kRctCid = 1;
inline constexpr Cid kRmtCid = 2;

struct ColumnDef {
  Cid cid = -1;
  std::string name;
  ValueType type = ValueType::text;
  bool nullable = true;
  std::string vocabulary;  // qualified vocabulary table, term columns only
  bool system = false;

  bool operator==(const ColumnDef&) const = default;
};

struct ForeignKey {
  std::vector<std::string> columns;  // current local names
  std::string table;                 // qualified remote table
  std::vector<std::string> remote_columns;

  bool operator==(const ForeignKey&) const = default;
};

struct VocabularyTerm {
  std::string canonical;
  std::vector<std::string> synonyms;
  std::string description;

  bool operator==(const VocabularyTerm&) const = default;
};

struct TableDef {
  std::string schema;
  std::string name;
  TableKind kind = TableKind::entity;
  std::vector<ColumnDef> columns;  // system columns first
  std::vector<std::vector<std::string>> keys;
  std::vector<ForeignKey> foreign_keys;
  std::string extends;  // qualified parent, extension tables only
  std::map<std::string, Cid> aliases;  // retired column names
  std::vector<VocabularyTerm> terms;   // vocabulary tables only

  [[nodiscard]] std::string qualified() const { return schema + ":" + name; }
  [[nodiscard]] const ColumnDef* column(std::string_view name) const;  // current names only
  [[nodiscard]] const ColumnDef* column_by_cid(Cid cid) const;
  // Current name first, then retired aliases.
  [[nodiscard]] const ColumnDef* resolve_column(std::string_view name) const;
  [[nodiscard]] const VocabularyTerm* find_term(std::string_view canonical) const;

  bool operator==(const TableDef&) const = default;
};

struct CatalogModel {
  int version = 0;
  Cid next_cid = 3;
  std::map<std::string, TableDef> tables;  // keyed by qualified name

  // Accepts "schema:Table", or a bare table name when it is unambiguous.
  [[nodiscard]] const TableDef* find_table(std::string_view ref) const;
  [[nodiscard]] std::vector<std::string> schemas() const;
};

// Asset tables carry these in addition to the system columns.
inline constexpr std::string_view kAssetUrl = "URL";
inline constexpr std::string_view kAssetLength = "Length";
inline constexpr std::string_view kAssetChecksum = "Checksum";
inline constexpr std::string_view kAssetFilename = "Filename";

// One model mutation, kept as its JSON document (the "op" member selects the
// kind). The same document is what the operation log stores.
struct ModelChange {
  Json doc;
};

// Validates and applies a change, returning the next model version. Throws
// DuplicateName, DanglingReference, UnknownTable, UnknownColumn, BadRequest.
CatalogModel apply_change(const CatalogModel& model, const ModelChange& change);

// Lower-cased and trimmed; the form used to match terms and synonyms.
std::string fold_term(std::string_view raw);

// Canonical term for a raw spelling, or UnknownTerm.
std::string normalize_term(const TableDef& vocabulary, std::string_view raw);

bool is_identifier_name(std::string_view name) noexcept;

Json to_json(const CatalogModel& model);
Json to_json(const TableDef& table);

}  // namespace fair::catalog
