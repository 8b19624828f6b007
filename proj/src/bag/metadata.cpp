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

#include "fair/bag/metadata.hpp"

#include <algorithm>

#include "fair/bag/format.hpp"
#include "fair/common/error.hpp"

namespace fair::bag {
namespace {

constexpr std::string_view kRoManifest = "metadata/manifest.json";
constexpr std::string_view kKeyValue = "metadata/key-value.txt";
constexpr std::string_view kDescriptor = "metadata/datapackage.json";
constexpr std::string_view kTablesDir = "metadata/tables/";

bool needs_quotes(std::string_view s) {
  if (s.empty()) return true;  // distinguishes "" from null
  if (s.front() == ' ' || s.back() == ' ') return true;
  return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

void put_cell(std::string& out, const Cell& cell) {
  if (!cell) return;
  if (!needs_quotes(*cell)) {
    out += *cell;
    return;
  }
  out.push_back('"');
  for (char c : *cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

std::vector<Row> csv_records(std::string_view text, std::string_view name) {
  std::vector<Row> rows;
  Row row;
  std::size_t i = 0;
  std::size_t line = 1;
  bool row_started = false;
  while (i < text.size()) {
    Cell cell;
    if (text[i] == '"') {
      std::string v;
      ++i;
      for (;;) {
        if (i >= text.size()) {
          fail(Errc::MalformedTagFile, std::string(name) + ".csv line " + std::to_string(line) +
                                           ": unterminated quoted field");
        }
        if (text[i] == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            v.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        if (text[i] == '\n') ++line;
        v.push_back(text[i++]);
      }
      cell = std::move(v);
    } else {
      const auto end = text.find_first_of(",\r\n", i);
      const auto stop = end == std::string_view::npos ? text.size() : end;
      if (stop > i) cell = std::string(text.substr(i, stop - i));
      i = stop;
    }
    row.push_back(std::move(cell));
    row_started = true;
    if (i < text.size() && text[i] == ',') {
      ++i;
      if (i == text.size()) row.emplace_back();
      continue;
    }
    if (i < text.size() && text[i] == '\r') ++i;
    if (i < text.size() && text[i] == '\n') {
      ++i;
      ++line;
    }
    rows.push_back(std::move(row));
    row.clear();
    row_started = false;
  }
  if (row_started) rows.push_back(std::move(row));
  return rows;
}

}  // namespace

std::string_view mechanism_name(MetadataMechanism m) noexcept {
  switch (m) {
    case MetadataMechanism::research_object: return "research-object";
    case MetadataMechanism::key_value: return "key-value";
    case MetadataMechanism::table_schema: return "table-schema";
  }
  return "key-value";
}

std::optional<MetadataMechanism> mechanism_from_name(std::string_view name) noexcept {
  if (name == "research-object") return MetadataMechanism::research_object;
  if (name == "key-value") return MetadataMechanism::key_value;
  if (name == "table-schema") return MetadataMechanism::table_schema;
  return std::nullopt;
}

MetadataBlock MetadataBlock::research_object(Json doc) {
  if (!doc.is_object()) {
    fail(Errc::InvalidBag, "research-object metadata must be a JSON object");
  }
  MetadataBlock b;
  b.mechanism = MetadataMechanism::research_object;
  b.document = std::move(doc);
  return b;
}

MetadataBlock MetadataBlock::key_value(std::vector<std::pair<std::string, std::string>> pairs) {
  MetadataBlock b;
  b.mechanism = MetadataMechanism::key_value;
  b.pairs = std::move(pairs);
  return b;
}

MetadataBlock MetadataBlock::table_schema(Json descriptor, std::vector<CsvTable> tables) {
  if (!descriptor.is_object()) {
    fail(Errc::InvalidBag, "table-schema descriptor must be a JSON object");
  }
  std::sort(tables.begin(), tables.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  MetadataBlock b;
  b.mechanism = MetadataMechanism::table_schema;
  b.document = std::move(descriptor);
  b.tables = std::move(tables);
  return b;
}

const CsvTable* MetadataBlock::table(std::string_view name) const {
  for (const auto& t : tables) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

bool MetadataBlock::operator==(const MetadataBlock& o) const {
  return mechanism == o.mechanism && canonical(document) == canonical(o.document) && pairs == o.pairs &&
         tables == o.tables;
}

std::vector<std::pair<std::string, std::string>> MetadataBlock::files() const {
  std::vector<std::pair<std::string, std::string>> out;
  switch (mechanism) {
    case MetadataMechanism::research_object:
      out.emplace_back(kRoManifest, document.dump(2) + "\n");
      break;
    case MetadataMechanism::key_value:
      out.emplace_back(kKeyValue, format::write_info(pairs));
      break;
    case MetadataMechanism::table_schema:
      out.emplace_back(kDescriptor, document.dump(2) + "\n");
      for (const auto& t : tables) {
        out.emplace_back(std::string(kTablesDir) + t.name + ".csv", write_csv(t));
      }
      break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_metadata_path(std::string_view path) noexcept {
  return path == kRoManifest || path == kKeyValue || path == kDescriptor ||
         (path.substr(0, kTablesDir.size()) == kTablesDir && path.size() > kTablesDir.size() + 4 &&
          path.substr(path.size() - 4) == ".csv" &&
          path.substr(kTablesDir.size()).find('/') == std::string_view::npos);
}

std::map<MetadataMechanism, MetadataBlock> parse_metadata(const std::map<std::string, std::string>& files,
                                                          std::vector<std::string>* unclaimed) {
  std::map<MetadataMechanism, MetadataBlock> out;
  std::vector<CsvTable> tables;
  std::vector<std::string> table_paths;
  for (const auto& [path, bytes] : files) {
    if (path == kRoManifest) {
      try {
        out[MetadataMechanism::research_object] = MetadataBlock::research_object(Json::parse(bytes));
      } catch (const Json::exception& e) {
        fail(Errc::MalformedTagFile, path + ": " + e.what());
      }
    } else if (path == kKeyValue) {
      out[MetadataMechanism::key_value] = MetadataBlock::key_value(format::parse_info(bytes));
    } else if (path != kDescriptor && is_metadata_path(path)) {
      const auto name = path.substr(kTablesDir.size(), path.size() - kTablesDir.size() - 4);
      tables.push_back(parse_csv(name, bytes));
      table_paths.push_back(path);
    } else if (path != kDescriptor && unclaimed != nullptr) {
      unclaimed->push_back(path);
    }
  }
  if (const auto it = files.find(std::string(kDescriptor)); it != files.end()) {
    Json descriptor;
    try {
      descriptor = Json::parse(it->second);
    } catch (const Json::exception& e) {
      fail(Errc::MalformedTagFile, std::string(kDescriptor) + ": " + e.what());
    }
    out[MetadataMechanism::table_schema] = MetadataBlock::table_schema(std::move(descriptor), std::move(tables));
  } else if (unclaimed != nullptr) {
    // CSV files without a descriptor belong to nobody.
    unclaimed->insert(unclaimed->end(), table_paths.begin(), table_paths.end());
  }
  return out;
}

std::string write_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out.push_back(',');
    put_cell(out, table.header[i]);
  }
  out.push_back('\n');
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      fail(Errc::InvalidBag, "row width does not match header in table " + table.name);
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out.push_back(',');
      put_cell(out, row[i]);
    }
    out.push_back('\n');
  }
  return out;
}

CsvTable parse_csv(std::string_view name, std::string_view text) {
  CsvTable t;
  t.name = std::string(name);
  auto records = csv_records(text, name);
  if (records.empty()) {
    fail(Errc::MalformedTagFile, std::string(name) + ".csv: missing header");
  }
  for (auto& cell : records.front()) {
    t.header.push_back(cell.value_or(""));
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) {
      fail(Errc::MalformedTagFile, std::string(name) + ".csv record " + std::to_string(r + 1) +
                                       ": expected " + std::to_string(t.header.size()) + " fields");
    }
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

}  // namespace fair::bag
