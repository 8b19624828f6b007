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

#include "fair/bag/format.hpp"

#include <algorithm>
#include <charconv>

#include "fair/common/error.hpp"

namespace fair::bag::format {
namespace {

constexpr std::size_t kFoldWidth = 79;

bool is_space(char c) { return c == ' ' || c == '\t'; }

std::string_view trim_left(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  return s;
}

std::string line_ref(std::size_t line_no) { return "line " + std::to_string(line_no); }

}  // namespace

std::string encode_path(std::string_view path) {
  std::string out;
  out.reserve(path.size());
  for (char c : path) {
    switch (c) {
      case '%': out += "%25"; break;
      case '\r': out += "%0D"; break;
      case '\n': out += "%0A"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string decode_path(std::string_view encoded) {
  std::string out;
  out.reserve(encoded.size());
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (encoded[i] == '%' && i + 2 < encoded.size()) {
      std::string code(encoded.substr(i + 1, 2));
      std::transform(code.begin(), code.end(), code.begin(), ::toupper);
      if (code == "25") { out.push_back('%'); i += 2; continue; }
      if (code == "0D") { out.push_back('\r'); i += 2; continue; }
      if (code == "0A") { out.push_back('\n'); i += 2; continue; }
    }
    out.push_back(encoded[i]);
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    pos = nl + 1;
  }
  return lines;
}

std::string write_declaration(std::string_view version) {
  return "BagIt-Version: " + std::string(version) + "\nTag-File-Character-Encoding: UTF-8\n";
}

std::string parse_declaration(std::string_view text) {
  InfoPairs pairs;
  try {
    pairs = parse_info(text);
  } catch (const Error& e) {
    fail(Errc::NotABag, "bagit.txt: " + e.detail());
  }
  std::string version;
  std::string encoding;
  for (const auto& [label, value] : pairs) {
    if (label == "BagIt-Version") version = value;
    if (label == "Tag-File-Character-Encoding") encoding = value;
  }
  if (version.empty()) {
    fail(Errc::NotABag, "bagit.txt lacks BagIt-Version");
  }
  if (version != "1.0" && version != "0.97") {
    fail(Errc::UnsupportedVersion, "BagIt-Version " + version);
  }
  if (!encoding.empty() && encoding != "UTF-8" && encoding != "utf-8") {
    fail(Errc::UnsupportedVersion, "Tag-File-Character-Encoding " + encoding);
  }
  return version;
}

std::string write_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += e.digest;
    out += "  ";
    out += encode_path(e.path);
    out.push_back('\n');
  }
  return out;
}

std::vector<ManifestEntry> parse_manifest(std::string_view text, Algorithm alg) {
  std::vector<ManifestEntry> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (line.empty()) continue;
    const auto ws = line.find_first_of(" \t");
    if (ws == std::string_view::npos || ws == 0) {
      fail(Errc::MalformedManifestLine, line_ref(i + 1) + ": expected '<digest> <path>'");
    }
    std::string digest(line.substr(0, ws));
    std::transform(digest.begin(), digest.end(), digest.begin(), ::tolower);
    const auto path = trim_left(line.substr(ws));
    if (path.empty()) {
      fail(Errc::MalformedManifestLine, line_ref(i + 1) + ": missing path");
    }
    if (!is_well_formed_digest(alg, digest)) {
      fail(Errc::MalformedManifestLine,
           line_ref(i + 1) + ": not a " + std::string(algorithm_name(alg)) + " digest");
    }
    out.push_back(ManifestEntry{alg, std::move(digest), decode_path(path)});
  }
  return out;
}

std::string write_fetch(const std::vector<FetchEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    // The line is space-separated, so a raw space in the URL cannot be read back.
    if (e.url.empty() || e.url.find_first_of(" \t\r\n") != std::string::npos) {
      fail(Errc::MalformedFetchLine, "unencoded URL '" + e.url + "' for " + e.path);
    }
    out += e.url;
    out.push_back(' ');
    out += e.length ? std::to_string(*e.length) : std::string("-");
    out.push_back(' ');
    out += encode_path(e.path);
    out.push_back('\n');
  }
  return out;
}

std::vector<FetchEntry> parse_fetch(std::string_view text) {
  std::vector<FetchEntry> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (line.empty()) continue;
    const auto a = line.find_first_of(" \t");
    if (a == std::string_view::npos || a == 0) {
      fail(Errc::MalformedFetchLine, line_ref(i + 1) + ": expected '<url> <length> <path>'");
    }
    auto rest = trim_left(line.substr(a));
    const auto b = rest.find_first_of(" \t");
    if (b == std::string_view::npos) {
      fail(Errc::MalformedFetchLine, line_ref(i + 1) + ": missing path");
    }
    const auto len_text = rest.substr(0, b);
    const auto path = trim_left(rest.substr(b));
    if (path.empty()) {
      fail(Errc::MalformedFetchLine, line_ref(i + 1) + ": missing path");
    }
    FetchEntry e;
    e.url = std::string(line.substr(0, a));
    if (len_text != "-") {
      std::uint64_t n = 0;
      const auto [ptr, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), n);
      if (ec != std::errc() || ptr != len_text.data() + len_text.size()) {
        fail(Errc::MalformedFetchLine, line_ref(i + 1) + ": bad length '" + std::string(len_text) + "'");
      }
      e.length = n;
    }
    e.path = decode_path(path);
    out.push_back(std::move(e));
  }
  return out;
}

std::string write_info(const InfoPairs& pairs) {
  std::string out;
  for (const auto& [label, value] : pairs) {
    if (label.empty() || label.find_first_of(":\r\n") != std::string::npos || is_space(label.front())) {
      fail(Errc::InvalidBag, "bad tag label '" + label + "'");
    }
    if (value.find_first_of("\r\n") != std::string::npos) {
      fail(Errc::InvalidBag, "tag value for '" + label + "' contains a line break");
    }
    std::string line = label + ": ";
    std::string_view rest = value;
    std::size_t budget = kFoldWidth > line.size() ? kFoldWidth - line.size() : 1;
    // Fold only at a lone space so that rejoining with one space is exact.
    while (rest.size() > budget) {
      std::size_t cut = std::string_view::npos;
      for (std::size_t i = std::min(budget, rest.size() - 1); i > 0; --i) {
        if (rest[i] == ' ' && !is_space(rest[i - 1]) && i + 1 < rest.size() && !is_space(rest[i + 1])) {
          cut = i;
          break;
        }
      }
      if (cut == std::string_view::npos) break;
      line += rest.substr(0, cut);
      line += "\n  ";
      rest.remove_prefix(cut + 1);
      budget = kFoldWidth - 2;
    }
    line += rest;
    out += line;
    out.push_back('\n');
  }
  return out;
}

InfoPairs parse_info(std::string_view text) {
  InfoPairs out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (line.empty()) continue;
    if (is_space(line.front())) {
      if (out.empty()) {
        fail(Errc::MalformedTagFile, line_ref(i + 1) + ": continuation without a label");
      }
      out.back().second += " ";
      out.back().second += trim_left(line);
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string_view::npos || colon == 0) {
      fail(Errc::MalformedTagFile, line_ref(i + 1) + ": expected 'Label: value'");
    }
    out.emplace_back(std::string(line.substr(0, colon)), std::string(trim_left(line.substr(colon + 1))));
  }
  return out;
}

}  // namespace fair::bag::format
