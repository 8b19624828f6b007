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

#include <string>
#include <string_view>
#include <vector>

#include "fair/bag/bag.hpp"

// Text grammars of the BagIt tag files. All files are UTF-8 with LF endings;
// readers also accept CRLF.
namespace fair::bag::format {

// Percent-encodes CR, LF and '%' in a path for manifest and fetch lines.
std::string encode_path(std::string_view path);
std::string decode_path(std::string_view encoded);

std::string write_declaration(std::string_view version);
// Returns the BagIt-Version value. NotABag / UnsupportedVersion on failure.
std::string parse_declaration(std::string_view text);

std::string write_manifest(const std::vector<ManifestEntry>& entries);
// MalformedManifestLine carries the 1-based line number in its detail.
std::vector<ManifestEntry> parse_manifest(std::string_view text, Algorithm alg);

std::string write_fetch(const std::vector<FetchEntry>& entries);
std::vector<FetchEntry> parse_fetch(std::string_view text);

// "Label: value" records; values longer than the fold width continue on
// lines starting with whitespace.
std::string write_info(const InfoPairs& pairs);
InfoPairs parse_info(std::string_view text);

std::vector<std::string> split_lines(std::string_view text);

}  // namespace fair::bag::format
