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

#include <filesystem>
#include <string>
#include <string_view>

namespace fair {

std::string read_file(const std::filesystem::path& path);

// Writes via a sibling temporary and rename, so readers never see a partial
// file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

// file:///abs/path with RFC 3986 percent-encoding of everything outside the
// unreserved set and '/'.
std::string file_url(const std::filesystem::path& path);
std::filesystem::path path_from_file_url(std::string_view url);

std::string percent_encode(std::string_view text, std::string_view keep = "");
std::string percent_decode(std::string_view text);

// Scheme of a URL-like reference ("http", "file", "minid"), lowercased; empty
// if there is none.
std::string url_scheme(std::string_view url);

// Exclusive advisory lock on a file; released on destruction.
class FileLock {
 public:
  explicit FileLock(const std::filesystem::path& path);
  ~FileLock();
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace fair
