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
#include <map>
#include <memory>
#include <random>
#include <string>

namespace fair::testing {

// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::filesystem::path& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, std::string_view bytes);
void write_tree(const std::filesystem::path& root, const std::map<std::string, std::string>& files);
std::map<std::string, std::string> read_tree(const std::filesystem::path& root);
std::size_t count_lines(const std::filesystem::path& path);

// Random payload tree: 0..max_files files, nested up to three levels, random
// byte content (including empty files) and some unicode/space names.
std::map<std::string, std::string> random_tree(std::mt19937_64& rng, std::size_t max_files,
                                               std::size_t max_size = 2048);

// Serves a directory over HTTP on 127.0.0.1 with an ephemeral port.
class HttpFileStub {
 public:
  explicit HttpFileStub(std::filesystem::path root);
  ~HttpFileStub();
  HttpFileStub(const HttpFileStub&) = delete;
  HttpFileStub& operator=(const HttpFileStub&) = delete;

  [[nodiscard]] std::string url_for(const std::string& rel) const;
  [[nodiscard]] int port() const noexcept { return port_; }
  [[nodiscard]] std::size_t requests() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace fair::testing
