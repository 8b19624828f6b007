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
#include <mutex>
#include <vector>

#include "fair/common/json.hpp"

namespace fair {

// Newline-delimited JSON log opened for append.
//
// On open, every complete line is parsed and handed back. A final line with
// no terminating newline is a torn write from a crash: it is dropped and the
// file truncated to the last complete line. Any unparseable complete line is
// CorruptLog with its 1-based line number.
class AppendLog {
 public:
  struct Options {
    bool durable = false;  // fdatasync after each append
  };

  AppendLog(std::filesystem::path path, Options options);
  explicit AppendLog(std::filesystem::path path) : AppendLog(std::move(path), Options{}) {}
  ~AppendLog();
  AppendLog(const AppendLog&) = delete;
  AppendLog& operator=(const AppendLog&) = delete;

  // Entries recovered at open time.
  [[nodiscard]] const std::vector<Json>& recovered() const noexcept { return recovered_; }
  std::vector<Json> take_recovered() { return std::move(recovered_); }
  [[nodiscard]] bool truncated_tail() const noexcept { return truncated_tail_; }

  void append(const Json& entry);
  [[nodiscard]] std::uint64_t size_bytes() const;
  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  Options options_;
  int fd_ = -1;
  std::vector<Json> recovered_;
  bool truncated_tail_ = false;
  mutable std::mutex mu_;
};

}  // namespace fair
