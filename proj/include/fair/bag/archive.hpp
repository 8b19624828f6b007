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
#include <string>
#include <string_view>
#include <vector>

// Minimal tar (ustar + pax path records) and zip (deflate) codecs for bag
// archives. Regular files only; directories are implied by member paths.
namespace fair::bag::archive {

struct Member {
  std::string path;
  std::string bytes;
};

enum class Kind { tar, zip, unknown };

Kind sniff(std::string_view bytes) noexcept;

// `mtime` in seconds since the epoch; 0 for deterministic output.
std::string write_tar(const std::vector<Member>& members, std::int64_t mtime);
std::vector<Member> read_tar(std::string_view bytes);

// `mtime` is converted to a DOS timestamp, clamped to the DOS epoch
// (1980-01-01) which zip cannot go below.
std::string write_zip(const std::vector<Member>& members, std::int64_t mtime);
std::vector<Member> read_zip(std::string_view bytes);

}  // namespace fair::bag::archive
