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

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fair {

// Checksum algorithms understood by the toolkit. md5 is accepted when reading
// existing bags but is never produced.
enum class Algorithm { md5, sha256, sha512 };

std::string_view algorithm_name(Algorithm alg) noexcept;
std::optional<Algorithm> algorithm_from_name(std::string_view name) noexcept;
std::size_t hex_length(Algorithm alg) noexcept;
bool is_producible(Algorithm alg) noexcept;

// True when `hex` is lowercase hexadecimal of the right length for `alg`.
bool is_well_formed_digest(Algorithm alg, std::string_view hex) noexcept;

class Hasher {
 public:
  explicit Hasher(Algorithm alg);
  ~Hasher();
  Hasher(Hasher&&) noexcept;
  Hasher& operator=(Hasher&&) noexcept;
  Hasher(const Hasher&) = delete;
  Hasher& operator=(const Hasher&) = delete;

  void update(std::string_view bytes);
  std::string hex_digest();

  [[nodiscard]] Algorithm algorithm() const noexcept { return alg_; }

 private:
  struct Impl;
  Algorithm alg_;
  std::unique_ptr<Impl> impl_;
};

std::string digest_hex(Algorithm alg, std::string_view bytes);

// Streams the file once and returns one digest per algorithm, in order.
std::vector<std::string> digest_file(const std::filesystem::path& file,
                                     std::span<const Algorithm> algs,
                                     std::uint64_t* length_out = nullptr);

}  // namespace fair
