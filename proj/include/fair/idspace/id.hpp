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
#include <mutex>
#include <random>
#include <string>
#include <string_view>

namespace fair::idspace {

// NAMESPACE:SUFFIX, e.g. SYNAPSE:1-1ACR. The namespace is an uppercase
// token; the suffix is Crockford base-32 in hyphen-separated groups of at
// most four characters. Parsed ids are case-normalized, so equal ids compare
// equal as values.
struct IdString {
  std::string ns;
  std::string suffix;

  [[nodiscard]] std::string str() const { return ns + ":" + suffix; }
  bool operator==(const IdString&) const = default;
  auto operator<=>(const IdString&) const = default;
};

// MalformedId with the 0-based offending position in the detail.
IdString parse_id(std::string_view text);
bool is_namespace_token(std::string_view ns) noexcept;

// Crockford base-32 of the low 5*digits bits of `value`, most significant digit
// first.
std::string crockford_encode(std::uint64_t value, unsigned digits);

std::uint64_t random_seed();

// 64 random bits followed by a 16-bit sequence counter, rendered as
// XXXX-XXXX-XXXX-XXXX. Thread-safe.
class SuffixGenerator {
 public:
  SuffixGenerator();  // seeded from std::random_device
  explicit SuffixGenerator(std::uint64_t seed);

  std::string next();

 private:
  std::mutex mu_;
  std::mt19937_64 rng_;
  std::uint16_t seq_ = 0;
};

// "10.<registrant>/<suffix>"; a leading "doi:" is tolerated.
bool is_doi(std::string_view text);

}  // namespace fair::idspace
