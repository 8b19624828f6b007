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

#include "fair/idspace/id.hpp"

#include <regex>

#include "fair/common/error.hpp"

namespace fair::idspace {
namespace {

constexpr std::string_view kAlphabet = "0123456789ABCDEFGHJKMNPQRSTVWXYZ";

char upper(char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c; }

bool is_crockford(char c) { return kAlphabet.find(c) != std::string_view::npos; }

[[noreturn]] void malformed(std::string_view text, std::size_t pos, std::string_view why) {
  fail(Errc::MalformedId,
       "position " + std::to_string(pos) + " in '" + std::string(text) + "': " + std::string(why));
}

}  // namespace

bool is_namespace_token(std::string_view ns) noexcept {
  if (ns.empty() || ns.front() < 'A' || ns.front() > 'Z') return false;
  for (char c : ns) {
    if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_')) return false;
  }
  return true;
}

IdString parse_id(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) malformed(text, text.size(), "missing ':'");
  if (colon == 0) malformed(text, 0, "empty namespace");
  IdString id;
  for (std::size_t i = 0; i < colon; ++i) {
    const char c = upper(text[i]);
    const bool ok = (c >= 'A' && c <= 'Z') || (i > 0 && ((c >= '0' && c <= '9') || c == '_'));
    if (!ok) malformed(text, i, "bad namespace character");
    id.ns.push_back(c);
  }
  const std::size_t start = colon + 1;
  if (start == text.size()) malformed(text, start, "empty suffix");
  std::size_t group = 0;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = upper(text[i]);
    if (c == '-') {
      if (group == 0) malformed(text, i, "empty group");
      group = 0;
      id.suffix.push_back(c);
      continue;
    }
    if (!is_crockford(c)) malformed(text, i, "not a Crockford base-32 digit");
    if (++group > 4) malformed(text, i, "group longer than 4");
    id.suffix.push_back(c);
  }
  if (group == 0) malformed(text, text.size(), "empty group");
  return id;
}

std::string crockford_encode(std::uint64_t value, unsigned digits) {
  std::string out(digits, '0');
  for (unsigned i = 0; i < digits; ++i) {
    out[digits - 1 - i] = kAlphabet[value & 31u];
    value >>= 5;
  }
  return out;
}

std::uint64_t random_seed() {
  // random_device yields 32 bits; widen the seed.
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

SuffixGenerator::SuffixGenerator() : rng_(random_seed()) {}

SuffixGenerator::SuffixGenerator(std::uint64_t seed) : rng_(seed) {}

std::string SuffixGenerator::next() {
  std::uint64_t r = 0;
  std::uint16_t s = 0;
  {
    std::lock_guard lock(mu_);
    r = rng_();
    s = seq_++;
  }
  // 80 bits -> 16 digits: the top 60 random bits, then the last 4 random
  // bits joined with the 16 sequence bits.
  const std::string hi = crockford_encode(r >> 4, 12);
  const std::string lo = crockford_encode(((r & 0xFu) << 16) | s, 4);
  const std::string all = hi + lo;
  return all.substr(0, 4) + "-" + all.substr(4, 4) + "-" + all.substr(8, 4) + "-" + all.substr(12, 4);
}

bool is_doi(std::string_view text) {
  static const std::regex grammar(R"(^10\.[0-9]+(\.[0-9]+)*/\S+$)");
  if (text.substr(0, 4) == "doi:") text.remove_prefix(4);
  return std::regex_match(text.begin(), text.end(), grammar);
}

}  // namespace fair::idspace
