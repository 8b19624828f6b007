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

#include "fair/common/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>

#include "fair/common/error.hpp"

namespace fair {

std::string_view algorithm_name(Algorithm alg) noexcept {
  switch (alg) {
    case Algorithm::md5: return "md5";
    case Algorithm::sha256: return "sha256";
    case Algorithm::sha512: return "sha512";
  }
  return "sha256";
}

std::optional<Algorithm> algorithm_from_name(std::string_view name) noexcept {
  if (name == "md5") return Algorithm::md5;
  if (name == "sha256") return Algorithm::sha256;
  if (name == "sha512") return Algorithm::sha512;
  return std::nullopt;
}

std::size_t hex_length(Algorithm alg) noexcept {
  switch (alg) {
    case Algorithm::md5: return 32;
    case Algorithm::sha256: return 64;
    case Algorithm::sha512: return 128;
  }
  return 0;
}

bool is_producible(Algorithm alg) noexcept { return alg != Algorithm::md5; }

bool is_well_formed_digest(Algorithm alg, std::string_view hex) noexcept {
  if (hex.size() != hex_length(alg)) {
    return false;
  }
  for (char c : hex) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
      return false;
    }
  }
  return true;
}

struct Hasher::Impl {
  EVP_MD_CTX* ctx = nullptr;
  ~Impl() { EVP_MD_CTX_free(ctx); }
};

namespace {

const EVP_MD* evp_for(Algorithm alg) {
  switch (alg) {
    case Algorithm::md5: return EVP_md5();
    case Algorithm::sha256: return EVP_sha256();
    case Algorithm::sha512: return EVP_sha512();
  }
  return EVP_sha256();
}

}  // namespace

Hasher::Hasher(Algorithm alg) : alg_(alg), impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_MD_CTX_new();
  if (impl_->ctx == nullptr || EVP_DigestInit_ex(impl_->ctx, evp_for(alg), nullptr) != 1) {
    fail(Errc::Internal, "digest context initialisation failed");
  }
}

Hasher::~Hasher() = default;
Hasher::Hasher(Hasher&&) noexcept = default;
Hasher& Hasher::operator=(Hasher&&) noexcept = default;

void Hasher::update(std::string_view bytes) {
  if (!bytes.empty()) {
    EVP_DigestUpdate(impl_->ctx, bytes.data(), bytes.size());
  }
}

std::string Hasher::hex_digest() {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(impl_->ctx, md.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0x0f]);
  }
  return out;
}

std::string digest_hex(Algorithm alg, std::string_view bytes) {
  Hasher h(alg);
  h.update(bytes);
  return h.hex_digest();
}

std::vector<std::string> digest_file(const std::filesystem::path& file,
                                     std::span<const Algorithm> algs,
                                     std::uint64_t* length_out) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    fail(Errc::UnreadableSource, "cannot open " + file.string());
  }
  std::vector<Hasher> hashers;
  hashers.reserve(algs.size());
  for (auto alg : algs) {
    hashers.emplace_back(alg);
  }
  std::vector<char> buf(1 << 16);
  std::uint64_t total = 0;
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    total += got;
    for (auto& h : hashers) {
      h.update(std::string_view(buf.data(), got));
    }
  }
  if (in.bad()) {
    fail(Errc::UnreadableSource, "read error on " + file.string());
  }
  if (length_out != nullptr) {
    *length_out = total;
  }
  std::vector<std::string> out;
  out.reserve(hashers.size());
  for (auto& h : hashers) {
    out.push_back(h.hex_digest());
  }
  return out;
}

}  // namespace fair
