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

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fair {

// One code per failure mode named by the module contracts. The HTTP layer
// maps these one-to-one onto ApiError codes, so keep names stable.
enum class Errc {
  // bag
  UnreadableSource,
  UnsupportedAlgorithm,
  DestinationExists,
  IoFailure,
  NotABag,
  MalformedManifestLine,
  MalformedFetchLine,
  MalformedTagFile,
  UnsupportedVersion,
  InvalidBag,
  MissingUrl,
  NoHandler,
  FetchFailed,
  DigestMismatchAfterFetch,
  UnsafePath,
  // idspace
  EmptyLocations,
  MalformedDigest,
  MalformedId,
  NotFound,
  SupersededImmutable,
  MalformedDoi,
  // catalog
  Forbidden,
  DanglingReference,
  DuplicateName,
  DuplicateKey,
  TypeViolation,
  UnknownTerm,
  UnknownPath,
  UnknownColumn,
  UnknownTable,
  UnreachableAsset,
  InvalidOperation,
  // flows
  ParseError,
  UnboundInput,
  NotResumable,
  BindingError,
  QualityCheckFailed,
  // services / cli
  BindFailure,
  CorruptLog,
  UnknownRoute,
  Conflict,
  BadRequest,
  UsageError,
  NotEmpty,
  NotInitialized,
  Locked,
  Connectivity,
  Internal,
};

std::string_view errc_name(Errc code) noexcept;
std::optional<Errc> errc_from_name(std::string_view name) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
        code_(code),
        detail_(std::move(detail)) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }
  [[nodiscard]] std::string_view code_name() const noexcept { return errc_name(code_); }
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

[[noreturn]] inline void fail(Errc code, std::string detail) {
  throw Error(code, std::move(detail));
}

}  // namespace fair
