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

#include "fair/common/error.hpp"

namespace fair {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::UnreadableSource: return "UnreadableSource";
    case Errc::UnsupportedAlgorithm: return "UnsupportedAlgorithm";
    case Errc::DestinationExists: return "DestinationExists";
    case Errc::IoFailure: return "IoFailure";
    case Errc::NotABag: return "NotABag";
    case Errc::MalformedManifestLine: return "MalformedManifestLine";
    case Errc::MalformedFetchLine: return "MalformedFetchLine";
    case Errc::MalformedTagFile: return "MalformedTagFile";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::InvalidBag: return "InvalidBag";
    case Errc::MissingUrl: return "MissingUrl";
    case Errc::NoHandler: return "NoHandler";
    case Errc::FetchFailed: return "FetchFailed";
    case Errc::DigestMismatchAfterFetch: return "DigestMismatchAfterFetch";
    case Errc::UnsafePath: return "UnsafePath";
    case Errc::EmptyLocations: return "EmptyLocations";
    case Errc::MalformedDigest: return "MalformedDigest";
    case Errc::MalformedId: return "MalformedId";
    case Errc::NotFound: return "NotFound";
    case Errc::SupersededImmutable: return "SupersededImmutable";
    case Errc::MalformedDoi: return "MalformedDoi";
    case Errc::Forbidden: return "Forbidden";
    case Errc::DanglingReference: return "DanglingReference";
    case Errc::DuplicateName: return "DuplicateName";
    case Errc::DuplicateKey: return "DuplicateKey";
    case Errc::TypeViolation: return "TypeViolation";
    case Errc::UnknownTerm: return "UnknownTerm";
    case Errc::UnknownPath: return "UnknownPath";
    case Errc::UnknownColumn: return "UnknownColumn";
    case Errc::UnknownTable: return "UnknownTable";
    case Errc::UnreachableAsset: return "UnreachableAsset";
    case Errc::InvalidOperation: return "InvalidOperation";
    case Errc::ParseError: return "ParseError";
    case Errc::UnboundInput: return "UnboundInput";
    case Errc::NotResumable: return "NotResumable";
    case Errc::BindingError: return "BindingError";
    case Errc::QualityCheckFailed: return "QualityCheckFailed";
    case Errc::BindFailure: return "BindFailure";
    case Errc::CorruptLog: return "CorruptLog";
    case Errc::UnknownRoute: return "UnknownRoute";
    case Errc::Conflict: return "Conflict";
    case Errc::BadRequest: return "BadRequest";
    case Errc::UsageError: return "UsageError";
    case Errc::NotEmpty: return "NotEmpty";
    case Errc::NotInitialized: return "NotInitialized";
    case Errc::Locked: return "Locked";
    case Errc::Connectivity: return "Connectivity";
    case Errc::Internal: return "Internal";
  }
  return "Internal";
}

std::optional<Errc> errc_from_name(std::string_view name) noexcept {
  for (int i = 0; i <= static_cast<int>(Errc::Internal); ++i) {
    const auto code = static_cast<Errc>(i);
    if (errc_name(code) == name) {
      return code;
    }
  }
  return std::nullopt;
}

}  // namespace fair
