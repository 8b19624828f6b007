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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fair/bag/bag.hpp"
#include "fair/catalog/catalog.hpp"
#include "fair/idspace/registry.hpp"

namespace fair::bag {
class FetchResolver;
}

namespace fair::catalog {

struct ExportRequest {
  std::vector<std::string> roots;  // RIDs
  // Foreign-key hops followed from the roots. Outbound references are
  // always followed; inbound ones (rows pointing at a selected row) only
  // when `inbound` is set. Extension rows of selected rows are always
  // included.
  int depth = 1;
  bool inbound = false;
  std::optional<SnapshotId> snapshot;
  bag::InfoPairs info;
};

// Holey bag whose metadata is a table-schema block of the selected rows and
// whose fetch entries point at the asset URLs. NotFound for unknown roots,
// UnreachableAsset when the resolver cannot reach an asset.
bag::Bag export_bag(const Catalog& catalog, const bag::FetchResolver& resolver, const ExportRequest& request);

struct ExportResult {
  bag::Bag bag;
  idspace::MinidRecord minid;
};

// export_bag followed by binding the bag to a fresh identifier.
ExportResult export_dataset(const Catalog& catalog, idspace::Registry& registry, const bag::FetchResolver& resolver,
                            const ExportRequest& request, const idspace::BindRequest& bind);

struct ImportResult {
  std::map<std::string, std::string> rid_map;  // exported RID -> new RID
  std::size_t model_changes = 0;
};

// Loads rows exported by export_bag into `catalog`, creating missing tables
// from the descriptor. RIDs are reassigned and references between imported
// rows rewritten.
ImportResult import_dataset(Catalog& catalog, const bag::Bag& bag, const Principal& actor);

}  // namespace fair::catalog
