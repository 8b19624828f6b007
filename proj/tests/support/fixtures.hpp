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

#include "fair/catalog/catalog.hpp"
#include "fair/common/json.hpp"

namespace fair::testing {

// Zebrafish lab model: isa:Status vocabulary, isa:Protocol, isa:Subject,
// isa:Image assets linked to subjects and isa:Dataset. The change documents
// are what build_lab_model applies, in order.
Json lab_model_changes();
void build_lab_model(catalog::Catalog& c, const catalog::Principal& actor);

// Raw spellings that must all normalize to "completed" under the lab model.
const std::vector<std::string>& completed_spellings();

// Seven-step publication flow: capture, store, describe, package, qc,
// identify, catalog. Parameters: source (file path) and subject (RID).
Json publish_flow_doc(int retries = 0);

}  // namespace fair::testing
