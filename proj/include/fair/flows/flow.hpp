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
#include <string_view>
#include <vector>

#include "fair/common/json.hpp"
#include "fair/flows/predicate.hpp"

namespace fair::flows {

enum class StepKind {
  ingest_file,
  compute_checksum,
  build_bag,
  make_holey,
  mint_id,
  register_record,
  extract_metadata,
  quality_check,
};

std::string_view kind_name(StepKind k) noexcept;
std::optional<StepKind> kind_from_name(std::string_view name) noexcept;

// Output names a step of this kind produces; references to anything else are
// rejected when the flow is defined.
const std::vector<std::string>& kind_outputs(StepKind k);

// Effectful kinds call into the registry or the catalog.
bool is_effectful(StepKind k) noexcept;

struct StepDef {
  std::string name;
  StepKind kind = StepKind::ingest_file;
  Json params = Json::object();
  std::map<std::string, std::string> inputs;  // input name -> "$step.output" or "$params.x"
  std::optional<Predicate> predicate;         // quality_check only
};

struct OnError {
  int retries = 0;  // 0 means halt
};

struct FlowDef {
  std::string name;
  std::vector<std::string> parameters;
  OnError on_error;
  std::vector<StepDef> steps;

  [[nodiscard]] const StepDef* step(std::string_view name) const;
};

// Validates a flow document:
//
//   {"name": "...", "parameters": ["source", ...], "on_error": "halt" | {"retry": n},
//    "steps": [{"name", "kind", "params": {...}, "inputs": {"x": "$capture.path"}}]}
//
// ParseError names the offending location ("steps[2].kind"); UnboundInput
// names the step and the reference when a reference does not point at a
// declared parameter or an output of an earlier step.
FlowDef define_flow(const Json& doc);
FlowDef define_flow_text(std::string_view text);

Json to_json(const FlowDef& flow);

// Splits "$capture.path.x" into {"capture", "path", "x"}.
std::vector<std::string> split_reference(std::string_view ref);

}  // namespace fair::flows
