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

#include <string>

#include "fair/flows/flow.hpp"
#include "fair/flows/runner.hpp"

namespace fair::flows::detail {

// Executes one step. `inputs` holds the resolved input values, `key` is the
// step's idempotency key and `lookup` resolves references for predicates.
Json run_step(const StepDef& step, const Json& inputs, const std::string& key, const FlowServices& services,
              const Predicate::Lookup& lookup);

// Throws BindingError when `services` lacks something the step needs.
void check_binding(const StepDef& step, const FlowServices& services);

// Digest of a file's bytes, or of a directory's (path, digest) listing.
std::string content_digest(const std::filesystem::path& path);

}  // namespace fair::flows::detail
