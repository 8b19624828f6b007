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

#include <json.hpp>

#include <string>

namespace fair {

// Insertion-ordered JSON: the writers build objects in their fixed key order,
// so dump() is the canonical form.
using Json = nlohmann::ordered_json;

inline std::string canonical(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::strict); }

}  // namespace fair
