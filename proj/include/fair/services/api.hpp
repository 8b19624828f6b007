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
#include <utility>
#include <vector>

#include "fair/catalog/acl.hpp"
#include "fair/common/error.hpp"
#include "fair/common/json.hpp"

namespace fair::services {

class Workspace;

struct Request {
  std::string method;
  std::string path;  // without query string, percent-encoded segments allowed
  std::multimap<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lowercase names
  std::string body;

  [[nodiscard]] std::optional<std::string> header(const std::string& lower_name) const;
  [[nodiscard]] std::optional<std::string> param(const std::string& name) const;
  [[nodiscard]] std::vector<std::string> params(const std::string& name) const;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;

  [[nodiscard]] Json json() const { return Json::parse(body); }
};

struct Route {
  std::string method;
  std::string pattern;  // "/v1/id/{id}"
};

// Every route the service answers, in a fixed order.
const std::vector<Route>& route_table();

int http_status(Errc code) noexcept;

// {"http_status", "code", "detail"}
Json api_error_json(Errc code, std::string_view detail);
// Rebuilds the module error from an ApiError body; Internal when the body is
// not one.
Error error_from_response(const Response& r);

// Maps requests onto workspace operations. Thread-safe to the extent the
// underlying stores are: they serialize their own writes.
class Api {
 public:
  explicit Api(Workspace& ws) : ws_(ws) {}

  // `as` bypasses bearer-token lookup (in-process callers). Otherwise the
  // Authorization header selects the principal; no header means the
  // configured anonymous principal and an unknown token is Forbidden.
  Response handle(const Request& req, const std::optional<catalog::Principal>& as = std::nullopt);

 private:
  Workspace& ws_;
};

}  // namespace fair::services
