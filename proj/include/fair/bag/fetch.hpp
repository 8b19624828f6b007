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

#include <functional>
#include <map>
#include <string>
#include <string_view>

namespace fair::bag {

// Scheme-keyed registry of fetch handlers used to fill holey bags. A handler
// returns the full byte content for a URL or throws FetchFailed.
class FetchResolver {
 public:
  using Handler = std::function<std::string(const std::string& url)>;
  using Probe = std::function<bool(const std::string& url)>;

  void add(std::string scheme, Handler fetch, Probe probe = {});
  [[nodiscard]] bool handles(std::string_view scheme) const;

  // NoHandler when the scheme is unregistered.
  [[nodiscard]] std::string fetch(const std::string& url) const;

  // Cheap reachability test; falls back to a full fetch when the handler has
  // no probe.
  [[nodiscard]] bool reachable(const std::string& url) const;

  // file: and http: handlers.
  static FetchResolver with_defaults();

 private:
  struct Entry {
    Handler fetch;
    Probe probe;
  };
  const Entry& entry_for(const std::string& url) const;
  std::map<std::string, Entry, std::less<>> handlers_;
};

std::string fetch_file_url(const std::string& url);
std::string fetch_http_url(const std::string& url);
bool probe_http_url(const std::string& url);

}  // namespace fair::bag
