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

#include "fair/bag/fetch.hpp"

#include <httplib.h>

#include <filesystem>

#include "fair/common/error.hpp"
#include "fair/common/files.hpp"

namespace fair::bag {
namespace {

struct HttpTarget {
  std::string origin;  // scheme://host[:port]
  std::string path;    // includes query
};

HttpTarget split_http(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    fail(Errc::FetchFailed, "not an http URL: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return {url, "/"};
  }
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

void FetchResolver::add(std::string scheme, Handler fetch, Probe probe) {
  handlers_[std::move(scheme)] = Entry{std::move(fetch), std::move(probe)};
}

bool FetchResolver::handles(std::string_view scheme) const { return handlers_.find(scheme) != handlers_.end(); }

const FetchResolver::Entry& FetchResolver::entry_for(const std::string& url) const {
  const auto scheme = url_scheme(url);
  const auto it = handlers_.find(scheme);
  if (it == handlers_.end()) {
    fail(Errc::NoHandler, scheme.empty() ? "no scheme in '" + url + "'" : scheme);
  }
  return it->second;
}

std::string FetchResolver::fetch(const std::string& url) const { return entry_for(url).fetch(url); }

bool FetchResolver::reachable(const std::string& url) const {
  const auto& e = entry_for(url);
  if (e.probe) {
    return e.probe(url);
  }
  try {
    (void)e.fetch(url);
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::string fetch_file_url(const std::string& url) {
  std::filesystem::path p;
  try {
    p = path_from_file_url(url);
  } catch (const Error& e) {
    fail(Errc::FetchFailed, url + ": " + e.detail());
  }
  try {
    return read_file(p);
  } catch (const Error&) {
    fail(Errc::FetchFailed, url);
  }
}

std::string fetch_http_url(const std::string& url) {
  const auto target = split_http(url);
  httplib::Client client(target.origin);
  client.set_follow_location(true);
  client.set_connection_timeout(5);
  client.set_read_timeout(30);
  auto res = client.Get(target.path);
  if (!res) {
    fail(Errc::FetchFailed, url + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    fail(Errc::FetchFailed, url + ": HTTP " + std::to_string(res->status));
  }
  return std::move(res->body);
}

bool probe_http_url(const std::string& url) {
  const auto target = split_http(url);
  httplib::Client client(target.origin);
  client.set_follow_location(true);
  client.set_connection_timeout(5);
  auto res = client.Head(target.path);
  return res && res->status == 200;
}

FetchResolver FetchResolver::with_defaults() {
  FetchResolver r;
  r.add("file", fetch_file_url, [](const std::string& url) {
    try {
      return std::filesystem::is_regular_file(path_from_file_url(url));
    } catch (const Error&) {
      return false;
    }
  });
  r.add("http", fetch_http_url, probe_http_url);
  return r;
}

}  // namespace fair::bag
