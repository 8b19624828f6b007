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

#include "fair/services/server.hpp"

#include <sys/socket.h>

#include <httplib.h>

#include "fair/common/error.hpp"

namespace fair::services {

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

Request from_httplib(const httplib::Request& in) {
  Request r;
  r.method = in.method;
  r.path = in.path;
  for (const auto& [k, v] : in.params) r.query.emplace(k, v);
  for (const auto& [k, v] : in.headers) r.headers[lower(k)] = v;
  r.body = in.body;
  return r;
}

}  // namespace

struct Server::Impl {
  httplib::Server http;
};

Server::Server(Api& api, const ServeConfig& config) : impl_(std::make_unique<Impl>()), host_(config.host) {
  auto& http = impl_->http;
  // httplib's default adds SO_REUSEPORT, which would let a second server
  // share an occupied port instead of failing to bind.
  http.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  const int threads = std::max(1, config.threads);
  http.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };

  const httplib::Server::Handler forward = [&api](const httplib::Request& in, httplib::Response& out) {
    const Response r = api.handle(from_httplib(in));
    out.status = r.status;
    for (const auto& [k, v] : r.headers) out.set_header(k, v);
    out.set_content(r.body, r.content_type);
  };
  http.Get(".*", forward);
  http.Post(".*", forward);
  http.Patch(".*", forward);
  http.Put(".*", forward);
  http.Delete(".*", forward);

  if (config.port == 0) {
    port_ = http.bind_to_any_port(config.host);
    if (port_ < 0) fail(Errc::BindFailure, "cannot bind " + config.host + " on any port");
  } else {
    if (!http.bind_to_port(config.host, config.port))
      fail(Errc::BindFailure, "cannot bind " + config.host + ":" + std::to_string(config.port));
    port_ = config.port;
  }
  thread_ = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
}

Server::~Server() { stop(); }

std::string Server::base_url() const { return "http://" + host_ + ":" + std::to_string(port_); }

void Server::stop() {
  impl_->http.stop();
  if (thread_.joinable()) thread_.join();
}

void Server::wait() {
  if (thread_.joinable()) thread_.join();
}

Response http_call(const std::string& base_url, const Request& req, int timeout_seconds) {
  httplib::Client cli(base_url);
  if (!cli.is_valid()) fail(Errc::Connectivity, "invalid service URL '" + base_url + "'");
  cli.set_connection_timeout(10);
  cli.set_read_timeout(timeout_seconds);
  cli.set_write_timeout(timeout_seconds);

  httplib::Request out;
  out.method = req.method;
  httplib::Params params;
  for (const auto& [k, v] : req.query) params.emplace(k, v);
  out.path = params.empty() ? req.path : httplib::append_query_params(req.path, params);
  for (const auto& [k, v] : req.headers) out.set_header(k, v);
  out.body = req.body;
  if (!req.body.empty() && !out.has_header("Content-Type")) out.set_header("Content-Type", "application/json");

  auto res = cli.send(out);
  if (!res) fail(Errc::Connectivity, base_url + ": " + httplib::to_string(res.error()));
  Response r;
  r.status = res->status;
  r.body = res->body;
  r.content_type = res->get_header_value("Content-Type");
  for (const auto& [k, v] : res->headers) {
    if (k != "Content-Type" && k != "Content-Length" && k != "Keep-Alive" && k != "Connection")
      r.headers[k] = v;
  }
  return r;
}

}  // namespace fair::services
