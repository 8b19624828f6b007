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

#include "fair/common/append_log.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fair/common/error.hpp"

namespace fair {

AppendLog::AppendLog(std::filesystem::path path, Options options)
    : path_(std::move(path)), options_(options) {
  std::string content;
  if (std::filesystem::exists(path_)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) {
      fail(Errc::IoFailure, "cannot read log " + path_.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    content = ss.str();
  }

  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::size_t good_end = 0;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    if (nl == std::string::npos) {
      truncated_tail_ = true;
      break;
    }
    ++line_no;
    const std::string_view line(content.data() + pos, nl - pos);
    if (!line.empty()) {
      try {
        recovered_.push_back(Json::parse(line));
      } catch (const Json::exception& e) {
        fail(Errc::CorruptLog, path_.filename().string() + " line " + std::to_string(line_no) +
                                   ": " + e.what());
      }
    }
    pos = nl + 1;
    good_end = pos;
  }

  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    fail(Errc::IoFailure, "cannot open log " + path_.string() + ": " + std::strerror(errno));
  }
  if (truncated_tail_ && ::ftruncate(fd_, static_cast<off_t>(good_end)) != 0) {
    fail(Errc::IoFailure, "cannot truncate torn log tail: " + path_.string());
  }
}

AppendLog::~AppendLog() {
  if (fd_ >= 0) {
    ::close(fd_);
  }
}

void AppendLog::append(const Json& entry) {
  std::string line = canonical(entry);
  line.push_back('\n');
  std::lock_guard lock(mu_);
  const char* p = line.data();
  std::size_t left = line.size();
  while (left > 0) {
    const auto n = ::write(fd_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(Errc::IoFailure, "append to " + path_.string() + ": " + std::strerror(errno));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  if (options_.durable) {
    ::fdatasync(fd_);
  }
}

std::uint64_t AppendLog::size_bytes() const {
  std::lock_guard lock(mu_);
  struct stat st {};
  if (::fstat(fd_, &st) != 0) {
    return 0;
  }
  return static_cast<std::uint64_t>(st.st_size);
}

}  // namespace fair
