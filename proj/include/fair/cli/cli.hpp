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

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace fair::cli {

enum ExitCode : int { kOk = 0, kOperationError = 1, kUsage = 2, kConnectivity = 3 };

// Environment variables consulted by dispatch (FAIR_URL, FAIR_TOKEN).
struct Environment {
  std::map<std::string, std::string> vars;

  static Environment from_process();
  [[nodiscard]] const std::string* get(const std::string& name) const;
};

// Runs one `fair` command line. `args` excludes the program name. In --json
// mode `out` receives exactly one canonical JSON document (the result or an
// ApiError) and `err` stays empty.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
             const Environment& env = Environment::from_process());

}  // namespace fair::cli
