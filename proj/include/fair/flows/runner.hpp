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

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fair/bag/fetch.hpp"
#include "fair/catalog/catalog.hpp"
#include "fair/common/append_log.hpp"
#include "fair/common/clock.hpp"
#include "fair/flows/flow.hpp"
#include "fair/idspace/id.hpp"
#include "fair/idspace/registry.hpp"

namespace fair::flows {

enum class AuditAction { start, finish, fail, retry, skip };

std::string_view action_name(AuditAction a) noexcept;
std::optional<AuditAction> action_from_name(std::string_view name) noexcept;

struct AuditEvent {
  std::uint64_t seq = 0;  // position in the run's audit, from 1
  Timestamp timestamp{};
  std::string step;
  AuditAction action = AuditAction::start;
  std::string detail;
};

Json to_json(const AuditEvent& e);

enum class RunStatus { running, failed, completed };
enum class StepStatus { pending, done, failed };

std::string_view status_name(RunStatus s) noexcept;
std::string_view status_name(StepStatus s) noexcept;

struct StepState {
  std::string name;
  StepStatus status = StepStatus::pending;
  Json outputs = Json::object();
  std::string error;  // "Code: detail" when failed
  std::string key;    // idempotency key of the last attempt
};

struct FlowRun {
  idspace::IdString run_id;
  FlowDef flow;  // frozen copy
  Json params = Json::object();
  bool idempotent = true;
  RunStatus status = RunStatus::running;
  std::string failed_step;
  std::vector<StepState> steps;
  std::vector<AuditEvent> audit;
  Timestamp created{};

  [[nodiscard]] const StepState* state(std::string_view step) const;
};

Json to_json(const FlowRun& run);

// True when, for every step, the events form start (retry)* (finish|fail)
// repeated, or a lone skip, and a step never starts again after finishing.
// On failure `why` says where the grammar broke.
bool audit_well_formed(const std::vector<AuditEvent>& events, std::string* why = nullptr);

// Extracts descriptive metadata from a file for extract_metadata steps.
using Extractor = std::function<Json(const std::filesystem::path& file)>;

// Built-in "basic" extractor: filename, extension, length and media type.
Json basic_metadata(const std::filesystem::path& file);

// What a run may touch. Steps that need an unbound service fail the run up
// front with BindingError.
struct FlowServices {
  idspace::Registry* registry = nullptr;
  catalog::Catalog* catalog = nullptr;
  std::filesystem::path storage;  // staging, object store and bags live here
  std::string creator = "fair";
  catalog::Principal actor{"flows", {"admin"}};
  std::map<std::string, Extractor> extractors;  // "basic" is always available
};

struct RunOptions {
  // With idempotency keys derived from the flow, steps whose inputs were
  // already processed by an earlier run are skipped and their outputs reused.
  // Without, keys are scoped to the run, which still makes resumes safe.
  bool idempotent = true;
};

// Where the fault hook is called.
enum class FaultPhase { before_step, after_effect };

struct FaultPoint {
  std::string run_id;
  std::string step;
  std::size_t index = 0;
  FaultPhase phase = FaultPhase::before_step;
  int attempt = 0;
};

// Runs flows and keeps their state in an event log. One run executes its
// steps sequentially; separate runs may proceed in parallel.
class FlowEngine {
 public:
  using Sleeper = std::function<void(std::chrono::seconds)>;
  // Called at each FaultPoint. A fair::Error thrown here counts as a step
  // failure; any other exception escapes run/resume untouched and leaves the
  // run as a crash would.
  using FaultHook = std::function<void(const FaultPoint&)>;

  struct Options {
    ClockFn clock = system_clock();
    Sleeper sleeper;  // defaults to sleeping the thread
    std::optional<std::uint64_t> seed;
    bool durable = false;
    FaultHook fault_hook;
  };

  // Runs found unfinished in the log were interrupted by a crash; they are
  // closed with a fail event and become resumable.
  FlowEngine(const std::filesystem::path& log_path, Options options);
  explicit FlowEngine(const std::filesystem::path& log_path) : FlowEngine(log_path, Options{}) {}

  // Stored definitions, addressable by name; a later save replaces earlier
  // ones for new runs.
  void save_flow(const FlowDef& flow);
  [[nodiscard]] std::optional<FlowDef> find_flow(std::string_view name) const;
  [[nodiscard]] std::vector<std::string> flow_names() const;

  // Step failures are recorded in the returned run. BindingError, and
  // UnboundInput for missing parameters, are thrown before anything runs.
  FlowRun run(const FlowDef& flow, const Json& params, const FlowServices& services, RunOptions options = {});
  // NotFound; NotResumable unless the run failed.
  FlowRun resume(std::string_view run_id, const FlowServices& services);

  [[nodiscard]] FlowRun get(std::string_view run_id) const;
  [[nodiscard]] std::vector<AuditEvent> audit_log(std::string_view run_id) const;
  [[nodiscard]] std::vector<std::string> run_ids() const;

 private:
  void apply(const Json& line);
  void append(Json line);
  void emit(FlowRun& run, const std::string& step, AuditAction action, const std::string& detail,
            const Json* outputs = nullptr, const std::string* key = nullptr);
  void set_status(FlowRun& run, RunStatus status, const std::string& step);
  void execute(FlowRun& run, std::size_t from, const FlowServices& services);
  void fault(const FlowRun& run, std::size_t index, FaultPhase phase, int attempt) const;
  std::string step_key(const FlowRun& run, const StepDef& step, const Json& inputs) const;

  Options options_;
  std::unique_ptr<AppendLog> log_;
  mutable std::mutex mu_;
  idspace::SuffixGenerator ids_;
  std::map<std::string, FlowRun, std::less<>> runs_;
  std::vector<std::string> order_;
  std::map<std::string, FlowDef, std::less<>> flows_;
  std::map<std::string, Json, std::less<>> memo_;  // idempotency key -> outputs
  std::set<std::string, std::less<>> active_;
};

}  // namespace fair::flows
