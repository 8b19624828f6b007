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

#include "fair/flows/runner.hpp"

#include <algorithm>
#include <thread>

#include "fair/common/digest.hpp"
#include "fair/common/error.hpp"
#include "steps.hpp"

namespace fair::flows {

namespace fs = std::filesystem;

std::string_view action_name(AuditAction a) noexcept {
  switch (a) {
    case AuditAction::start: return "start";
    case AuditAction::finish: return "finish";
    case AuditAction::fail: return "fail";
    case AuditAction::retry: return "retry";
    case AuditAction::skip: return "skip";
  }
  return "start";
}

std::optional<AuditAction> action_from_name(std::string_view name) noexcept {
  for (const auto a : {AuditAction::start, AuditAction::finish, AuditAction::fail, AuditAction::retry, AuditAction::skip}) {
    if (action_name(a) == name) return a;
  }
  return std::nullopt;
}

std::string_view status_name(RunStatus s) noexcept {
  switch (s) {
    case RunStatus::running: return "running";
    case RunStatus::failed: return "failed";
    case RunStatus::completed: return "completed";
  }
  return "running";
}

std::string_view status_name(StepStatus s) noexcept {
  switch (s) {
    case StepStatus::pending: return "pending";
    case StepStatus::done: return "done";
    case StepStatus::failed: return "failed";
  }
  return "pending";
}

Json to_json(const AuditEvent& e) {
  return Json{{"seq", e.seq},
              {"timestamp", format_rfc3339(e.timestamp)},
              {"step", e.step},
              {"action", action_name(e.action)},
              {"detail", e.detail}};
}

const StepState* FlowRun::state(std::string_view step) const {
  for (const auto& s : steps) {
    if (s.name == step) return &s;
  }
  return nullptr;
}

Json to_json(const FlowRun& run) {
  Json j = Json::object();
  j["run_id"] = run.run_id.str();
  j["flow"] = to_json(run.flow);
  j["params"] = run.params;
  j["idempotent"] = run.idempotent;
  j["status"] = status_name(run.status);
  if (run.status == RunStatus::failed) j["failed_step"] = run.failed_step;
  j["created"] = format_rfc3339(run.created);
  j["steps"] = Json::array();
  for (const auto& s : run.steps) {
    Json sj{{"name", s.name}, {"status", status_name(s.status)}};
    if (s.status == StepStatus::done) sj["outputs"] = s.outputs;
    if (s.status == StepStatus::failed) sj["error"] = s.error;
    j["steps"].push_back(std::move(sj));
  }
  j["audit"] = Json::array();
  for (const auto& e : run.audit) j["audit"].push_back(to_json(e));
  return j;
}

bool audit_well_formed(const std::vector<AuditEvent>& events, std::string* why) {
  // Per step: idle -> start -> (retry)* -> finish|fail -> idle, or a lone
  // skip. Once a step finished or was skipped it may only be skipped again.
  enum class State { idle, open, closed };
  std::map<std::string, State> state;
  const auto bad = [&](const AuditEvent& e, const std::string& msg) {
    if (why != nullptr) *why = "event " + std::to_string(e.seq) + " (" + e.step + " " + std::string(action_name(e.action)) + "): " + msg;
    return false;
  };
  std::uint64_t expected = 1;
  for (const auto& e : events) {
    if (e.seq != expected++) return bad(e, "out of order");
    auto& s = state[e.step];
    switch (e.action) {
      case AuditAction::start:
        if (s != State::idle) return bad(e, "start while step is open or closed");
        s = State::open;
        break;
      case AuditAction::retry:
        if (s != State::open) return bad(e, "retry outside an attempt");
        break;
      case AuditAction::finish:
        if (s != State::open) return bad(e, "finish without start");
        s = State::closed;
        break;
      case AuditAction::fail:
        if (s != State::open) return bad(e, "fail without start");
        s = State::idle;
        break;
      case AuditAction::skip:
        if (s == State::open) return bad(e, "skip inside an attempt");
        s = State::closed;
        break;
    }
  }
  return true;
}

FlowEngine::FlowEngine(const fs::path& log_path, Options options)
    : options_(std::move(options)), ids_(options_.seed.value_or(idspace::random_seed())) {
  if (!options_.sleeper) {
    options_.sleeper = [](std::chrono::seconds d) { std::this_thread::sleep_for(d); };
  }
  log_ = std::make_unique<AppendLog>(log_path, AppendLog::Options{options_.durable});
  std::size_t line_no = 0;
  for (const auto& line : log_->take_recovered()) {
    ++line_no;
    try {
      apply(line);
    } catch (const Error& e) {
      if (e.code() == Errc::CorruptLog) throw;
      fail(Errc::CorruptLog, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Json::exception& e) {
      fail(Errc::CorruptLog, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  // Close runs a crash left open.
  for (const auto& id : order_) {
    FlowRun& run = runs_.at(id);
    if (run.status != RunStatus::running) continue;
    if (!run.audit.empty()) {
      const AuditEvent& last = run.audit.back();
      if (last.action == AuditAction::start || last.action == AuditAction::retry) {
        emit(run, last.step, AuditAction::fail, "Interrupted: the run stopped during this step");
      }
    }
    std::string next;
    for (const auto& s : run.steps) {
      if (s.status != StepStatus::done) {
        next = s.name;
        break;
      }
    }
    set_status(run, next.empty() ? RunStatus::completed : RunStatus::failed, next);
  }
}

void FlowEngine::apply(const Json& line) {
  const auto type = line.at("type").get<std::string>();
  if (type == "flow") {
    auto f = define_flow(line.at("flow"));
    flows_.insert_or_assign(f.name, std::move(f));
    return;
  }
  const auto id = line.at("run_id").get<std::string>();
  const auto ts = parse_rfc3339(line.at("ts").get<std::string>());
  if (!ts) fail(Errc::CorruptLog, "bad timestamp for " + id);
  if (type == "run") {
    FlowRun r;
    r.run_id = idspace::parse_id(id);
    r.flow = define_flow(line.at("flow"));
    r.params = line.at("params");
    r.idempotent = line.at("idempotent").get<bool>();
    r.created = *ts;
    for (const auto& s : r.flow.steps) r.steps.push_back(StepState{s.name});
    if (!runs_.emplace(id, std::move(r)).second) fail(Errc::CorruptLog, "duplicate run " + id);
    order_.push_back(id);
    return;
  }
  const auto it = runs_.find(id);
  if (it == runs_.end()) fail(Errc::CorruptLog, "event for unknown run " + id);
  FlowRun& run = it->second;
  if (type == "status") {
    const auto s = line.at("status").get<std::string>();
    if (s == "failed") {
      run.status = RunStatus::failed;
      run.failed_step = line.value("step", std::string());
    } else if (s == "completed") {
      run.status = RunStatus::completed;
      run.failed_step.clear();
    } else if (s == "running") {
      run.status = RunStatus::running;
      run.failed_step.clear();
    } else {
      fail(Errc::CorruptLog, "unknown status " + s);
    }
    return;
  }
  if (type != "event") fail(Errc::CorruptLog, "unknown entry type " + type);
  const auto action = action_from_name(line.at("action").get<std::string>());
  if (!action) fail(Errc::CorruptLog, "unknown action in run " + id);
  AuditEvent e;
  e.seq = run.audit.size() + 1;
  e.timestamp = *ts;
  e.step = line.at("step").get<std::string>();
  e.action = *action;
  e.detail = line.value("detail", std::string());
  auto st = std::find_if(run.steps.begin(), run.steps.end(), [&](const StepState& s) { return s.name == e.step; });
  if (st == run.steps.end()) fail(Errc::CorruptLog, "event for unknown step " + e.step);
  const std::string key = line.value("key", std::string());
  switch (e.action) {
    case AuditAction::start:
      st->status = StepStatus::pending;
      st->error.clear();
      st->key = key;
      break;
    case AuditAction::finish:
      st->status = StepStatus::done;
      st->outputs = line.at("outputs");
      st->key = key;
      if (!key.empty()) memo_.insert_or_assign(key, st->outputs);
      break;
    case AuditAction::skip:
      st->status = StepStatus::done;
      st->outputs = line.at("outputs");
      break;
    case AuditAction::fail:
      st->status = StepStatus::failed;
      st->error = e.detail;
      break;
    case AuditAction::retry:
      break;
  }
  run.audit.push_back(std::move(e));
}

void FlowEngine::append(Json line) {
  log_->append(line);
  apply(line);
}

void FlowEngine::emit(FlowRun& run, const std::string& step, AuditAction action, const std::string& detail,
                      const Json* outputs, const std::string* key) {
  Json line = Json::object();
  line["type"] = "event";
  line["run_id"] = run.run_id.str();
  line["ts"] = format_rfc3339(options_.clock());
  line["step"] = step;
  line["action"] = action_name(action);
  line["detail"] = detail;
  if (outputs != nullptr) line["outputs"] = *outputs;
  if (key != nullptr) line["key"] = *key;
  append(std::move(line));
}

void FlowEngine::set_status(FlowRun& run, RunStatus status, const std::string& step) {
  Json line{{"type", "status"},
            {"run_id", run.run_id.str()},
            {"ts", format_rfc3339(options_.clock())},
            {"status", status_name(status)}};
  if (status == RunStatus::failed) line["step"] = step;
  append(std::move(line));
}

void FlowEngine::save_flow(const FlowDef& flow) {
  std::lock_guard lock(mu_);
  append(Json{{"type", "flow"}, {"flow", to_json(flow)}});
}

std::optional<FlowDef> FlowEngine::find_flow(std::string_view name) const {
  std::lock_guard lock(mu_);
  const auto it = flows_.find(name);
  if (it == flows_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> FlowEngine::flow_names() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [name, f] : flows_) out.push_back(name);
  return out;
}

std::string FlowEngine::step_key(const FlowRun& run, const StepDef& step, const Json& inputs) const {
  Json material = Json::object();
  material["flow"] = run.flow.name;
  material["step"] = step.name;
  material["kind"] = kind_name(step.kind);
  material["params"] = step.params;
  material["inputs"] = inputs;
  // File inputs are keyed by content, so changed bytes at the same path are
  // new work.
  Json content = Json::object();
  for (const auto& [name, v] : inputs.items()) {
    std::vector<Json> values = v.is_array() ? v.get<std::vector<Json>>() : std::vector<Json>{v};
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!values[i].is_string()) continue;
      std::error_code ec;
      const fs::path p(values[i].get<std::string>());
      if (p.is_absolute() && fs::exists(p, ec)) content[name + "#" + std::to_string(i)] = detail::content_digest(p);
    }
  }
  material["content"] = std::move(content);
  if (!run.idempotent) material["run"] = run.run_id.str();
  return digest_hex(Algorithm::sha256, canonical(material));
}

void FlowEngine::fault(const FlowRun& run, std::size_t index, FaultPhase phase, int attempt) const {
  if (options_.fault_hook) {
    options_.fault_hook(FaultPoint{run.run_id.str(), run.flow.steps[index].name, index, phase, attempt});
  }
}

namespace {

const Json* walk(const Json& root, const std::vector<std::string>& parts, std::size_t from) {
  const Json* cur = &root;
  for (std::size_t i = from; i < parts.size(); ++i) {
    if (cur->is_object()) {
      const auto it = cur->find(parts[i]);
      if (it == cur->end()) return nullptr;
      cur = &*it;
    } else if (cur->is_array() && !parts[i].empty() &&
               std::all_of(parts[i].begin(), parts[i].end(), [](char c) { return c >= '0' && c <= '9'; })) {
      const auto n = std::stoul(parts[i]);
      if (n >= cur->size()) return nullptr;
      cur = &(*cur)[n];
    } else {
      return nullptr;
    }
  }
  return cur;
}

bool retryable(Errc code) {
  return code != Errc::QualityCheckFailed && code != Errc::UnboundInput && code != Errc::BindingError;
}

std::chrono::seconds backoff(int retry) { return std::chrono::seconds{retry <= 1 ? 1 : retry == 2 ? 2 : 4}; }

}  // namespace

void FlowEngine::execute(FlowRun& run, std::size_t from, const FlowServices& services) {
  for (std::size_t i = from; i < run.flow.steps.size(); ++i) {
    const StepDef& step = run.flow.steps[i];
    Json scope;
    {
      std::lock_guard lock(mu_);
      scope = Json{{"params", run.params}};
      for (const auto& s : run.steps) {
        if (s.status == StepStatus::done) scope[s.name] = s.outputs;
      }
    }
    const auto lookup = [&](std::string_view ref) -> const Json* {
      const auto parts = split_reference(ref);
      const auto it = scope.find(parts[0]);
      return it == scope.end() ? nullptr : walk(*it, parts, 1);
    };

    Json inputs = Json::object();
    std::string unbound;
    for (const auto& [name, ref] : step.inputs) {
      const Json* v = lookup(ref);
      if (v == nullptr || v->is_null()) {
        unbound = ref;
        break;
      }
      inputs[name] = *v;
    }

    std::unique_lock lock(mu_);
    if (!unbound.empty()) {
      emit(run, step.name, AuditAction::start, kind_name(step.kind).data());
      emit(run, step.name, AuditAction::fail, "UnboundInput: " + unbound + " has no value");
      set_status(run, RunStatus::failed, step.name);
      return;
    }
    Json keyed = inputs;
    if (step.predicate) {
      for (const auto& ref : step.predicate->references()) {
        const Json* v = lookup(ref);
        keyed["$" + ref] = v == nullptr ? Json() : *v;
      }
    }
    const std::string key = step_key(run, step, keyed);
    if (const auto m = memo_.find(key); m != memo_.end()) {
      const Json outputs = m->second;
      emit(run, step.name, AuditAction::skip, "reused outputs for key " + key.substr(0, 16), &outputs, &key);
      continue;
    }
    emit(run, step.name, AuditAction::start, kind_name(step.kind).data(), nullptr, &key);
    lock.unlock();

    for (int attempt = 0;; ++attempt) {
      std::optional<Error> error;
      Json outputs;
      try {
        fault(run, i, FaultPhase::before_step, attempt);
        outputs = detail::run_step(step, inputs, key, services, lookup);
        fault(run, i, FaultPhase::after_effect, attempt);
      } catch (const Error& e) {
        error = e;
      } catch (const fs::filesystem_error& e) {
        error = Error(Errc::IoFailure, e.what());
      } catch (const Json::exception& e) {
        error = Error(Errc::BadRequest, e.what());
      }
      lock.lock();
      if (!error) {
        emit(run, step.name, AuditAction::finish, "", &outputs, &key);
        lock.unlock();
        break;
      }
      const std::string what = std::string(errc_name(error->code())) + ": " + error->detail();
      if (attempt < run.flow.on_error.retries && retryable(error->code())) {
        const auto delay = backoff(attempt + 1);
        emit(run, step.name, AuditAction::retry, what + " (next attempt in " + std::to_string(delay.count()) + "s)");
        lock.unlock();
        options_.sleeper(delay);
        continue;
      }
      emit(run, step.name, AuditAction::fail, what);
      set_status(run, RunStatus::failed, step.name);
      return;
    }
  }
  std::lock_guard lock(mu_);
  set_status(run, RunStatus::completed, "");
}

FlowRun FlowEngine::run(const FlowDef& flow, const Json& params, const FlowServices& services, RunOptions options) {
  if (!params.is_object()) fail(Errc::BadRequest, "flow parameters must be a JSON object");
  for (const auto& p : flow.parameters) {
    if (!params.contains(p) || params[p].is_null()) fail(Errc::UnboundInput, "parameter '" + p + "' has no value");
  }
  for (const auto& s : flow.steps) detail::check_binding(s, services);

  FlowRun* run = nullptr;
  {
    std::lock_guard lock(mu_);
    std::string id;
    do {
      id = "RUN:" + ids_.next();
    } while (runs_.count(id) != 0);
    append(Json{{"type", "run"},
                {"run_id", id},
                {"ts", format_rfc3339(options_.clock())},
                {"flow", to_json(flow)},
                {"params", params},
                {"idempotent", options.idempotent}});
    run = &runs_.at(id);
    active_.insert(id);
  }
  struct Release {
    FlowEngine* self;
    std::string id;
    ~Release() {
      std::lock_guard lock(self->mu_);
      self->active_.erase(id);
    }
  } release{this, run->run_id.str()};
  execute(*run, 0, services);
  return get(run->run_id.str());
}

FlowRun FlowEngine::resume(std::string_view run_id, const FlowServices& services) {
  FlowRun* run = nullptr;
  std::size_t from = 0;
  {
    std::lock_guard lock(mu_);
    const auto it = runs_.find(run_id);
    if (it == runs_.end()) fail(Errc::NotFound, "run " + std::string(run_id));
    run = &it->second;
    if (active_.count(run_id) != 0) fail(Errc::NotResumable, std::string(run_id) + " is still running");
    if (run->status != RunStatus::failed) {
      fail(Errc::NotResumable, std::string(run_id) + " is " + std::string(status_name(run->status)));
    }
    for (const auto& s : run->flow.steps) detail::check_binding(s, services);
    while (from < run->steps.size() && run->steps[from].name != run->failed_step) ++from;
    active_.insert(std::string(run_id));
    set_status(*run, RunStatus::running, "");
    for (std::size_t i = 0; i < from; ++i) {
      const Json outputs = run->steps[i].outputs;
      emit(*run, run->steps[i].name, AuditAction::skip, "done in an earlier attempt", &outputs);
    }
  }
  struct Release {
    FlowEngine* self;
    std::string id;
    ~Release() {
      std::lock_guard lock(self->mu_);
      self->active_.erase(id);
    }
  } release{this, std::string(run_id)};
  execute(*run, from, services);
  return get(run_id);
}

FlowRun FlowEngine::get(std::string_view run_id) const {
  std::lock_guard lock(mu_);
  const auto it = runs_.find(run_id);
  if (it == runs_.end()) fail(Errc::NotFound, "run " + std::string(run_id));
  return it->second;
}

std::vector<AuditEvent> FlowEngine::audit_log(std::string_view run_id) const { return get(run_id).audit; }

std::vector<std::string> FlowEngine::run_ids() const {
  std::lock_guard lock(mu_);
  return order_;
}

}  // namespace fair::flows
