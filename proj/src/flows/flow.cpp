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

#include "fair/flows/flow.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "fair/common/digest.hpp"
#include "fair/common/error.hpp"

namespace fair::flows {

namespace {

constexpr StepKind kKinds[] = {StepKind::ingest_file,     StepKind::compute_checksum, StepKind::build_bag,
                               StepKind::make_holey,      StepKind::mint_id,          StepKind::register_record,
                               StepKind::extract_metadata, StepKind::quality_check};

bool is_step_name(std::string_view s) {
  if (s.empty() || s == "params") return false;
  if (std::isalpha(static_cast<unsigned char>(s[0])) == 0 && s[0] != '_') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
  });
}

[[noreturn]] void parse_error(const std::string& where, const std::string& why) {
  fail(Errc::ParseError, where + ": " + why);
}

// Inputs each kind needs before it can run. Optional inputs are not listed.
const std::vector<std::string>& required_inputs(StepKind k) {
  static const std::map<StepKind, std::vector<std::string>> table{
      {StepKind::ingest_file, {"source"}},  {StepKind::compute_checksum, {"file"}},
      {StepKind::build_bag, {"file"}},      {StepKind::make_holey, {"bag"}},
      {StepKind::mint_id, {}},              {StepKind::register_record, {}},
      {StepKind::extract_metadata, {"file"}}, {StepKind::quality_check, {}},
  };
  return table.at(k);
}

void check_params(const std::string& where, const StepDef& s) {
  const Json& p = s.params;
  const auto need_string = [&](const char* key) {
    if (!p.contains(key) || !p[key].is_string() || p[key].get<std::string>().empty()) {
      parse_error(where + ".params." + key, "required string");
    }
  };
  switch (s.kind) {
    case StepKind::register_record:
      need_string("table");
      if (p.contains("values") && !p["values"].is_object()) parse_error(where + ".params.values", "expected an object");
      break;
    case StepKind::quality_check:
      need_string("predicate");
      break;
    case StepKind::mint_id:
      if (s.inputs.count("bag") == 0 && s.inputs.count("digest") == 0) {
        parse_error(where + ".inputs", "mint_id needs a 'bag' or 'digest' input");
      }
      break;
    case StepKind::compute_checksum:
      if (p.contains("algorithms")) {
        if (!p["algorithms"].is_array()) parse_error(where + ".params.algorithms", "expected an array");
        for (const auto& a : p["algorithms"]) {
          if (!a.is_string() || !algorithm_from_name(a.get<std::string>()) ||
              !is_producible(*algorithm_from_name(a.get<std::string>()))) {
            parse_error(where + ".params.algorithms", "unsupported algorithm " + a.dump());
          }
        }
      }
      break;
    default:
      break;
  }
  for (const auto& in : required_inputs(s.kind)) {
    if (s.inputs.count(in) == 0) parse_error(where + ".inputs", kind_name(s.kind).data() + std::string(" needs input '") + in + "'");
  }
}

}  // namespace

std::string_view kind_name(StepKind k) noexcept {
  switch (k) {
    case StepKind::ingest_file: return "ingest_file";
    case StepKind::compute_checksum: return "compute_checksum";
    case StepKind::build_bag: return "build_bag";
    case StepKind::make_holey: return "make_holey";
    case StepKind::mint_id: return "mint_id";
    case StepKind::register_record: return "register_record";
    case StepKind::extract_metadata: return "extract_metadata";
    case StepKind::quality_check: return "quality_check";
  }
  return "ingest_file";
}

std::optional<StepKind> kind_from_name(std::string_view name) noexcept {
  for (const auto k : kKinds) {
    if (kind_name(k) == name) return k;
  }
  return std::nullopt;
}

const std::vector<std::string>& kind_outputs(StepKind k) {
  static const std::map<StepKind, std::vector<std::string>> table{
      {StepKind::ingest_file, {"path", "url", "filename", "length", "sha256"}},
      {StepKind::compute_checksum, {"length", "md5", "sha256", "sha512"}},
      {StepKind::build_bag, {"path", "checksum", "oxum", "files", "payload_sha256"}},
      {StepKind::make_holey, {"path", "checksum", "oxum", "fetch"}},
      {StepKind::mint_id, {"id", "checksum"}},
      {StepKind::register_record, {"rid", "table", "citation"}},
      {StepKind::extract_metadata, {"metadata"}},
      {StepKind::quality_check, {"passed"}},
  };
  return table.at(k);
}

bool is_effectful(StepKind k) noexcept { return k == StepKind::mint_id || k == StepKind::register_record; }

const StepDef* FlowDef::step(std::string_view n) const {
  for (const auto& s : steps) {
    if (s.name == n) return &s;
  }
  return nullptr;
}

std::vector<std::string> split_reference(std::string_view ref) {
  if (!ref.empty() && ref.front() == '$') ref.remove_prefix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto dot = ref.find('.', start);
    out.emplace_back(ref.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return out;
}

FlowDef define_flow(const Json& doc) {
  if (!doc.is_object()) parse_error("$", "flow must be a JSON object");
  FlowDef f;
  if (!doc.contains("name") || !doc["name"].is_string() || doc["name"].get<std::string>().empty()) {
    parse_error("name", "required string");
  }
  f.name = doc["name"].get<std::string>();

  if (doc.contains("parameters")) {
    if (!doc["parameters"].is_array()) parse_error("parameters", "expected an array of names");
    for (std::size_t i = 0; i < doc["parameters"].size(); ++i) {
      const auto& p = doc["parameters"][i];
      if (!p.is_string() || !is_step_name(p.get<std::string>())) {
        parse_error("parameters[" + std::to_string(i) + "]", "expected a name");
      }
      f.parameters.push_back(p.get<std::string>());
    }
  }

  if (doc.contains("on_error")) {
    const auto& e = doc["on_error"];
    if (e.is_string() && e.get<std::string>() == "halt") {
      f.on_error.retries = 0;
    } else if (e.is_object() && e.contains("retry") && e["retry"].is_number_integer() && e["retry"].get<int>() >= 0 &&
               e["retry"].get<int>() <= 10) {
      f.on_error.retries = e["retry"].get<int>();
    } else {
      parse_error("on_error", "expected \"halt\" or {\"retry\": 0..10}");
    }
  }

  if (doc.contains("steps") && !doc["steps"].is_array()) parse_error("steps", "expected an array");
  const Json steps = doc.value("steps", Json::array());
  std::set<std::string> seen;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string where = "steps[" + std::to_string(i) + "]";
    const auto& sd = steps[i];
    if (!sd.is_object()) parse_error(where, "expected an object");
    StepDef s;
    if (!sd.contains("name") || !sd["name"].is_string() || !is_step_name(sd["name"].get<std::string>())) {
      parse_error(where + ".name", "expected a step name");
    }
    s.name = sd["name"].get<std::string>();
    if (!seen.insert(s.name).second) parse_error(where + ".name", "duplicate step '" + s.name + "'");
    if (!sd.contains("kind") || !sd["kind"].is_string()) parse_error(where + ".kind", "required string");
    const auto kind = kind_from_name(sd["kind"].get<std::string>());
    if (!kind) parse_error(where + ".kind", "unknown kind '" + sd["kind"].get<std::string>() + "'");
    s.kind = *kind;
    if (sd.contains("params")) {
      if (!sd["params"].is_object()) parse_error(where + ".params", "expected an object");
      s.params = sd["params"];
    }
    if (sd.contains("inputs")) {
      if (!sd["inputs"].is_object()) parse_error(where + ".inputs", "expected an object");
      for (const auto& [name, ref] : sd["inputs"].items()) {
        if (!ref.is_string() || ref.get<std::string>().size() < 2 || ref.get<std::string>()[0] != '$') {
          parse_error(where + ".inputs." + name, "expected a reference like \"$step.output\"");
        }
        s.inputs.emplace(name, ref.get<std::string>());
      }
    }
    check_params(where, s);

    std::vector<std::string> refs;
    for (const auto& [name, ref] : s.inputs) refs.push_back(ref.substr(1));
    if (s.kind == StepKind::quality_check) {
      try {
        s.predicate = Predicate::parse(s.params["predicate"].get<std::string>());
      } catch (const Error& e) {
        parse_error(where + ".params.predicate", e.detail());
      }
      for (const auto& r : s.predicate->references()) refs.push_back(r);
    }
    for (const auto& r : refs) {
      const auto parts = split_reference(r);
      bool bound = false;
      if (parts[0] == "params") {
        bound = parts.size() >= 2 &&
                std::find(f.parameters.begin(), f.parameters.end(), parts[1]) != f.parameters.end();
      } else if (const StepDef* src = f.step(parts[0]); src != nullptr && parts.size() >= 2) {
        const auto& outs = kind_outputs(src->kind);
        bound = std::find(outs.begin(), outs.end(), parts[1]) != outs.end();
      }
      if (!bound) fail(Errc::UnboundInput, "step '" + s.name + "' input $" + r);
    }
    f.steps.push_back(std::move(s));
  }
  return f;
}

FlowDef define_flow_text(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(Errc::ParseError, "byte " + std::to_string(e.byte) + ": malformed JSON");
  }
  return define_flow(doc);
}

Json to_json(const FlowDef& flow) {
  Json j = Json::object();
  j["name"] = flow.name;
  j["parameters"] = flow.parameters;
  j["on_error"] = flow.on_error.retries == 0 ? Json("halt") : Json{{"retry", flow.on_error.retries}};
  j["steps"] = Json::array();
  for (const auto& s : flow.steps) {
    Json sj = Json::object();
    sj["name"] = s.name;
    sj["kind"] = kind_name(s.kind);
    sj["params"] = s.params;
    Json in = Json::object();
    for (const auto& [k, v] : s.inputs) in[k] = v;
    sj["inputs"] = std::move(in);
    j["steps"].push_back(std::move(sj));
  }
  return j;
}

}  // namespace fair::flows
