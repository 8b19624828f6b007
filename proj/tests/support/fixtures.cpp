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

#include "fixtures.hpp"

namespace fair::testing {

namespace {

Json col(const char* name, const char* type = "text") { return Json{{"name", name}, {"type", type}}; }

}  // namespace

const std::vector<std::string>& completed_spellings() {
  static const std::vector<std::string> spellings{
      "completed", "Completed", "COMPLETED", "  completed ", "complete", "Complete",
      "done",      "Done",      "DONE",      "finished",     "Finished", "finalized",
  };
  return spellings;
}

Json lab_model_changes() {
  Json changes = Json::array();
  changes.push_back({{"op", "add_vocabulary"},
                     {"schema", "isa"},
                     {"name", "Status"},
                     {"terms", Json::array({Json{{"canonical", "completed"},
                                                 {"synonyms", {"complete", "done", "finished", "finalized"}}},
                                            Json{{"canonical", "in-progress"}, {"synonyms", {"ongoing", "started"}}},
                                            Json{{"canonical", "planned"}}})}});
  changes.push_back({{"op", "add_table"},
                     {"schema", "isa"},
                     {"name", "Protocol"},
                     {"columns", Json::array({Json{{"name", "Name"}, {"type", "text"}, {"nullable", false}},
                                              col("Description")})},
                     {"keys", Json::array({Json::array({"Name"})})}});
  changes.push_back({{"op", "add_table"},
                     {"schema", "isa"},
                     {"name", "Subject"},
                     {"columns", Json::array({col("Name"), col("Protocol", "identifier"),
                                              Json{{"name", "Status"}, {"type", "term"}, {"vocabulary", "isa:Status"}},
                                              col("Age_Days", "integer")})},
                     {"foreign_keys", Json::array({Json{{"columns", {"Protocol"}}, {"table", "isa:Protocol"}}})}});
  changes.push_back({{"op", "add_table"},
                     {"schema", "isa"},
                     {"name", "Image"},
                     {"kind", "asset"},
                     {"columns", Json::array({col("Subject", "identifier"), col("Minid", "identifier")})},
                     {"foreign_keys", Json::array({Json{{"columns", {"Subject"}}, {"table", "isa:Subject"}}})}});
  changes.push_back({{"op", "add_table"},
                     {"schema", "isa"},
                     {"name", "Dataset"},
                     {"columns", Json::array({col("Title"), col("Minid", "identifier")})}});
  return changes;
}

void build_lab_model(catalog::Catalog& c, const catalog::Principal& actor) {
  for (const auto& doc : lab_model_changes()) c.apply_model_change(catalog::ModelChange{doc}, actor);
}

Json publish_flow_doc(int retries) {
  const auto step = [](const char* name, const char* kind, Json params, Json inputs) {
    return Json{{"name", name}, {"kind", kind}, {"params", std::move(params)}, {"inputs", std::move(inputs)}};
  };
  Json steps = Json::array();
  steps.push_back(step("capture", "ingest_file", {{"area", "staging"}}, {{"source", "$params.source"}}));
  steps.push_back(step("store", "ingest_file", {{"area", "objects"}}, {{"source", "$capture.path"}}));
  steps.push_back(step("describe", "extract_metadata", Json::object(), {{"file", "$store.path"}}));
  steps.push_back(step("package", "build_bag", {{"name", "image"}},
                       {{"file", "$store.path"}, {"metadata", "$describe.metadata"}}));
  steps.push_back(step("qc", "quality_check",
                       {{"predicate",
                         "$package.payload_sha256 == $capture.sha256 && $describe.metadata.length > 0 && "
                         "present($package.checksum)"}},
                       Json::object()));
  steps.push_back(step("identify", "mint_id", {{"title", "Imaging data"}}, {{"bag", "$package.path"}}));
  steps.push_back(step("catalog", "register_record", {{"table", "isa:Image"}},
                       {{"URL", "$store.url"},
                        {"Length", "$store.length"},
                        {"Checksum", "$store.sha256"},
                        {"Filename", "$store.filename"},
                        {"Subject", "$params.subject"},
                        {"Minid", "$identify.id"}}));
  Json doc{{"name", "publish-image"}, {"parameters", {"source", "subject"}}, {"steps", std::move(steps)}};
  doc["on_error"] = retries == 0 ? Json("halt") : Json{{"retry", retries}};
  return doc;
}

}  // namespace fair::testing
