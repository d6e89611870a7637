// Copyright 2026 The provrepeat Authors.
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

#include "json.hpp"
#include "provrepeat/digest.hpp"
#include "provrepeat/error.hpp"
#include "provrepeat/provenance.hpp"

namespace provrepeat::provenance {

using nlohmann::json;

namespace {

json encode_workflow(const wfmodel::WorkflowSpec& spec) {
  json jobs = json::array();
  for (const auto& j : spec.jobs) {
    jobs.push_back({{"id", j.job_id},
                    {"kind", wfmodel::to_string(j.task_kind)},
                    {"args", j.args},
                    {"inputs", j.input_names},
                    {"outputs", j.output_names}});
  }
  json edges = json::array();
  for (const auto& e : spec.edges) edges.push_back({e.from, e.to});
  json inputs = json::object();
  for (const auto& [name, content] : spec.workflow_inputs) {
    inputs[name] = {{"base64", base64_encode(content)}};
  }
  return {{"name", spec.name}, {"jobs", jobs}, {"edges", edges}, {"inputs", inputs}};
}

wfmodel::WorkflowSpec decode_workflow(const json& doc) {
  wfmodel::WorkflowSpec spec;
  spec.name = doc.at("name").get<std::string>();
  for (const auto& j : doc.at("jobs")) {
    spec.jobs.push_back({j.at("id").get<std::string>(),
                         wfmodel::parse_task_kind(j.at("kind").get<std::string>()),
                         j.at("args").get<std::vector<std::string>>(),
                         j.at("inputs").get<std::vector<std::string>>(),
                         j.at("outputs").get<std::vector<std::string>>()});
  }
  for (const auto& e : doc.at("edges")) {
    spec.edges.push_back({e.at(0).get<std::string>(), e.at(1).get<std::string>()});
  }
  for (const auto& [name, src] : doc.at("inputs").items()) {
    spec.workflow_inputs[name] = base64_decode(src.at("base64").get<std::string>());
  }
  return spec;
}

json encode_trace(const engine::ExecutionTrace& trace) {
  json records = json::array();
  for (const auto& r : trace.records) {
    records.push_back({{"job_id", r.job_id},
                       {"args", r.args},
                       {"host_ip", r.host_ip.to_string()},
                       {"start", r.start},
                       {"end", r.end},
                       {"exit_status", engine::to_string(r.exit_status)},
                       {"stdout_digest", r.stdout_digest},
                       {"stderr_digest", r.stderr_digest},
                       {"output_digests", r.output_digests}});
  }
  return {{"status", engine::to_string(trace.status)},
          {"records", records},
          {"final_outputs", trace.final_outputs}};
}

engine::ExecutionTrace decode_trace(const json& doc, WfId wf_id) {
  engine::ExecutionTrace trace;
  trace.wf_id = wf_id;
  const auto status = doc.at("status").get<std::string>();
  if (status != "SUCCEEDED" && status != "FAILED") {
    throw Error(Errc::kStorageFailure, "bad trace status " + status);
  }
  trace.status = status == "SUCCEEDED" ? engine::RunStatus::kSucceeded
                                       : engine::RunStatus::kFailed;
  for (const auto& r : doc.at("records")) {
    engine::JobProvenanceRecord rec;
    rec.wf_id = wf_id;
    rec.job_id = r.at("job_id").get<std::string>();
    rec.args = r.at("args").get<std::vector<std::string>>();
    rec.host_ip = cloudsim::Ipv4Address::parse(r.at("host_ip").get<std::string>());
    rec.start = r.at("start").get<cloudsim::LogicalTime>();
    rec.end = r.at("end").get<cloudsim::LogicalTime>();
    rec.exit_status = r.at("exit_status").get<std::string>() == "SUCCESS"
                          ? engine::ExitStatus::kSuccess
                          : engine::ExitStatus::kFailed;
    rec.stdout_digest = r.at("stdout_digest").get<std::string>();
    rec.stderr_digest = r.at("stderr_digest").get<std::string>();
    rec.output_digests = r.at("output_digests").get<std::map<std::string, std::string>>();
    trace.records.push_back(std::move(rec));
  }
  trace.final_outputs = doc.at("final_outputs").get<std::map<std::string, std::string>>();
  return trace;
}

json encode_mapping(const ResourceMappingRow& row) {
  return {{"job_id", row.job_id},
          {"host_ip", row.host_ip.to_string()},
          {"nodename", row.nodename},
          {"flavor_id", row.flavor_id.value},
          {"ram_mb", row.ram_mb},
          {"disk_gb", row.disk_gb},
          {"vcpus", row.vcpus},
          {"image_name", row.image_name},
          {"image_id", row.image_id},
          {"collected_at", row.collected_at}};
}

ResourceMappingRow decode_mapping(const json& doc, WfId wf_id) {
  ResourceMappingRow row;
  row.wf_id = wf_id;
  row.job_id = doc.at("job_id").get<std::string>();
  row.host_ip = cloudsim::Ipv4Address::parse(doc.at("host_ip").get<std::string>());
  row.nodename = doc.at("nodename").get<std::string>();
  row.flavor_id = cloudsim::FlavorId{doc.at("flavor_id").get<std::int64_t>()};
  row.ram_mb = doc.at("ram_mb").get<std::int64_t>();
  row.disk_gb = doc.at("disk_gb").get<std::int64_t>();
  row.vcpus = doc.at("vcpus").get<std::int64_t>();
  row.image_name = doc.at("image_name").get<std::string>();
  row.image_id = doc.at("image_id").get<std::string>();
  row.collected_at = doc.at("collected_at").get<cloudsim::LogicalTime>();
  return row;
}

}  // namespace

std::string encode_record(const CloudAwareProvenance& p) {
  json mappings = json::array();
  for (const auto& row : p.mappings) mappings.push_back(encode_mapping(row));
  json doc = {{"schema_version", ProvenanceStore::kSchemaVersion},
              {"wf_id", p.wf_id.value},
              {"workflow", encode_workflow(p.workflow.spec())},
              {"trace", encode_trace(p.trace)},
              {"mappings", mappings}};
  return doc.dump();
}

CloudAwareProvenance decode_record(std::string_view line) {
  try {
    json doc = json::parse(line);
    const int version = doc.at("schema_version").get<int>();
    if (version != ProvenanceStore::kSchemaVersion) {
      throw Error(Errc::kStorageFailure,
                  "unsupported schema_version " + std::to_string(version));
    }
    WfId wf_id{doc.at("wf_id").get<std::int64_t>()};
    auto workflow = wfmodel::validate_workflow(decode_workflow(doc.at("workflow")));
    auto trace = decode_trace(doc.at("trace"), wf_id);
    std::vector<ResourceMappingRow> mappings;
    for (const auto& m : doc.at("mappings")) mappings.push_back(decode_mapping(m, wf_id));
    return CloudAwareProvenance{wf_id, std::move(workflow), std::move(trace),
                                std::move(mappings)};
  } catch (const Error& e) {
    if (e.code() == Errc::kStorageFailure) throw;
    throw Error(Errc::kStorageFailure, std::string("invalid record: ") + e.what());
  } catch (const std::exception& e) {
    // json::exception and Ipv4Address::parse failures
    throw Error(Errc::kStorageFailure, std::string("invalid record: ") + e.what());
  }
}

}  // namespace provrepeat::provenance
