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

#include <map>
#include <set>

#include "provrepeat/error.hpp"
#include "provrepeat/provenance.hpp"

namespace provrepeat::provenance {

using cloudsim::VmRecord;
using cloudsim::VmState;

std::vector<ResourceMappingRow> join_mappings(const engine::ExecutionTrace& trace,
                                              std::span<const VmRecord> inventory,
                                              std::string_view owner,
                                              cloudsim::LogicalTime collected_at) {
  std::vector<ResourceMappingRow> rows;
  rows.reserve(trace.records.size());
  for (const auto& rec : trace.records) {
    const VmRecord* match = nullptr;
    for (const auto& vm : inventory) {
      if (vm.state != VmState::kActive || vm.owner != owner || vm.ip != rec.host_ip) {
        continue;
      }
      if (match != nullptr) {
        throw Error(Errc::kAmbiguousIp, rec.host_ip.to_string() + " is held by both " +
                                            match->nodename + " and " + vm.nodename);
      }
      match = &vm;
    }
    if (match == nullptr) {
      throw Error(Errc::kStaleMapping,
                  "job '" + rec.job_id + "' ran on " + rec.host_ip.to_string() +
                      ", which is not an ACTIVE VM of " + std::string(owner));
    }
    ResourceMappingRow row;
    row.wf_id = trace.wf_id;
    row.job_id = rec.job_id;
    row.host_ip = rec.host_ip;
    row.nodename = match->nodename;
    row.flavor_id = match->flavor.flavor_id;
    row.ram_mb = match->flavor.ram_mb;
    row.disk_gb = match->flavor.disk_gb;
    row.vcpus = match->flavor.vcpus;
    row.image_name = match->image.image_name;
    row.image_id = match->image.image_id;
    row.collected_at = collected_at;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ResourceMappingRow> collect_cloud_mapping(const engine::Engine& engine,
                                                      const cloudsim::CloudSim& cloud,
                                                      WfId wf_id, std::string_view owner) {
  auto [workflow, trace] = engine.get_workflow_record(wf_id);
  auto inventory = cloud.list_vms(owner);
  return join_mappings(trace, inventory, owner, cloud.now());
}

CloudAwareProvenance capture_provenance(const engine::Engine& engine,
                                        const cloudsim::CloudSim& cloud, WfId wf_id,
                                        std::string_view owner) {
  auto [workflow, trace] = engine.get_workflow_record(wf_id);
  auto inventory = cloud.list_vms(owner);
  auto mappings = join_mappings(trace, inventory, owner, cloud.now());
  return CloudAwareProvenance{wf_id, std::move(workflow), std::move(trace),
                              std::move(mappings)};
}

void check_provenance(const CloudAwareProvenance& p) {
  auto fail = [&](const std::string& what) {
    throw Error(Errc::kInvalidProvenance, "wfID " + std::to_string(p.wf_id.value) + ": " + what);
  };
  if (p.trace.wf_id != p.wf_id) fail("trace belongs to another workflow");

  std::set<std::string> jobs;
  for (const auto& j : p.workflow.spec().jobs) jobs.insert(j.job_id);

  std::map<std::string, cloudsim::Ipv4Address> ran_on;
  for (const auto& rec : p.trace.records) {
    if (rec.wf_id != p.wf_id) fail("record '" + rec.job_id + "' has a foreign wfID");
    if (!jobs.contains(rec.job_id)) fail("record for unknown job '" + rec.job_id + "'");
    if (rec.end < rec.start) fail("record '" + rec.job_id + "' ends before it starts");
    if (!ran_on.emplace(rec.job_id, rec.host_ip).second) {
      fail("job '" + rec.job_id + "' recorded twice");
    }
  }
  if (p.trace.status == engine::RunStatus::kSucceeded && ran_on.size() != jobs.size()) {
    fail("SUCCEEDED trace does not cover every job");
  }

  std::set<std::string> mapped;
  for (const auto& row : p.mappings) {
    if (row.wf_id != p.wf_id) fail("mapping '" + row.job_id + "' has a foreign wfID");
    auto it = ran_on.find(row.job_id);
    if (it == ran_on.end()) fail("mapping for job '" + row.job_id + "' without a record");
    if (it->second != row.host_ip) fail("mapping '" + row.job_id + "' host IP disagrees");
    if (!mapped.insert(row.job_id).second) fail("job '" + row.job_id + "' mapped twice");
  }
  if (mapped.size() != ran_on.size()) fail("mappings do not cover every record");
}

}  // namespace provrepeat::provenance
