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

// Cloud-aware provenance: job provenance from the engine joined, by host IP,
// with the flavor and image of the VM each job ran on; plus the durable store
// and query surface for it.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "provrepeat/cloudsim.hpp"
#include "provrepeat/engine.hpp"
#include "provrepeat/wfmodel.hpp"

namespace provrepeat::provenance {

using engine::WfId;

// One row per (wf_id, job_id).
struct ResourceMappingRow {
  WfId wf_id;
  std::string job_id;
  cloudsim::Ipv4Address host_ip;
  std::string nodename;
  cloudsim::FlavorId flavor_id;
  std::int64_t ram_mb = 0;
  std::int64_t disk_gb = 0;
  std::int64_t vcpus = 0;
  std::string image_name;
  std::string image_id;
  cloudsim::LogicalTime collected_at = 0;

  bool operator==(const ResourceMappingRow&) const = default;
};

struct CloudAwareProvenance {
  WfId wf_id;
  wfmodel::ValidatedWorkflow workflow;
  engine::ExecutionTrace trace;
  std::vector<ResourceMappingRow> mappings;  // same order as trace.records

  bool operator==(const CloudAwareProvenance&) const = default;
};

// Joins each job record to the ACTIVE VM of `owner` in `inventory` whose IP
// equals the record's host_ip. Throws Error(kStaleMapping) when no such VM
// exists and Error(kAmbiguousIp) when more than one does.
std::vector<ResourceMappingRow> join_mappings(const engine::ExecutionTrace& trace,
                                              std::span<const cloudsim::VmRecord> inventory,
                                              std::string_view owner,
                                              cloudsim::LogicalTime collected_at);

// Pulls the trace of `wf_id` from the engine and joins it against the live
// VM list of `owner`. Must run before the workflow's VMs are released.
std::vector<ResourceMappingRow> collect_cloud_mapping(const engine::Engine& engine,
                                                      const cloudsim::CloudSim& cloud,
                                                      WfId wf_id, std::string_view owner);

// collect_cloud_mapping() plus the stored definition and trace.
CloudAwareProvenance capture_provenance(const engine::Engine& engine,
                                        const cloudsim::CloudSim& cloud, WfId wf_id,
                                        std::string_view owner);

// Throws Error(kInvalidProvenance) unless mappings cover exactly the trace's
// jobs with matching host IPs and ids agree.
void check_provenance(const CloudAwareProvenance& p);

struct WorkflowSummary {
  WfId wf_id;
  std::string name;
  engine::RunStatus status = engine::RunStatus::kSucceeded;
  std::size_t job_count = 0;

  bool operator==(const WorkflowSummary&) const = default;
};

// Append-only line-delimited JSON log of CloudAwareProvenance records with
// an in-memory index rebuilt on open. The file is held under an exclusive
// flock(2) for the lifetime of the object.
//
// Each line: {"schema_version": 1, "wf_id": ..., "workflow": {...},
//             "trace": {...}, "mappings": [...]}
class ProvenanceStore {
 public:
  static constexpr int kSchemaVersion = 1;

  // Creates the file if missing. A trailing unterminated line (torn append)
  // is truncated away. Throws Error(kStoreLocked) if another handle holds
  // the lock, Error(kStorageFailure) on I/O or format errors.
  explicit ProvenanceStore(std::filesystem::path path);
  ~ProvenanceStore();

  ProvenanceStore(const ProvenanceStore&) = delete;
  ProvenanceStore& operator=(const ProvenanceStore&) = delete;

  // Throws Error(kDuplicateWfId), Error(kInvalidProvenance) or
  // Error(kStorageFailure).
  void store_provenance(const CloudAwareProvenance& p);
  CloudAwareProvenance get_provenance(WfId wf_id) const;  // kUnknownWfId
  std::vector<WorkflowSummary> list_workflows() const;    // ascending wf_id

  bool contains(WfId wf_id) const;
  std::optional<WfId> max_wf_id() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  struct IndexEntry {
    std::uint64_t offset = 0;
    std::uint64_t length = 0;
    WorkflowSummary summary;
  };

  void rebuild_index();
  std::string read_at(std::uint64_t offset, std::uint64_t length) const;

  std::filesystem::path path_;
  int fd_ = -1;
  mutable std::mutex mu_;
  std::map<WfId, IndexEntry> index_;
  std::uint64_t end_offset_ = 0;
};

// Line codec, exposed for tests and tooling. decode throws
// Error(kStorageFailure) on schema violations.
std::string encode_record(const CloudAwareProvenance& p);
CloudAwareProvenance decode_record(std::string_view line);

}  // namespace provrepeat::provenance
