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

// Repeating a stored workflow: re-provision configuration-equivalent VMs from
// its Cloud-aware provenance, re-run it under a fresh wfID, re-collect, and
// compare infrastructure and outputs between the two runs.

#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "provrepeat/cloudsim.hpp"
#include "provrepeat/engine.hpp"
#include "provrepeat/provenance.hpp"

namespace provrepeat::repeat {

using engine::WfId;
using provenance::ResourceMappingRow;

struct FieldDiff {
  std::string field;  // ram_mb, disk_gb, vcpus or image_id
  std::string old_value;
  std::string new_value;

  bool operator==(const FieldDiff&) const = default;
};

struct JobConfigComparison {
  std::string job_id;
  bool matched = false;
  std::vector<FieldDiff> diffs;

  bool operator==(const JobConfigComparison&) const = default;
};

// equivalent <=> every job matched with no diffs.
struct ConfigComparison {
  WfId old_wf;
  WfId new_wf;
  std::vector<JobConfigComparison> per_job;  // ascending job_id
  bool equivalent = false;
};

struct OutputDigestComparison {
  std::string name;
  std::string old_digest;
  std::string new_digest;
  bool equal = false;
};

// identical <=> every output equal.
struct OutputComparison {
  WfId old_wf;
  WfId new_wf;
  std::vector<OutputDigestComparison> per_output;  // ascending name
  bool identical = false;
};

struct RepeatReport {
  WfId old_wf;
  WfId new_wf;
  ConfigComparison config;
  OutputComparison outputs;
};

// Postfix carried by re-provisioned nodenames.
inline constexpr std::string_view kRepeatSuffix = "-rep.novalocal";
inline constexpr std::string_view kRepeatMasterName = "repeat-master.novalocal";

// "osdc-vm3.novalocal" -> "osdc-vm3-rep.novalocal".
std::string repeat_nodename(std::string_view original);

// The catalog flavor to use for a recorded row: the recorded flavor_id when
// it still carries the same (ram, disk, vcpus), otherwise the spec match.
cloudsim::Flavor resolve_flavor(const cloudsim::CloudSim& cloud,
                                const ResourceMappingRow& row);

// One fresh worker per distinct recorded nodename (ordered by recorded host
// IP) plus a master of the first worker's flavor and image. All-or-nothing:
// on any failure every VM provisioned so far is released before rethrowing.
engine::Cluster reprovision(cloudsim::CloudSim& cloud,
                            std::span<const ResourceMappingRow> mappings,
                            std::string_view owner);

// Pairs rows by job_id and compares (ram_mb, disk_gb, vcpus, image_id).
// Throws Error(kJobSetMismatch).
ConfigComparison compare_mappings(WfId old_wf, std::span<const ResourceMappingRow> old_rows,
                                  WfId new_wf, std::span<const ResourceMappingRow> new_rows);

// Pairs digests by output name. Throws Error(kOutputSetMismatch).
OutputComparison compare_output_digests(WfId old_wf,
                                        const std::map<std::string, std::string>& old_digests,
                                        WfId new_wf,
                                        const std::map<std::string, std::string>& new_digests);

ConfigComparison compare_infrastructure(const provenance::ProvenanceStore& store,
                                        WfId old_wf, WfId new_wf);

// Both runs must be SUCCEEDED, else Error(kRunNotSucceeded).
OutputComparison compare_outputs(const provenance::ProvenanceStore& store, WfId old_wf,
                                 WfId new_wf);

struct RepeatContext {
  cloudsim::CloudSim& cloud;
  engine::Engine& engine;
  provenance::ProvenanceStore& store;
};

// Re-provisions, resubmits the stored definition with its stored inputs,
// runs it, captures and stores the new Cloud-aware provenance, releases the
// repeat cluster and compares both runs. No repeat VM stays ACTIVE on any
// path. A repeat run that ends FAILED is stored and then reported as
// Error(kRunNotSucceeded).
RepeatReport repeat_workflow(const RepeatContext& ctx, WfId old_wf, std::string_view owner);

// Machine-readable report (JSON).
std::string report_to_json(const RepeatReport& report);

}  // namespace provrepeat::repeat
