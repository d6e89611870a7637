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

#include "provrepeat/repeat.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"
#include "provrepeat/error.hpp"

namespace provrepeat::repeat {

using cloudsim::CloudSim;
using cloudsim::VmRecord;

std::string repeat_nodename(std::string_view original) {
  auto dot = original.find('.');
  return std::string(original.substr(0, dot)) + std::string(kRepeatSuffix);
}

cloudsim::Flavor resolve_flavor(const CloudSim& cloud, const ResourceMappingRow& row) {
  if (auto f = cloud.find_flavor(row.flavor_id)) {
    if (f->ram_mb == row.ram_mb && f->disk_gb == row.disk_gb && f->vcpus == row.vcpus) {
      return *f;
    }
  }
  return cloud.find_flavor_by_spec(row.ram_mb, row.disk_gb, row.vcpus);
}

namespace {

void release_all(CloudSim& cloud, const std::vector<VmRecord>& vms) {
  for (const auto& vm : vms) {
    try {
      cloud.release_vm(vm.vm_id);
    } catch (const Error&) {
      // already released
    }
  }
}

std::vector<VmRecord> cluster_vms(const engine::Cluster& cluster) {
  std::vector<VmRecord> vms{cluster.master};
  vms.insert(vms.end(), cluster.workers.begin(), cluster.workers.end());
  return vms;
}

}  // namespace

engine::Cluster reprovision(CloudSim& cloud, std::span<const ResourceMappingRow> mappings,
                            std::string_view owner) {
  if (mappings.empty()) {
    throw Error(Errc::kInconsistentMapping, "no mapping rows to re-provision from");
  }

  // One target per recorded node; rows of the same node must agree.
  std::vector<const ResourceMappingRow*> nodes;
  for (const auto& row : mappings) {
    auto it = std::find_if(nodes.begin(), nodes.end(), [&](const ResourceMappingRow* n) {
      return n->nodename == row.nodename;
    });
    if (it == nodes.end()) {
      nodes.push_back(&row);
      continue;
    }
    const auto& first = **it;
    if (first.flavor_id != row.flavor_id || first.ram_mb != row.ram_mb ||
        first.disk_gb != row.disk_gb || first.vcpus != row.vcpus ||
        first.image_id != row.image_id) {
      throw Error(Errc::kInconsistentMapping,
                  "rows for " + row.nodename + " disagree on flavor or image");
    }
  }
  std::stable_sort(nodes.begin(), nodes.end(),
                   [](const ResourceMappingRow* a, const ResourceMappingRow* b) {
                     return a->host_ip < b->host_ip;
                   });

  // Resolve everything before touching the cloud.
  std::vector<cloudsim::Flavor> flavors;
  for (const auto* n : nodes) {
    flavors.push_back(resolve_flavor(cloud, *n));
    if (!cloud.find_image(n->image_id)) {
      throw Error(Errc::kUnknownImage, "image_id " + n->image_id + " (image " +
                                           n->image_name + ") is not in the catalog");
    }
  }

  std::vector<VmRecord> provisioned;
  try {
    engine::Cluster cluster;
    cluster.master = cloud.provision_vm(owner, kRepeatMasterName, flavors.front().flavor_id,
                                        nodes.front()->image_id);
    provisioned.push_back(cluster.master);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      auto vm = cloud.provision_vm(owner, repeat_nodename(nodes[i]->nodename),
                                   flavors[i].flavor_id, nodes[i]->image_id);
      provisioned.push_back(vm);
      cluster.workers.push_back(std::move(vm));
    }
    return cluster;
  } catch (...) {
    release_all(cloud, provisioned);
    throw;
  }
}

// --- comparison ------------------------------------------------------------

ConfigComparison compare_mappings(WfId old_wf, std::span<const ResourceMappingRow> old_rows,
                                  WfId new_wf,
                                  std::span<const ResourceMappingRow> new_rows) {
  std::map<std::string, const ResourceMappingRow*> olds;
  std::map<std::string, const ResourceMappingRow*> news;
  for (const auto& r : old_rows) olds[r.job_id] = &r;
  for (const auto& r : new_rows) news[r.job_id] = &r;

  std::set<std::string> old_jobs;
  std::set<std::string> new_jobs;
  for (const auto& [id, r] : olds) old_jobs.insert(id);
  for (const auto& [id, r] : news) new_jobs.insert(id);
  if (old_jobs != new_jobs) {
    throw Error(Errc::kJobSetMismatch, "wfID " + std::to_string(old_wf.value) + " and " +
                                           std::to_string(new_wf.value) +
                                           " ran different jobs");
  }

  ConfigComparison cmp{old_wf, new_wf, {}, true};
  for (const auto& [job_id, a] : olds) {
    const auto* b = news.at(job_id);
    JobConfigComparison job{job_id, true, {}};
    auto check = [&](const char* field, const std::string& x, const std::string& y) {
      if (x != y) job.diffs.push_back({field, x, y});
    };
    check("ram_mb", std::to_string(a->ram_mb), std::to_string(b->ram_mb));
    check("disk_gb", std::to_string(a->disk_gb), std::to_string(b->disk_gb));
    check("vcpus", std::to_string(a->vcpus), std::to_string(b->vcpus));
    check("image_id", a->image_id, b->image_id);
    job.matched = job.diffs.empty();
    cmp.equivalent = cmp.equivalent && job.matched;
    cmp.per_job.push_back(std::move(job));
  }
  return cmp;
}

OutputComparison compare_output_digests(WfId old_wf,
                                        const std::map<std::string, std::string>& old_digests,
                                        WfId new_wf,
                                        const std::map<std::string, std::string>& new_digests) {
  auto names = [](const std::map<std::string, std::string>& m) {
    std::set<std::string> s;
    for (const auto& [k, v] : m) s.insert(k);
    return s;
  };
  if (names(old_digests) != names(new_digests)) {
    throw Error(Errc::kOutputSetMismatch, "wfID " + std::to_string(old_wf.value) + " and " +
                                              std::to_string(new_wf.value) +
                                              " produced different outputs");
  }
  OutputComparison cmp{old_wf, new_wf, {}, true};
  for (const auto& [name, digest] : old_digests) {
    const auto& other = new_digests.at(name);
    bool equal = digest == other;
    cmp.per_output.push_back({name, digest, other, equal});
    cmp.identical = cmp.identical && equal;
  }
  return cmp;
}

ConfigComparison compare_infrastructure(const provenance::ProvenanceStore& store,
                                        WfId old_wf, WfId new_wf) {
  auto a = store.get_provenance(old_wf);
  auto b = store.get_provenance(new_wf);
  return compare_mappings(old_wf, a.mappings, new_wf, b.mappings);
}

OutputComparison compare_outputs(const provenance::ProvenanceStore& store, WfId old_wf,
                                 WfId new_wf) {
  auto a = store.get_provenance(old_wf);
  auto b = store.get_provenance(new_wf);
  for (const auto* p : {&a, &b}) {
    if (p->trace.status != engine::RunStatus::kSucceeded) {
      throw Error(Errc::kRunNotSucceeded, "wfID " + std::to_string(p->wf_id.value));
    }
  }
  return compare_output_digests(old_wf, a.trace.final_outputs, new_wf, b.trace.final_outputs);
}

// --- repeat ----------------------------------------------------------------

RepeatReport repeat_workflow(const RepeatContext& ctx, WfId old_wf, std::string_view owner) {
  auto original = ctx.store.get_provenance(old_wf);
  if (original.trace.status != engine::RunStatus::kSucceeded) {
    throw Error(Errc::kOriginalFailed, "wfID " + std::to_string(old_wf.value) +
                                           " did not succeed; nothing to repeat");
  }

  auto cluster = reprovision(ctx.cloud, original.mappings, owner);
  const auto vms = cluster_vms(cluster);
  WfId new_wf;
  engine::RunStatus status = engine::RunStatus::kFailed;
  try {
    if (auto top = ctx.store.max_wf_id()) ctx.engine.reserve_ids_through(*top);
    new_wf = ctx.engine.submit_workflow(original.workflow, std::move(cluster));
    status = ctx.engine.run_to_completion(new_wf).status;
    ctx.store.store_provenance(
        provenance::capture_provenance(ctx.engine, ctx.cloud, new_wf, owner));
  } catch (...) {
    release_all(ctx.cloud, vms);
    throw;
  }
  release_all(ctx.cloud, vms);

  if (status != engine::RunStatus::kSucceeded) {
    throw Error(Errc::kRunNotSucceeded, "repeat run wfID " + std::to_string(new_wf.value) +
                                            " of " + std::to_string(old_wf.value) + " failed");
  }
  return RepeatReport{old_wf, new_wf, compare_infrastructure(ctx.store, old_wf, new_wf),
                      compare_outputs(ctx.store, old_wf, new_wf)};
}

std::string report_to_json(const RepeatReport& report) {
  using nlohmann::json;
  json jobs = json::array();
  for (const auto& j : report.config.per_job) {
    json diffs = json::array();
    for (const auto& d : j.diffs) {
      diffs.push_back({{"field", d.field}, {"old", d.old_value}, {"new", d.new_value}});
    }
    jobs.push_back({{"job_id", j.job_id}, {"matched", j.matched}, {"diffs", diffs}});
  }
  json outputs = json::array();
  for (const auto& o : report.outputs.per_output) {
    outputs.push_back({{"name", o.name},
                       {"old_digest", o.old_digest},
                       {"new_digest", o.new_digest},
                       {"equal", o.equal}});
  }
  json doc = {{"old_wf", report.old_wf.value},
              {"new_wf", report.new_wf.value},
              {"infrastructure", {{"equivalent", report.config.equivalent}, {"per_job", jobs}}},
              {"outputs", {{"identical", report.outputs.identical}, {"per_output", outputs}}}};
  return doc.dump(2) + "\n";
}

}  // namespace provrepeat::repeat
