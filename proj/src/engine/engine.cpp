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

#include "provrepeat/engine.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "provrepeat/digest.hpp"
#include "provrepeat/error.hpp"

namespace provrepeat::engine {

using cloudsim::VmRecord;
using cloudsim::VmState;
using wfmodel::Content;
using wfmodel::Job;
using wfmodel::TaskKind;

std::string_view to_string(ExitStatus status) {
  return status == ExitStatus::kSuccess ? "SUCCESS" : "FAILED";
}

std::string_view to_string(RunStatus status) {
  return status == RunStatus::kSucceeded ? "SUCCEEDED" : "FAILED";
}

// --- scheduling ------------------------------------------------------------

RunState::RunState(const wfmodel::ValidatedWorkflow& workflow, const Cluster& cluster)
    : workflow_(&workflow), workers_(cluster.workers) {
  std::sort(workers_.begin(), workers_.end(),
            [](const VmRecord& a, const VmRecord& b) { return a.ip < b.ip; });
  for (const auto& id : workflow.topo_order()) phase_[id] = JobPhase::kWaiting;
}

std::vector<std::string> RunState::ready_jobs() const {
  std::vector<std::string> ready;
  for (const auto& id : workflow_->topo_order()) {
    if (phase_.at(id) != JobPhase::kWaiting) continue;
    auto preds = workflow_->predecessors(id);
    bool ok = std::all_of(preds.begin(), preds.end(), [&](const std::string& p) {
      return phase_.at(p) == JobPhase::kSucceeded;
    });
    if (ok) ready.push_back(id);
  }
  return ready;
}

std::vector<VmRecord> RunState::free_workers() const {
  std::vector<VmRecord> free;
  for (const auto& w : workers_) {
    bool busy = std::any_of(running_on_.begin(), running_on_.end(),
                            [&](const auto& kv) { return kv.second == w.vm_id; });
    if (!busy) free.push_back(w);
  }
  return free;
}

void RunState::assign(const std::string& job_id, cloudsim::VmId worker) {
  phase_.at(job_id) = JobPhase::kRunning;
  running_on_[job_id] = worker;
}

void RunState::finish(const std::string& job_id, bool success) {
  phase_.at(job_id) = success ? JobPhase::kSucceeded : JobPhase::kFailed;
  running_on_.erase(job_id);
}

std::vector<Assignment> schedule_ready_jobs(const RunState& state) {
  auto ready = state.ready_jobs();
  auto free = state.free_workers();
  std::vector<Assignment> out;
  for (std::size_t i = 0; i < ready.size() && i < free.size(); ++i) {
    out.push_back({ready[i], free[i]});
  }
  return out;
}

// --- kernels as jobs -------------------------------------------------------

namespace {

struct JobResult {
  bool ok = true;
  std::map<std::string, Content> outputs;
  std::string out;
  std::string err;
};

std::optional<std::int64_t> parse_count(std::string_view text) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || text.empty()) {
    return std::nullopt;
  }
  return v;
}

JobResult run_kernel(const Job& job, const std::vector<Content>& inputs,
                     const wfmodel::TransformRegistry& transforms) {
  JobResult r;
  std::ostringstream out;
  switch (job.task_kind) {
    case TaskKind::kSplit: {
      auto [a, b] = wfmodel::kernel_split(inputs[0]);
      out << "split " << job.input_names[0] << ": " << wfmodel::kernel_count(a)
          << " + " << wfmodel::kernel_count(b) << " words\n";
      r.outputs[job.output_names[0]] = std::move(a);
      r.outputs[job.output_names[1]] = std::move(b);
      break;
    }
    case TaskKind::kCount: {
      auto n = wfmodel::kernel_count(inputs[0]);
      out << "count " << job.input_names[0] << ": " << n << "\n";
      r.outputs[job.output_names[0]] = std::to_string(n);
      break;
    }
    case TaskKind::kMerge: {
      std::vector<std::int64_t> counts;
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        auto v = parse_count(inputs[i]);
        if (!v) {
          r.ok = false;
          r.err = "merge: input '" + job.input_names[i] + "' is not a count\n";
          return r;
        }
        counts.push_back(*v);
      }
      try {
        auto total = wfmodel::kernel_merge(counts);
        out << "merge: " << total << "\n";
        r.outputs[job.output_names[0]] = std::to_string(total);
      } catch (const Error& e) {
        r.ok = false;
        r.err = std::string("merge: ") + e.what() + "\n";
        return r;
      }
      break;
    }
    case TaskKind::kGeneric: {
      const auto* fn = transforms.find(job.args[0]);
      if (fn == nullptr) {
        r.ok = false;
        r.err = "unknown transform '" + job.args[0] + "'\n";
        return r;
      }
      auto produced = (*fn)(job.args, inputs, job.output_names.size());
      if (produced.size() != job.output_names.size()) {
        r.ok = false;
        r.err = "transform '" + job.args[0] + "' returned the wrong number of outputs\n";
        return r;
      }
      for (std::size_t i = 0; i < produced.size(); ++i) {
        r.outputs[job.output_names[i]] = std::move(produced[i]);
      }
      out << job.args[0] << ": " << produced.size() << " outputs\n";
      break;
    }
  }
  r.out = out.str();
  return r;
}

void check_cluster(const Cluster& cluster) {
  if (cluster.workers.empty()) {
    throw Error(Errc::kEmptyCluster, "cluster has no workers");
  }
  if (cluster.master.state != VmState::kActive) {
    throw Error(Errc::kInvalidCluster, "master " + cluster.master.nodename + " is not ACTIVE");
  }
  std::set<cloudsim::VmId> ids{cluster.master.vm_id};
  std::set<cloudsim::Ipv4Address> ips;
  for (const auto& w : cluster.workers) {
    if (w.state != VmState::kActive) {
      throw Error(Errc::kInvalidCluster, "worker " + w.nodename + " is not ACTIVE");
    }
    if (!ids.insert(w.vm_id).second) {
      throw Error(Errc::kInvalidCluster,
                  "worker " + w.nodename + " duplicates the master or another worker");
    }
    if (!ips.insert(w.ip).second) {
      throw Error(Errc::kInvalidCluster, "two workers share " + w.ip.to_string());
    }
  }
}

}  // namespace

// --- engine ----------------------------------------------------------------

Engine::Engine(WfId seed, wfmodel::TransformRegistry transforms)
    : transforms_(std::move(transforms)), next_id_(seed.value) {
  if (seed.value < 1) throw std::invalid_argument("wfID seed must be >= 1");
}

WfId Engine::submit_workflow(wfmodel::ValidatedWorkflow workflow, Cluster cluster) {
  check_cluster(cluster);
  std::lock_guard lock(mu_);
  WfId id{next_id_++};
  workflows_.emplace(id, Entry{std::move(workflow), std::move(cluster), Phase::kPending, {}});
  return id;
}

ExecutionTrace Engine::run_to_completion(WfId wf_id) {
  const Entry* entry = nullptr;
  FaultHook hook;
  {
    std::lock_guard lock(mu_);
    auto it = workflows_.find(wf_id);
    if (it == workflows_.end()) {
      throw Error(Errc::kUnknownWfId, std::to_string(wf_id.value));
    }
    if (it->second.phase != Phase::kPending) {
      throw Error(Errc::kNotPending, "wfID " + std::to_string(wf_id.value));
    }
    it->second.phase = Phase::kRunning;
    entry = &it->second;
    hook = fault_hook_;
  }
  // std::map nodes are stable, and a RUNNING entry is only touched here.
  ExecutionTrace trace = execute(wf_id, entry->workflow, entry->cluster, hook);
  std::lock_guard lock(mu_);
  auto& e = workflows_.at(wf_id);
  e.trace = trace;
  e.phase = Phase::kDone;
  return trace;
}

ExecutionTrace Engine::execute(WfId wf_id, const wfmodel::ValidatedWorkflow& workflow,
                               const Cluster& cluster, const FaultHook& hook) const {
  struct Running {
    std::size_t record;
    LogicalTime end;
    JobResult result;
  };

  ExecutionTrace trace;
  trace.wf_id = wf_id;
  std::map<std::string, Content> data(workflow.spec().workflow_inputs.begin(),
                                      workflow.spec().workflow_inputs.end());
  RunState state(workflow, cluster);
  std::vector<Running> running;
  LogicalTime now = 0;
  bool halted = false;

  for (;;) {
    if (!halted) {
      for (auto& a : schedule_ready_jobs(state)) {
        const Job& job = workflow.job(a.job_id);
        std::vector<Content> inputs;
        for (const auto& name : job.input_names) inputs.push_back(data.at(name));

        JobResult result = run_kernel(job, inputs, transforms_);
        if (result.ok && hook && hook(wf_id, job, result.outputs)) {
          result.ok = false;
          result.err += "fault injected\n";
        }

        JobProvenanceRecord rec;
        rec.wf_id = wf_id;
        rec.job_id = job.job_id;
        rec.args = job.args;
        rec.host_ip = a.worker.ip;
        rec.start = now;
        rec.end = now + 1;  // one tick per job
        trace.records.push_back(std::move(rec));
        state.assign(a.job_id, a.worker.vm_id);
        running.push_back({trace.records.size() - 1, now + 1, std::move(result)});
      }
    }
    if (running.empty()) break;

    now = std::min_element(running.begin(), running.end(), [](const Running& a,
                                                              const Running& b) {
            return a.end < b.end;
          })->end;
    std::vector<Running> still;
    for (auto& r : running) {
      if (r.end != now) {
        still.push_back(std::move(r));
        continue;
      }
      auto& rec = trace.records[r.record];
      rec.stdout_digest = sha256_hex(r.result.out);
      rec.stderr_digest = sha256_hex(r.result.err);
      if (r.result.ok) {
        rec.exit_status = ExitStatus::kSuccess;
        for (auto& [name, content] : r.result.outputs) {
          auto digest = sha256_hex(content);
          rec.output_digests[name] = digest;
          trace.final_outputs[name] = digest;
          data[name] = std::move(content);
        }
      } else {
        rec.exit_status = ExitStatus::kFailed;
        halted = true;
      }
      state.finish(rec.job_id, r.result.ok);
    }
    running = std::move(still);
  }

  bool all_ran = trace.records.size() == workflow.spec().jobs.size();
  bool all_ok = std::all_of(trace.records.begin(), trace.records.end(),
                            [](const JobProvenanceRecord& r) {
                              return r.exit_status == ExitStatus::kSuccess;
                            });
  trace.status = (all_ran && all_ok) ? RunStatus::kSucceeded : RunStatus::kFailed;
  return trace;
}

std::pair<wfmodel::ValidatedWorkflow, ExecutionTrace> Engine::get_workflow_record(
    WfId wf_id) const {
  std::lock_guard lock(mu_);
  auto it = workflows_.find(wf_id);
  if (it == workflows_.end()) {
    throw Error(Errc::kUnknownWfId, std::to_string(wf_id.value));
  }
  if (!it->second.trace) {
    throw Error(Errc::kNotYetRun, "wfID " + std::to_string(wf_id.value));
  }
  return {it->second.workflow, *it->second.trace};
}

Cluster Engine::get_cluster(WfId wf_id) const {
  std::lock_guard lock(mu_);
  auto it = workflows_.find(wf_id);
  if (it == workflows_.end()) {
    throw Error(Errc::kUnknownWfId, std::to_string(wf_id.value));
  }
  return it->second.cluster;
}

void Engine::reserve_ids_through(WfId floor) {
  std::lock_guard lock(mu_);
  next_id_ = std::max(next_id_, floor.value + 1);
}

WfId Engine::next_id() const {
  std::lock_guard lock(mu_);
  return WfId{next_id_};
}

void Engine::set_fault_hook(FaultHook hook) {
  std::lock_guard lock(mu_);
  fault_hook_ = std::move(hook);
}

}  // namespace provrepeat::engine
