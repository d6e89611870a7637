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

// Workflow management: schedules validated workflows onto a Condor-like
// cluster of provisioned VMs, runs the task kernels under a deterministic
// logical-time event loop, and records per-job provenance including the IP
// of the worker that ran each job.

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "provrepeat/cloudsim.hpp"
#include "provrepeat/wfmodel.hpp"

namespace provrepeat::engine {

using cloudsim::LogicalTime;

struct WfId {
  std::int64_t value = 0;
  auto operator<=>(const WfId&) const = default;
};

inline constexpr WfId kDefaultWfIdSeed{114};

// Jobs run on workers only; the master is bookkeeping.
struct Cluster {
  cloudsim::VmRecord master;
  std::vector<cloudsim::VmRecord> workers;
};

enum class ExitStatus { kSuccess, kFailed };
enum class RunStatus { kSucceeded, kFailed };

std::string_view to_string(ExitStatus status);
std::string_view to_string(RunStatus status);

struct JobProvenanceRecord {
  WfId wf_id;
  std::string job_id;
  std::vector<std::string> args;
  cloudsim::Ipv4Address host_ip;
  LogicalTime start = 0;
  LogicalTime end = 0;
  ExitStatus exit_status = ExitStatus::kSuccess;
  std::string stdout_digest;
  std::string stderr_digest;
  // Keys equal the job's output_names when SUCCESS; empty when FAILED.
  std::map<std::string, std::string> output_digests;

  bool operator==(const JobProvenanceRecord&) const = default;
};

struct ExecutionTrace {
  WfId wf_id;
  std::vector<JobProvenanceRecord> records;  // in scheduling order
  // Digest of every data product the run produced, intermediates included.
  std::map<std::string, std::string> final_outputs;
  RunStatus status = RunStatus::kSucceeded;

  bool operator==(const ExecutionTrace&) const = default;
};

// Bookkeeping for one run: which jobs are done, which are assigned, and which
// workers are busy.
class RunState {
 public:
  RunState(const wfmodel::ValidatedWorkflow& workflow, const Cluster& cluster);

  // Unassigned jobs whose predecessors all succeeded, in topological order.
  std::vector<std::string> ready_jobs() const;
  // Idle workers, ascending IP.
  std::vector<cloudsim::VmRecord> free_workers() const;

  void assign(const std::string& job_id, cloudsim::VmId worker);
  void finish(const std::string& job_id, bool success);

 private:
  enum class JobPhase { kWaiting, kRunning, kSucceeded, kFailed };

  const wfmodel::ValidatedWorkflow* workflow_;
  std::vector<cloudsim::VmRecord> workers_;  // ascending IP
  std::map<std::string, JobPhase> phase_;
  std::map<std::string, cloudsim::VmId> running_on_;
};

struct Assignment {
  std::string job_id;
  cloudsim::VmRecord worker;
};

// Ready jobs, in topological order, each take the free worker with the
// lowest IP. Jobs beyond the number of free workers wait.
std::vector<Assignment> schedule_ready_jobs(const RunState& state);

// Called after a job's kernel produced `outputs`; may mutate them. Returning
// true marks the job FAILED. Test-only fault injection.
using FaultHook = std::function<bool(WfId, const wfmodel::Job&,
                                     std::map<std::string, wfmodel::Content>& outputs)>;

class Engine {
 public:
  explicit Engine(WfId seed = kDefaultWfIdSeed,
                  wfmodel::TransformRegistry transforms = {});

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // Registers the workflow as PENDING under a fresh id. Throws
  // Error(kEmptyCluster) or Error(kInvalidCluster).
  WfId submit_workflow(wfmodel::ValidatedWorkflow workflow, Cluster cluster);

  // Runs a PENDING workflow. A failed job does not throw: the trace comes
  // back with RunStatus::kFailed and the records gathered so far.
  ExecutionTrace run_to_completion(WfId wf_id);

  std::pair<wfmodel::ValidatedWorkflow, ExecutionTrace> get_workflow_record(
      WfId wf_id) const;
  Cluster get_cluster(WfId wf_id) const;

  // Guarantees every id issued from now on exceeds `floor`.
  void reserve_ids_through(WfId floor);
  WfId next_id() const;

  void set_fault_hook(FaultHook hook);

 private:
  enum class Phase { kPending, kRunning, kDone };

  struct Entry {
    wfmodel::ValidatedWorkflow workflow;
    Cluster cluster;
    Phase phase = Phase::kPending;
    std::optional<ExecutionTrace> trace;
  };

  ExecutionTrace execute(WfId wf_id, const wfmodel::ValidatedWorkflow& workflow,
                         const Cluster& cluster, const FaultHook& hook) const;

  const wfmodel::TransformRegistry transforms_;
  mutable std::mutex mu_;
  std::int64_t next_id_;
  std::map<WfId, Entry> workflows_;
  FaultHook fault_hook_;
};

}  // namespace provrepeat::engine
