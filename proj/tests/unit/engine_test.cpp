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

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "../common/scenario.hpp"
#include "provrepeat/digest.hpp"
#include "test_util.hpp"

namespace provrepeat::engine {
namespace {

using cloudsim::CloudSim;
using cloudsim::Ipv4Address;
using testing::kOwner;
using wfmodel::Job;
using wfmodel::TaskKind;
using wfmodel::WorkflowSpec;

std::int64_t istream_word_count(const std::string& text) {
  std::istringstream in(text);
  std::string w;
  std::int64_t n = 0;
  while (in >> w) ++n;
  return n;
}

const JobProvenanceRecord& record(const ExecutionTrace& t, const std::string& job_id) {
  for (const auto& r : t.records) {
    if (r.job_id == job_id) return r;
  }
  throw std::out_of_range(job_id);
}

WorkflowSpec independent_jobs(int n) {
  WorkflowSpec spec{"indep", {}, {}, {{"in", "x"}}};
  for (int i = 0; i < n; ++i) {
    std::string id(1, static_cast<char>('a' + i));
    spec.jobs.push_back({id, TaskKind::kGeneric, {"identity"}, {"in"}, {"out_" + id}});
  }
  return spec;
}

TEST(SubmitTest, FirstIdIs114AndIdsIncrease) {
  CloudSim cloud(cloudsim::default_catalog());
  auto cluster = testing::provision_cluster(cloud, testing::numbered_workers(2));
  Engine engine;
  auto wf = wfmodel::validate_workflow(wfmodel::build_wordcount_workflow("a b"));
  WfId first = engine.submit_workflow(wf, cluster);
  WfId second = engine.submit_workflow(wf, cluster);
  EXPECT_EQ(first, WfId{114});
  EXPECT_GT(second, first);
}

TEST(SubmitTest, ClusterErrors) {
  CloudSim cloud(cloudsim::default_catalog());
  auto cluster = testing::provision_cluster(cloud, testing::numbered_workers(2));
  Engine engine;
  auto wf = wfmodel::validate_workflow(wfmodel::build_wordcount_workflow("a b"));

  Cluster empty{cluster.master, {}};
  EXPECT_ERRC(engine.submit_workflow(wf, empty), Errc::kEmptyCluster);

  Cluster master_as_worker{cluster.master, {cluster.master}};
  EXPECT_ERRC(engine.submit_workflow(wf, master_as_worker), Errc::kInvalidCluster);

  cloud.release_vm(cluster.workers[1].vm_id);
  Cluster stale = cluster;
  stale.workers[1] = cloud.get_vm(cluster.workers[1].vm_id);
  EXPECT_ERRC(engine.submit_workflow(wf, stale), Errc::kInvalidCluster);
  EXPECT_EQ(engine.next_id(), WfId{114});
}

TEST(SubmitTest, ReserveIdsThrough) {
  Engine engine(WfId{5});
  engine.reserve_ids_through(WfId{3});
  EXPECT_EQ(engine.next_id(), WfId{5});
  engine.reserve_ids_through(WfId{116});
  EXPECT_EQ(engine.next_id(), WfId{117});
}

TEST(SchedulerTest, LowestIpFirstInTopoOrder) {
  CloudSim cloud(cloudsim::default_catalog());
  // Listed high address first; the scheduler must still order by IP.
  auto cluster = testing::provision_cluster(
      cloud, {{"mynode.novalocal", Ipv4Address::parse("172.16.1.98")},
              {"osdc-vm3.novalocal", Ipv4Address::parse("172.16.1.49")}});
  auto wf = wfmodel::validate_workflow(wfmodel::build_wordcount_workflow("a b"));
  RunState state(wf, cluster);

  auto first = schedule_ready_jobs(state);
  ASSERT_EQ(first.size(), 1u);
  EXPECT_EQ(first[0].job_id, "split");
  EXPECT_EQ(first[0].worker.ip.to_string(), "172.16.1.49");
  state.assign("split", first[0].worker.vm_id);
  EXPECT_TRUE(schedule_ready_jobs(state).empty());
  state.finish("split", true);

  auto second = schedule_ready_jobs(state);
  ASSERT_EQ(second.size(), 2u);
  EXPECT_EQ(second[0].job_id, "analysis1");
  EXPECT_EQ(second[0].worker.ip.to_string(), "172.16.1.49");
  EXPECT_EQ(second[1].job_id, "analysis2");
  EXPECT_EQ(second[1].worker.ip.to_string(), "172.16.1.98");
}

TEST(SchedulerTest, ExcessReadyJobsWait) {
  CloudSim cloud(cloudsim::default_catalog());
  auto cluster = testing::provision_cluster(cloud, testing::numbered_workers(2));
  auto wf = wfmodel::validate_workflow(independent_jobs(3));
  RunState state(wf, cluster);

  auto picks = schedule_ready_jobs(state);
  ASSERT_EQ(picks.size(), 2u);
  EXPECT_EQ(picks[0].job_id, "a");
  EXPECT_EQ(picks[1].job_id, "b");
  for (const auto& p : picks) state.assign(p.job_id, p.worker.vm_id);

  EXPECT_EQ(state.ready_jobs(), std::vector<std::string>{"c"});
  EXPECT_TRUE(state.free_workers().empty());
  EXPECT_TRUE(schedule_ready_jobs(state).empty());

  state.finish("b", true);
  auto last = schedule_ready_jobs(state);
  ASSERT_EQ(last.size(), 1u);
  EXPECT_EQ(last[0].job_id, "c");
  EXPECT_EQ(last[0].worker.vm_id, picks[1].worker.vm_id);
}

TEST(RunTest, WordcountOnTwoWorkers) {
  CloudSim cloud(cloudsim::default_catalog());
  auto cluster = testing::provision_cluster(cloud, testing::reference_workers());
  Engine engine;
  const std::string text = "the quick brown fox jumps over the lazy dog";
  WfId id = engine.submit_workflow(
      wfmodel::validate_workflow(wfmodel::build_wordcount_workflow(text)), cluster);
  auto trace = engine.run_to_completion(id);

  EXPECT_EQ(trace.status, RunStatus::kSucceeded);
  ASSERT_EQ(trace.records.size(), 4u);
  const auto& split = record(trace, "split");
  const auto& a1 = record(trace, "analysis1");
  const auto& a2 = record(trace, "analysis2");
  const auto& merge = record(trace, "merge");
  // split alone first, merge alone last
  for (const auto* r : {&a1, &a2, &merge}) EXPECT_GE(r->start, split.end);
  EXPECT_GE(merge.start, std::max(a1.end, a2.end));
  EXPECT_NE(a1.host_ip, a2.host_ip);
  EXPECT_EQ(a1.start, a2.start);

  std::set<std::string> worker_ips{"172.16.1.49", "172.16.1.98"};
  for (const auto& r : trace.records) {
    EXPECT_EQ(r.wf_id, id);
    EXPECT_TRUE(worker_ips.contains(r.host_ip.to_string()));
    EXPECT_EQ(r.exit_status, ExitStatus::kSuccess);
    EXPECT_LE(r.start, r.end);
  }
  EXPECT_EQ(split.args, (std::vector<std::string>{"input.txt", "part1", "part2"}));

  const auto expected_total = std::to_string(istream_word_count(text));
  EXPECT_EQ(merge.output_digests.at("total"), sha256_hex(expected_total));
  EXPECT_EQ(trace.final_outputs.at("total"), sha256_hex(expected_total));
  EXPECT_EQ(trace.final_outputs.size(), 5u);  // part1 part2 count1 count2 total
}

TEST(RunTest, SingleJobRunsOnLowestWorker) {
  CloudSim cloud(cloudsim::default_catalog());
  auto cluster = testing::provision_cluster(cloud, testing::numbered_workers(3));
  Engine engine;
  WfId id = engine.submit_workflow(wfmodel::validate_workflow(independent_jobs(1)), cluster);
  auto trace = engine.run_to_completion(id);
  ASSERT_EQ(trace.records.size(), 1u);
  EXPECT_EQ(trace.records[0].host_ip, cluster.workers[0].ip);
}

TEST(RunTest, EmptyWorkflowSucceedsWithoutRecords) {
  CloudSim cloud(cloudsim::default_catalog());
  auto cluster = testing::provision_cluster(cloud, testing::numbered_workers(1));
  Engine engine;
  WfId id = engine.submit_workflow(wfmodel::validate_workflow({"none", {}, {}, {}}), cluster);
  auto trace = engine.run_to_completion(id);
  EXPECT_EQ(trace.status, RunStatus::kSucceeded);
  EXPECT_TRUE(trace.records.empty());
}

TEST(RunTest, LifecycleErrors) {
  CloudSim cloud(cloudsim::default_catalog());
  auto cluster = testing::provision_cluster(cloud, testing::numbered_workers(1));
  Engine engine;
  EXPECT_ERRC(engine.run_to_completion(WfId{999}), Errc::kUnknownWfId);
  WfId id = engine.submit_workflow(wfmodel::validate_workflow(independent_jobs(1)), cluster);
  EXPECT_ERRC(engine.get_workflow_record(id), Errc::kNotYetRun);
  engine.run_to_completion(id);
  EXPECT_ERRC(engine.run_to_completion(id), Errc::kNotPending);
  EXPECT_ERRC(engine.get_workflow_record(WfId{999}), Errc::kUnknownWfId);
}

TEST(RunTest, WorkflowRecordRoundTrips) {
  CloudSim cloud(cloudsim::default_catalog());
  auto cluster = testing::provision_cluster(cloud, testing::numbered_workers(2));
  Engine engine;
  auto spec = wfmodel::build_wordcount_workflow("alpha beta gamma");
  WfId id = engine.submit_workflow(wfmodel::validate_workflow(spec), cluster);
  auto trace = engine.run_to_completion(id);

  auto [wf, stored] = engine.get_workflow_record(id);
  EXPECT_EQ(wf.spec(), spec);
  EXPECT_EQ(stored, trace);
  EXPECT_EQ(stored.records.size(), 4u);
  WfId again = engine.submit_workflow(wfmodel::validate_workflow(wf.spec()), cluster);
  EXPECT_EQ(engine.run_to_completion(again).final_outputs, trace.final_outputs);
}

TEST(RunTest, FaultHookFailsJobAndHaltsScheduling) {
  CloudSim cloud(cloudsim::default_catalog());
  auto cluster = testing::provision_cluster(cloud, testing::numbered_workers(2));
  Engine engine;
  engine.set_fault_hook([](WfId, const Job& job, auto&) { return job.job_id == "analysis2"; });
  WfId id = engine.submit_workflow(
      wfmodel::validate_workflow(wfmodel::build_wordcount_workflow("a b c")), cluster);
  auto trace = engine.run_to_completion(id);

  EXPECT_EQ(trace.status, RunStatus::kFailed);
  ASSERT_EQ(trace.records.size(), 3u);  // merge never starts
  EXPECT_EQ(record(trace, "analysis1").exit_status, ExitStatus::kSuccess);
  EXPECT_EQ(record(trace, "analysis2").exit_status, ExitStatus::kFailed);
  EXPECT_TRUE(record(trace, "analysis2").output_digests.empty());
  EXPECT_FALSE(trace.final_outputs.contains("count2"));
  EXPECT_EQ(std::get<1>(engine.get_workflow_record(id)).status, RunStatus::kFailed);
}

TEST(RunTest, UnknownGenericTransformFails) {
  CloudSim cloud(cloudsim::default_catalog());
  auto cluster = testing::provision_cluster(cloud, testing::numbered_workers(1));
  Engine engine;
  WorkflowSpec spec{"g", {{"g", TaskKind::kGeneric, {"no-such"}, {}, {"o"}}}, {}, {}};
  WfId id = engine.submit_workflow(wfmodel::validate_workflow(spec), cluster);
  auto trace = engine.run_to_completion(id);
  EXPECT_EQ(trace.status, RunStatus::kFailed);
  EXPECT_NE(trace.records[0].stderr_digest, sha256_hex(""));
}

TEST(RunTest, MergeRejectsNonNumericInput) {
  CloudSim cloud(cloudsim::default_catalog());
  auto cluster = testing::provision_cluster(cloud, testing::numbered_workers(1));
  Engine engine;
  WorkflowSpec spec{"m", {{"m", TaskKind::kMerge, {}, {"in"}, {"total"}}}, {}, {{"in", "12x"}}};
  WfId id = engine.submit_workflow(wfmodel::validate_workflow(spec), cluster);
  EXPECT_EQ(engine.run_to_completion(id).status, RunStatus::kFailed);
}

// Random DAGs of generic jobs over random clusters.
WorkflowSpec random_dag(std::mt19937_64& rng) {
  const int n = 1 + static_cast<int>(rng() % 8);
  WorkflowSpec spec{"rand", {}, {}, {{"seed", testing::random_text(rng, 40)}}};
  static const char* kTransforms[] = {"identity", "concat", "upper"};
  for (int i = 0; i < n; ++i) {
    Job job{"j" + std::to_string(i), TaskKind::kGeneric, {kTransforms[rng() % 3]}, {"seed"},
            {"o" + std::to_string(i)}};
    for (int k = 0; k < i; ++k) {
      if (rng() % 3 == 0) {
        spec.edges.push_back({"j" + std::to_string(k), job.job_id});
        job.input_names.push_back("o" + std::to_string(k));
      }
    }
    spec.jobs.push_back(std::move(job));
  }
  return spec;
}

TEST(RunPropertyTest, DependencySafetyHostMembershipDeterminism) {
  std::mt19937_64 rng(41);
  for (int iter = 0; iter < 100; ++iter) {
    auto spec = random_dag(rng);
    const int workers = 1 + static_cast<int>(rng() % 4);
    auto wf = wfmodel::validate_workflow(spec);

    ExecutionTrace traces[2];
    for (auto& t : traces) {
      CloudSim cloud(cloudsim::default_catalog());
      auto cluster = testing::provision_cluster(cloud, testing::numbered_workers(workers));
      Engine engine;
      t = engine.run_to_completion(engine.submit_workflow(wf, cluster));

      std::set<Ipv4Address> ips;
      for (const auto& w : cluster.workers) ips.insert(w.ip);
      for (const auto& r : t.records) {
        ASSERT_TRUE(ips.contains(r.host_ip));
        for (const auto& p : wf.predecessors(r.job_id)) {
          ASSERT_GE(r.start, record(t, p).end) << r.job_id << " after " << p;
        }
      }
      // At most one job per worker at any tick.
      for (const auto& a : t.records) {
        for (const auto& b : t.records) {
          if (&a != &b && a.host_ip == b.host_ip) {
            ASSERT_TRUE(a.end <= b.start || b.end <= a.start);
          }
        }
      }
    }
    ASSERT_EQ(traces[0], traces[1]);
    ASSERT_EQ(traces[0].status, RunStatus::kSucceeded);
    ASSERT_EQ(traces[0].records.size(), spec.jobs.size());
  }
}

// Recompute every wordcount digest straight from the kernels.
TEST(RunPropertyTest, DigestsRecomputableFromKernels) {
  std::mt19937_64 rng(43);
  for (int iter = 0; iter < 50; ++iter) {
    auto text = testing::random_text(rng);
    CloudSim cloud(cloudsim::default_catalog());
    auto cluster = testing::provision_cluster(cloud, testing::numbered_workers(2));
    Engine engine;
    auto trace = engine.run_to_completion(engine.submit_workflow(
        wfmodel::validate_workflow(wfmodel::build_wordcount_workflow(text)), cluster));

    auto [p1, p2] = wfmodel::kernel_split(text);
    auto c1 = wfmodel::kernel_count(p1);
    auto c2 = wfmodel::kernel_count(p2);
    std::vector<std::int64_t> counts{c1, c2};
    EXPECT_EQ(record(trace, "split").output_digests.at("part1"), sha256_hex(p1));
    EXPECT_EQ(record(trace, "split").output_digests.at("part2"), sha256_hex(p2));
    EXPECT_EQ(record(trace, "analysis1").output_digests.at("count1"),
              sha256_hex(std::to_string(c1)));
    EXPECT_EQ(record(trace, "analysis2").output_digests.at("count2"),
              sha256_hex(std::to_string(c2)));
    EXPECT_EQ(record(trace, "merge").output_digests.at("total"),
              sha256_hex(std::to_string(wfmodel::kernel_merge(counts))));
  }
}

}  // namespace
}  // namespace provrepeat::engine
