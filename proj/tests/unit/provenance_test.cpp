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

#include "provrepeat/provenance.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "../common/scenario.hpp"
#include "json.hpp"
#include "test_util.hpp"

namespace provrepeat::provenance {
namespace {

using cloudsim::CloudSim;
using cloudsim::Ipv4Address;
using engine::Engine;
using testing::kOwner;

// Runs one wordcount on a fresh two-node cluster and captures it.
struct Captured {
  CloudSim cloud{cloudsim::default_catalog()};
  Engine engine;
  engine::Cluster cluster;
  CloudAwareProvenance prov;

  explicit Captured(const std::string& text = "a b c d",
                    std::vector<testing::WorkerSpec> workers = testing::reference_workers(),
                    engine::WfId seed = engine::kDefaultWfIdSeed)
      : engine(seed), cluster(testing::provision_cluster(cloud, workers)),
        prov(run(text)) {}

  CloudAwareProvenance run(const std::string& text) {
    auto id = engine.submit_workflow(
        wfmodel::validate_workflow(wfmodel::build_wordcount_workflow(text)), cluster);
    engine.run_to_completion(id);
    return capture_provenance(engine, cloud, id, kOwner);
  }
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(MappingTest, ReferenceDeploymentRows) {
  Captured c;
  const auto& rows = c.prov.mappings;
  ASSERT_EQ(rows.size(), 4u);
  std::set<std::pair<std::string, std::string>> hosts;
  for (const auto& r : rows) {
    EXPECT_EQ(r.wf_id, engine::WfId{114});
    EXPECT_EQ(r.flavor_id, cloudsim::FlavorId{2});
    EXPECT_EQ(r.ram_mb, 2048);
    EXPECT_EQ(r.disk_gb, 20);
    EXPECT_EQ(r.vcpus, 1);
    EXPECT_EQ(r.image_name, "wf_peg_repeat");
    EXPECT_EQ(r.image_id, "f102960c-557c-4253-8277-2df5ffe3c169");
    hosts.insert({r.host_ip.to_string(), r.nodename});
  }
  std::set<std::pair<std::string, std::string>> expected{
      {"172.16.1.49", "osdc-vm3.novalocal"}, {"172.16.1.98", "mynode.novalocal"}};
  EXPECT_EQ(hosts, expected);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].job_id, c.prov.trace.records[i].job_id);
    EXPECT_EQ(rows[i].host_ip, c.prov.trace.records[i].host_ip);
  }
  EXPECT_NO_THROW(check_provenance(c.prov));
}

TEST(MappingTest, EmptyWorkflowHasNoRows) {
  CloudSim cloud(cloudsim::default_catalog());
  auto cluster = testing::provision_cluster(cloud, testing::numbered_workers(1));
  Engine engine;
  auto id = engine.submit_workflow(wfmodel::validate_workflow({"none", {}, {}, {}}), cluster);
  engine.run_to_completion(id);
  EXPECT_TRUE(collect_cloud_mapping(engine, cloud, id, kOwner).empty());
}

TEST(MappingTest, ReleasedWorkerIsStale) {
  CloudSim cloud(cloudsim::default_catalog());
  auto cluster = testing::provision_cluster(cloud, testing::reference_workers());
  Engine engine;
  auto id = engine.submit_workflow(
      wfmodel::validate_workflow(wfmodel::build_wordcount_workflow("x y")), cluster);
  engine.run_to_completion(id);
  cloud.release_vm(cluster.workers[1].vm_id);
  try {
    collect_cloud_mapping(engine, cloud, id, kOwner);
    FAIL() << "expected StaleMapping";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kStaleMapping);
    EXPECT_NE(std::string(e.what()).find("172.16.1.98"), std::string::npos);
  }
}

TEST(MappingTest, OtherOwnersVmsAreInvisible) {
  CloudSim cloud(cloudsim::default_catalog());
  auto cluster = testing::provision_cluster(cloud, testing::numbered_workers(1),
                                            cloudsim::FlavorId{2},
                                            std::string(cloudsim::kDefaultImageId), "someone");
  Engine engine;
  auto id = engine.submit_workflow(
      wfmodel::validate_workflow(wfmodel::build_wordcount_workflow("x y")), cluster);
  engine.run_to_completion(id);
  EXPECT_ERRC(collect_cloud_mapping(engine, cloud, id, kOwner), Errc::kStaleMapping);
}

TEST(MappingTest, DuplicateAddressIsAmbiguous) {
  Captured c;
  auto inventory = c.cloud.list_vms(kOwner);
  auto clone = c.cluster.workers[0];
  clone.vm_id = cloudsim::VmId{9999};
  inventory.push_back(clone);
  EXPECT_ERRC(join_mappings(c.prov.trace, inventory, kOwner, 0), Errc::kAmbiguousIp);
}

TEST(MappingTest, CheckRejectsInconsistentRecords) {
  Captured c;
  auto bad = c.prov;
  bad.mappings.pop_back();
  EXPECT_ERRC(check_provenance(bad), Errc::kInvalidProvenance);

  bad = c.prov;
  bad.mappings[0].host_ip = Ipv4Address::parse("172.16.1.200");
  EXPECT_ERRC(check_provenance(bad), Errc::kInvalidProvenance);

  bad = c.prov;
  bad.mappings[2].wf_id = engine::WfId{1};
  EXPECT_ERRC(check_provenance(bad), Errc::kInvalidProvenance);
}

TEST(CodecTest, RoundTripAndSchemaVersion) {
  Captured c("one\ttwo\r\nthree \xc3\xa9");
  auto line = encode_record(c.prov);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  auto doc = nlohmann::json::parse(line);
  EXPECT_EQ(doc.at("schema_version"), 1);
  EXPECT_EQ(doc.at("wf_id"), 114);
  EXPECT_EQ(decode_record(line), c.prov);
}

TEST(CodecTest, RejectsSchemaViolations) {
  Captured c;
  auto doc = nlohmann::json::parse(encode_record(c.prov));
  auto bad = doc;
  bad["schema_version"] = 2;
  EXPECT_ERRC(decode_record(bad.dump()), Errc::kStorageFailure);
  bad = doc;
  bad.erase("mappings");
  EXPECT_ERRC(decode_record(bad.dump()), Errc::kStorageFailure);
  EXPECT_ERRC(decode_record("{not json"), Errc::kStorageFailure);
}

TEST(StoreTest, StoreAndGetRoundTrip) {
  testing::TempDir dir;
  Captured c;
  {
    ProvenanceStore store(dir / "p.jsonl");
    EXPECT_FALSE(store.max_wf_id());
    store.store_provenance(c.prov);
    EXPECT_TRUE(store.contains(c.prov.wf_id));
    EXPECT_EQ(store.get_provenance(c.prov.wf_id), c.prov);
    EXPECT_ERRC(store.get_provenance(engine::WfId{999}), Errc::kUnknownWfId);
    EXPECT_ERRC(store.store_provenance(c.prov), Errc::kDuplicateWfId);
  }
  // Exactly one line made it to disk.
  auto text = slurp(dir / "p.jsonl");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
}

TEST(StoreTest, ListingIsAscendingAndSurvivesReopen) {
  testing::TempDir dir;
  std::vector<CloudAwareProvenance> provs;
  for (auto seed : {122, 114, 117}) {
    Captured c("w " + std::to_string(seed), testing::reference_workers(), engine::WfId{seed});
    provs.push_back(c.prov);
  }
  {
    ProvenanceStore store(dir / "p.jsonl");
    for (const auto& p : provs) store.store_provenance(p);
    auto listed = store.list_workflows();
    ASSERT_EQ(listed.size(), 3u);
    EXPECT_EQ(listed[0].wf_id, engine::WfId{114});
    EXPECT_EQ(listed[1].wf_id, engine::WfId{117});
    EXPECT_EQ(listed[2].wf_id, engine::WfId{122});
    EXPECT_EQ(listed[0].name, "wordcount");
    EXPECT_EQ(listed[0].job_count, 4u);
  }
  ProvenanceStore reopened(dir / "p.jsonl");
  EXPECT_EQ(reopened.max_wf_id(), engine::WfId{122});
  for (const auto& p : provs) EXPECT_EQ(reopened.get_provenance(p.wf_id), p);
}

TEST(StoreTest, SecondHandleIsLockedOut) {
  testing::TempDir dir;
  ProvenanceStore store(dir / "p.jsonl");
  EXPECT_ERRC(ProvenanceStore(dir / "p.jsonl"), Errc::kStoreLocked);
  EXPECT_EQ(error_class(Errc::kStoreLocked), ErrorClass::kStorage);
}

TEST(StoreTest, TornTailIsTruncated) {
  testing::TempDir dir;
  Captured c;
  {
    ProvenanceStore store(dir / "p.jsonl");
    store.store_provenance(c.prov);
  }
  const auto good = slurp(dir / "p.jsonl");
  {
    std::ofstream out(dir / "p.jsonl", std::ios::app | std::ios::binary);
    out << R"({"schema_version":1,"wf_id":115,"work)";
  }
  {
    ProvenanceStore store(dir / "p.jsonl");
    EXPECT_EQ(store.list_workflows().size(), 1u);
    EXPECT_EQ(store.get_provenance(c.prov.wf_id), c.prov);
    // Appends after recovery land on a clean line boundary.
    Captured other("z", testing::reference_workers(), engine::WfId{200});
    store.store_provenance(other.prov);
  }
  EXPECT_EQ(slurp(dir / "p.jsonl").substr(0, good.size()), good);
  ProvenanceStore reopened(dir / "p.jsonl");
  EXPECT_EQ(reopened.list_workflows().size(), 2u);
}

TEST(StoreTest, CorruptCompleteLineFailsOpen) {
  testing::TempDir dir;
  {
    std::ofstream out(dir / "p.jsonl", std::ios::binary);
    out << "garbage\n";
  }
  EXPECT_ERRC(ProvenanceStore(dir / "p.jsonl"), Errc::kStorageFailure);
}

TEST(StoreTest, DuplicateIdOnDiskFailsOpen) {
  testing::TempDir dir;
  Captured c;
  {
    std::ofstream out(dir / "p.jsonl", std::ios::binary);
    out << encode_record(c.prov) << '\n' << encode_record(c.prov) << '\n';
  }
  EXPECT_ERRC(ProvenanceStore(dir / "p.jsonl"), Errc::kStorageFailure);
}

TEST(StoreTest, RejectsInvalidProvenance) {
  testing::TempDir dir;
  Captured c;
  auto bad = c.prov;
  bad.mappings.clear();
  ProvenanceStore store(dir / "p.jsonl");
  EXPECT_ERRC(store.store_provenance(bad), Errc::kInvalidProvenance);
  EXPECT_TRUE(store.list_workflows().empty());
}

TEST(StoreTest, UnwritableLocationIsStorageFailure) {
  testing::TempDir dir;
  EXPECT_ERRC(ProvenanceStore(dir / "missing" / "p.jsonl"), Errc::kStorageFailure);
}

// Property: arbitrary texts, including non-UTF-8 bytes, survive the store.
TEST(StorePropertyTest, RandomInputsRoundTrip) {
  testing::TempDir dir;
  std::mt19937_64 rng(7);
  std::vector<CloudAwareProvenance> provs;
  {
    ProvenanceStore store(dir / "p.jsonl");
    for (int i = 0; i < 30; ++i) {
      auto text = testing::random_text(rng, 80);
      if (i % 3 == 0) text.push_back(static_cast<char>(0xff));
      Captured c(text, testing::numbered_workers(1 + i % 3), engine::WfId{1000 + i});
      store.store_provenance(c.prov);
      provs.push_back(c.prov);
    }
  }
  ProvenanceStore store(dir / "p.jsonl");
  for (const auto& p : provs) ASSERT_EQ(store.get_provenance(p.wf_id), p);
}

}  // namespace
}  // namespace provrepeat::provenance
