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

// Deterministic in-process IaaS middleware: flavor and image catalog, VM
// provision/list/release scoped per owner, vCPU capacity accounting and
// sequential private address allocation.

#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace provrepeat::cloudsim {

// Monotonic logical clock value. Never wall time.
using LogicalTime = std::uint64_t;

struct FlavorId {
  std::int64_t value = 0;
  auto operator<=>(const FlavorId&) const = default;
};

struct VmId {
  std::int64_t value = 0;
  auto operator<=>(const VmId&) const = default;
};

class Ipv4Address {
 public:
  constexpr Ipv4Address() = default;
  constexpr explicit Ipv4Address(std::uint32_t host_order) : value_(host_order) {}

  // Throws std::invalid_argument unless `text` is a dotted quad.
  static Ipv4Address parse(std::string_view text);

  constexpr std::uint32_t value() const { return value_; }
  std::string to_string() const;

  auto operator<=>(const Ipv4Address&) const = default;

 private:
  std::uint32_t value_ = 0;
};

struct Flavor {
  FlavorId flavor_id;
  std::int64_t ram_mb = 0;
  std::int64_t disk_gb = 0;
  std::int64_t vcpus = 0;

  bool operator==(const Flavor&) const = default;
};

struct Image {
  std::string image_id;
  std::string image_name;

  bool operator==(const Image&) const = default;
};

enum class VmState { kActive, kReleased };

std::string_view to_string(VmState state);

struct VmRecord {
  VmId vm_id;
  std::string owner;
  std::string nodename;
  Ipv4Address ip;
  Flavor flavor;
  Image image;
  VmState state = VmState::kActive;
  LogicalTime provisioned_at = 0;

  bool operator==(const VmRecord&) const = default;
};

// Flavor and image inventory plus total core capacity. Mutators enforce the
// catalog invariants and throw Error(kInvalidCatalog).
class CloudCatalog {
 public:
  explicit CloudCatalog(std::int64_t capacity_vcpus);

  void add_flavor(const Flavor& flavor);
  void add_image(const Image& image);

  std::vector<Flavor> flavors() const;  // ascending flavor_id
  std::vector<Image> images() const;    // ascending image_id
  const Flavor* find_flavor(FlavorId id) const;
  const Image* find_image(std::string_view image_id) const;
  std::int64_t capacity_vcpus() const { return capacity_vcpus_; }

 private:
  std::int64_t capacity_vcpus_;
  std::map<FlavorId, Flavor> flavors_;
  std::map<std::string, Image, std::less<>> images_;
};

inline constexpr std::int64_t kDefaultCapacityVcpus = 20;
inline constexpr std::string_view kDefaultImageId =
    "f102960c-557c-4253-8277-2df5ffe3c169";
inline constexpr std::string_view kDefaultImageName = "wf_peg_repeat";

// OpenStack-style m1.* flavors 1..5 (flavor 2 is 2048 MB / 20 GB / 1 vCPU),
// the wf_peg_repeat image and a 20-core capacity.
CloudCatalog default_catalog();

// JSON document:
//   {"capacity_vcpus": 20,
//    "flavors": [{"flavor_id": 2, "ram_mb": 2048, "disk_gb": 20, "vcpus": 1}],
//    "images":  [{"image_id": "...", "image_name": "..."}]}
CloudCatalog parse_catalog(std::string_view json_text);
CloudCatalog load_catalog(const std::filesystem::path& path);

// First and last allocatable host in 172.16.1.0/24.
inline constexpr Ipv4Address kFirstPoolAddress{(172u << 24) | (16u << 16) | (1u << 8) | 2u};
inline constexpr Ipv4Address kLastPoolAddress{(172u << 24) | (16u << 16) | (1u << 8) | 254u};

class CloudSim {
 public:
  explicit CloudSim(CloudCatalog catalog);

  CloudSim(const CloudSim&) = delete;
  CloudSim& operator=(const CloudSim&) = delete;

  std::vector<Flavor> list_flavors() const;
  std::vector<Image> list_images() const;

  // Allocates the lowest free pool address unless `fixed_ip` is given, in
  // which case that address must lie in the pool and be unused.
  VmRecord provision_vm(std::string_view owner, std::string_view nodename,
                        FlavorId flavor_id, std::string_view image_id,
                        std::optional<Ipv4Address> fixed_ip = std::nullopt);

  // ACTIVE VMs of `owner` ordered by provisioned_at.
  std::vector<VmRecord> list_vms(std::string_view owner) const;

  void release_vm(VmId vm_id);

  // Exact (ram, disk, vcpus) match; the smallest flavor_id wins.
  Flavor find_flavor_by_spec(std::int64_t ram_mb, std::int64_t disk_gb,
                             std::int64_t vcpus) const;
  std::optional<Flavor> find_flavor(FlavorId id) const;
  std::optional<Image> find_image(std::string_view image_id) const;

  VmRecord get_vm(VmId vm_id) const;
  // Every VM ever provisioned, RELEASED included, in provisioning order.
  std::vector<VmRecord> all_vms() const;

  std::int64_t vcpus_in_use() const;
  std::int64_t capacity_vcpus() const { return catalog_.capacity_vcpus(); }
  LogicalTime now() const;

 private:
  Ipv4Address allocate_address_locked(std::optional<Ipv4Address> fixed_ip) const;

  const CloudCatalog catalog_;
  mutable std::mutex mu_;
  std::vector<VmRecord> vms_;
  std::set<Ipv4Address> active_ips_;
  std::int64_t vcpus_in_use_ = 0;
  std::int64_t next_vm_id_ = 1;
  LogicalTime clock_ = 0;
};

}  // namespace provrepeat::cloudsim
