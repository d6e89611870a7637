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

#include "provrepeat/cloudsim.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "provrepeat/error.hpp"

namespace provrepeat::cloudsim {

namespace {

std::string describe(const Flavor& f) {
  std::ostringstream os;
  os << "flavor " << f.flavor_id.value << " (" << f.ram_mb << " MB, "
     << f.disk_gb << " GB, " << f.vcpus << " vCPU)";
  return os.str();
}

}  // namespace

Ipv4Address Ipv4Address::parse(std::string_view text) {
  std::uint32_t value = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (p == end || *p != '.') {
        throw std::invalid_argument("not a dotted quad: " + std::string(text));
      }
      ++p;
    }
    unsigned part = 0;
    auto [next, ec] = std::from_chars(p, end, part);
    if (ec != std::errc() || next == p || next - p > 3 || part > 255) {
      throw std::invalid_argument("not a dotted quad: " + std::string(text));
    }
    value = (value << 8) | part;
    p = next;
  }
  if (p != end) {
    throw std::invalid_argument("not a dotted quad: " + std::string(text));
  }
  return Ipv4Address(value);
}

std::string Ipv4Address::to_string() const {
  std::ostringstream os;
  os << ((value_ >> 24) & 0xff) << '.' << ((value_ >> 16) & 0xff) << '.'
     << ((value_ >> 8) & 0xff) << '.' << (value_ & 0xff);
  return os.str();
}

std::string_view to_string(VmState state) {
  return state == VmState::kActive ? "ACTIVE" : "RELEASED";
}

// --- catalog ---------------------------------------------------------------

CloudCatalog::CloudCatalog(std::int64_t capacity_vcpus)
    : capacity_vcpus_(capacity_vcpus) {
  if (capacity_vcpus < 1) {
    throw Error(Errc::kInvalidCatalog, "capacity_vcpus must be >= 1");
  }
}

void CloudCatalog::add_flavor(const Flavor& flavor) {
  if (flavor.ram_mb <= 0 || flavor.disk_gb <= 0 || flavor.vcpus < 1) {
    throw Error(Errc::kInvalidCatalog, "invalid " + describe(flavor));
  }
  if (!flavors_.emplace(flavor.flavor_id, flavor).second) {
    throw Error(Errc::kInvalidCatalog,
                "duplicate flavor_id " + std::to_string(flavor.flavor_id.value));
  }
}

void CloudCatalog::add_image(const Image& image) {
  if (image.image_id.empty()) {
    throw Error(Errc::kInvalidCatalog, "image_id must be nonempty");
  }
  if (!images_.emplace(image.image_id, image).second) {
    throw Error(Errc::kInvalidCatalog, "duplicate image_id " + image.image_id);
  }
}

std::vector<Flavor> CloudCatalog::flavors() const {
  std::vector<Flavor> out;
  out.reserve(flavors_.size());
  for (const auto& [id, f] : flavors_) out.push_back(f);
  return out;
}

std::vector<Image> CloudCatalog::images() const {
  std::vector<Image> out;
  out.reserve(images_.size());
  for (const auto& [id, img] : images_) out.push_back(img);
  return out;
}

const Flavor* CloudCatalog::find_flavor(FlavorId id) const {
  auto it = flavors_.find(id);
  return it == flavors_.end() ? nullptr : &it->second;
}

const Image* CloudCatalog::find_image(std::string_view image_id) const {
  auto it = images_.find(image_id);
  return it == images_.end() ? nullptr : &it->second;
}

CloudCatalog default_catalog() {
  CloudCatalog catalog(kDefaultCapacityVcpus);
  catalog.add_flavor({FlavorId{1}, 512, 1, 1});
  catalog.add_flavor({FlavorId{2}, 2048, 20, 1});
  catalog.add_flavor({FlavorId{3}, 4096, 40, 2});
  catalog.add_flavor({FlavorId{4}, 8192, 80, 4});
  catalog.add_flavor({FlavorId{5}, 16384, 160, 8});
  catalog.add_image({std::string(kDefaultImageId), std::string(kDefaultImageName)});
  return catalog;
}

CloudCatalog parse_catalog(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
    CloudCatalog catalog(doc.at("capacity_vcpus").get<std::int64_t>());
    for (const auto& f : doc.value("flavors", nlohmann::json::array())) {
      catalog.add_flavor({FlavorId{f.at("flavor_id").get<std::int64_t>()},
                          f.at("ram_mb").get<std::int64_t>(),
                          f.at("disk_gb").get<std::int64_t>(),
                          f.at("vcpus").get<std::int64_t>()});
    }
    for (const auto& i : doc.value("images", nlohmann::json::array())) {
      catalog.add_image({i.at("image_id").get<std::string>(),
                         i.value("image_name", std::string())});
    }
    return catalog;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kInvalidCatalog, std::string("cloud config: ") + e.what());
  }
}

CloudCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::kInvalidCatalog, "cannot read cloud config " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_catalog(buf.str());
}

// --- middleware ------------------------------------------------------------

CloudSim::CloudSim(CloudCatalog catalog) : catalog_(std::move(catalog)) {}

std::vector<Flavor> CloudSim::list_flavors() const { return catalog_.flavors(); }

std::vector<Image> CloudSim::list_images() const { return catalog_.images(); }

Ipv4Address CloudSim::allocate_address_locked(
    std::optional<Ipv4Address> fixed_ip) const {
  if (fixed_ip) {
    if (*fixed_ip < kFirstPoolAddress || *fixed_ip > kLastPoolAddress) {
      throw Error(Errc::kAddressUnavailable,
                  fixed_ip->to_string() + " is outside 172.16.1.2-254");
    }
    if (active_ips_.contains(*fixed_ip)) {
      throw Error(Errc::kAddressUnavailable, fixed_ip->to_string() + " is in use");
    }
    return *fixed_ip;
  }
  for (std::uint32_t a = kFirstPoolAddress.value(); a <= kLastPoolAddress.value(); ++a) {
    if (!active_ips_.contains(Ipv4Address(a))) return Ipv4Address(a);
  }
  throw Error(Errc::kAddressUnavailable, "address pool exhausted");
}

VmRecord CloudSim::provision_vm(std::string_view owner, std::string_view nodename,
                                FlavorId flavor_id, std::string_view image_id,
                                std::optional<Ipv4Address> fixed_ip) {
  std::lock_guard lock(mu_);
  const Flavor* flavor = catalog_.find_flavor(flavor_id);
  if (flavor == nullptr) {
    throw Error(Errc::kUnknownFlavor, "flavor_id " + std::to_string(flavor_id.value));
  }
  const Image* image = catalog_.find_image(image_id);
  if (image == nullptr) {
    throw Error(Errc::kUnknownImage, "image_id " + std::string(image_id));
  }
  if (vcpus_in_use_ + flavor->vcpus > catalog_.capacity_vcpus()) {
    std::ostringstream os;
    os << describe(*flavor) << " needs " << flavor->vcpus << " vCPU, "
       << (catalog_.capacity_vcpus() - vcpus_in_use_) << " of "
       << catalog_.capacity_vcpus() << " free";
    throw Error(Errc::kCapacityExceeded, os.str());
  }
  for (const auto& vm : vms_) {
    if (vm.state == VmState::kActive && vm.owner == owner && vm.nodename == nodename) {
      throw Error(Errc::kDuplicateNodename,
                  std::string(nodename) + " already active for " + std::string(owner));
    }
  }
  Ipv4Address ip = allocate_address_locked(fixed_ip);

  VmRecord vm;
  vm.vm_id = VmId{next_vm_id_++};
  vm.owner = std::string(owner);
  vm.nodename = std::string(nodename);
  vm.ip = ip;
  vm.flavor = *flavor;
  vm.image = *image;
  vm.state = VmState::kActive;
  vm.provisioned_at = ++clock_;

  active_ips_.insert(ip);
  vcpus_in_use_ += flavor->vcpus;
  vms_.push_back(vm);
  return vm;
}

std::vector<VmRecord> CloudSim::list_vms(std::string_view owner) const {
  std::lock_guard lock(mu_);
  std::vector<VmRecord> out;
  for (const auto& vm : vms_) {
    if (vm.state == VmState::kActive && vm.owner == owner) out.push_back(vm);
  }
  // vms_ is already in provisioning order; keep the contract explicit.
  std::stable_sort(out.begin(), out.end(), [](const VmRecord& a, const VmRecord& b) {
    return a.provisioned_at < b.provisioned_at;
  });
  return out;
}

void CloudSim::release_vm(VmId vm_id) {
  std::lock_guard lock(mu_);
  auto it = std::find_if(vms_.begin(), vms_.end(),
                         [&](const VmRecord& vm) { return vm.vm_id == vm_id; });
  if (it == vms_.end()) {
    throw Error(Errc::kUnknownVm, "vm_id " + std::to_string(vm_id.value));
  }
  if (it->state == VmState::kReleased) {
    throw Error(Errc::kAlreadyReleased, "vm_id " + std::to_string(vm_id.value));
  }
  it->state = VmState::kReleased;
  active_ips_.erase(it->ip);
  vcpus_in_use_ -= it->flavor.vcpus;
  ++clock_;
}

Flavor CloudSim::find_flavor_by_spec(std::int64_t ram_mb, std::int64_t disk_gb,
                                     std::int64_t vcpus) const {
  // flavors() is in ascending id order, so the first hit is the smallest id.
  for (const auto& f : catalog_.flavors()) {
    if (f.ram_mb == ram_mb && f.disk_gb == disk_gb && f.vcpus == vcpus) return f;
  }
  std::ostringstream os;
  os << "no flavor with " << ram_mb << " MB, " << disk_gb << " GB, " << vcpus
     << " vCPU";
  throw Error(Errc::kNoMatchingFlavor, os.str());
}

std::optional<Flavor> CloudSim::find_flavor(FlavorId id) const {
  const Flavor* f = catalog_.find_flavor(id);
  return f ? std::optional<Flavor>(*f) : std::nullopt;
}

std::optional<Image> CloudSim::find_image(std::string_view image_id) const {
  const Image* img = catalog_.find_image(image_id);
  return img ? std::optional<Image>(*img) : std::nullopt;
}

VmRecord CloudSim::get_vm(VmId vm_id) const {
  std::lock_guard lock(mu_);
  for (const auto& vm : vms_) {
    if (vm.vm_id == vm_id) return vm;
  }
  throw Error(Errc::kUnknownVm, "vm_id " + std::to_string(vm_id.value));
}

std::vector<VmRecord> CloudSim::all_vms() const {
  std::lock_guard lock(mu_);
  return vms_;
}

std::int64_t CloudSim::vcpus_in_use() const {
  std::lock_guard lock(mu_);
  return vcpus_in_use_;
}

LogicalTime CloudSim::now() const {
  std::lock_guard lock(mu_);
  return clock_;
}

}  // namespace provrepeat::cloudsim
