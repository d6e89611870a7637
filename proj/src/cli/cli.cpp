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

#include "provrepeat/cli.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "provrepeat/error.hpp"

namespace provrepeat::cli {

using cloudsim::CloudSim;
using cloudsim::VmRecord;
using engine::WfId;

namespace {

std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream os;
  auto emit = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      line += cells[c];
      if (c + 1 < cells.size()) line += std::string(width[c] - cells[c].size() + 2, ' ');
    }
    os << line << '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return os.str();
}

}  // namespace

std::string render_mapping_table(std::span<const provenance::ResourceMappingRow> rows) {
  std::vector<std::string> header(kMappingColumns.begin(), kMappingColumns.end());
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rows) {
    body.push_back({std::to_string(r.wf_id.value), r.host_ip.to_string(), r.nodename,
                    std::to_string(r.flavor_id.value), std::to_string(r.ram_mb),
                    std::to_string(r.disk_gb), std::to_string(r.vcpus), r.image_name,
                    r.image_id});
  }
  return render_table(header, body);
}

std::string render_workflow_list(std::span<const provenance::WorkflowSummary> rows) {
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rows) {
    body.push_back({std::to_string(r.wf_id.value), r.name,
                    std::string(engine::to_string(r.status)), std::to_string(r.job_count)});
  }
  return render_table({"WF ID", "Name", "Status", "Jobs"}, body);
}

std::string render_comparison(const repeat::ConfigComparison& config,
                              const repeat::OutputComparison& outputs) {
  std::ostringstream os;
  os << "infrastructure wfID " << config.old_wf.value << " vs " << config.new_wf.value
     << "\n";
  for (const auto& job : config.per_job) {
    os << "  " << job.job_id << ": " << (job.matched ? "MATCH" : "DIFF") << "\n";
    for (const auto& d : job.diffs) {
      os << "    " << d.field << " " << d.old_value << "→" << d.new_value << "\n";
    }
  }
  os << "outputs\n";
  for (const auto& o : outputs.per_output) {
    os << "  " << o.name << ": " << o.old_digest.substr(0, 12) << " "
       << o.new_digest.substr(0, 12) << " " << (o.equal ? "EQUAL" : "DIFFERENT") << "\n";
  }
  os << "infrastructure " << (config.equivalent ? "EQUIVALENT" : "NOT EQUIVALENT")
     << "; outputs " << (outputs.identical ? "IDENTICAL" : "DIFFERENT") << "\n";
  return os.str();
}

namespace {

struct SubmitOptions {
  std::filesystem::path workflow;
  int workers = 2;
  std::int64_t flavor = 2;
  std::string image{cloudsim::kDefaultImageId};
  std::vector<std::string> nodenames;
  std::vector<std::string> worker_ips;
};

class Session {
 public:
  Session(const CliConfig& cfg, std::ostream& out, std::ostream& err)
      : cfg_(cfg),
        out_(out),
        err_(err),
        cloud_(cfg.cloud_config_path ? cloudsim::load_catalog(*cfg.cloud_config_path)
                                     : cloudsim::default_catalog()),
        store_(cfg.store_path),
        engine_(WfId{cfg.wfid_seed}) {
    if (auto top = store_.max_wf_id()) engine_.reserve_ids_through(*top);
  }

  int submit(const SubmitOptions& opt) {
    auto workflow = wfmodel::validate_workflow(wfmodel::load_workflow_file(opt.workflow));
    if (!opt.nodenames.empty() && opt.nodenames.size() != static_cast<std::size_t>(opt.workers)) {
      throw CLI::ValidationError("--nodenames", "expected " + std::to_string(opt.workers) +
                                                    " names");
    }
    if (!opt.worker_ips.empty() &&
        opt.worker_ips.size() != static_cast<std::size_t>(opt.workers)) {
      throw CLI::ValidationError("--worker-ips", "expected " + std::to_string(opt.workers) +
                                                     " addresses");
    }

    std::vector<VmRecord> vms;
    try {
      engine::Cluster cluster;
      cluster.master = provision("master.novalocal", opt, std::nullopt);
      vms.push_back(cluster.master);
      for (int i = 0; i < opt.workers; ++i) {
        std::string name = opt.nodenames.empty()
                               ? "worker" + std::to_string(i + 1) + ".novalocal"
                               : opt.nodenames[static_cast<std::size_t>(i)];
        std::optional<cloudsim::Ipv4Address> ip;
        if (!opt.worker_ips.empty()) {
          ip = cloudsim::Ipv4Address::parse(opt.worker_ips[static_cast<std::size_t>(i)]);
        }
        cluster.workers.push_back(provision(name, opt, ip));
        vms.push_back(cluster.workers.back());
      }

      WfId id = engine_.submit_workflow(std::move(workflow), std::move(cluster));
      auto trace = engine_.run_to_completion(id);
      store_.store_provenance(provenance::capture_provenance(engine_, cloud_, id, cfg_.owner));
      release(vms);
      out_ << "wfID " << id.value << " " << engine::to_string(trace.status) << "\n";
      return trace.status == engine::RunStatus::kSucceeded ? kExitOk : kExitNotVerified;
    } catch (...) {
      release(vms);
      throw;
    }
  }

  int show(std::int64_t id) {
    auto p = store_.get_provenance(WfId{id});
    out_ << render_mapping_table(p.mappings);
    return kExitOk;
  }

  int repeat(std::int64_t id) {
    auto report = repeat::repeat_workflow({cloud_, engine_, store_}, WfId{id}, cfg_.owner);
    auto p = store_.get_provenance(report.new_wf);
    out_ << render_mapping_table(p.mappings);

    auto report_path = cfg_.store_path.parent_path() /
                       ("repeat-" + std::to_string(report.old_wf.value) + "-" +
                        std::to_string(report.new_wf.value) + ".json");
    std::ofstream f(report_path, std::ios::binary | std::ios::trunc);
    f << repeat::report_to_json(report);
    if (!f) throw Error(Errc::kStorageFailure, "cannot write " + report_path.string());
    log("report written to " + report_path.string());

    out_ << "new wfID " << report.new_wf.value << "; infrastructure "
         << (report.config.equivalent ? "EQUIVALENT" : "NOT EQUIVALENT") << "; outputs "
         << (report.outputs.identical ? "IDENTICAL" : "DIFFERENT") << "\n";
    return report.config.equivalent && report.outputs.identical ? kExitOk : kExitNotVerified;
  }

  int compare(std::int64_t old_id, std::int64_t new_id) {
    auto config = repeat::compare_infrastructure(store_, WfId{old_id}, WfId{new_id});
    auto outputs = repeat::compare_outputs(store_, WfId{old_id}, WfId{new_id});
    out_ << render_comparison(config, outputs);
    return config.equivalent && outputs.identical ? kExitOk : kExitNotVerified;
  }

  int list() {
    out_ << render_workflow_list(store_.list_workflows());
    return kExitOk;
  }

 private:
  VmRecord provision(const std::string& name, const SubmitOptions& opt,
                     std::optional<cloudsim::Ipv4Address> ip) {
    auto vm = cloud_.provision_vm(cfg_.owner, name, cloudsim::FlavorId{opt.flavor}, opt.image, ip);
    log("provisioned " + vm.nodename + " " + vm.ip.to_string());
    return vm;
  }

  void release(const std::vector<VmRecord>& vms) {
    for (const auto& vm : vms) {
      try {
        cloud_.release_vm(vm.vm_id);
        log("released " + vm.nodename);
      } catch (const Error&) {
      }
    }
  }

  void log(const std::string& msg) {
    if (cfg_.verbosity > 0) err_ << msg << "\n";
  }

  const CliConfig& cfg_;
  std::ostream& out_;
  std::ostream& err_;
  CloudSim cloud_;
  provenance::ProvenanceStore store_;
  engine::Engine engine_;
};

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err,
        std::optional<std::string> store_env) {
  CLI::App app{"Cloud-aware provenance capture and workflow repeat"};
  app.name("provrepeat");
  app.require_subcommand(1);

  CliConfig cfg;
  if (store_env && !store_env->empty()) cfg.store_path = *store_env;
  std::string cloud_config;
  app.add_option("--store", cfg.store_path, "Provenance store file (env PROVREPEAT_STORE)");
  app.add_option("--cloud-config", cloud_config, "Cloud catalog JSON (default: built-in)");
  app.add_option("--wfid-seed", cfg.wfid_seed, "First wfID to issue")
      ->check(CLI::PositiveNumber);
  app.add_option("--owner", cfg.owner, "Cloud principal that owns provisioned VMs");
  app.add_flag("-v,--verbose", cfg.verbosity, "Log provisioning steps to stderr");

  SubmitOptions submit_opt;
  auto* submit = app.add_subcommand("submit", "Provision, run, capture and store a workflow");
  submit->fallthrough();
  submit->add_option("--workflow", submit_opt.workflow, "Workflow definition (JSON)")->required();
  submit->add_option("--workers", submit_opt.workers, "Number of compute nodes")
      ->check(CLI::PositiveNumber);
  submit->add_option("--flavor", submit_opt.flavor, "Flavor id for every node");
  submit->add_option("--image", submit_opt.image, "Image id for every node");
  submit->add_option("--nodenames", submit_opt.nodenames, "Worker nodenames")->delimiter(',');
  submit->add_option("--worker-ips", submit_opt.worker_ips, "Fixed worker addresses")
      ->delimiter(',');

  std::int64_t show_id = 0;
  auto* show = app.add_subcommand("show", "Print the Cloud resource mapping of a workflow");
  show->fallthrough();
  show->add_option("wf_id", show_id)->required();

  std::int64_t repeat_id = 0;
  auto* rep = app.add_subcommand("repeat", "Re-provision and repeat a stored workflow");
  rep->fallthrough();
  rep->add_option("wf_id", repeat_id)->required();

  std::int64_t old_id = 0;
  std::int64_t new_id = 0;
  auto* cmp = app.add_subcommand("compare", "Compare infrastructure and outputs of two runs");
  cmp->fallthrough();
  cmp->add_option("old_wf_id", old_id)->required();
  cmp->add_option("new_wf_id", new_id)->required();

  auto* list = app.add_subcommand("list", "List stored workflows");
  list->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (!cloud_config.empty()) cfg.cloud_config_path = cloud_config;

  try {
    Session session(cfg, out, err);
    if (submit->parsed()) return session.submit(submit_opt);
    if (show->parsed()) return session.show(show_id);
    if (rep->parsed()) return session.repeat(repeat_id);
    if (cmp->parsed()) return session.compare(old_id, new_id);
    return session.list();
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return error_class(e.code()) == ErrorClass::kStorage ? kExitStorage : kExitDomain;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace provrepeat::cli
