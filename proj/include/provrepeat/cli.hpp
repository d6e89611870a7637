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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "provrepeat/provenance.hpp"
#include "provrepeat/repeat.hpp"

namespace provrepeat::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitNotVerified = 1,  // run FAILED, or a repeat/compare verdict is negative
  kExitUsage = 2,
  kExitDomain = 3,
  kExitStorage = 4,
};

struct CliConfig {
  std::filesystem::path store_path = "provenance.jsonl";
  std::optional<std::filesystem::path> cloud_config_path;  // default catalog when unset
  std::int64_t wfid_seed = 114;
  std::string owner = "researcher";
  int verbosity = 0;
};

// Column headers of the mapping table, in order.
inline constexpr std::array<std::string_view, 9> kMappingColumns = {
    "WF ID",       "Host IP", "nodename",   "Flavour Id", "minRAM (MB)",
    "minHD (GB)",  "vCPU",    "Image name", "Image id"};

std::string render_mapping_table(std::span<const provenance::ResourceMappingRow> rows);
std::string render_workflow_list(std::span<const provenance::WorkflowSummary> rows);
std::string render_comparison(const repeat::ConfigComparison& config,
                              const repeat::OutputComparison& outputs);

// Entry point behind tools/provrepeat. `args` excludes the program name.
// `store_env` is the value of PROVREPEAT_STORE, if set.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err,
        std::optional<std::string> store_env = std::nullopt);

}  // namespace provrepeat::cli
