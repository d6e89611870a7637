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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace provrepeat::wfmodel {

// Raw file content. Bytes are carried in std::string; no encoding is implied.
using Content = std::string;

enum class TaskKind { kSplit, kCount, kMerge, kGeneric };

std::string_view to_string(TaskKind kind);
// Accepts SPLIT / COUNT / MERGE / GENERIC. Throws Error(kInvalidJob).
TaskKind parse_task_kind(std::string_view text);

struct Job {
  std::string job_id;
  TaskKind task_kind = TaskKind::kGeneric;
  std::vector<std::string> args;
  std::vector<std::string> input_names;
  std::vector<std::string> output_names;

  bool operator==(const Job&) const = default;
};

struct Edge {
  std::string from;
  std::string to;

  bool operator==(const Edge&) const = default;
};

struct WorkflowSpec {
  std::string name;
  std::vector<Job> jobs;
  std::vector<Edge> edges;
  std::map<std::string, Content> workflow_inputs;

  bool operator==(const WorkflowSpec&) const = default;
};

// A WorkflowSpec that passed validate_workflow(), with its deterministic
// topological order. validate_workflow() is the only way to build one.
class ValidatedWorkflow {
 public:
  const WorkflowSpec& spec() const { return spec_; }
  const std::vector<std::string>& topo_order() const { return topo_order_; }

  const Job& job(std::string_view job_id) const;  // throws std::out_of_range
  // Direct predecessors via edges, ascending job_id.
  std::vector<std::string> predecessors(std::string_view job_id) const;

  bool operator==(const ValidatedWorkflow&) const = default;

 private:
  friend ValidatedWorkflow validate_workflow(WorkflowSpec spec);
  ValidatedWorkflow(WorkflowSpec spec, std::vector<std::string> topo_order)
      : spec_(std::move(spec)), topo_order_(std::move(topo_order)) {}

  WorkflowSpec spec_;
  std::vector<std::string> topo_order_;
};

// Checks, in order: job ids (nonempty, unique) and per-kind arity
// (kInvalidJob), edge endpoints (kDanglingEdge), output-name uniqueness
// (kDuplicateOutput), acyclicity (kCycleDetected), data-dependency closure
// (kUnsatisfiedInput). Topological ties break by job_id.
ValidatedWorkflow validate_workflow(WorkflowSpec spec);

inline constexpr std::string_view kWordcountInput = "input.txt";

// split -> {analysis1, analysis2} -> merge over `input_text`.
WorkflowSpec build_wordcount_workflow(Content input_text);

// Workflow definition file (JSON):
//   {"name": "...",
//    "jobs": [{"id": "split", "kind": "SPLIT", "args": [...],
//              "inputs": [...], "outputs": [...]}],
//    "edges": [["split", "analysis1"], ...],
//    "inputs": {"input.txt": {"path": "corpus.txt"}}   // or {"text": "..."}
//   }
// Relative input paths resolve against `base_dir`. Throws
// Error(kInvalidWorkflowFile).
WorkflowSpec parse_workflow(std::string_view json_text,
                            const std::filesystem::path& base_dir);
WorkflowSpec load_workflow_file(const std::filesystem::path& path);

// --- task kernels ----------------------------------------------------------

// ASCII space, tab, CR, LF.
constexpr bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n';
}

// Splits at the inter-word gap nearest the byte midpoint; on a tie the word
// straddling the midpoint goes to the first part. Parts carry the original
// bytes from their first word to their last word.
std::pair<Content, Content> kernel_split(std::string_view text);

// Number of maximal non-whitespace runs.
std::int64_t kernel_count(std::string_view text);

// Throws Error(kNegativeCount).
std::int64_t kernel_merge(std::span<const std::int64_t> counts);

// Pure transformations for GENERIC jobs, keyed by args[0]. A transform gets
// the job's args and its input contents (in input_names order) and returns
// one content per output name.
using Transform = std::function<std::vector<Content>(
    std::span<const std::string> args, std::span<const Content> inputs,
    std::size_t output_count)>;

class TransformRegistry {
 public:
  // Preloaded with "identity" (input i -> output i), "concat" (all inputs
  // joined to each output) and "upper" (ASCII uppercase, input i -> output i).
  TransformRegistry();

  void add(std::string name, Transform fn);
  const Transform* find(std::string_view name) const;

 private:
  std::map<std::string, Transform, std::less<>> transforms_;
};

}  // namespace provrepeat::wfmodel
