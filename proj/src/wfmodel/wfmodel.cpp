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

#include "provrepeat/wfmodel.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "provrepeat/error.hpp"

namespace provrepeat::wfmodel {

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::kSplit: return "SPLIT";
    case TaskKind::kCount: return "COUNT";
    case TaskKind::kMerge: return "MERGE";
    case TaskKind::kGeneric: return "GENERIC";
  }
  return "GENERIC";
}

TaskKind parse_task_kind(std::string_view text) {
  if (text == "SPLIT") return TaskKind::kSplit;
  if (text == "COUNT") return TaskKind::kCount;
  if (text == "MERGE") return TaskKind::kMerge;
  if (text == "GENERIC") return TaskKind::kGeneric;
  throw Error(Errc::kInvalidJob, "unknown task kind '" + std::string(text) + "'");
}

// --- validation ------------------------------------------------------------

const Job& ValidatedWorkflow::job(std::string_view job_id) const {
  for (const auto& j : spec_.jobs) {
    if (j.job_id == job_id) return j;
  }
  throw std::out_of_range("no job " + std::string(job_id));
}

std::vector<std::string> ValidatedWorkflow::predecessors(std::string_view job_id) const {
  std::set<std::string> preds;
  for (const auto& e : spec_.edges) {
    if (e.to == job_id) preds.insert(e.from);
  }
  return {preds.begin(), preds.end()};
}

namespace {

void check_arity(const Job& job) {
  auto fail = [&](const char* what) {
    throw Error(Errc::kInvalidJob, "job '" + job.job_id + "' (" +
                                       std::string(to_string(job.task_kind)) +
                                       ") " + what);
  };
  const auto in = job.input_names.size();
  const auto out = job.output_names.size();
  switch (job.task_kind) {
    case TaskKind::kSplit:
      if (in != 1 || out != 2) fail("needs 1 input and 2 outputs");
      break;
    case TaskKind::kCount:
      if (in != 1 || out != 1) fail("needs 1 input and 1 output");
      break;
    case TaskKind::kMerge:
      if (in < 1 || out != 1) fail("needs at least 1 input and 1 output");
      break;
    case TaskKind::kGeneric:
      if (job.args.empty()) fail("needs a transform name in args[0]");
      break;
  }
  for (const auto& name : job.output_names) {
    if (name.empty()) fail("has an empty output name");
  }
}

}  // namespace

ValidatedWorkflow validate_workflow(WorkflowSpec spec) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < spec.jobs.size(); ++i) {
    const Job& job = spec.jobs[i];
    if (job.job_id.empty()) {
      throw Error(Errc::kInvalidJob, "empty job_id at position " + std::to_string(i));
    }
    if (!index.emplace(job.job_id, i).second) {
      throw Error(Errc::kInvalidJob, "duplicate job_id '" + job.job_id + "'");
    }
    check_arity(job);
  }

  std::vector<std::set<std::size_t>> succ(spec.jobs.size());
  std::vector<std::set<std::size_t>> pred(spec.jobs.size());
  for (const auto& e : spec.edges) {
    auto from = index.find(e.from);
    auto to = index.find(e.to);
    if (from == index.end() || to == index.end()) {
      throw Error(Errc::kDanglingEdge, "edge " + e.from + " -> " + e.to);
    }
    succ[from->second].insert(to->second);
    pred[to->second].insert(from->second);
  }

  std::map<std::string, std::size_t> producer;
  for (std::size_t i = 0; i < spec.jobs.size(); ++i) {
    for (const auto& name : spec.jobs[i].output_names) {
      if (spec.workflow_inputs.contains(name)) {
        throw Error(Errc::kDuplicateOutput,
                    "'" + name + "' of job '" + spec.jobs[i].job_id +
                        "' shadows a workflow input");
      }
      auto [it, fresh] = producer.emplace(name, i);
      if (!fresh) {
        throw Error(Errc::kDuplicateOutput,
                    "'" + name + "' produced by both '" + spec.jobs[it->second].job_id +
                        "' and '" + spec.jobs[i].job_id + "'");
      }
    }
  }

  // Kahn's algorithm; the ready set is ordered by job_id.
  std::vector<std::size_t> indegree(spec.jobs.size());
  std::priority_queue<std::pair<std::string, std::size_t>,
                      std::vector<std::pair<std::string, std::size_t>>, std::greater<>>
      ready;
  for (std::size_t i = 0; i < spec.jobs.size(); ++i) {
    indegree[i] = pred[i].size();
    if (indegree[i] == 0) ready.emplace(spec.jobs[i].job_id, i);
  }
  std::vector<std::string> order;
  while (!ready.empty()) {
    auto [id, i] = ready.top();
    ready.pop();
    order.push_back(id);
    for (std::size_t s : succ[i]) {
      if (--indegree[s] == 0) ready.emplace(spec.jobs[s].job_id, s);
    }
  }
  if (order.size() != spec.jobs.size()) {
    std::string members;
    for (std::size_t i = 0; i < spec.jobs.size(); ++i) {
      if (indegree[i] > 0) members += (members.empty() ? "" : ", ") + spec.jobs[i].job_id;
    }
    throw Error(Errc::kCycleDetected, "jobs on or behind a cycle: " + members);
  }

  // Every consumed name must come from the workflow inputs or an ancestor.
  std::vector<std::set<std::size_t>> ancestors(spec.jobs.size());
  for (const auto& id : order) {
    std::size_t i = index.at(id);
    for (std::size_t p : pred[i]) {
      ancestors[i].insert(p);
      ancestors[i].insert(ancestors[p].begin(), ancestors[p].end());
    }
  }
  for (std::size_t i = 0; i < spec.jobs.size(); ++i) {
    for (const auto& name : spec.jobs[i].input_names) {
      if (spec.workflow_inputs.contains(name)) continue;
      auto it = producer.find(name);
      if (it == producer.end() || !ancestors[i].contains(it->second)) {
        throw Error(Errc::kUnsatisfiedInput,
                    "job '" + spec.jobs[i].job_id + "' input '" + name + "'");
      }
    }
  }

  return ValidatedWorkflow(std::move(spec), std::move(order));
}

WorkflowSpec build_wordcount_workflow(Content input_text) {
  const std::string input(kWordcountInput);
  WorkflowSpec spec;
  spec.name = "wordcount";
  spec.jobs = {
      {"split", TaskKind::kSplit, {input, "part1", "part2"}, {input}, {"part1", "part2"}},
      {"analysis1", TaskKind::kCount, {"part1", "count1"}, {"part1"}, {"count1"}},
      {"analysis2", TaskKind::kCount, {"part2", "count2"}, {"part2"}, {"count2"}},
      {"merge", TaskKind::kMerge, {"count1", "count2", "total"}, {"count1", "count2"}, {"total"}},
  };
  spec.edges = {{"split", "analysis1"},
                {"split", "analysis2"},
                {"analysis1", "merge"},
                {"analysis2", "merge"}};
  spec.workflow_inputs.emplace(input, std::move(input_text));
  return spec;
}

// --- workflow files --------------------------------------------------------

namespace {

Content read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::kInvalidWorkflowFile, "cannot read " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

WorkflowSpec parse_workflow(std::string_view json_text,
                            const std::filesystem::path& base_dir) {
  try {
    auto doc = nlohmann::json::parse(json_text);
    WorkflowSpec spec;
    spec.name = doc.at("name").get<std::string>();
    for (const auto& j : doc.at("jobs")) {
      Job job;
      job.job_id = j.at("id").get<std::string>();
      job.task_kind = parse_task_kind(j.at("kind").get<std::string>());
      job.args = j.value("args", std::vector<std::string>{});
      job.input_names = j.value("inputs", std::vector<std::string>{});
      job.output_names = j.value("outputs", std::vector<std::string>{});
      spec.jobs.push_back(std::move(job));
    }
    for (const auto& e : doc.value("edges", nlohmann::json::array())) {
      if (!e.is_array() || e.size() != 2) {
        throw Error(Errc::kInvalidWorkflowFile, "edge must be [from, to]");
      }
      spec.edges.push_back({e[0].get<std::string>(), e[1].get<std::string>()});
    }
    const auto inputs = doc.value("inputs", nlohmann::json::object());
    for (const auto& [name, src] : inputs.items()) {
      if (src.is_string()) {
        spec.workflow_inputs[name] = src.get<std::string>();
      } else if (src.contains("text")) {
        spec.workflow_inputs[name] = src.at("text").get<std::string>();
      } else {
        std::filesystem::path p = src.at("path").get<std::string>();
        spec.workflow_inputs[name] = read_file(p.is_absolute() ? p : base_dir / p);
      }
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kInvalidWorkflowFile, e.what());
  }
}

WorkflowSpec load_workflow_file(const std::filesystem::path& path) {
  return parse_workflow(read_file(path), path.parent_path());
}

// --- kernels ---------------------------------------------------------------

namespace {

struct Span {
  std::size_t begin;
  std::size_t end;
};

std::vector<Span> words_of(std::string_view text) {
  std::vector<Span> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i == text.size()) break;
    std::size_t b = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    words.push_back({b, i});
  }
  return words;
}

}  // namespace

std::pair<Content, Content> kernel_split(std::string_view text) {
  const auto words = words_of(text);
  const std::size_t n = words.size();
  if (n == 0) return {Content(), Content()};

  // Work in doubled coordinates so the midpoint stays integral. Cut k puts
  // words [0, k) first; its gap spans [end of word k-1, start of word k].
  const std::size_t mid2 = text.size();
  std::size_t best_k = 0;
  std::size_t best_dist = static_cast<std::size_t>(-1);
  for (std::size_t k = 0; k <= n; ++k) {
    std::size_t lo2 = 2 * (k == 0 ? 0 : words[k - 1].end);
    std::size_t hi2 = 2 * (k == n ? text.size() : words[k].begin);
    std::size_t dist = mid2 < lo2 ? lo2 - mid2 : (mid2 > hi2 ? mid2 - hi2 : 0);
    if (dist <= best_dist) {  // later cut wins ties
      best_dist = dist;
      best_k = k;
    }
  }

  Content first;
  Content second;
  if (best_k > 0) {
    first = Content(text.substr(words[0].begin, words[best_k - 1].end - words[0].begin));
  }
  if (best_k < n) {
    second = Content(
        text.substr(words[best_k].begin, words[n - 1].end - words[best_k].begin));
  }
  return {std::move(first), std::move(second)};
}

std::int64_t kernel_count(std::string_view text) {
  std::int64_t count = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++count;
    }
  }
  return count;
}

std::int64_t kernel_merge(std::span<const std::int64_t> counts) {
  std::int64_t total = 0;
  for (std::int64_t c : counts) {
    if (c < 0) throw Error(Errc::kNegativeCount, std::to_string(c));
    total += c;
  }
  return total;
}

// --- generic transforms ----------------------------------------------------

TransformRegistry::TransformRegistry() {
  add("identity", [](std::span<const std::string>, std::span<const Content> inputs,
                     std::size_t outputs) {
    std::vector<Content> out(outputs);
    for (std::size_t i = 0; i < outputs && i < inputs.size(); ++i) out[i] = inputs[i];
    return out;
  });
  add("concat", [](std::span<const std::string>, std::span<const Content> inputs,
                   std::size_t outputs) {
    Content joined;
    for (const auto& in : inputs) joined += in;
    return std::vector<Content>(outputs, joined);
  });
  add("upper", [](std::span<const std::string>, std::span<const Content> inputs,
                  std::size_t outputs) {
    std::vector<Content> out(outputs);
    for (std::size_t i = 0; i < outputs && i < inputs.size(); ++i) {
      out[i] = inputs[i];
      for (char& c : out[i]) {
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
      }
    }
    return out;
  });
}

void TransformRegistry::add(std::string name, Transform fn) {
  transforms_[std::move(name)] = std::move(fn);
}

const Transform* TransformRegistry::find(std::string_view name) const {
  auto it = transforms_.find(name);
  return it == transforms_.end() ? nullptr : &it->second;
}

}  // namespace provrepeat::wfmodel
