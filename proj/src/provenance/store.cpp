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

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "provrepeat/error.hpp"
#include "provrepeat/provenance.hpp"

namespace provrepeat::provenance {

namespace {

[[noreturn]] void io_failure(const std::string& what) {
  throw Error(Errc::kStorageFailure, what + ": " + std::strerror(errno));
}

}  // namespace

ProvenanceStore::ProvenanceStore(std::filesystem::path path) : path_(std::move(path)) {
  fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) io_failure("open " + path_.string());
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    int saved = errno;
    ::close(fd_);
    fd_ = -1;
    if (saved == EWOULDBLOCK) {
      throw Error(Errc::kStoreLocked, path_.string() + " is in use by another process");
    }
    errno = saved;
    io_failure("flock " + path_.string());
  }
  try {
    rebuild_index();
  } catch (...) {
    ::close(fd_);
    fd_ = -1;
    throw;
  }
}

ProvenanceStore::~ProvenanceStore() {
  if (fd_ >= 0) ::close(fd_);  // releases the flock
}

std::string ProvenanceStore::read_at(std::uint64_t offset, std::uint64_t length) const {
  std::string buf(length, '\0');
  std::uint64_t done = 0;
  while (done < length) {
    ssize_t n = ::pread(fd_, buf.data() + done, length - done,
                        static_cast<off_t>(offset + done));
    if (n < 0) {
      if (errno == EINTR) continue;
      io_failure("read " + path_.string());
    }
    if (n == 0) throw Error(Errc::kStorageFailure, "unexpected end of " + path_.string());
    done += static_cast<std::uint64_t>(n);
  }
  return buf;
}

void ProvenanceStore::rebuild_index() {
  struct stat st {};
  if (::fstat(fd_, &st) != 0) io_failure("stat " + path_.string());
  const auto size = static_cast<std::uint64_t>(st.st_size);
  const std::string content = read_at(0, size);

  index_.clear();
  std::uint64_t pos = 0;
  std::size_t line_no = 0;
  while (pos < size) {
    auto nl = content.find('\n', pos);
    if (nl == std::string::npos) {
      // Torn final append; drop it so the next record starts on a clean line.
      if (::ftruncate(fd_, static_cast<off_t>(pos)) != 0) {
        io_failure("truncate " + path_.string());
      }
      break;
    }
    ++line_no;
    std::string_view line(content.data() + pos, nl - pos);
    if (!line.empty()) {
      auto p = [&] {
        try {
          return decode_record(line);
        } catch (const Error& e) {
          throw Error(Errc::kStorageFailure,
                      path_.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
      }();
      IndexEntry entry{pos, nl - pos,
                       {p.wf_id, p.workflow.spec().name, p.trace.status,
                        p.workflow.spec().jobs.size()}};
      if (!index_.emplace(p.wf_id, std::move(entry)).second) {
        throw Error(Errc::kStorageFailure, path_.string() + ":" + std::to_string(line_no) +
                                               ": duplicate wfID " +
                                               std::to_string(p.wf_id.value));
      }
    }
    pos = nl + 1;
  }
  end_offset_ = pos;
}

void ProvenanceStore::store_provenance(const CloudAwareProvenance& p) {
  check_provenance(p);
  std::string line = encode_record(p);
  line.push_back('\n');

  std::lock_guard lock(mu_);
  if (index_.contains(p.wf_id)) {
    throw Error(Errc::kDuplicateWfId, std::to_string(p.wf_id.value));
  }
  std::size_t done = 0;
  while (done < line.size()) {
    ssize_t n = ::write(fd_, line.data() + done, line.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      io_failure("append " + path_.string());
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) io_failure("fsync " + path_.string());

  IndexEntry entry{end_offset_, line.size() - 1,
                   {p.wf_id, p.workflow.spec().name, p.trace.status,
                    p.workflow.spec().jobs.size()}};
  index_.emplace(p.wf_id, std::move(entry));
  end_offset_ += line.size();
}

CloudAwareProvenance ProvenanceStore::get_provenance(WfId wf_id) const {
  std::lock_guard lock(mu_);
  auto it = index_.find(wf_id);
  if (it == index_.end()) {
    throw Error(Errc::kUnknownWfId, std::to_string(wf_id.value));
  }
  return decode_record(read_at(it->second.offset, it->second.length));
}

std::vector<WorkflowSummary> ProvenanceStore::list_workflows() const {
  std::lock_guard lock(mu_);
  std::vector<WorkflowSummary> out;
  out.reserve(index_.size());
  for (const auto& [id, entry] : index_) out.push_back(entry.summary);
  return out;
}

bool ProvenanceStore::contains(WfId wf_id) const {
  std::lock_guard lock(mu_);
  return index_.contains(wf_id);
}

std::optional<WfId> ProvenanceStore::max_wf_id() const {
  std::lock_guard lock(mu_);
  if (index_.empty()) return std::nullopt;
  return index_.rbegin()->first;
}

}  // namespace provrepeat::provenance
