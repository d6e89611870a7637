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

#include <stdexcept>
#include <string>
#include <string_view>

namespace provrepeat {

enum class Errc {
  // cloudsim
  kUnknownFlavor,
  kUnknownImage,
  kCapacityExceeded,
  kDuplicateNodename,
  kAddressUnavailable,
  kUnknownVm,
  kAlreadyReleased,
  kNoMatchingFlavor,
  kInvalidCatalog,
  // wfmodel
  kCycleDetected,
  kDanglingEdge,
  kUnsatisfiedInput,
  kDuplicateOutput,
  kInvalidJob,
  kNegativeCount,
  kInvalidWorkflowFile,
  // engine
  kEmptyCluster,
  kInvalidCluster,
  kUnknownWfId,
  kNotPending,
  kNotYetRun,
  // provenance
  kStaleMapping,
  kAmbiguousIp,
  kInvalidProvenance,
  kDuplicateWfId,
  kStorageFailure,
  kStoreLocked,
  // repeat
  kOriginalFailed,
  kInconsistentMapping,
  kJobSetMismatch,
  kOutputSetMismatch,
  kRunNotSucceeded,
};

std::string_view to_string(Errc code) noexcept;

// Coarse classes drive the CLI exit code.
enum class ErrorClass { kDomain, kStorage };

ErrorClass error_class(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace provrepeat
