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

#include "provrepeat/error.hpp"

namespace provrepeat {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::kUnknownFlavor: return "UnknownFlavor";
    case Errc::kUnknownImage: return "UnknownImage";
    case Errc::kCapacityExceeded: return "CapacityExceeded";
    case Errc::kDuplicateNodename: return "DuplicateNodename";
    case Errc::kAddressUnavailable: return "AddressUnavailable";
    case Errc::kUnknownVm: return "UnknownVm";
    case Errc::kAlreadyReleased: return "AlreadyReleased";
    case Errc::kNoMatchingFlavor: return "NoMatchingFlavor";
    case Errc::kInvalidCatalog: return "InvalidCatalog";
    case Errc::kCycleDetected: return "CycleDetected";
    case Errc::kDanglingEdge: return "DanglingEdge";
    case Errc::kUnsatisfiedInput: return "UnsatisfiedInput";
    case Errc::kDuplicateOutput: return "DuplicateOutput";
    case Errc::kInvalidJob: return "InvalidJob";
    case Errc::kNegativeCount: return "NegativeCount";
    case Errc::kInvalidWorkflowFile: return "InvalidWorkflowFile";
    case Errc::kEmptyCluster: return "EmptyCluster";
    case Errc::kInvalidCluster: return "InvalidCluster";
    case Errc::kUnknownWfId: return "UnknownWfId";
    case Errc::kNotPending: return "NotPending";
    case Errc::kNotYetRun: return "NotYetRun";
    case Errc::kStaleMapping: return "StaleMapping";
    case Errc::kAmbiguousIp: return "AmbiguousIp";
    case Errc::kInvalidProvenance: return "InvalidProvenance";
    case Errc::kDuplicateWfId: return "DuplicateWfId";
    case Errc::kStorageFailure: return "StorageFailure";
    case Errc::kStoreLocked: return "StoreLocked";
    case Errc::kOriginalFailed: return "OriginalFailed";
    case Errc::kInconsistentMapping: return "InconsistentMapping";
    case Errc::kJobSetMismatch: return "JobSetMismatch";
    case Errc::kOutputSetMismatch: return "OutputSetMismatch";
    case Errc::kRunNotSucceeded: return "RunNotSucceeded";
  }
  return "Unknown";
}

ErrorClass error_class(Errc code) noexcept {
  switch (code) {
    case Errc::kStorageFailure:
    case Errc::kStoreLocked:
      return ErrorClass::kStorage;
    default:
      return ErrorClass::kDomain;
  }
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace provrepeat
