// Copyright 2026 The FedRisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
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

namespace fedrisk {

enum class ErrorCode {
  kDimensionMismatch,
  kZeroNormVector,
  kEmptySequence,
  kEmptyReferenceSet,
  kNonPositiveMaxDtw,
  kNonPositiveMaxDistance,
  kInvalidCoordinate,
  kAlphaOutOfRange,
  kUnknownFeature,
  kInsufficientSamples,
  kDegenerateAll,
  kTooFewSamples,
  kEmptyClusterUnrecoverable,
  kDegenerateClustering,
  kSingleClassData,
  kNonFiniteLoss,
  kFeatureMismatch,
  kNonFiniteInput,
  kZeroSigma,
  kMissingKey,
  kNoAcceptedUpdates,
  kNoEligibleClients,
  kMalformedRow,
  kNonNumericTiming,
  kEmptySessionAfterFiltering,
  kMissingGeoTable,
  kUnfittedParams,
  kEmptyPredictions,
  kUnsupportedFormat,
  kInvalidArgument,
  kIoError,
  kConfigError,
};

constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroNormVector: return "ZeroNormVector";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kEmptyReferenceSet: return "EmptyReferenceSet";
    case ErrorCode::kNonPositiveMaxDtw: return "NonPositiveMaxDtw";
    case ErrorCode::kNonPositiveMaxDistance: return "NonPositiveMaxDistance";
    case ErrorCode::kInvalidCoordinate: return "InvalidCoordinate";
    case ErrorCode::kAlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::kUnknownFeature: return "UnknownFeature";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kDegenerateAll: return "DegenerateAll";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kEmptyClusterUnrecoverable:
      return "EmptyClusterUnrecoverable";
    case ErrorCode::kDegenerateClustering: return "DegenerateClustering";
    case ErrorCode::kSingleClassData: return "SingleClassData";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kFeatureMismatch: return "FeatureMismatch";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kZeroSigma: return "ZeroSigma";
    case ErrorCode::kMissingKey: return "MissingKey";
    case ErrorCode::kNoAcceptedUpdates: return "NoAcceptedUpdates";
    case ErrorCode::kNoEligibleClients: return "NoEligibleClients";
    case ErrorCode::kMalformedRow: return "MalformedRow";
    case ErrorCode::kNonNumericTiming: return "NonNumericTiming";
    case ErrorCode::kEmptySessionAfterFiltering:
      return "EmptySessionAfterFiltering";
    case ErrorCode::kMissingGeoTable: return "MissingGeoTable";
    case ErrorCode::kUnfittedParams: return "UnfittedParams";
    case ErrorCode::kEmptyPredictions: return "EmptyPredictions";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

// All library failures are reported through this exception type. The code
// is stable and machine-checkable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " +
                           message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace fedrisk
