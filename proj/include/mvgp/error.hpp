/*
 * Copyright 2026 The mvgp Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MVGP_ERROR_HPP_
#define MVGP_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvgp {

enum class ErrorCode {
  kNotPositiveDefinite,
  kNonSquare,
  kDimensionMismatch,
  kLabelOutOfRange,
  kInvalidAlphaEps,
  kNonPositiveVariance,
  kNonPositiveWeight,
  kConfidenceOutOfRange,
  kEmptyInput,
  kMissingFile,
  kRaggedRows,
  kNonNumericCell,
  kNonFiniteLoss,
  kMismatchedBatch,
  kInvalidArgument,
};

// Coarse grouping used to pick the process exit code of the CLI.
enum class ErrorCategory { kConfiguration, kData, kNumerical };

std::string_view error_code_name(ErrorCode code);
ErrorCategory category_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kNonSquare: return "NonSquare";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::kInvalidAlphaEps: return "InvalidAlphaEps";
    case ErrorCode::kNonPositiveVariance: return "NonPositiveVariance";
    case ErrorCode::kNonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::kConfidenceOutOfRange: return "ConfidenceOutOfRange";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kRaggedRows: return "RaggedRows";
    case ErrorCode::kNonNumericCell: return "NonNumericCell";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kMismatchedBatch: return "MismatchedBatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

inline ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotPositiveDefinite:
    case ErrorCode::kNonPositiveVariance:
    case ErrorCode::kNonFiniteLoss:
      return ErrorCategory::kNumerical;
    case ErrorCode::kLabelOutOfRange:
    case ErrorCode::kMissingFile:
    case ErrorCode::kRaggedRows:
    case ErrorCode::kNonNumericCell:
    case ErrorCode::kMismatchedBatch:
    case ErrorCode::kEmptyInput:
    case ErrorCode::kConfidenceOutOfRange:
      return ErrorCategory::kData;
    default:
      return ErrorCategory::kConfiguration;
  }
}

// Throws Error(code, message) unless `condition` holds.
inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace mvgp

#endif  // MVGP_ERROR_HPP_
