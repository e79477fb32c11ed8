// Copyright 2026 The normconflict Authors.
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

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace normconflict {

enum class ErrorCode {
  kIoFailure,
  kMalformedRecord,
  kDuplicateId,
  kUnknownLabel,
  kDimensionMismatch,
  kEmptyVocabulary,
  kMalformedNumber,
  kNoEmbeddableTokens,
  kEmptyPairSet,
  kDegenerateData,
  kModeMismatch,
  kVersionMismatch,
  kMalformedModel,
  kInsufficientData,
  kLengthMismatch,
  kInvalidArgument,
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::kMalformedNumber: return "MalformedNumber";
    case ErrorCode::kNoEmbeddableTokens: return "NoEmbeddableTokens";
    case ErrorCode::kEmptyPairSet: return "EmptyPairSet";
    case ErrorCode::kDegenerateData: return "DegenerateData";
    case ErrorCode::kModeMismatch: return "ModeMismatch";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kMalformedModel: return "MalformedModel";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// All library failures are reported through this exception. `line()` is set
// for errors that point at a 1-based line of an input file.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(Format(code, message, line)),
        code_(code),
        line_(line) {}

  ErrorCode code() const { return code_; }
  std::optional<std::size_t> line() const { return line_; }

 private:
  static std::string Format(ErrorCode code, const std::string& message,
                            std::optional<std::size_t> line) {
    std::string out(ErrorCodeName(code));
    if (line) out += " (line " + std::to_string(*line) + ")";
    if (!message.empty()) out += ": " + message;
    return out;
  }

  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace normconflict
