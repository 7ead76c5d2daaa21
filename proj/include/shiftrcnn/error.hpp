// Copyright 2026 The shiftrcnn Authors
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

namespace shiftrcnn {

enum class ErrorCode {
  InvalidArgument,
  // geometry
  DegenerateDepth,
  BehindCamera,
  // lift
  SingularSystem,
  NoValidSolution,
  // losses
  ZeroVector,
  NonPositive,
  // shiftnet
  UnfittedScaler,
  EmptyDataset,
  IoFailure,
  FormatVersionMismatch,
  // kitti io
  FieldCount,
  ParseError,
  RangeError,
  MissingP2,
  MissingScore,
  Degenerate,
  // eval
  EmptyGroundTruth,
  EmptyInput,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateDepth: return "DegenerateDepth";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NoValidSolution: return "NoValidSolution";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NonPositive: return "NonPositive";
    case ErrorCode::UnfittedScaler: return "UnfittedScaler";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::FormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::FieldCount: return "FieldCount";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::MissingP2: return "MissingP2";
    case ErrorCode::MissingScore: return "MissingScore";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorCode::EmptyInput: return "EmptyInput";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// what() without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace shiftrcnn
