#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shiftscope {

enum class ErrorCode {
  kInvalidInput,
  kSchemaMismatch,
  kTooFewDistinctValues,
  kMissingAxis,
  kTableTooLarge,
  kTooManyCandidates,
  kSingularConfusion,
  kDegenerateKernel,
  kMissingTruth,
  kEmptyCell,
  kRowCountMismatch,
  kMalformedRow,
  kFileNotFound,
  kTrainingFailure,
};

/// Upper-snake name used on the command line, e.g. "SCHEMA_MISMATCH".
std::string_view error_category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view category() const noexcept { return error_category(code_); }

 private:
  ErrorCode code_;
};

}  // namespace shiftscope
