#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sedkit {

enum class ErrorCode {
  kFileNotFound,
  kParseError,
  kSchemaError,
  kDuplicateId,
  kEmptyCorpus,
  kInvalidPolicy,
  kEmptyVocabulary,
  kDimensionMismatch,
  kInvalidArgument,
  kInvalidHyperparameter,
  kKTooLarge,
  kZeroVectorsOnly,
  kRowCountMismatch,
  kRaggedDimensions,
  kUnknownMessageId,
  kNoSupportedTokens,
  kEmptyGraph,
  kPartitionMismatch,
  kLengthMismatch,
  kEmptyInput,
  kUnlabeledCorpus,
  kCoverageMismatch,
  kDuplicateName,
  kUnknownDetector,
  kUnknownDataset,
  kLifecycleViolation,
  kConfigError,
  kIoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parse failure with the 1-based line number of the offending record.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorCode::kParseError, "line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace sedkit
