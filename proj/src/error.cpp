#include "sedkit/error.hpp"

namespace sedkit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFileNotFound: return "FileNotFound";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kInvalidPolicy: return "InvalidPolicy";
    case ErrorCode::kEmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidHyperparameter: return "InvalidHyperparameter";
    case ErrorCode::kKTooLarge: return "KTooLarge";
    case ErrorCode::kZeroVectorsOnly: return "ZeroVectorsOnly";
    case ErrorCode::kRowCountMismatch: return "RowCountMismatch";
    case ErrorCode::kRaggedDimensions: return "RaggedDimensions";
    case ErrorCode::kUnknownMessageId: return "UnknownMessageId";
    case ErrorCode::kNoSupportedTokens: return "NoSupportedTokens";
    case ErrorCode::kEmptyGraph: return "EmptyGraph";
    case ErrorCode::kPartitionMismatch: return "PartitionMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kUnlabeledCorpus: return "UnlabeledCorpus";
    case ErrorCode::kCoverageMismatch: return "CoverageMismatch";
    case ErrorCode::kDuplicateName: return "DuplicateName";
    case ErrorCode::kUnknownDetector: return "UnknownDetector";
    case ErrorCode::kUnknownDataset: return "UnknownDataset";
    case ErrorCode::kLifecycleViolation: return "LifecycleViolation";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace sedkit
