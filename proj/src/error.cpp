#include "wbound/error.hpp"

namespace wbound {

const char* error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::AsymmetricMatrix: return "AsymmetricMatrix";
    case ErrorCode::NegativeDistance: return "NegativeDistance";
    case ErrorCode::ZeroOffDiagonal: return "ZeroOffDiagonal";
    case ErrorCode::TriangleViolation: return "TriangleViolation";
    case ErrorCode::DuplicatePosition: return "DuplicatePosition";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::EmptyProduct: return "EmptyProduct";
    case ErrorCode::InvalidWeight: return "InvalidWeight";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NegativeTime: return "NegativeTime";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::InvalidGenerator: return "InvalidGenerator";
    case ErrorCode::InvalidTransitionMatrix: return "InvalidTransitionMatrix";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::RowSumNotZero: return "RowSumNotZero";
    case ErrorCode::NotOptimalInput: return "NotOptimalInput";
    case ErrorCode::SamePair: return "SamePair";
    case ErrorCode::SingleState: return "SingleState";
    case ErrorCode::TooManyStates: return "TooManyStates";
    case ErrorCode::BadAlpha: return "BadAlpha";
    case ErrorCode::InvalidPartition: return "InvalidPartition";
    case ErrorCode::InvalidAggregation: return "InvalidAggregation";
    case ErrorCode::RateUnavailable: return "RateUnavailable";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::InvalidBox: return "InvalidBox";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) noexcept { return code == ErrorCode::NumericalFailure; }

Error::Error(ErrorCode code, const std::string& message, std::vector<std::size_t> indices)
    : std::runtime_error(std::string(error_name(code)) + ": " + message),
      code_(code),
      indices_(std::move(indices)) {}

}  // namespace wbound
