#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace wbound {

enum class ErrorCode {
  // metric
  NotSquare,
  AsymmetricMatrix,
  NegativeDistance,
  ZeroOffDiagonal,
  TriangleViolation,
  DuplicatePosition,
  DisconnectedGraph,
  EmptyProduct,
  InvalidWeight,
  // markov
  DimensionMismatch,
  NegativeTime,
  IndexOutOfRange,
  InvalidDistribution,
  InvalidGenerator,
  InvalidTransitionMatrix,
  // lp / transport
  NumericalFailure,
  RowSumNotZero,
  NotOptimalInput,
  // curvature
  SamePair,
  SingleState,
  TooManyStates,
  // aggregation
  BadAlpha,
  InvalidPartition,
  InvalidAggregation,
  // bounds
  RateUnavailable,
  // models
  EmptySupport,
  InvalidBox,
  // model file / front-end
  ParseError,
  IoError,
  MissingField,
  InvalidArgument,
};

/// Stable identifier used on stderr and across the C API, e.g. "TriangleViolation".
const char* error_name(ErrorCode code) noexcept;

/// True for failures of the numerical machinery rather than of the inputs.
bool is_numerical(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<std::size_t> indices = {});

  ErrorCode code() const noexcept { return code_; }
  /// Offending 0-based indices, when the error names any (e.g. the triple of a
  /// triangle violation).
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  ErrorCode code_;
  std::vector<std::size_t> indices_;
};

}  // namespace wbound
