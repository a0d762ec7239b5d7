#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hwenergy {

// Every failure raised by the library carries one of these codes. The C API
// maps them one-to-one onto hwe_status values, so the order is part of the ABI.
enum class ErrorCode {
  InvalidArgument = 1,
  IoError,
  MissingEvent,
  MalformedHeader,
  NonNumericTotal,
  MissingCounter,
  NonNumericValue,
  NegativeEnergy,
  EmptySeries,
  ZeroMean,
  TooFewSamples,
  DuplicateId,
  SchemaViolation,
  RowParseError,
  InvariantViolation,
  RankDeficient,
  DimensionMismatch,
  NotPositiveDefinite,
  OptimizationDiverged,
  ZeroMeasurement,
  LengthMismatch,
  ConstantInput,
  MissingFeature,
  CodecLeak,
  ConstantPredictions,
  IdMismatch,
  NonPositiveAnchorPrediction,
  EmptyTrainingSet,
  InvalidSpec,
  ModelFormat,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace hwenergy
