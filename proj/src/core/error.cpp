#include "core/error.hpp"

namespace hwenergy {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::MissingEvent: return "MissingEvent";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::NonNumericTotal: return "NonNumericTotal";
    case ErrorCode::MissingCounter: return "MissingCounter";
    case ErrorCode::NonNumericValue: return "NonNumericValue";
    case ErrorCode::NegativeEnergy: return "NegativeEnergy";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::ZeroMean: return "ZeroMean";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::RowParseError: return "RowParseError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::OptimizationDiverged: return "OptimizationDiverged";
    case ErrorCode::ZeroMeasurement: return "ZeroMeasurement";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ConstantInput: return "ConstantInput";
    case ErrorCode::MissingFeature: return "MissingFeature";
    case ErrorCode::CodecLeak: return "CodecLeak";
    case ErrorCode::ConstantPredictions: return "ConstantPredictions";
    case ErrorCode::IdMismatch: return "IdMismatch";
    case ErrorCode::NonPositiveAnchorPrediction: return "NonPositiveAnchorPrediction";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ModelFormat: return "ModelFormat";
  }
  return "Unknown";
}

}  // namespace hwenergy
