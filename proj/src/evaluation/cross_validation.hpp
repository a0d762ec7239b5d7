#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/types.hpp"
#include "regression/model_io.hpp"

namespace hwenergy::evaluation {

using Fold = std::vector<std::size_t>;

// Seeded uniform shuffle dealt into k folds whose sizes differ by at most one.
// Errors: TooFewSamples (n < k), InvalidArgument (k < 2).
std::vector<Fold> kfold_split(std::size_t n, int k, std::uint64_t seed);

// Same size guarantee; each class label is shuffled separately and dealt
// round-robin so every fold sees every class in proportion.
std::vector<Fold> kfold_split_stratified(const Dataset& dataset, int k, std::uint64_t seed);

struct FoldResult {
  int fold_index = 0;
  double mape = 0.0;
  std::size_t n_samples = 0;
};

struct OutOfFoldPrediction {
  std::string id;
  int fold_index = 0;
  double measured = 0.0;
  double predicted = 0.0;
};

struct EvaluationReport {
  Regressor regressor = Regressor::Gpr;
  FeatureSetKind kind = FeatureSetKind::Valgrind13PE;
  EnergyTarget target = EnergyTarget::Hardware;
  std::uint64_t seed = 0;
  int k = 10;
  double mape = 0.0;          // pooled over all out-of-fold predictions
  std::optional<double> pcc;  // absent when the predictions are constant
  std::vector<FoldResult> per_fold;
  std::vector<OutOfFoldPrediction> predictions;  // dataset order
};

struct CrossValidationOptions {
  int k = 10;
  std::uint64_t seed = 42;
  bool stratify = false;
  regression::TrainOptions train;
};

// k-fold cross-validation: every fold is predicted by a model trained on the
// other k-1 folds. Errors: MissingFeature (listing ids), TooFewSamples, and
// training/prediction errors prefixed with the fold index.
EvaluationReport cross_validate(const Dataset& dataset, FeatureSetKind kind, Regressor regressor,
                                EnergyTarget target, const CrossValidationOptions& opts = {});

}  // namespace hwenergy::evaluation
