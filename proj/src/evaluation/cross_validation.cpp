#include "evaluation/cross_validation.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include "core/error.hpp"
#include "core/random.hpp"
#include "evaluation/metrics.hpp"
#include "regression/feature_matrix.hpp"

namespace hwenergy::evaluation {
namespace {

void check_k(std::size_t n, int k) {
  if (k < 2) fail(ErrorCode::InvalidArgument, "k must be >= 2");
  if (n < static_cast<std::size_t>(k))
    fail(ErrorCode::TooFewSamples, std::to_string(n) + " samples cannot fill " + std::to_string(k) + " folds");
}

std::vector<Fold> deal(const std::vector<std::size_t>& order, int k) {
  std::vector<Fold> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < order.size(); ++i) folds[i % folds.size()].push_back(order[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

}  // namespace

std::vector<Fold> kfold_split(std::size_t n, int k, std::uint64_t seed) {
  check_k(n, k);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  return deal(order, k);
}

std::vector<Fold> kfold_split_stratified(const Dataset& dataset, int k, std::uint64_t seed) {
  check_k(dataset.size(), k);
  std::map<SequenceClass, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < dataset.size(); ++i) by_class[dataset[i].class_label].push_back(i);
  Rng rng(seed);
  std::vector<std::size_t> order;
  for (auto& [cls, idx] : by_class) {
    rng.shuffle(idx);
    order.insert(order.end(), idx.begin(), idx.end());
  }
  return deal(order, k);
}

EvaluationReport cross_validate(const Dataset& dataset, FeatureSetKind kind, Regressor regressor,
                                EnergyTarget target, const CrossValidationOptions& opts) {
  const auto data = regression::training_data(dataset, kind, target);
  const auto folds = opts.stratify ? kfold_split_stratified(dataset, opts.k, opts.seed)
                                   : kfold_split(dataset.size(), opts.k, opts.seed);
  const auto n = dataset.size();
  const Eigen::MatrixXd& x = data.features.values();

  EvaluationReport report;
  report.regressor = regressor;
  report.kind = kind;
  report.target = target;
  report.seed = opts.seed;
  report.k = opts.k;
  report.predictions.resize(n);

  std::vector<int> fold_of(n, -1);
  for (std::size_t f = 0; f < folds.size(); ++f)
    for (auto i : folds[f]) fold_of[i] = static_cast<int>(f);

  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<Eigen::Index> train_idx;
    for (std::size_t i = 0; i < n; ++i)
      if (fold_of[i] != static_cast<int>(f)) train_idx.push_back(static_cast<Eigen::Index>(i));
    Eigen::MatrixXd xt(static_cast<Eigen::Index>(train_idx.size()), x.cols());
    Eigen::VectorXd yt(static_cast<Eigen::Index>(train_idx.size()));
    for (std::size_t r = 0; r < train_idx.size(); ++r) {
      xt.row(static_cast<Eigen::Index>(r)) = x.row(train_idx[r]);
      yt[static_cast<Eigen::Index>(r)] = data.targets[train_idx[r]];
    }

    auto train_opts = opts.train;
    train_opts.gpr.seed = derive_seed(opts.seed, f);
    std::vector<double> measured, predicted;
    try {
      const auto model = regression::train_model(regression::FeatureMatrix(kind, std::move(xt)), yt,
                                                 regressor, train_opts);
      for (auto i : folds[f]) {
        const auto row = dataset[i].feature_row(kind);
        const double p = regression::predict(model, row);
        const double m = data.targets[static_cast<Eigen::Index>(i)];
        report.predictions[i] = {dataset[i].id, static_cast<int>(f), m, p};
        measured.push_back(m);
        predicted.push_back(p);
      }
      report.per_fold.push_back({static_cast<int>(f), mape(measured, predicted), folds[f].size()});
    } catch (const Error& e) {
      fail(e.code(), "fold " + std::to_string(f) + ": " + e.what());
    }
  }

  std::vector<double> measured(n), predicted(n);
  for (std::size_t i = 0; i < n; ++i) {
    measured[i] = report.predictions[i].measured;
    predicted[i] = report.predictions[i].predicted;
  }
  report.mape = mape(measured, predicted);
  try {
    report.pcc = pearson(predicted, measured);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ConstantInput) throw;
  }
  return report;
}

}  // namespace hwenergy::evaluation
