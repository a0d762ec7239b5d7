#include "regression/feature_matrix.hpp"

#include <cmath>

#include "core/error.hpp"

namespace hwenergy::regression {

Eigen::VectorXd Normalization::apply(std::span<const double> raw) const {
  if (static_cast<Eigen::Index>(raw.size()) != means.size())
    fail(ErrorCode::DimensionMismatch, "feature row has " + std::to_string(raw.size()) +
                                           " entries, expected " + std::to_string(means.size()));
  Eigen::VectorXd out(means.size());
  for (Eigen::Index j = 0; j < means.size(); ++j) out[j] = (raw[static_cast<std::size_t>(j)] - means[j]) / scales[j];
  return out;
}

Eigen::MatrixXd Normalization::apply(const Eigen::MatrixXd& raw) const {
  if (raw.cols() != means.size()) fail(ErrorCode::DimensionMismatch, "feature matrix width mismatch");
  return (raw.rowwise() - means.transpose()).array().rowwise() / scales.transpose().array();
}

Normalization Normalization::after(const Normalization& inner) const {
  return {inner.means.array() + inner.scales.array() * means.array(),
          inner.scales.array() * scales.array()};
}

Normalization fit_normalization(const Eigen::MatrixXd& values) {
  const Eigen::Index n = values.rows();
  Normalization norm{values.colwise().mean().transpose(), Eigen::VectorXd::Ones(values.cols())};
  if (n < 2) return norm;
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    const double var = (values.col(j).array() - norm.means[j]).square().sum() / static_cast<double>(n - 1);
    const double sd = std::sqrt(var);
    norm.scales[j] = (sd > 0.0 && std::isfinite(sd)) ? sd : 1.0;
  }
  return norm;
}

FeatureMatrix::FeatureMatrix(FeatureSetKind kind, Eigen::MatrixXd values,
                             std::optional<Normalization> normalization)
    : kind_(kind), values_(std::move(values)), normalization_(std::move(normalization)) {
  const auto dim = static_cast<Eigen::Index>(feature_dimension(kind_));
  if (values_.cols() != dim)
    fail(ErrorCode::DimensionMismatch, std::string(to_string(kind_)) + " features have " +
                                           std::to_string(dim) + " columns, got " +
                                           std::to_string(values_.cols()));
  if (values_.rows() < 1) fail(ErrorCode::DimensionMismatch, "feature matrix has no rows");
  if (!values_.allFinite()) fail(ErrorCode::InvalidArgument, "feature matrix contains non-finite values");
  if (normalization_) {
    if (normalization_->means.size() != dim || normalization_->scales.size() != dim)
      fail(ErrorCode::DimensionMismatch, "normalization width does not match features");
    if ((normalization_->scales.array() <= 0.0).any())
      fail(ErrorCode::InvalidArgument, "normalization scales must be > 0");
  }
}

Eigen::VectorXd FeatureMatrix::to_value_space(std::span<const double> raw) const {
  if (normalization_) return normalization_->apply(raw);
  if (static_cast<Eigen::Index>(raw.size()) != cols())
    fail(ErrorCode::DimensionMismatch, "feature row has " + std::to_string(raw.size()) +
                                           " entries, expected " + std::to_string(cols()));
  return Eigen::Map<const Eigen::VectorXd>(raw.data(), cols());
}

FeatureMatrix standardize(const FeatureMatrix& features) {
  auto norm = fit_normalization(features.values());
  auto values = norm.apply(features.values());
  return FeatureMatrix(features.kind(), std::move(values), std::move(norm));
}

FeatureMatrix feature_matrix(const Dataset& dataset, FeatureSetKind kind) {
  dataset.require(kind, std::nullopt);
  const auto dim = static_cast<Eigen::Index>(feature_dimension(kind));
  Eigen::MatrixXd x(static_cast<Eigen::Index>(dataset.size()), dim);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto row = dataset[i].feature_row(kind);
    for (Eigen::Index j = 0; j < dim; ++j) x(static_cast<Eigen::Index>(i), j) = row[static_cast<std::size_t>(j)];
  }
  return FeatureMatrix(kind, std::move(x));
}

TrainingData training_data(const Dataset& dataset, FeatureSetKind kind, EnergyTarget target) {
  if (dataset.empty()) fail(ErrorCode::EmptyTrainingSet, "dataset is empty");
  dataset.require(kind, target);
  auto features = feature_matrix(dataset, kind);
  Eigen::VectorXd y(static_cast<Eigen::Index>(dataset.size()));
  std::vector<std::string> ids;
  ids.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = dataset[i].target_joules(target);
    ids.push_back(dataset[i].id);
  }
  return {std::move(features), std::move(y), std::move(ids)};
}

}  // namespace hwenergy::regression
