#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core/types.hpp"

namespace hwenergy::regression {

// Per-column affine map raw -> (raw - mean) / scale.
struct Normalization {
  Eigen::VectorXd means;
  Eigen::VectorXd scales;

  Eigen::VectorXd apply(std::span<const double> raw) const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& raw) const;
  // (this after inner): raw -> inner -> this, as one map.
  Normalization after(const Normalization& inner) const;
  bool operator==(const Normalization&) const = default;
};

// z-score statistics; the sample standard deviation is the scale, and
// constant columns (or a single row) get scale 1.
Normalization fit_normalization(const Eigen::MatrixXd& values);

// Samples in rows. When `normalization` is present, `values` were produced by
// it and models trained on this matrix accept raw rows.
class FeatureMatrix {
 public:
  // Throws DimensionMismatch unless cols == feature_dimension(kind) and rows >= 1.
  FeatureMatrix(FeatureSetKind kind, Eigen::MatrixXd values,
                std::optional<Normalization> normalization = std::nullopt);

  FeatureSetKind kind() const noexcept { return kind_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const std::optional<Normalization>& normalization() const noexcept { return normalization_; }
  Eigen::Index rows() const noexcept { return values_.rows(); }
  Eigen::Index cols() const noexcept { return values_.cols(); }

  // Maps a raw row into this matrix's value space.
  Eigen::VectorXd to_value_space(std::span<const double> raw) const;

 private:
  FeatureSetKind kind_;
  Eigen::MatrixXd values_;
  std::optional<Normalization> normalization_;
};

// Returns the z-scored matrix; its normalization records the (mean, scale)
// computed over `features.values()`.
FeatureMatrix standardize(const FeatureMatrix& features);

struct TrainingData {
  FeatureMatrix features;
  Eigen::VectorXd targets;
  std::vector<std::string> ids;
};

// Raw feature rows and energy targets of every record, in dataset order.
// Throws MissingFeature listing the offending ids.
TrainingData training_data(const Dataset& dataset, FeatureSetKind kind, EnergyTarget target);
FeatureMatrix feature_matrix(const Dataset& dataset, FeatureSetKind kind);

}  // namespace hwenergy::regression
