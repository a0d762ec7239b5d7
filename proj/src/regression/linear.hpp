#pragma once

#include <optional>
#include <span>

#include <Eigen/Dense>

#include "regression/feature_matrix.hpp"

namespace hwenergy::regression {

struct LinearOptions {
  // Unset: on for Temporal (energy offset), off for the event-count models.
  std::optional<bool> intercept;
  // Constrain every coefficient to be >= 0 (the intercept stays free).
  bool nonnegative = false;
};

// Energy per unit of each feature (J per event, or W for the Temporal model),
// expressed in the value space of the training FeatureMatrix.
struct LinearModel {
  FeatureSetKind kind = FeatureSetKind::Valgrind13PE;
  Eigen::VectorXd coefficients;
  std::optional<double> intercept;
  std::optional<Normalization> normalization;

  bool operator==(const LinearModel&) const = default;
};

// Least squares on Σ (E_i - Ê_i)². Errors: DimensionMismatch (target length),
// RankDeficient (fewer rows than parameters, or a singular design such as a
// duplicated or constant feature).
LinearModel fit_linear(const FeatureMatrix& features, const Eigen::VectorXd& targets,
                       const LinearOptions& opts = {});

// Ê = Σ x_i e_i (+ intercept) for a raw feature row. Throws DimensionMismatch.
double predict_linear(const LinearModel& model, std::span<const double> raw_row);

bool default_intercept(FeatureSetKind kind) noexcept;

// Unconstrained least squares, x = argmin ||A x - b||. Normal equations when
// well conditioned, column-pivoting QR otherwise; RankDeficient when the
// numerical rank (relative threshold 1e-10) is below A.cols().
Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

// Lawson-Hanson active-set solve of min ||A x - b|| subject to x >= 0.
Eigen::VectorXd solve_nonnegative_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

}  // namespace hwenergy::regression
