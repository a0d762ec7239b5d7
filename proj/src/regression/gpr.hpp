#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "regression/feature_matrix.hpp"

namespace hwenergy::regression {

struct GprHyperparams {
  double length_scale = 1.0;     // l > 0
  double signal_variance = 1.0;  // σf² >= 0 (0 collapses the model onto its linear basis)
  double noise_variance = 0.0;   // σn² >= 0

  // Throws InvalidArgument on non-finite or out-of-range values, or when
  // σf² + σn² == 0 (no covariance at all).
  void validate() const;
  bool operator==(const GprHyperparams&) const = default;
};

// σf²·exp(-|xs - xt| / l) + σn²·[same_index], Euclidean distance.
double kernel_exponential(std::span<const double> xs, std::span<const double> xt,
                          const GprHyperparams& hyper, bool same_index);

// Covariance of the training inputs, noise on the diagonal, no jitter.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& inputs, const GprHyperparams& hyper);

// Gaussian log marginal likelihood of the residual y - Hγ̂, where γ̂ is the
// generalized least-squares fit of the basis H (one column per basis
// function, possibly none) under K. Uses the raw features as given.
// Errors: NotPositiveDefinite when K fails Cholesky even after jitter;
// RankDeficient when HᵀK⁻¹H is singular.
double log_marginal_likelihood(const GprHyperparams& hyper, const FeatureMatrix& features,
                               const Eigen::VectorXd& targets, const Eigen::MatrixXd& basis);

struct GprOptions {
  int restarts = 5;
  std::uint64_t seed = 42;
  int max_iterations = 500;
  double tolerance = 1e-8;
};

struct GprPrediction {
  double mean = 0.0;      // joules
  double variance = 0.0;  // joules², posterior variance of the latent function
};

// Exponential-kernel GP on top of the linear basis h(z) = [1, z], where z is
// the standardized feature row. Immutable once built.
class GprModel {
 public:
  GprModel(FeatureSetKind kind, GprHyperparams hyper, Eigen::VectorXd basis_coefficients,
           Eigen::MatrixXd training_inputs, Eigen::VectorXd dual_weights,
           Normalization normalization, double jitter);

  FeatureSetKind kind() const noexcept { return kind_; }
  const GprHyperparams& hyper() const noexcept { return hyper_; }
  const Eigen::VectorXd& basis_coefficients() const noexcept { return gamma_; }
  const Eigen::MatrixXd& training_inputs() const noexcept { return inputs_; }
  const Eigen::VectorXd& dual_weights() const noexcept { return alpha_; }
  const Normalization& normalization() const noexcept { return normalization_; }
  double jitter() const noexcept { return jitter_; }

  GprPrediction predict(std::span<const double> raw_row) const;

 private:
  FeatureSetKind kind_;
  GprHyperparams hyper_;
  Eigen::VectorXd gamma_;
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd alpha_;
  Normalization normalization_;
  double jitter_;
  // Factorizations backing the predictive variance.
  Eigen::MatrixXd chol_lower_;
  Eigen::MatrixXd whitened_basis_;  // L⁻¹H
  Eigen::LLT<Eigen::MatrixXd> basis_gram_;
};

// Conditions the GP on the data for fixed hyperparameters: standardizes the
// features, fits γ by generalized least squares and precomputes
// K⁻¹(y - Hγ).
GprModel condition_gpr(const FeatureMatrix& features, const Eigen::VectorXd& targets,
                       const GprHyperparams& hyper);

// Maximizes the log marginal likelihood over (log l, log σf², log σn²) with
// Nelder-Mead from `restarts` seeded starts, then conditions on the data.
// Errors: DimensionMismatch (fewer than 3 rows, target length),
// OptimizationDiverged.
GprModel fit_gpr(const FeatureMatrix& features, const Eigen::VectorXd& targets,
                 const GprOptions& opts = {});

GprPrediction predict_gpr(const GprModel& model, std::span<const double> raw_row);

// Linear basis [1, z] for standardized inputs.
Eigen::MatrixXd linear_basis(const Eigen::MatrixXd& standardized_inputs);

}  // namespace hwenergy::regression
