#include "regression/gpr.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "core/error.hpp"
#include "core/random.hpp"
#include "regression/linear.hpp"
#include "regression/nelder_mead.hpp"

namespace hwenergy::regression {
namespace {

constexpr int kJitterDoublings = 6;

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& x) {
  const Eigen::Index m = x.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = j + 1; i < m; ++i) {
      const double v = (x.row(i) - x.row(j)).norm();
      d(i, j) = v;
      d(j, i) = v;
    }
  return d;
}

Eigen::MatrixXd covariance_from_distances(const Eigen::MatrixXd& dist, const GprHyperparams& hyper) {
  Eigen::MatrixXd k = hyper.signal_variance * (-dist.array() / hyper.length_scale).exp();
  k.diagonal().array() += hyper.noise_variance;
  return k;
}

struct Factor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};

// Cholesky of K, retrying with 1e-10·trace(K)/M on the diagonal, doubled up
// to six times.
Factor factorize(const Eigen::MatrixXd& k) {
  Factor f;
  f.llt.compute(k);
  if (f.llt.info() == Eigen::Success) return f;
  const double base = 1e-10 * k.trace() / static_cast<double>(k.rows());
  if (base > 0.0 && std::isfinite(base)) {
    double jitter = base;
    for (int attempt = 0; attempt <= kJitterDoublings; ++attempt, jitter *= 2.0) {
      Eigen::MatrixXd kj = k;
      kj.diagonal().array() += jitter;
      f.llt.compute(kj);
      if (f.llt.info() == Eigen::Success) {
        f.jitter = jitter;
        return f;
      }
    }
  }
  fail(ErrorCode::NotPositiveDefinite, "kernel matrix is not positive definite even with jitter");
}

struct GlsFit {
  Eigen::VectorXd gamma;
  Eigen::MatrixXd whitened_basis;     // L⁻¹H
  Eigen::VectorXd whitened_residual;  // L⁻¹(y - Hγ)
};

// Generalized least squares of the basis under K = LLᵀ. All-zero basis
// columns (constant features after standardization) get a zero coefficient.
GlsFit generalized_least_squares(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::MatrixXd& basis,
                                 const Eigen::VectorXd& y) {
  GlsFit fit;
  const Eigen::VectorXd wy = llt.matrixL().solve(y);
  fit.gamma = Eigen::VectorXd::Zero(basis.cols());
  if (basis.cols() == 0) {
    fit.whitened_basis = Eigen::MatrixXd(y.size(), 0);
    fit.whitened_residual = wy;
    return fit;
  }
  fit.whitened_basis = llt.matrixL().solve(basis);

  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < basis.cols(); ++j)
    if (basis.col(j).squaredNorm() > 0.0) active.push_back(j);
  if (!active.empty()) {
    Eigen::MatrixXd a(basis.rows(), static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) a.col(static_cast<Eigen::Index>(k)) = fit.whitened_basis.col(active[k]);
    const Eigen::VectorXd g = solve_least_squares(a, wy);
    for (std::size_t k = 0; k < active.size(); ++k) fit.gamma[active[k]] = g[static_cast<Eigen::Index>(k)];
  }
  fit.whitened_residual = wy - fit.whitened_basis * fit.gamma;
  return fit;
}

double log_likelihood_from(const Factor& f, const Eigen::MatrixXd& basis, const Eigen::VectorXd& y) {
  const auto fit = generalized_least_squares(f.llt, basis, y);
  const Eigen::MatrixXd& l = f.llt.matrixLLT();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) log_det += 2.0 * std::log(l(i, i));
  const double m = static_cast<double>(y.size());
  return -0.5 * fit.whitened_residual.squaredNorm() - 0.5 * log_det -
         0.5 * m * std::log(2.0 * std::numbers::pi);
}

void check_targets(const FeatureMatrix& features, const Eigen::VectorXd& targets) {
  if (targets.size() != features.rows())
    fail(ErrorCode::DimensionMismatch, std::to_string(targets.size()) + " targets for " +
                                           std::to_string(features.rows()) + " feature rows");
  if (!targets.allFinite()) fail(ErrorCode::InvalidArgument, "targets contain non-finite values");
}

struct Standardized {
  Normalization internal;  // values -> z
  Normalization model;     // raw -> z
  Eigen::MatrixXd z;
};

Standardized standardize_inputs(const FeatureMatrix& features) {
  Standardized s;
  s.internal = fit_normalization(features.values());
  s.z = s.internal.apply(features.values());
  s.model = features.normalization() ? s.internal.after(*features.normalization()) : s.internal;
  return s;
}

GprModel build_model(FeatureSetKind kind, const GprHyperparams& hyper, const Standardized& s,
                     const Eigen::MatrixXd& dist, const Eigen::VectorXd& y) {
  hyper.validate();
  const Factor f = factorize(covariance_from_distances(dist, hyper));
  const Eigen::MatrixXd basis = linear_basis(s.z);
  const auto fit = generalized_least_squares(f.llt, basis, y);
  Eigen::VectorXd alpha = f.llt.matrixU().solve(fit.whitened_residual);
  return GprModel(kind, hyper, fit.gamma, s.z, std::move(alpha), s.model, f.jitter);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace

void GprHyperparams::validate() const {
  const bool ok = std::isfinite(length_scale) && length_scale > 0.0 && std::isfinite(signal_variance) &&
                  signal_variance >= 0.0 && std::isfinite(noise_variance) && noise_variance >= 0.0 &&
                  signal_variance + noise_variance > 0.0;
  if (!ok) fail(ErrorCode::InvalidArgument, "invalid GPR hyperparameters");
}

double kernel_exponential(std::span<const double> xs, std::span<const double> xt,
                          const GprHyperparams& hyper, bool same_index) {
  if (xs.size() != xt.size()) fail(ErrorCode::DimensionMismatch, "kernel rows differ in length");
  double d2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) d2 += (xs[i] - xt[i]) * (xs[i] - xt[i]);
  return hyper.signal_variance * std::exp(-std::sqrt(d2) / hyper.length_scale) +
         (same_index ? hyper.noise_variance : 0.0);
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& inputs, const GprHyperparams& hyper) {
  return covariance_from_distances(pairwise_distances(inputs), hyper);
}

Eigen::MatrixXd linear_basis(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd h(z.rows(), z.cols() + 1);
  h.col(0).setOnes();
  h.rightCols(z.cols()) = z;
  return h;
}

double log_marginal_likelihood(const GprHyperparams& hyper, const FeatureMatrix& features,
                               const Eigen::VectorXd& targets, const Eigen::MatrixXd& basis) {
  hyper.validate();
  check_targets(features, targets);
  if (basis.rows() != features.rows() && basis.cols() > 0)
    fail(ErrorCode::DimensionMismatch, "basis rows differ from feature rows");
  const Eigen::MatrixXd h = basis.cols() > 0 ? basis : Eigen::MatrixXd(features.rows(), 0);
  return log_likelihood_from(factorize(kernel_matrix(features.values(), hyper)), h, targets);
}

GprModel::GprModel(FeatureSetKind kind, GprHyperparams hyper, Eigen::VectorXd basis_coefficients,
                   Eigen::MatrixXd training_inputs, Eigen::VectorXd dual_weights,
                   Normalization normalization, double jitter)
    : kind_(kind),
      hyper_(hyper),
      gamma_(std::move(basis_coefficients)),
      inputs_(std::move(training_inputs)),
      alpha_(std::move(dual_weights)),
      normalization_(std::move(normalization)),
      jitter_(jitter) {
  hyper_.validate();
  const auto dim = static_cast<Eigen::Index>(feature_dimension(kind_));
  if (inputs_.cols() != dim || gamma_.size() != dim + 1 || alpha_.size() != inputs_.rows() ||
      normalization_.means.size() != dim || normalization_.scales.size() != dim || inputs_.rows() < 1)
    fail(ErrorCode::DimensionMismatch, "inconsistent GPR model dimensions");
  if (!(jitter_ >= 0.0) || !std::isfinite(jitter_)) fail(ErrorCode::InvalidArgument, "invalid jitter");

  Eigen::MatrixXd k = kernel_matrix(inputs_, hyper_);
  k.diagonal().array() += jitter_;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::NotPositiveDefinite, "stored GPR kernel matrix is not positive definite");
  chol_lower_ = llt.matrixL();
  whitened_basis_ = llt.matrixL().solve(linear_basis(inputs_));
  Eigen::MatrixXd gram = whitened_basis_.transpose() * whitened_basis_;
  basis_gram_.compute(gram);
  if (basis_gram_.info() != Eigen::Success) {
    // Unidentifiable basis directions (constant features): regularize so the
    // variance stays finite.
    gram.diagonal().array() += 1e-10 * std::max(gram.trace() / static_cast<double>(gram.rows()), 1e-300);
    basis_gram_.compute(gram);
  }
}

GprPrediction GprModel::predict(std::span<const double> raw_row) const {
  const Eigen::VectorXd z = normalization_.apply(raw_row);
  const Eigen::Index m = inputs_.rows();
  Eigen::VectorXd k(m);
  for (Eigen::Index j = 0; j < m; ++j)
    k[j] = hyper_.signal_variance * std::exp(-(inputs_.row(j).transpose() - z).norm() / hyper_.length_scale);

  GprPrediction out;
  out.mean = gamma_[0] + z.dot(gamma_.tail(z.size())) + k.dot(alpha_);

  const Eigen::VectorXd v = chol_lower_.triangularView<Eigen::Lower>().solve(k);
  Eigen::VectorXd h(z.size() + 1);
  h[0] = 1.0;
  h.tail(z.size()) = z;
  const Eigen::VectorXd r = h - whitened_basis_.transpose() * v;
  double var = hyper_.signal_variance - v.squaredNorm();
  if (basis_gram_.info() == Eigen::Success) var += r.dot(basis_gram_.solve(r));
  out.variance = std::max(0.0, var);
  return out;
}

GprPrediction predict_gpr(const GprModel& model, std::span<const double> raw_row) {
  return model.predict(raw_row);
}

GprModel condition_gpr(const FeatureMatrix& features, const Eigen::VectorXd& targets,
                       const GprHyperparams& hyper) {
  check_targets(features, targets);
  const auto s = standardize_inputs(features);
  return build_model(features.kind(), hyper, s, pairwise_distances(s.z), targets);
}

GprModel fit_gpr(const FeatureMatrix& features, const Eigen::VectorXd& targets, const GprOptions& opts) {
  check_targets(features, targets);
  const Eigen::Index m = features.rows();
  if (m < 3) fail(ErrorCode::DimensionMismatch, "GPR training needs at least 3 samples");
  if (opts.restarts < 1) fail(ErrorCode::InvalidArgument, "restarts must be >= 1");

  const auto s = standardize_inputs(features);
  const Eigen::MatrixXd dist = pairwise_distances(s.z);
  const Eigen::MatrixXd basis = linear_basis(s.z);

  const double mean_y = targets.mean();
  double var_y = (targets.array() - mean_y).square().sum() / static_cast<double>(m - 1);
  if (!(var_y > 0.0)) var_y = mean_y != 0.0 ? mean_y * mean_y : 1.0;

  // Starting point: median pairwise distance, residual variance of the
  // ordinary least-squares basis fit, a tenth of that as noise.
  std::vector<double> pair_d;
  pair_d.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = j + 1; i < m; ++i) pair_d.push_back(dist(i, j));
  double l0 = median(std::move(pair_d));
  if (!(l0 > 0.0)) l0 = 1.0;
  double sf0 = var_y;
  try {
    Eigen::LLT<Eigen::MatrixXd> identity(Eigen::MatrixXd::Identity(m, m));
    const auto ols = generalized_least_squares(identity, basis, targets);
    sf0 = ols.whitened_residual.squaredNorm() / static_cast<double>(m - 1);
  } catch (const Error&) {
  }
  sf0 = std::max(sf0, 1e-8 * var_y);
  const double sn0 = 0.1 * sf0;

  const std::array<double, 3> lower{std::log(l0) - 10.0, std::log(var_y) - 30.0, std::log(var_y) - 30.0};
  const std::array<double, 3> upper{std::log(l0) + 10.0, std::log(var_y) + 10.0, std::log(var_y) + 10.0};
  auto clamp = [&](std::vector<double> x) {
    for (std::size_t i = 0; i < 3; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
    return x;
  };
  auto to_hyper = [](const std::vector<double>& x) {
    return GprHyperparams{std::exp(x[0]), std::exp(x[1]), std::exp(x[2])};
  };
  auto objective = [&](const std::vector<double>& x) {
    const auto inside = clamp(x);
    double outside = 0.0;
    for (std::size_t i = 0; i < 3; ++i) outside += (x[i] - inside[i]) * (x[i] - inside[i]);
    try {
      const Factor f = factorize(covariance_from_distances(dist, to_hyper(inside)));
      return -log_likelihood_from(f, basis, targets) + 1e-6 * outside;
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const std::vector<double> start0{std::log(l0), std::log(sf0), std::log(sn0)};
  NelderMeadOptions nm;
  nm.max_iterations = opts.max_iterations;
  nm.tolerance = opts.tolerance;

  std::optional<NelderMeadResult> best;
  for (int r = 0; r < opts.restarts; ++r) {
    std::vector<double> start = start0;
    if (r > 0) {
      Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(r)));
      for (auto& v : start) v += rng.normal();
      start = clamp(std::move(start));
    }
    auto res = nelder_mead(objective, start, nm);
    if (std::isfinite(res.value) && (!best || res.value < best->value)) best = std::move(res);
  }
  if (!best) fail(ErrorCode::OptimizationDiverged, "every hyperparameter restart failed");

  return build_model(features.kind(), to_hyper(clamp(best->x)), s, dist, targets);
}

}  // namespace hwenergy::regression
