#include "regression/linear.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "core/error.hpp"

namespace hwenergy::regression {

bool default_intercept(FeatureSetKind kind) noexcept { return kind == FeatureSetKind::Temporal; }

Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  if (a.rows() < a.cols())
    fail(ErrorCode::RankDeficient, std::to_string(a.rows()) + " samples cannot determine " +
                                       std::to_string(a.cols()) + " coefficients");
  const Eigen::MatrixXd gram = a.transpose() * a;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  // cond(AᵀA) = cond(A)²: keep normal equations only while cond(A) < 1e4.
  if (llt.info() == Eigen::Success && llt.rcond() > 1e-8) return llt.solve(a.transpose() * b);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < a.cols())
    fail(ErrorCode::RankDeficient, "design matrix has rank " + std::to_string(qr.rank()) + " < " +
                                       std::to_string(a.cols()) +
                                       " (duplicated or constant features?)");
  return qr.solve(b);
}

Eigen::VectorXd solve_nonnegative_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index n = a.cols();
  if (a.rows() < n)
    fail(ErrorCode::RankDeficient, std::to_string(a.rows()) + " samples cannot determine " +
                                       std::to_string(n) + " coefficients");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() * a.norm() *
                     static_cast<double>(std::max(a.rows(), n));

  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    z.setZero(n);
    if (idx.empty()) return;
    Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
    const Eigen::VectorXd zs = solve_least_squares(sub, b);
    for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = zs[static_cast<Eigen::Index>(k)];
  };

  const int max_outer = static_cast<int>(3 * n + 10);
  for (int outer = 0; outer < max_outer; ++outer) {
    const Eigen::VectorXd w = a.transpose() * (b - a * x);
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[static_cast<std::size_t>(j)] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    Eigen::VectorXd z;
    for (int inner = 0; inner <= n; ++inner) {
      solve_passive(z);
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) feasible = false;
      if (feasible) break;
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) alpha = std::min(alpha, x[j] / (x[j] - z[j]));
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && x[j] <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x[j] = 0.0;
        }
      z = x;
    }
    x = z;
  }
  return x;
}

LinearModel fit_linear(const FeatureMatrix& features, const Eigen::VectorXd& targets,
                       const LinearOptions& opts) {
  if (targets.size() != features.rows())
    fail(ErrorCode::DimensionMismatch, std::to_string(targets.size()) + " targets for " +
                                           std::to_string(features.rows()) + " feature rows");
  if (!targets.allFinite()) fail(ErrorCode::InvalidArgument, "targets contain non-finite values");
  const bool intercept = opts.intercept.value_or(default_intercept(features.kind()));
  const Eigen::Index p = features.cols() + (intercept ? 1 : 0);
  if (features.rows() < p)
    fail(ErrorCode::RankDeficient, std::to_string(features.rows()) + " samples cannot determine " +
                                       std::to_string(p) + " parameters");

  // Solve on a column-scaled copy for conditioning. With an intercept the
  // columns and targets are also centred, which eliminates the free intercept
  // exactly and leaves the sign constraints untouched.
  const Eigen::MatrixXd& x = features.values();
  Eigen::VectorXd centre = Eigen::VectorXd::Zero(x.cols());
  double y_centre = 0.0;
  if (intercept) {
    centre = x.colwise().mean().transpose();
    y_centre = targets.mean();
  }
  Eigen::MatrixXd a = x.rowwise() - centre.transpose();
  Eigen::VectorXd scale(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double rms = std::sqrt(a.col(j).squaredNorm() / static_cast<double>(a.rows()));
    if (!(rms > 0.0))
      fail(ErrorCode::RankDeficient, "feature column " + std::to_string(j) +
                                         (intercept ? " is constant" : " is identically zero"));
    scale[j] = rms;
    a.col(j) /= rms;
  }
  const Eigen::VectorXd b = targets.array() - y_centre;

  const Eigen::VectorXd scaled =
      opts.nonnegative ? solve_nonnegative_least_squares(a, b) : solve_least_squares(a, b);

  LinearModel model;
  model.kind = features.kind();
  model.coefficients = scaled.array() / scale.array();
  if (intercept) model.intercept = y_centre - centre.dot(model.coefficients);
  model.normalization = features.normalization();
  return model;
}

double predict_linear(const LinearModel& model, std::span<const double> raw_row) {
  const auto dim = model.coefficients.size();
  if (static_cast<Eigen::Index>(raw_row.size()) != dim)
    fail(ErrorCode::DimensionMismatch, "feature row has " + std::to_string(raw_row.size()) +
                                           " entries, model expects " + std::to_string(dim));
  const Eigen::VectorXd v = model.normalization
                                ? model.normalization->apply(raw_row)
                                : Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(raw_row.data(), dim));
  return v.dot(model.coefficients) + model.intercept.value_or(0.0);
}

}  // namespace hwenergy::regression
