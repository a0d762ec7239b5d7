#include <cmath>
#include <numbers>
#include <random>

#include "regression/feature_matrix.hpp"
#include "regression/gpr.hpp"
#include "regression/linear.hpp"
#include "regression/model_io.hpp"
#include "regression/nelder_mead.hpp"
#include "test_support.hpp"

using namespace hwenergy;
using namespace hwenergy::regression;
using testing::error_of;

namespace {

Eigen::MatrixXd random_counts(int rows, int cols, unsigned seed, double lo = 1e3, double hi = 1e6) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  Eigen::MatrixXd x(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) x(i, j) = std::round(std::exp(u(gen)));
  return x;
}

double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / b.norm(); }

std::vector<double> row_of(const Eigen::MatrixXd& x, Eigen::Index i) {
  std::vector<double> r(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) r[static_cast<std::size_t>(j)] = x(i, j);
  return r;
}

// Least-squares reference through Eigen's complete orthogonal decomposition.
Eigen::VectorXd reference_lstsq(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  return a.completeOrthogonalDecomposition().solve(b);
}

}  // namespace

TEST_CASE("standardize examples") {
  Eigen::MatrixXd x(2, 1);
  x << 1, 3;
  const auto z = standardize(FeatureMatrix(FeatureSetKind::Temporal, x));
  CHECK(z.normalization()->means[0] == doctest::Approx(2.0));
  CHECK(z.normalization()->scales[0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(z.values()(0, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)));
  CHECK(z.values()(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));

  Eigen::MatrixXd c(3, 1);
  c << 5, 5, 5;
  const auto zc = standardize(FeatureMatrix(FeatureSetKind::Temporal, c));
  CHECK(zc.normalization()->scales[0] == 1.0);
  CHECK(zc.values().isZero());

  const auto twice = standardize(FeatureMatrix(FeatureSetKind::PerfCtc, standardize(FeatureMatrix(FeatureSetKind::PerfCtc, random_counts(20, 3, 4))).values()));
  const auto once = standardize(FeatureMatrix(FeatureSetKind::PerfCtc, random_counts(20, 3, 4)));
  CHECK((twice.values() - once.values()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("feature matrix validates its shape") {
  CHECK(error_of([] { FeatureMatrix(FeatureSetKind::PerfCtc, Eigen::MatrixXd::Ones(4, 2)); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(error_of([] { FeatureMatrix(FeatureSetKind::Temporal, Eigen::MatrixXd(0, 1)); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("linear regression recovers a planted model exactly") {
  const auto x = random_counts(40, 3, 1);
  Eigen::Vector3d e(2.0, 0.5, 1.0);
  const Eigen::VectorXd y = x * e;
  const auto m = fit_linear(FeatureMatrix(FeatureSetKind::PerfCtc, x), y);
  CHECK_FALSE(m.intercept.has_value());
  CHECK(rel_err(m.coefficients, e) <= 1e-8);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    CHECK(std::abs(predict_linear(m, row_of(x, i)) - y[i]) <= 1e-8 * std::abs(y[i]));
}

TEST_CASE("temporal line: P = 3 W, offset = 2 J") {
  Eigen::MatrixXd t(3, 1);
  t << 1, 2, 3;
  Eigen::Vector3d e(5, 8, 11);
  const auto m = fit_linear(FeatureMatrix(FeatureSetKind::Temporal, t), e);
  REQUIRE(m.intercept.has_value());
  CHECK(m.coefficients[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(*m.intercept == doctest::Approx(2.0).epsilon(1e-12));
  const double ten = 10.0;
  CHECK(predict_linear(m, {&ten, 1}) == doctest::Approx(32.0).epsilon(1e-12));
}

TEST_CASE("linear regression error cases") {
  CHECK(error_of([] { fit_linear(FeatureMatrix(FeatureSetKind::PerfCtc, random_counts(2, 3, 2)), Eigen::Vector2d(1, 2)); }) ==
        ErrorCode::RankDeficient);
  CHECK(error_of([] { fit_linear(FeatureMatrix(FeatureSetKind::PerfCtc, random_counts(5, 3, 2)), Eigen::Vector2d(1, 2)); }) ==
        ErrorCode::DimensionMismatch);
  Eigen::MatrixXd dup = random_counts(10, 3, 3);
  dup.col(2) = dup.col(0);
  CHECK(error_of([&] { fit_linear(FeatureMatrix(FeatureSetKind::PerfCtc, dup), Eigen::VectorXd::Ones(10)); }) ==
        ErrorCode::RankDeficient);
  LinearModel zero{FeatureSetKind::PerfCtc, Eigen::Vector3d(1, 2, 3), std::nullopt, std::nullopt};
  const std::vector<double> z{0, 0, 0};
  CHECK(predict_linear(zero, z) == 0.0);
  CHECK(error_of([&] { predict_linear(zero, std::vector<double>{1, 2}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("least squares matches an independent solver, including ill-conditioned columns") {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd a(30, 4);
    for (int i = 0; i < 30; ++i)
      for (int j = 0; j < 4; ++j) a(i, j) = n(gen);
    a.col(3) = a.col(0) + 1e-6 * a.col(3);
    Eigen::VectorXd b(30);
    for (int i = 0; i < 30; ++i) b[i] = n(gen);
    const auto ours = solve_least_squares(a, b);
    const auto ref = reference_lstsq(a, b);
    CHECK((a * ours - b).norm() <= (a * ref - b).norm() * (1 + 1e-9));
  }
}

TEST_CASE("nonnegative least squares agrees with exhaustive active-set search") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::MatrixXd a(12, 4);
    Eigen::VectorXd b(12);
    for (int i = 0; i < 12; ++i) {
      for (int j = 0; j < 4; ++j) a(i, j) = n(gen);
      b[i] = n(gen);
    }
    // Best feasible unconstrained fit over every support set.
    double best = b.squaredNorm();
    for (int mask = 1; mask < 16; ++mask) {
      std::vector<int> cols;
      for (int j = 0; j < 4; ++j)
        if (mask & (1 << j)) cols.push_back(j);
      Eigen::MatrixXd s(12, static_cast<Eigen::Index>(cols.size()));
      for (std::size_t k = 0; k < cols.size(); ++k) s.col(static_cast<Eigen::Index>(k)) = a.col(cols[k]);
      const Eigen::VectorXd x = reference_lstsq(s, b);
      if (x.minCoeff() < 0) continue;
      best = std::min(best, (s * x - b).squaredNorm());
    }
    const auto x = solve_nonnegative_least_squares(a, b);
    CHECK(x.minCoeff() >= 0.0);
    CHECK((a * x - b).squaredNorm() <= best * (1 + 1e-9) + 1e-12);
  }
}

TEST_CASE("nonnegative option keeps coefficients nonnegative") {
  const auto x = random_counts(30, 3, 8);
  const Eigen::VectorXd y = x * Eigen::Vector3d(1.0, -0.2, 0.5);
  const auto m = fit_linear(FeatureMatrix(FeatureSetKind::PerfCtc, x), y, {std::nullopt, true});
  CHECK(m.coefficients.minCoeff() >= 0.0);
}

TEST_CASE("normalization is transparent to prediction") {
  const auto x = random_counts(25, 3, 12);
  const Eigen::VectorXd y = x * Eigen::Vector3d(3.0, 1.0, 0.25) + Eigen::VectorXd::Constant(25, 7.0);
  const auto z = standardize(FeatureMatrix(FeatureSetKind::PerfCtc, x));
  const auto with_norm = fit_linear(z, y, {true, false});
  const auto plain = fit_linear(FeatureMatrix(FeatureSetKind::PerfCtc, z.values()), y, {true, false});
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double a = predict_linear(with_norm, row_of(x, i));
    const double b = predict_linear(plain, row_of(z.values(), i));
    CHECK(std::abs(a - b) <= 1e-10 * std::abs(b));
  }
}

TEST_CASE("exponential kernel examples") {
  const GprHyperparams h{2.0, 4.0, 0.0};
  const std::vector<double> a{0.0, 0.0}, b{2.0, 0.0};
  CHECK(kernel_exponential(a, b, h, false) == doctest::Approx(4.0 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(kernel_exponential(a, b, h, false) == doctest::Approx(1.4715).epsilon(1e-4));
  const GprHyperparams hn{1.5, 2.0, 0.3};
  CHECK(kernel_exponential(a, a, hn, true) == doctest::Approx(2.3));
  const std::vector<double> far{1000.0 * 1.5, 0.0};
  CHECK(kernel_exponential(a, far, hn, false) <= 2.0 * std::exp(-1000.0));
  CHECK(kernel_exponential(a, far, hn, true) == doctest::Approx(0.3));
}

TEST_CASE("kernel matrix is exactly symmetric") {
  const auto x = standardize(FeatureMatrix(FeatureSetKind::PerfCtc, random_counts(15, 3, 21))).values();
  const auto k = kernel_matrix(x, {0.7, 1.3, 0.01});
  CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("log marginal likelihood of a single sample") {
  const double s2 = 2.5;
  Eigen::MatrixXd x(1, 1);
  x << 0.0;
  const double v = log_marginal_likelihood({1.0, s2, 0.0}, FeatureMatrix(FeatureSetKind::Temporal, x),
                                           Eigen::VectorXd::Zero(1), Eigen::MatrixXd(1, 0));
  CHECK(v == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi * s2)).epsilon(1e-14));
}

TEST_CASE("log marginal likelihood under target scaling") {
  const auto x = standardize(FeatureMatrix(FeatureSetKind::PerfCtc, random_counts(20, 3, 31))).values();
  const FeatureMatrix f(FeatureSetKind::PerfCtc, x);
  Eigen::VectorXd y = x * Eigen::Vector3d(1, -2, 0.5);
  for (int i = 0; i < 20; ++i) y[i] += std::sin(3.0 * i);
  const auto basis = linear_basis(x);
  const GprHyperparams h{1.2, 0.8, 0.05};
  const double base = log_marginal_likelihood(h, f, y, basis);
  CHECK(log_marginal_likelihood(h, f, y, basis) == base);
  for (double c : {0.1, 3.0, 1e4}) {
    const GprHyperparams hc{h.length_scale, h.signal_variance * c * c, h.noise_variance * c * c};
    const double scaled = log_marginal_likelihood(hc, f, c * y, basis);
    CHECK(scaled == doctest::Approx(base - 20.0 * std::log(c)).epsilon(1e-9));
  }
}

TEST_CASE("GPR interpolates noiseless linear data") {
  const auto x = random_counts(60, 3, 41);
  const Eigen::VectorXd y = x * Eigen::Vector3d(2e-3, 5e-4, 1e-3) + Eigen::VectorXd::Constant(60, 4.0);
  const auto m = fit_gpr(FeatureMatrix(FeatureSetKind::PerfCtc, x), y);
  const double var = (y.array() - y.mean()).square().sum() / 59.0;
  CHECK(m.hyper().noise_variance <= 1e-6 * var);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto p = m.predict(row_of(x, i));
    CHECK(std::abs(p.mean - y[i]) <= 1e-6 * std::abs(y[i]));
    CHECK(p.variance >= 0.0);
  }
}

TEST_CASE("GPR training is deterministic for a seed") {
  const auto x = random_counts(30, 3, 51);
  Eigen::VectorXd y = x * Eigen::Vector3d(1e-3, 2e-3, 3e-3);
  for (int i = 0; i < 30; ++i) y[i] *= 1.0 + 0.05 * std::sin(1.7 * i);
  const FeatureMatrix f(FeatureSetKind::PerfCtc, x);
  const auto a = fit_gpr(f, y, {3, 7});
  const auto b = fit_gpr(f, y, {3, 7});
  CHECK(a.hyper() == b.hyper());
  CHECK(serialize_model(a) == serialize_model(b));
}

TEST_CASE("GPR far from the data falls back to the basis") {
  const auto x = random_counts(30, 3, 61);
  Eigen::VectorXd y = x * Eigen::Vector3d(1e-3, 2e-3, 3e-3);
  for (int i = 0; i < 30; ++i) y[i] += 50.0 * std::sin(0.9 * i);
  const auto m = fit_gpr(FeatureMatrix(FeatureSetKind::PerfCtc, x), y);
  const std::vector<double> far{1e12, 1e12, 1e12};
  const auto z = m.normalization().apply(far);
  const double basis = m.basis_coefficients()[0] + z.dot(m.basis_coefficients().tail(3));
  const auto p = m.predict(far);
  CHECK(std::abs(p.mean - basis) <= 1e-6 * std::sqrt(m.hyper().signal_variance) + 1e-9 * std::abs(basis));
  CHECK(p.variance >= 0.0);
}

TEST_CASE("GPR with zero signal variance equals the least-squares basis fit") {
  std::mt19937_64 gen(71);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_counts(25, 3, 100 + static_cast<unsigned>(trial));
    Eigen::VectorXd y(25);
    for (int i = 0; i < 25; ++i) y[i] = 1e-3 * x(i, 0) + 5.0 + n(gen);
    const auto m = condition_gpr(FeatureMatrix(FeatureSetKind::PerfCtc, x), y, {1.0, 0.0, 0.7});
    Eigen::MatrixXd h(25, 4);
    h.col(0).setOnes();
    h.rightCols(3) = x;
    const Eigen::VectorXd beta = reference_lstsq(h, y);
    for (int i = 0; i < 25; ++i) {
      const double expected = beta[0] + x.row(i).dot(beta.tail(3));
      CHECK(std::abs(m.predict(row_of(x, i)).mean - expected) <= 1e-10 * std::abs(expected));
    }
  }
}

TEST_CASE("GPR argument checks") {
  CHECK(error_of([] { fit_gpr(FeatureMatrix(FeatureSetKind::Temporal, Eigen::MatrixXd::Ones(2, 1)), Eigen::Vector2d(1, 2)); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(error_of([] { GprHyperparams{1.0, 0.0, 0.0}.validate(); }) == ErrorCode::InvalidArgument);
  CHECK(error_of([] { GprHyperparams{-1.0, 1.0, 0.0}.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("model serialization round-trips exactly") {
  const auto x = random_counts(30, 3, 81);
  Eigen::VectorXd y = x * Eigen::Vector3d(1e-3, 2e-3, 3e-3);
  for (int i = 0; i < 30; ++i) y[i] += 10.0 * std::cos(0.4 * i);
  const FeatureMatrix f(FeatureSetKind::PerfCtc, x);
  for (auto reg : {Regressor::Linear, Regressor::Gpr}) {
    const auto model = train_model(f, y, reg);
    const nlohmann::json meta = {{"purpose", "unit"}, {"training_codecs", {"HEVC"}}};
    const auto text = serialize_model(model, meta);
    const auto back = parse_model(text);
    CHECK(back.metadata["purpose"] == "unit");
    CHECK(regressor_of(back.model) == reg);
    CHECK(kind_of(back.model) == FeatureSetKind::PerfCtc);
    CHECK(serialize_model(back.model, back.metadata) == text);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const auto r = row_of(x, i);
      CHECK(predict(back.model, r) == predict(model, r));
    }
  }
}

TEST_CASE("model parse errors") {
  CHECK(error_of([] { parse_model("not json"); }) == ErrorCode::ModelFormat);
  CHECK(error_of([] { parse_model("{}"); }) == ErrorCode::ModelFormat);
  CHECK(error_of([] { parse_model(R"({"format_version": 99, "regressor": "lr", "kind": "temporal"})"); }) ==
        ErrorCode::ModelFormat);
  CHECK(error_of([] {
          parse_model(R"({"format_version": 1, "regressor": "lr", "kind": "temporal", "coefficients": [1, 2]})");
        }) == ErrorCode::ModelFormat);
}

TEST_CASE("Nelder-Mead minimizes a shifted quadratic and Rosenbrock") {
  const auto quad = nelder_mead([](const std::vector<double>& p) { return (p[0] - 3) * (p[0] - 3) + 2 * (p[1] + 1) * (p[1] + 1); },
                                {0.0, 0.0}, {2000, 1e-12, 1.0});
  CHECK(quad.x[0] == doctest::Approx(3.0).epsilon(1e-5));
  CHECK(quad.x[1] == doctest::Approx(-1.0).epsilon(1e-5));
  const auto rosen = nelder_mead(
      [](const std::vector<double>& p) { return 100 * std::pow(p[1] - p[0] * p[0], 2) + std::pow(1 - p[0], 2); },
      {-1.2, 1.0}, {5000, 1e-12, 0.5});
  CHECK(rosen.value <= 1e-6);
}
