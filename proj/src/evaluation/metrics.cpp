#include "evaluation/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/error.hpp"

namespace hwenergy::evaluation {

double mape(std::span<const double> measured, std::span<const double> estimated) {
  if (measured.size() != estimated.size() || measured.empty())
    fail(ErrorCode::LengthMismatch, "mape needs equal, nonempty vectors (" + std::to_string(measured.size()) +
                                        " vs " + std::to_string(estimated.size()) + ")");
  double sum = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    if (!(measured[i] > 0.0))
      fail(ErrorCode::ZeroMeasurement, "measured energy at index " + std::to_string(i) + " is not positive");
    sum += std::abs(measured[i] - estimated[i]) / measured[i];
  }
  return sum / static_cast<double>(measured.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    fail(ErrorCode::LengthMismatch, "pearson needs equal vectors of length >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) fail(ErrorCode::ConstantInput, "pearson input is constant");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace hwenergy::evaluation
