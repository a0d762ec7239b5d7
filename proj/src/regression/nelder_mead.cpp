#include "regression/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hwenergy::regression {
namespace {

struct Vertex {
  std::vector<double> x;
  double f;
};

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                             std::vector<double> start, const NelderMeadOptions& opts) {
  const std::size_t n = start.size();
  auto eval = [&](const std::vector<double>& x) {
    const double f = objective(x);
    return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
  };

  std::vector<Vertex> simplex;
  simplex.reserve(n + 1);
  simplex.push_back({start, eval(start)});
  for (std::size_t i = 0; i < n; ++i) {
    auto x = start;
    x[i] += opts.initial_step;
    simplex.push_back({x, eval(x)});
  }

  auto order = [&] {
    std::stable_sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  };
  auto combine = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = c[j] + t * (w[j] - c[j]);
    return out;
  };

  NelderMeadResult result;
  order();
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    double span = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t j = 0; j < n; ++j) span = std::max(span, std::abs(simplex[i].x[j] - simplex[0].x[j]));
    const double f_best = simplex.front().f;
    const double f_worst = simplex.back().f;
    const bool flat = std::isfinite(f_worst) &&
                      std::abs(f_worst - f_best) <= opts.tolerance * std::max(1.0, std::abs(f_best));
    if (span <= opts.tolerance || flat) {
      result.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i].x[j] / static_cast<double>(n);

    Vertex& worst = simplex.back();
    const auto xr = combine(centroid, worst.x, -1.0);
    const double fr = eval(xr);
    if (fr < simplex.front().f) {
      const auto xe = combine(centroid, worst.x, -2.0);
      const double fe = eval(xe);
      worst = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
    } else if (fr < simplex[n - 1].f) {
      worst = {xr, fr};
    } else {
      const bool outside = fr < worst.f;
      const auto xc = outside ? combine(centroid, xr, 0.5) : combine(centroid, worst.x, 0.5);
      const double fc = eval(xc);
      if (fc < (outside ? fr : worst.f)) {
        worst = {xc, fc};
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          simplex[i].x = combine(simplex[0].x, simplex[i].x, 0.5);
          simplex[i].f = eval(simplex[i].x);
        }
      }
    }
    order();
  }

  result.x = simplex.front().x;
  result.value = simplex.front().f;
  result.iterations = it;
  return result;
}

}  // namespace hwenergy::regression
