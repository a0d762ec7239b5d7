#pragma once

#include <functional>
#include <vector>

namespace hwenergy::regression {

struct NelderMeadOptions {
  int max_iterations = 500;
  // Stop once the simplex spans less than this in every coordinate, or the
  // objective values at its vertices agree to this relative tolerance.
  double tolerance = 1e-8;
  double initial_step = 1.0;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Derivative-free minimization (reflection 1, expansion 2, contraction 1/2,
// shrink 1/2). Non-finite objective values are treated as +infinity.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                             std::vector<double> start, const NelderMeadOptions& opts = {});

}  // namespace hwenergy::regression
