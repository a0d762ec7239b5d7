#pragma once

#include <span>

namespace hwenergy::evaluation {

// Mean absolute percentage error (1/M)·Σ|E_i - Ê_i|/E_i, as a fraction.
// Errors: LengthMismatch (unequal or empty), ZeroMeasurement (E_i <= 0).
double mape(std::span<const double> measured, std::span<const double> estimated);

// Sample Pearson correlation. Errors: LengthMismatch (unequal or < 2),
// ConstantInput.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace hwenergy::evaluation
