#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fuelcast {

double mean(std::span<const double> xs);

// Sample variance with the n-1 denominator.
double sample_variance(std::span<const double> xs);
double sample_stddev(std::span<const double> xs);

double pearson_correlation(std::span<const double> xs, std::span<const double> ys);

// Quantile of the standard normal distribution.
double normal_quantile(double p);

// Two-sided interval multiplier z_{1-alpha/2}. The default coverage alpha = 0.05
// uses the pinned constant 1.959964.
double interval_z(double alpha);

// Smallest root modulus of the polynomial 1 - c_1 z - c_2 z^2 - ... - c_k z^k.
// Returns +inf for an empty (or all-zero) coefficient vector. A value > 1 means
// the corresponding AR polynomial is stationary / MA polynomial invertible.
double min_root_modulus(std::span<const double> coeffs);

} // namespace fuelcast
