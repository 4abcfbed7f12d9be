#pragma once

#include <span>

namespace fuelcast {

struct MetricSet {
	double rmse = 0.0;
	double mae = 0.0;
	double smape = 0.0; // percent, in [0, 200]
};

double rmse(std::span<const double> actual, std::span<const double> predicted);
double mae(std::span<const double> actual, std::span<const double> predicted);
// Symmetric MAPE in percent; a term with |y| + |yhat| = 0 contributes 0.
double smape(std::span<const double> actual, std::span<const double> predicted);

MetricSet compute_metrics(std::span<const double> actual, std::span<const double> predicted);

} // namespace fuelcast
