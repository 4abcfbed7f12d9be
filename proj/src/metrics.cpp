#include "fuelcast/metrics.hpp"

#include "fuelcast/errors.hpp"

#include <cmath>
#include <string>

namespace fuelcast {

namespace {

void check_lengths(std::span<const double> a, std::span<const double> p) {
	if (a.empty() || a.size() != p.size()) {
		throw ConfigError("metrics need equal nonzero lengths, got " +
		                  std::to_string(a.size()) + " and " + std::to_string(p.size()));
	}
}

} // namespace

double rmse(std::span<const double> actual, std::span<const double> predicted) {
	check_lengths(actual, predicted);
	double ss = 0.0;
	for (std::size_t i = 0; i < actual.size(); ++i) {
		const double e = actual[i] - predicted[i];
		ss += e * e;
	}
	return std::sqrt(ss / static_cast<double>(actual.size()));
}

double mae(std::span<const double> actual, std::span<const double> predicted) {
	check_lengths(actual, predicted);
	double s = 0.0;
	for (std::size_t i = 0; i < actual.size(); ++i) {
		s += std::abs(actual[i] - predicted[i]);
	}
	return s / static_cast<double>(actual.size());
}

double smape(std::span<const double> actual, std::span<const double> predicted) {
	check_lengths(actual, predicted);
	double s = 0.0;
	for (std::size_t i = 0; i < actual.size(); ++i) {
		const double denom = (std::abs(actual[i]) + std::abs(predicted[i])) / 2.0;
		if (denom == 0.0) {
			continue; // removable singularity: both values zero counts as zero error
		}
		s += std::abs(actual[i] - predicted[i]) / denom;
	}
	return s / static_cast<double>(actual.size()) * 100.0;
}

MetricSet compute_metrics(std::span<const double> actual, std::span<const double> predicted) {
	return {rmse(actual, predicted), mae(actual, predicted), smape(actual, predicted)};
}

} // namespace fuelcast
