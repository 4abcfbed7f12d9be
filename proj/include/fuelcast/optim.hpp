#pragma once

#include <functional>
#include <vector>

namespace fuelcast {

struct OptimOptions {
	int max_iterations = 500;
	double gradient_tolerance = 1e-8;
	// Two consecutive iterations with relative objective decrease below this
	// count as converged; numerical gradients rarely reach gradient_tolerance.
	double stagnation_tolerance = 1e-12;
};

struct OptimResult {
	std::vector<double> x;
	double value = 0.0;
	int iterations = 0;
	bool converged = false;
};

// BFGS with central-difference gradients and backtracking line search.
// Deterministic for a deterministic objective. Non-finite objective values are
// treated as +inf by the line search.
OptimResult minimize_bfgs(const std::function<double(const std::vector<double> &)> &objective,
                          std::vector<double> initial, const OptimOptions &options = {});

} // namespace fuelcast
