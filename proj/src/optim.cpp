#include "fuelcast/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fuelcast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double guarded(double v) {
	return std::isfinite(v) ? v : kInf;
}

void numeric_gradient(const std::function<double(const std::vector<double> &)> &f,
                      std::vector<double> &x, std::vector<double> &grad) {
	const std::size_t n = x.size();
	for (std::size_t i = 0; i < n; ++i) {
		const double xi = x[i];
		const double h = 6.0554544523933429e-6 * std::max(1.0, std::abs(xi));
		x[i] = xi + h;
		const double fp = guarded(f(x));
		x[i] = xi - h;
		const double fm = guarded(f(x));
		x[i] = xi;
		grad[i] = (fp == kInf || fm == kInf) ? 0.0 : (fp - fm) / (2.0 * h);
	}
}

double dot(const std::vector<double> &a, const std::vector<double> &b) {
	double s = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i) {
		s += a[i] * b[i];
	}
	return s;
}

double inf_norm(const std::vector<double> &a) {
	double m = 0.0;
	for (double v : a) {
		m = std::max(m, std::abs(v));
	}
	return m;
}

} // namespace

OptimResult minimize_bfgs(const std::function<double(const std::vector<double> &)> &objective,
                          std::vector<double> initial, const OptimOptions &options) {
	const std::size_t n = initial.size();
	OptimResult result;
	result.x = std::move(initial);
	result.value = guarded(objective(result.x));
	if (n == 0) {
		result.converged = true;
		return result;
	}

	// Inverse Hessian approximation, dense row-major.
	std::vector<double> hess(n * n, 0.0);
	for (std::size_t i = 0; i < n; ++i) {
		hess[i * n + i] = 1.0;
	}

	std::vector<double> grad(n), grad_new(n), direction(n), x_new(n), s(n), y(n), hy(n);
	numeric_gradient(objective, result.x, grad);

	int stagnant = 0;
	for (int iter = 0; iter < options.max_iterations; ++iter) {
		result.iterations = iter + 1;
		if (inf_norm(grad) < options.gradient_tolerance) {
			result.converged = true;
			return result;
		}

		for (std::size_t i = 0; i < n; ++i) {
			double d = 0.0;
			for (std::size_t j = 0; j < n; ++j) {
				d -= hess[i * n + j] * grad[j];
			}
			direction[i] = d;
		}
		double slope = dot(direction, grad);
		if (slope >= 0.0) {
			// Reset to steepest descent when the approximation degenerates.
			std::fill(hess.begin(), hess.end(), 0.0);
			for (std::size_t i = 0; i < n; ++i) {
				hess[i * n + i] = 1.0;
				direction[i] = -grad[i];
			}
			slope = dot(direction, grad);
		}

		// Backtracking Armijo line search.
		double step = 1.0;
		double f_new = kInf;
		bool accepted = false;
		for (int ls = 0; ls < 50; ++ls) {
			for (std::size_t i = 0; i < n; ++i) {
				x_new[i] = result.x[i] + step * direction[i];
			}
			f_new = guarded(objective(x_new));
			if (f_new <= result.value + 1e-4 * step * slope) {
				accepted = true;
				break;
			}
			step *= 0.5;
		}
		if (!accepted) {
			result.converged = true; // no descent possible at numeric resolution
			return result;
		}

		numeric_gradient(objective, x_new, grad_new);
		for (std::size_t i = 0; i < n; ++i) {
			s[i] = x_new[i] - result.x[i];
			y[i] = grad_new[i] - grad[i];
		}
		const double sy = dot(s, y);
		if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y)) && sy > 0.0) {
			// BFGS inverse update: H <- (I - s yT / sy) H (I - y sT / sy) + s sT / sy.
			for (std::size_t i = 0; i < n; ++i) {
				double acc = 0.0;
				for (std::size_t j = 0; j < n; ++j) {
					acc += hess[i * n + j] * y[j];
				}
				hy[i] = acc;
			}
			const double yhy = dot(y, hy);
			for (std::size_t i = 0; i < n; ++i) {
				for (std::size_t j = 0; j < n; ++j) {
					hess[i * n + j] += (sy + yhy) * s[i] * s[j] / (sy * sy) -
					                   (hy[i] * s[j] + s[i] * hy[j]) / sy;
				}
			}
		}

		const double decrease = result.value - f_new;
		result.x = x_new;
		result.value = f_new;
		grad.swap(grad_new);

		if (decrease <= options.stagnation_tolerance * (1.0 + std::abs(result.value))) {
			if (++stagnant >= 2) {
				result.converged = true;
				return result;
			}
		} else {
			stagnant = 0;
		}
	}
	result.converged = false;
	return result;
}

} // namespace fuelcast
