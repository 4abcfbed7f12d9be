#include "fuelcast/stats.hpp"

#include "fuelcast/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace fuelcast {

double mean(std::span<const double> xs) {
	if (xs.empty()) {
		throw ConfigError("mean of empty sequence");
	}
	double s = 0.0;
	for (double x : xs) {
		s += x;
	}
	return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
	if (xs.size() < 2) {
		throw ConfigError("sample variance needs at least 2 points");
	}
	const double m = mean(xs);
	double ss = 0.0;
	for (double x : xs) {
		const double d = x - m;
		ss += d * d;
	}
	return ss / static_cast<double>(xs.size() - 1);
}

double sample_stddev(std::span<const double> xs) {
	return std::sqrt(sample_variance(xs));
}

double pearson_correlation(std::span<const double> xs, std::span<const double> ys) {
	if (xs.size() != ys.size() || xs.size() < 2) {
		throw ConfigError("correlation needs two equally sized sequences of length >= 2");
	}
	const double mx = mean(xs);
	const double my = mean(ys);
	double sxy = 0.0, sxx = 0.0, syy = 0.0;
	for (std::size_t i = 0; i < xs.size(); ++i) {
		const double dx = xs[i] - mx;
		const double dy = ys[i] - my;
		sxy += dx * dy;
		sxx += dx * dx;
		syy += dy * dy;
	}
	if (sxx == 0.0 || syy == 0.0) {
		throw ConfigError("correlation undefined for a constant sequence");
	}
	return sxy / std::sqrt(sxx * syy);
}

namespace {

// Acklam's rational approximation for the inverse normal CDF.
double inverse_normal_cdf_approx(double p) {
	static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
	                           -2.759285104469687e+02, 1.383577518672690e+02,
	                           -3.066479806614716e+01, 2.506628277459239e+00};
	static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
	                           -1.556989798598866e+02, 6.680131188771972e+01,
	                           -1.328068155288572e+01};
	static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
	                           -2.400758277161838e+00, -2.549732539343734e+00,
	                           4.374664141464968e+00,  2.938163982698783e+00};
	static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
	                           2.445134137142996e+00, 3.754408661907416e+00};
	const double plow = 0.02425;

	if (p < plow) {
		const double q = std::sqrt(-2.0 * std::log(p));
		return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
		       ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
	}
	if (p > 1.0 - plow) {
		const double q = std::sqrt(-2.0 * std::log(1.0 - p));
		return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
		       ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
	}
	const double q = p - 0.5;
	const double r = q * q;
	return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
	       (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

} // namespace

double normal_quantile(double p) {
	if (!(p > 0.0 && p < 1.0)) {
		throw ConfigError("normal quantile requires p in (0, 1)");
	}
	double x = inverse_normal_cdf_approx(p);
	// Two Halley refinements against erfc bring the approximation to full precision.
	for (int i = 0; i < 2; ++i) {
		const double e = 0.5 * std::erfc(-x / M_SQRT2) - p;
		const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
		x -= u / (1.0 + x * u / 2.0);
	}
	return x;
}

double interval_z(double alpha) {
	if (!(alpha > 0.0 && alpha < 1.0)) {
		throw ConfigError("coverage alpha must lie in (0, 1)");
	}
	if (alpha == 0.05) {
		return 1.959964;
	}
	return normal_quantile(1.0 - alpha / 2.0);
}

double min_root_modulus(std::span<const double> coeffs) {
	std::size_t degree = coeffs.size();
	while (degree > 0 && coeffs[degree - 1] == 0.0) {
		--degree;
	}
	if (degree == 0) {
		return std::numeric_limits<double>::infinity();
	}
	if (degree == 1) {
		return 1.0 / std::abs(coeffs[0]);
	}
	// Companion matrix of z^k - (c_1/c_k') ... ; roots of 1 - sum c_i z^i equal the
	// reciprocals of the eigenvalues of the companion matrix of the reversed poly.
	// Build companion of p(z) = z^k - c_1 z^{k-1} - ... - c_k (roots are 1/root of
	// the original), so min |root| of the original = 1 / max |eigenvalue|.
	Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(degree),
	                                                  static_cast<Eigen::Index>(degree));
	for (std::size_t i = 0; i < degree; ++i) {
		companion(0, static_cast<Eigen::Index>(i)) = coeffs[i];
	}
	for (std::size_t i = 1; i < degree; ++i) {
		companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
	}
	const Eigen::VectorXcd eigs = companion.eigenvalues();
	double max_mod = 0.0;
	for (Eigen::Index i = 0; i < eigs.size(); ++i) {
		max_mod = std::max(max_mod, std::abs(eigs[i]));
	}
	if (max_mod == 0.0) {
		return std::numeric_limits<double>::infinity();
	}
	return 1.0 / max_mod;
}

} // namespace fuelcast
