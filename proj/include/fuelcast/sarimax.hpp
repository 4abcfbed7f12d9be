#pragma once

#include "fuelcast/series.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fuelcast {

// Model orders for SARIMA(p,d,q) x (P,D,Q,s), optionally with exogenous
// regressors entering as regression-with-SARIMA-errors.
struct SarimaxSpec {
	int p = 0, d = 0, q = 0;
	int P = 0, D = 0, Q = 0;
	int s = 7;
	std::vector<std::string> exog_names;

	int parameter_count() const; // AR+MA+seasonal+exog+intercept
	bool has_intercept() const { return d + D == 0; }
	std::string label() const;
};

struct SarimaxFit {
	SarimaxSpec spec;
	std::vector<double> ar;          // phi
	std::vector<double> ma;          // theta, sign convention a_t - theta_1 a_{t-1} - ...
	std::vector<double> seasonal_ar; // Phi
	std::vector<double> seasonal_ma; // Theta
	std::vector<double> exog_coef;   // beta, one per exog name
	double intercept = 0.0;          // estimated only when d + D == 0
	double sigma2 = 0.0;
	double loglik = 0.0;
	std::vector<double> residuals;   // one-step in-sample residuals, original scale
	std::size_t residual_offset = 0; // series index of residuals[0]
	int iterations = 0;

	// Training data context; required for forecasting.
	std::shared_ptr<const DailySeries> data;
};

// Conditional sum-of-squares Gaussian ML via BFGS on PACF-transformed
// parameters. Deterministic given series and spec.
SarimaxFit fit_sarimax(const DailySeries &series, const SarimaxSpec &spec);

// Re-anchors estimated parameters on new (typically extended) data without
// re-estimating: recomputes the innovation filter, residuals, and loglik;
// coefficients and sigma2 are kept.
SarimaxFit refilter(const SarimaxFit &fit, const DailySeries &series);

// Minimum-MSE mean path plus psi-weight Gaussian prediction intervals.
ForecastResult forecast(const SarimaxFit &fit, int horizon, const ExogTable &future_exog,
                        double alpha = 0.05);

// One-step in-sample residuals aligned to fit.residual_offset.
const std::vector<double> &residual_series(const SarimaxFit &fit);

// Lossless key-value fit summary (coefficients, sigma2, loglik).
std::string sarimax_report(const SarimaxFit &fit);
SarimaxFit sarimax_from_report(const std::string &report, const DailySeries &series);

// Partial-autocorrelation reparameterization onto (-1,1): maps an unconstrained
// vector to coefficients of a stationary (invertible) polynomial, and back.
std::vector<double> pacf_transform(std::span<const double> raw);
std::vector<double> pacf_transform_inverse(std::span<const double> coeffs);

// Coefficients of phi(B)*PHI(B^s) expanded into 1 - sum f_j B^j form (f returned).
std::vector<double> expand_seasonal_polynomial(std::span<const double> nonseasonal,
                                               std::span<const double> seasonal, int period);

// Psi-weights of the integrated process (first `count` values, psi_0 = 1).
std::vector<double> psi_weights(const SarimaxFit &fit, int count);

} // namespace fuelcast
