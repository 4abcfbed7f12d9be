#pragma once

#include "fuelcast/series.hpp"

#include <memory>
#include <string>
#include <vector>

namespace fuelcast {

// Additive model y(t) = trend + seasonality + holidays + noise with
// piecewise-linear trend and Fourier seasonal blocks. The two prior scales act
// as penalty scales: L1 with weight 1/changepoint_prior_scale on trend-rate
// changes, L2 with weight 1/(2*seasonality_prior_scale^2) on Fourier (and
// holiday / extra-regressor) coefficients.
struct DecomposableSpec {
	double changepoint_prior_scale = 0.05;
	double seasonality_prior_scale = 10.0;
	int n_changepoints = 25;
	int fourier_order_weekly = 3;
	int fourier_order_yearly = 10; // used only when the training span covers >= 730 days
	std::vector<Date> holidays;
	std::vector<std::string> extra_regressors;
};

// Effects are shared per recurring (month, day) holiday class.
struct HolidayClass {
	int month = 0;
	int day = 0;
	double effect = 0.0;
};

struct DecomposableFit {
	DecomposableSpec spec;
	Date start_date;
	std::size_t n_train = 0;
	double base_rate = 0.0; // trend slope per day
	double offset = 0.0;    // trend value at t = 0
	std::vector<double> changepoint_times; // day indices, fractional
	std::vector<double> rate_adjustments;  // one per changepoint, L1-penalized
	std::vector<double> weekly_coeffs;     // [cos1, sin1, cos2, sin2, ...]
	std::vector<double> yearly_coeffs;     // empty when yearly seasonality disabled
	std::vector<HolidayClass> holiday_classes;
	std::vector<double> extra_coef; // one per extra regressor
	double residual_sigma = 0.0;
	bool degenerate_sigma = false; // residual variance hit the 1e-8 floor

	std::shared_ptr<const DailySeries> data;
};

struct ComponentPaths {
	std::vector<double> trend;
	std::vector<double> seasonal;
	std::vector<double> holiday;
	std::vector<double> regressors;
	std::vector<double> total;
};

// Penalized least squares: closed-form ridge for the linear block alternating
// with coordinate descent on the changepoint adjustments. Deterministic.
DecomposableFit fit_decomposable(const DailySeries &series, const DecomposableSpec &spec);

// Trend extrapolates at the final segment rate; interval is a constant-width
// Gaussian band from residual_sigma. `future_exog` is required exactly when the
// fit uses extra regressors.
ForecastResult forecast_decomposable(const DecomposableFit &fit, int horizon,
                                     const std::vector<Date> &future_holidays, double alpha = 0.05,
                                     const ExogTable &future_exog = {});

// Component time-paths over [start_index, start_index + length). Holiday dates
// and exog values are taken from `holidays`/`exog` (training values when
// evaluating the fitted range).
ComponentPaths evaluate_components(const DecomposableFit &fit, std::size_t start_index,
                                   std::size_t length, const std::vector<Date> &holidays,
                                   const ExogTable &exog);

// Fitted component paths over the training window.
ComponentPaths fitted_components(const DecomposableFit &fit);

std::string decomposable_report(const DecomposableFit &fit);
DecomposableFit decomposable_from_report(const std::string &report, const DailySeries &series);

} // namespace fuelcast
