#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fuelcast/decomposable.hpp"
#include "fuelcast/errors.hpp"
#include "fuelcast/rng.hpp"
#include "support/testutil.hpp"

#include <Eigen/Dense>

#include <cmath>

using namespace fuelcast;
using testutil::make_series;

namespace {

double sum_abs(const std::vector<double> &xs) {
	double s = 0.0;
	for (double x : xs) {
		s += std::abs(x);
	}
	return s;
}

double sum(const std::vector<double> &xs) {
	double s = 0.0;
	for (double x : xs) {
		s += x;
	}
	return s;
}

} // namespace

TEST_CASE("pure line is recovered with vanishing other components") {
	std::vector<double> y(300);
	for (int t = 0; t < 300; ++t) {
		y[static_cast<std::size_t>(t)] = 2.0 * t + 1.0;
	}
	DecomposableSpec spec;
	spec.n_changepoints = 1;
	spec.changepoint_prior_scale = 0.05;
	spec.seasonality_prior_scale = 10.0;
	const DecomposableFit fit = fit_decomposable(make_series(y), spec);
	CHECK(fit.base_rate == doctest::Approx(2.0).epsilon(1e-4));
	CHECK(fit.offset == doctest::Approx(1.0).epsilon(1e-3));
	CHECK(sum_abs(fit.rate_adjustments) < 1e-4);
	for (double c : fit.weekly_coeffs) {
		CHECK(std::abs(c) < 1e-4);
	}
}

TEST_CASE("weekly sine is recovered by the seasonal block") {
	Rng rng(4);
	std::vector<double> y(700);
	for (int t = 0; t < 700; ++t) {
		y[static_cast<std::size_t>(t)] =
		    5.0 * std::sin(2.0 * M_PI * t / 7.0) + 0.1 * rng.normal();
	}
	DecomposableSpec spec;
	spec.seasonality_prior_scale = 100.0; // effectively unpenalized
	spec.n_changepoints = 5;
	const DecomposableFit fit = fit_decomposable(make_series(y), spec);
	const ComponentPaths paths = fitted_components(fit);
	double sse = 0.0;
	for (int t = 0; t < 700; ++t) {
		const double truth = 5.0 * std::sin(2.0 * M_PI * t / 7.0);
		const double err = paths.seasonal[static_cast<std::size_t>(t)] - truth;
		sse += err * err;
	}
	CHECK(std::sqrt(sse / 700.0) < 0.05);
}

TEST_CASE("changepoint prior scale controls the detected rate change") {
	// Slope +1 then -1 from t=200: total rate change -2.
	std::vector<double> y(400);
	for (int t = 0; t < 400; ++t) {
		y[static_cast<std::size_t>(t)] =
		    t < 200 ? static_cast<double>(t) : 400.0 - static_cast<double>(t);
	}
	const DailySeries series = make_series(y);

	DecomposableSpec loose;
	loose.changepoint_prior_scale = 10.0;
	loose.n_changepoints = 24;
	const DecomposableFit fit_loose = fit_decomposable(series, loose);
	CHECK(sum(fit_loose.rate_adjustments) == doctest::Approx(-2.0).epsilon(0.05));

	DecomposableSpec tight = loose;
	tight.changepoint_prior_scale = 1e-9;
	const DecomposableFit fit_tight = fit_decomposable(series, tight);
	CHECK(sum_abs(fit_tight.rate_adjustments) < 0.2);
}

TEST_CASE("penalty monotonicity across a scale ladder") {
	Rng rng(6);
	std::vector<double> y(420);
	for (int t = 0; t < 420; ++t) {
		const double slope = t < 140 ? 0.8 : (t < 280 ? -0.4 : 0.3);
		const double base = t < 140 ? 0.0 : (t < 280 ? 0.8 * 140 : 0.8 * 140 - 0.4 * 140);
		y[static_cast<std::size_t>(t)] =
		    base + slope * (t - (t < 140 ? 0 : (t < 280 ? 140 : 280))) + 0.3 * rng.normal();
	}
	const DailySeries series = make_series(y);
	double prev = -1.0;
	for (const double scale : {1e-8, 1e-4, 10.0}) {
		DecomposableSpec spec;
		spec.changepoint_prior_scale = scale;
		spec.n_changepoints = 20;
		const DecomposableFit fit = fit_decomposable(series, spec);
		const double total = sum_abs(fit.rate_adjustments);
		if (prev >= 0.0) {
			CHECK(total >= prev - 1e-9); // non-decreasing as the scale grows
		}
		prev = total;
	}
}

TEST_CASE("components sum to the fitted values") {
	Rng rng(8);
	std::vector<double> y(500);
	for (int t = 0; t < 500; ++t) {
		y[static_cast<std::size_t>(t)] = 10.0 + 0.02 * t +
		                                 2.0 * std::sin(2.0 * M_PI * t / 7.0) + rng.normal();
	}
	DecomposableSpec spec;
	const DecomposableFit fit = fit_decomposable(make_series(y), spec);
	const ComponentPaths paths = fitted_components(fit);
	for (std::size_t t = 0; t < paths.total.size(); ++t) {
		const double recon = paths.trend[t] + paths.seasonal[t] + paths.holiday[t] +
		                     paths.regressors[t];
		CHECK(std::abs(recon - paths.total[t]) < 1e-10);
	}
}

TEST_CASE("weak penalties reduce to ordinary least squares") {
	Rng rng(10);
	std::vector<double> y(350);
	for (int t = 0; t < 350; ++t) {
		y[static_cast<std::size_t>(t)] = 4.0 + 0.05 * t +
		                                 1.5 * std::sin(2.0 * M_PI * t / 7.0) +
		                                 0.8 * std::cos(4.0 * M_PI * t / 7.0) + 0.2 * rng.normal();
	}
	DecomposableSpec spec;
	spec.n_changepoints = 0;
	spec.seasonality_prior_scale = 1e6;
	spec.fourier_order_weekly = 3;
	const DecomposableFit fit = fit_decomposable(make_series(y), spec);

	// Direct least-squares oracle on the same design.
	const int cols = 2 + 6;
	Eigen::MatrixXd X(350, cols);
	Eigen::VectorXd yv(350);
	for (int t = 0; t < 350; ++t) {
		X(t, 0) = t;
		X(t, 1) = 1.0;
		for (int k = 1; k <= 3; ++k) {
			X(t, 2 * k) = std::cos(2.0 * M_PI * k * t / 7.0);
			X(t, 2 * k + 1) = std::sin(2.0 * M_PI * k * t / 7.0);
		}
		yv(t) = y[static_cast<std::size_t>(t)];
	}
	const Eigen::VectorXd beta = (X.transpose() * X).ldlt().solve(X.transpose() * yv);
	CHECK(std::abs(fit.base_rate - beta(0)) < 1e-6);
	CHECK(std::abs(fit.offset - beta(1)) < 1e-6);
	for (int k = 0; k < 6; ++k) {
		CHECK(std::abs(fit.weekly_coeffs[static_cast<std::size_t>(k)] - beta(2 + k)) < 1e-6);
	}
}

TEST_CASE("line forecast continues the line") {
	std::vector<double> y(250);
	for (int t = 0; t < 250; ++t) {
		y[static_cast<std::size_t>(t)] = 2.0 * t + 1.0;
	}
	DecomposableSpec spec;
	spec.n_changepoints = 5;
	const DecomposableFit fit = fit_decomposable(make_series(y), spec);
	const ForecastResult fc = forecast_decomposable(fit, 30, {});
	for (int h = 0; h < 30; ++h) {
		const double expect = 2.0 * (250 + h) + 1.0;
		CHECK(std::abs(fc.mean[static_cast<std::size_t>(h)] - expect) < 1e-3);
	}
}

TEST_CASE("weekly sine forecast keeps period and phase") {
	std::vector<double> y(364);
	for (int t = 0; t < 364; ++t) {
		y[static_cast<std::size_t>(t)] = 3.0 * std::sin(2.0 * M_PI * t / 7.0);
	}
	DecomposableSpec spec;
	spec.seasonality_prior_scale = 1000.0;
	spec.n_changepoints = 3;
	const DecomposableFit fit = fit_decomposable(make_series(y), spec);
	const ForecastResult fc = forecast_decomposable(fit, 28, {});
	for (int h = 0; h < 28; ++h) {
		const double truth = 3.0 * std::sin(2.0 * M_PI * (364 + h) / 7.0);
		CHECK(std::abs(fc.mean[static_cast<std::size_t>(h)] - truth) < 0.02);
	}
}

TEST_CASE("exactly fit data floors the interval width") {
	std::vector<double> y(200);
	for (int t = 0; t < 200; ++t) {
		y[static_cast<std::size_t>(t)] = 1.5 * t + 2.0;
	}
	DecomposableSpec spec;
	spec.n_changepoints = 0;
	const DecomposableFit fit = fit_decomposable(make_series(y), spec);
	CHECK(fit.degenerate_sigma);
	CHECK(fit.residual_sigma == 1e-8);
	const ForecastResult fc = forecast_decomposable(fit, 5, {});
	CHECK(fc.upper[0] - fc.lower[0] > 0.0);
	CHECK(fc.upper[0] - fc.lower[0] < 1e-6);
}

TEST_CASE("extra regressor recovers an exact linear relation") {
	Rng rng(12);
	std::vector<double> x(400), y(400);
	for (int t = 0; t < 400; ++t) {
		x[static_cast<std::size_t>(t)] = rng.normal(10.0, 3.0);
		y[static_cast<std::size_t>(t)] = 4.0 * x[static_cast<std::size_t>(t)];
	}
	ExogTable exog;
	exog.push_back({"drive", x});
	DecomposableSpec spec;
	spec.extra_regressors = {"drive"};
	spec.seasonality_prior_scale = 1e5;
	spec.n_changepoints = 0;
	const DecomposableFit fit = fit_decomposable(make_series(y, exog), spec);
	CHECK(std::abs(fit.extra_coef[0] - 4.0) < 1e-3);
}

TEST_CASE("zero exog column leaves the fit unchanged") {
	Rng rng(13);
	std::vector<double> y(300);
	for (int t = 0; t < 300; ++t) {
		y[static_cast<std::size_t>(t)] = 5.0 + 0.1 * t + rng.normal();
	}
	ExogTable exog;
	exog.push_back({"zeros", std::vector<double>(300, 0.0)});
	DecomposableSpec uni;
	const DecomposableFit fit_uni = fit_decomposable(make_series(y), uni);
	DecomposableSpec mv = uni;
	mv.extra_regressors = {"zeros"};
	const DecomposableFit fit_mv = fit_decomposable(make_series(y, exog), mv);
	CHECK(fit_mv.extra_coef[0] == 0.0);
	CHECK(std::abs(fit_mv.base_rate - fit_uni.base_rate) < 1e-9);
	CHECK(std::abs(fit_mv.offset - fit_uni.offset) < 1e-9);
}

TEST_CASE("trend plus schedule regression recovers the coefficient") {
	Rng rng(14);
	std::vector<double> x(1000), y(1000);
	for (int t = 0; t < 1000; ++t) {
		x[static_cast<std::size_t>(t)] = 20.0 + 3.0 * std::sin(2.0 * M_PI * t / 53.0) +
		                                 rng.normal();
		y[static_cast<std::size_t>(t)] =
		    3.0 + 0.01 * t + 2.0 * x[static_cast<std::size_t>(t)] + 0.5 * rng.normal();
	}
	ExogTable exog;
	exog.push_back({"schedule", x});
	DecomposableSpec spec;
	spec.extra_regressors = {"schedule"};
	const DecomposableFit fit = fit_decomposable(make_series(y, exog), spec);
	CHECK(std::abs(fit.extra_coef[0] - 2.0) < 0.1);
}

TEST_CASE("holiday classes contribute exactly zero without dates") {
	Rng rng(16);
	std::vector<double> y(250);
	for (double &v : y) {
		v = rng.normal(10.0, 2.0);
	}
	DecomposableSpec spec;
	const DecomposableFit fit = fit_decomposable(make_series(y), spec);
	CHECK(fit.holiday_classes.empty());
	const ComponentPaths paths = fitted_components(fit);
	for (double h : paths.holiday) {
		CHECK(h == 0.0);
	}
}

TEST_CASE("holiday effects are learned per recurring class") {
	std::vector<double> y(740, 10.0);
	std::vector<Date> holidays;
	// A +7 bump every Dec 25 (twice in the window).
	const Date start = testutil::start_date();
	for (std::size_t i = 0; i < y.size(); ++i) {
		int yy, mm, dd;
		(start + static_cast<std::int64_t>(i)).to_ymd(yy, mm, dd);
		if (mm == 12 && dd == 25) {
			y[i] += 7.0;
			holidays.push_back(start + static_cast<std::int64_t>(i));
		}
	}
	DecomposableSpec spec;
	spec.holidays = holidays;
	spec.fourier_order_yearly = 0; // keep the effect out of the yearly block
	const DecomposableFit fit = fit_decomposable(make_series(y), spec);
	REQUIRE(fit.holiday_classes.size() == 1);
	CHECK(fit.holiday_classes[0].effect == doctest::Approx(7.0).epsilon(0.02));

	// The effect applies to the matching future date supplied at forecast time.
	const std::size_t n = y.size();
	std::vector<Date> future;
	ForecastResult base_fc = forecast_decomposable(fit, 30, future);
	int yy, mm, dd;
	bool found = false;
	for (int h = 0; h < 30 && !found; ++h) {
		const Date d = start + static_cast<std::int64_t>(n + static_cast<std::size_t>(h));
		d.to_ymd(yy, mm, dd);
		if (mm == 12 && dd == 25) {
			future.push_back(d);
			const ForecastResult with_fc = forecast_decomposable(fit, 30, future);
			CHECK(with_fc.mean[static_cast<std::size_t>(h)] -
			          base_fc.mean[static_cast<std::size_t>(h)] ==
			      doctest::Approx(fit.holiday_classes[0].effect));
			found = true;
		}
	}
}

TEST_CASE("structure errors") {
	DecomposableSpec spec;
	spec.changepoint_prior_scale = -1.0;
	CHECK_THROWS_AS(fit_decomposable(make_series(std::vector<double>(300, 1.0)), spec),
	                ConfigError);

	DecomposableSpec too_many;
	too_many.n_changepoints = 200;
	CHECK_THROWS_AS(fit_decomposable(make_series(std::vector<double>(300, 1.0)), too_many),
	                ConfigError);

	DecomposableSpec huge_fourier;
	huge_fourier.n_changepoints = 0;
	huge_fourier.fourier_order_weekly = 40;
	std::vector<double> short_series(170);
	Rng rng(9);
	for (double &v : short_series) {
		v = rng.normal();
	}
	CHECK_THROWS(fit_decomposable(make_series(short_series), huge_fourier));
}

TEST_CASE("report round-trips and reproduces forecasts") {
	Rng rng(20);
	std::vector<double> y(400);
	for (int t = 0; t < 400; ++t) {
		y[static_cast<std::size_t>(t)] = 8.0 + 0.03 * t +
		                                 1.5 * std::sin(2.0 * M_PI * t / 7.0) + 0.4 * rng.normal();
	}
	const DailySeries series = make_series(y);
	DecomposableSpec spec;
	const DecomposableFit fit = fit_decomposable(series, spec);
	const DecomposableFit restored =
	    decomposable_from_report(decomposable_report(fit), series);
	const ForecastResult a = forecast_decomposable(fit, 30, {});
	const ForecastResult b = forecast_decomposable(restored, 30, {});
	for (std::size_t h = 0; h < 30; ++h) {
		CHECK(a.mean[h] == b.mean[h]);
		CHECK(a.upper[h] == b.upper[h]);
	}
}
