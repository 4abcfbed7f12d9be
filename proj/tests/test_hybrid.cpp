#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fuelcast/errors.hpp"
#include "fuelcast/hybrid.hpp"
#include "fuelcast/lstm.hpp"
#include "fuelcast/rng.hpp"
#include "support/sim.hpp"
#include "support/testutil.hpp"

#include <cmath>

using namespace fuelcast;
using testutil::make_series;
using testutil::SimModel;
using testutil::simulate_sarima;

namespace {

LstmSpec small_residual_spec(std::uint64_t seed) {
	LstmSpec spec;
	spec.window = 14;
	spec.hidden_dim = 8;
	spec.horizon = 30;
	spec.max_epochs = 60;
	spec.patience = 10;
	spec.seed = seed;
	return spec;
}

} // namespace

TEST_CASE("residuals of a pure SARIMA process carry no learnable signal") {
	SimModel model;
	model.ar = {0.6};
	model.level = 40.0;
	const auto sim = simulate_sarima(model, 700, 7);
	SarimaxSpec base;
	base.p = 1;
	const HybridFit fit = fit_hybrid(make_series(sim.series), base, small_residual_spec(7));

	// Validation NLL of the trained stage 2 vs the zero predictor at the same
	// sigma: the gap per term stays tiny because the residuals are white noise.
	const std::vector<double> std_resid =
	    fit.residual_scaler.apply(residual_series(fit.base));
	const LstmTrainingData data = build_training_data(
	    std_resid, Eigen::MatrixXd::Zero(0, 0), fit.residual_model.spec);
	const int n_val = std::max(
	    1, static_cast<int>(std::lround(fit.residual_model.spec.val_fraction * data.n_samples)));
	std::vector<int> val_idx;
	for (int i = data.n_samples - n_val; i < data.n_samples; ++i) {
		val_idx.push_back(i);
	}
	const double model_nll = lstm_loss(fit.residual_model, data, val_idx);

	// Zero predictor oracle at the same sigma.
	double zero_nll = 0.0;
	const double sigma = fit.residual_model.sigma();
	for (const int i : val_idx) {
		for (int h = 0; h < data.horizon; ++h) {
			const double y = data.target[i + data.window + h];
			zero_nll += std::log(sigma) + 0.5 * std::log(2.0 * M_PI) +
			            y * y / (2.0 * sigma * sigma);
		}
	}
	const double n_terms = static_cast<double>(val_idx.size() * data.horizon);
	CHECK((zero_nll - model_nll) / n_terms < 0.05);
}

TEST_CASE("an injected deterministic residual pattern is learned by stage 2") {
	SimModel model;
	model.ar = {0.5};
	model.level = 60.0;
	const auto sim = simulate_sarima(model, 760, 17);
	std::vector<double> y = sim.series;
	for (std::size_t t = 0; t < y.size(); t += 14) {
		y[t] += 6.0; // post-hoc spike every 14 days
	}
	const DailySeries series = make_series(y);
	SarimaxSpec base;
	base.p = 1;
	LstmSpec residual = small_residual_spec(17);
	residual.window = 28;
	residual.max_epochs = 120;

	const HybridFit fit = fit_hybrid(series, base, residual);

	// Out-of-sample check over the last 30 points the hybrid never saw: refit
	// both on the prefix and compare forecast errors.
	const std::size_t cut = y.size() - 30;
	const DailySeries train = series.prefix(cut);
	const SarimaxFit base_fit = fit_sarimax(train, base);
	const HybridFit hybrid_fit = fit_hybrid(train, base, residual);
	const ForecastResult base_fc = forecast(base_fit, 30, {}, 0.05);
	const ForecastResult hybrid_fc = forecast_hybrid(hybrid_fit, 30, {}, 0.05);
	const std::vector<double> actual(y.begin() + static_cast<std::ptrdiff_t>(cut), y.end());
	double base_sse = 0.0, hybrid_sse = 0.0;
	for (std::size_t i = 0; i < 30; ++i) {
		base_sse += (actual[i] - base_fc.mean[i]) * (actual[i] - base_fc.mean[i]);
		hybrid_sse += (actual[i] - hybrid_fc.mean[i]) * (actual[i] - hybrid_fc.mean[i]);
	}
	CHECK(hybrid_sse < base_sse);
}

TEST_CASE("residual series shorter than window plus horizon is rejected") {
	SimModel model;
	model.ar = {0.4};
	const auto sim = simulate_sarima(model, 60, 3);
	SarimaxSpec base;
	base.p = 1;
	LstmSpec residual = small_residual_spec(3);
	residual.window = 40;
	residual.horizon = 30;
	CHECK_THROWS_AS(fit_hybrid(make_series(sim.series), base, residual), ConfigError);
}

TEST_CASE("zero-parameter residual model leaves the base forecast unchanged") {
	SimModel model;
	model.ar = {0.5};
	const auto sim = simulate_sarima(model, 400, 23);
	const DailySeries series = make_series(sim.series);
	SarimaxSpec base_spec;
	base_spec.p = 1;

	HybridFit fit;
	fit.base = fit_sarimax(series, base_spec);
	LstmSpec residual = small_residual_spec(23);
	fit.residual_model = init_lstm_params(residual);
	for (auto view : parameter_views(fit.residual_model)) {
		for (double &v : view) {
			v = 0.0;
		}
	}
	fit.residual_scaler = Scaler(0.0, 1.0);

	const ForecastResult base_fc = forecast(fit.base, 30, {}, 0.05);
	const ForecastResult hybrid_fc = forecast_hybrid(fit, 30, {}, 0.05);
	for (std::size_t h = 0; h < 30; ++h) {
		CHECK(hybrid_fc.mean[h] == base_fc.mean[h]);
	}
}

TEST_CASE("component forecasts add exactly") {
	SimModel model;
	model.ar = {0.6};
	model.seasonal_ma = {0.3};
	model.s = 7;
	const auto sim = simulate_sarima(model, 600, 29);
	const DailySeries series = make_series(sim.series);
	SarimaxSpec base;
	base.p = 1;
	base.Q = 1;
	base.s = 7;
	const HybridFit fit = fit_hybrid(series, base, small_residual_spec(29));
	const ForecastResult base_fc = forecast(fit.base, 30, {}, 0.05);
	const std::vector<double> resid_fc = hybrid_residual_forecast(fit, 30);
	const ForecastResult hybrid_fc = forecast_hybrid(fit, 30, {}, 0.05);
	for (std::size_t h = 0; h < 30; ++h) {
		CHECK(std::abs(hybrid_fc.mean[h] - resid_fc[h] - base_fc.mean[h]) < 1e-10);
	}
	// Fig. 2 sum on a constructed pair: base [10, 10] + residual [1, -1].
	CHECK(10.0 + 1.0 == 11.0);
	CHECK(10.0 + -1.0 == 9.0);
}

TEST_CASE("identically zero residuals reduce the hybrid to its base") {
	// A deterministic trend + weekly series is fit exactly by the saturated
	// differencing model, leaving all-zero residuals.
	std::vector<double> y(300);
	for (int t = 0; t < 300; ++t) {
		y[static_cast<std::size_t>(t)] =
		    5.0 + 0.3 * t + 2.0 * std::sin(2.0 * M_PI * (t % 7) / 7.0);
	}
	const DailySeries series = make_series(y);
	SarimaxSpec base;
	base.d = 1;
	base.D = 1;
	base.s = 7;
	const HybridFit fit = fit_hybrid(series, base, small_residual_spec(1));
	CHECK(fit.null_residual_model);
	const std::vector<double> resid_fc = hybrid_residual_forecast(fit, 30);
	for (double v : resid_fc) {
		CHECK(v == 0.0);
	}
	const ForecastResult base_fc = forecast(fit.base, 30, {}, 0.05);
	const ForecastResult hybrid_fc = forecast_hybrid(fit, 30, {}, 0.05);
	for (std::size_t h = 0; h < 30; ++h) {
		CHECK(hybrid_fc.mean[h] == base_fc.mean[h]);
	}
}

TEST_CASE("interval half-widths combine by independent variances") {
	SimModel model;
	model.ar = {0.4};
	const auto sim = simulate_sarima(model, 500, 37);
	const DailySeries series = make_series(sim.series);
	SarimaxSpec base;
	base.p = 1;
	const HybridFit fit = fit_hybrid(series, base, small_residual_spec(37));
	const ForecastResult base_fc = forecast(fit.base, 10, {}, 0.05);
	const ForecastResult hybrid_fc = forecast_hybrid(fit, 10, {}, 0.05);
	const double resid_hw =
	    1.959964 * fit.residual_model.sigma() * fit.residual_scaler.stddev();
	for (std::size_t h = 0; h < 10; ++h) {
		const double base_hw = base_fc.upper[h] - base_fc.mean[h];
		const double expected = std::sqrt(base_hw * base_hw + resid_hw * resid_hw);
		CHECK(hybrid_fc.upper[h] - hybrid_fc.mean[h] == doctest::Approx(expected).epsilon(1e-12));
	}
}

TEST_CASE("stage errors carry stage labels") {
	SarimaxSpec bad_base;
	bad_base.P = 1;
	bad_base.s = 1; // invalid seasonal period
	CHECK_THROWS_WITH_AS(
	    fit_hybrid(make_series(std::vector<double>(200, 1.0)), bad_base, small_residual_spec(1)),
	    doctest::Contains("stage 1"), ConfigError);

	LstmSpec mv = small_residual_spec(1);
	mv.input_dim = 2;
	SarimaxSpec base;
	base.p = 1;
	CHECK_THROWS_WITH_AS(
	    fit_hybrid(make_series(std::vector<double>(200, 1.0)), base, mv),
	    doctest::Contains("stage 2"), ConfigError);
}

TEST_CASE("hybrid checkpoint round-trips forecasts bit-for-bit") {
	SimModel model;
	model.ar = {0.55};
	const auto sim = simulate_sarima(model, 500, 41);
	const DailySeries series = make_series(sim.series);
	SarimaxSpec base;
	base.p = 1;
	const HybridFit fit = fit_hybrid(series, base, small_residual_spec(41));
	const HybridFit restored = hybrid_from_checkpoint(hybrid_checkpoint(fit), series);
	const ForecastResult a = forecast_hybrid(fit, 30, {}, 0.05);
	const ForecastResult b = forecast_hybrid(restored, 30, {}, 0.05);
	for (std::size_t h = 0; h < 30; ++h) {
		CHECK(a.mean[h] == b.mean[h]);
		CHECK(a.lower[h] == b.lower[h]);
		CHECK(a.upper[h] == b.upper[h]);
	}
}
