#include "fuelcast/hybrid.hpp"

#include "fuelcast/errors.hpp"
#include "fuelcast/io.hpp"
#include "fuelcast/stats.hpp"

#include <cmath>
#include <sstream>

namespace fuelcast {

namespace {

constexpr double kZeroResidualTolerance = 1e-12;

LstmParams structural_zero_model(LstmSpec spec) {
	spec.seed = 0;
	LstmParams params = init_lstm_params(spec);
	params.head_weight.setZero();
	params.head_bias = 0.0;
	params.log_sigma = std::log(1e-6);
	return params;
}

} // namespace

HybridFit fit_hybrid(const DailySeries &series, const SarimaxSpec &base_spec,
                     const LstmSpec &residual_spec) {
	if (residual_spec.input_dim != 1) {
		throw ConfigError("stage 2 (residual): the residual LSTM is univariate; input_dim must be 1");
	}
	HybridFit fit;
	try {
		fit.base = fit_sarimax(series, base_spec);
	} catch (const EstimationError &e) {
		throw EstimationError(std::string("stage 1 (base): ") + e.what());
	} catch (const ConfigError &e) {
		throw ConfigError(std::string("stage 1 (base): ") + e.what());
	}

	const std::vector<double> &resid = residual_series(fit.base);
	double max_abs = 0.0;
	for (double r : resid) {
		max_abs = std::max(max_abs, std::abs(r));
	}
	if (max_abs < kZeroResidualTolerance) {
		fit.null_residual_model = true;
		fit.residual_scaler = Scaler(0.0, 1.0);
		fit.residual_model = structural_zero_model(residual_spec);
		return fit;
	}

	try {
		fit.residual_scaler = Scaler::fit(resid);
		const std::vector<double> std_resid = fit.residual_scaler.apply(resid);
		const LstmTrainingData data =
		    build_training_data(std_resid, Eigen::MatrixXd::Zero(0, 0), residual_spec);
		fit.residual_model = train_lstm(data, residual_spec).params;
	} catch (const EstimationError &e) {
		throw EstimationError(std::string("stage 2 (residual): ") + e.what());
	} catch (const ConfigError &e) {
		throw ConfigError(std::string("stage 2 (residual): ") + e.what());
	}
	return fit;
}

std::vector<double> hybrid_residual_forecast(const HybridFit &fit, int horizon) {
	const LstmSpec &spec = fit.residual_model.spec;
	if (horizon < 1 || horizon > spec.horizon) {
		throw ConfigError("hybrid horizon must lie in [1, " + std::to_string(spec.horizon) + "]");
	}
	const std::vector<double> &resid = residual_series(fit.base);
	if (resid.size() < static_cast<std::size_t>(spec.window)) {
		throw ConfigError("residual history shorter than the residual model window");
	}
	Eigen::MatrixXd window(spec.window, 1);
	const std::size_t offset = resid.size() - static_cast<std::size_t>(spec.window);
	for (int t = 0; t < spec.window; ++t) {
		window(t, 0) = fit.residual_scaler.apply(resid[offset + static_cast<std::size_t>(t)]);
	}
	const LstmForecast fc = lstm_forward(fit.residual_model, window);
	std::vector<double> out(static_cast<std::size_t>(horizon));
	for (int t = 0; t < horizon; ++t) {
		out[static_cast<std::size_t>(t)] = fit.residual_scaler.invert(fc.mean[t]);
	}
	return out;
}

ForecastResult forecast_hybrid(const HybridFit &fit, int horizon, const ExogTable &future_exog,
                               double alpha) {
	const ForecastResult base = forecast(fit.base, horizon, future_exog, alpha);
	const std::vector<double> resid_mean = hybrid_residual_forecast(fit, horizon);

	const double z = interval_z(alpha);
	const double resid_halfwidth =
	    z * fit.residual_model.sigma() * fit.residual_scaler.stddev();

	ForecastResult out;
	out.mean.resize(base.mean.size());
	out.lower.resize(base.mean.size());
	out.upper.resize(base.mean.size());
	for (std::size_t i = 0; i < base.mean.size(); ++i) {
		const double m = base.mean[i] + resid_mean[i];
		const double base_halfwidth = base.upper[i] - base.mean[i];
		const double hw =
		    std::sqrt(base_halfwidth * base_halfwidth + resid_halfwidth * resid_halfwidth);
		out.mean[i] = m;
		out.lower[i] = m - hw;
		out.upper[i] = m + hw;
	}
	return out;
}

std::string hybrid_checkpoint(const HybridFit &fit) {
	std::ostringstream out;
	out << "kind=hybrid\n";
	out << "residual_scaler_mean=" << format_double(fit.residual_scaler.mean()) << "\n";
	out << "residual_scaler_std=" << format_double(fit.residual_scaler.stddev()) << "\n";
	out << "null_residual=" << (fit.null_residual_model ? 1 : 0) << "\n";
	out << "[base]\n" << sarimax_report(fit.base);
	out << "[residual]\n" << lstm_checkpoint(fit.residual_model);
	return out.str();
}

HybridFit hybrid_from_checkpoint(const std::string &content, const DailySeries &series) {
	const auto base_at = content.find("[base]\n");
	const auto resid_at = content.find("[residual]\n");
	if (base_at == std::string::npos || resid_at == std::string::npos || resid_at < base_at) {
		throw DataError("malformed hybrid checkpoint: missing stage sections");
	}
	const std::string header = content.substr(0, base_at);
	const std::string base_part = content.substr(base_at + 7, resid_at - base_at - 7);
	const std::string resid_part = content.substr(resid_at + 11);

	HybridFit fit;
	double mean = 0.0, stddev = 1.0;
	std::istringstream hs(header);
	std::string line;
	while (std::getline(hs, line)) {
		if (line.empty() || line[0] == '#') {
			continue;
		}
		const auto eq = line.find('=');
		if (eq == std::string::npos) {
			continue;
		}
		const std::string key = line.substr(0, eq);
		const std::string value = line.substr(eq + 1);
		if (key == "kind" && value != "hybrid") {
			throw DataError("checkpoint is not a hybrid model");
		} else if (key == "residual_scaler_mean") {
			mean = parse_double(value);
		} else if (key == "residual_scaler_std") {
			stddev = parse_double(value);
		} else if (key == "null_residual") {
			fit.null_residual_model = value == "1";
		}
	}
	fit.residual_scaler = Scaler(mean, stddev);
	fit.base = sarimax_from_report(base_part, series);
	fit.residual_model = lstm_from_checkpoint(resid_part);
	return fit;
}

} // namespace fuelcast
