#include "fuelcast/forecaster.hpp"

#include "fuelcast/errors.hpp"
#include "fuelcast/io.hpp"
#include "fuelcast/stats.hpp"

#include <cmath>
#include <sstream>

namespace fuelcast {

namespace {

void require_fitted(const void *p, const std::string &what) {
	if (p == nullptr) {
		throw ConfigError(what + " has not been fitted");
	}
}

} // namespace

void SarimaxForecaster::fit(const DailySeries &history) {
	fit_ = std::make_unique<SarimaxFit>(fit_sarimax(history, spec_));
}

void SarimaxForecaster::advance(const DailySeries &history) {
	require_fitted(fit_.get(), name());
	fit_ = std::make_unique<SarimaxFit>(refilter(*fit_, history));
}

ForecastResult SarimaxForecaster::predict(int horizon, const ExogTable &future_exog,
                                          double alpha) {
	require_fitted(fit_.get(), name());
	return forecast(*fit_, horizon, future_exog, alpha);
}

std::string SarimaxForecaster::checkpoint() const {
	require_fitted(fit_.get(), name());
	return sarimax_report(*fit_);
}

const SarimaxFit &SarimaxForecaster::model() const {
	require_fitted(fit_.get(), name());
	return *fit_;
}

void SarimaxForecaster::restore(SarimaxFit fit) {
	spec_ = fit.spec;
	fit_ = std::make_unique<SarimaxFit>(std::move(fit));
}

void DecomposableForecaster::fit(const DailySeries &history) {
	fit_ = std::make_unique<DecomposableFit>(fit_decomposable(history, spec_));
}

ForecastResult DecomposableForecaster::predict(int horizon, const ExogTable &future_exog,
                                               double alpha) {
	require_fitted(fit_.get(), name());
	return forecast_decomposable(*fit_, horizon, {}, alpha, future_exog);
}

std::string DecomposableForecaster::name() const {
	return spec_.extra_regressors.empty() ? "decomposable" : "decomposable_mv";
}

std::string DecomposableForecaster::checkpoint() const {
	require_fitted(fit_.get(), name());
	return decomposable_report(*fit_);
}

const DecomposableFit &DecomposableForecaster::model() const {
	require_fitted(fit_.get(), name());
	return *fit_;
}

void DecomposableForecaster::restore(DecomposableFit fit) {
	spec_ = fit.spec;
	fit_ = std::make_unique<DecomposableFit>(std::move(fit));
}

LstmForecaster::LstmForecaster(LstmSpec spec, std::vector<std::string> exog_names)
    : spec_(spec), exog_names_(std::move(exog_names)) {
	spec_.input_dim = 1 + static_cast<int>(exog_names_.size());
}

Eigen::MatrixXd LstmForecaster::standardized_exog_rows(const ExogTable &exog, std::size_t start,
                                                       std::size_t count,
                                                       bool from_history) const {
	Eigen::MatrixXd out(static_cast<Eigen::Index>(count),
	                    static_cast<Eigen::Index>(exog_names_.size()));
	for (std::size_t k = 0; k < exog_names_.size(); ++k) {
		const ExogColumn *found = nullptr;
		for (const auto &col : exog) {
			if (col.name == exog_names_[k]) {
				found = &col;
				break;
			}
		}
		if (found == nullptr || found->values.size() < start + count) {
			throw ConfigError(std::string(from_history ? "history" : "future exog") +
			                  " is missing rows for column '" + exog_names_[k] + "'");
		}
		for (std::size_t i = 0; i < count; ++i) {
			out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
			    exog_scalers_[k].apply(found->values[start + i]);
		}
	}
	return out;
}

void LstmForecaster::fit(const DailySeries &history) {
	target_scaler_ = Scaler::fit(history.values());
	exog_scalers_.clear();
	for (const auto &name : exog_names_) {
		exog_scalers_.push_back(Scaler::fit(history.exog_column(name).values));
	}
	const std::vector<double> std_target = target_scaler_.apply(history.values());
	const Eigen::MatrixXd std_exog =
	    standardized_exog_rows(history.exog(), 0, history.size(), true);
	const LstmTrainingData data = build_training_data(std_target, std_exog, spec_);
	params_ = std::make_unique<LstmParams>(train_lstm(data, spec_).params);
	history_ = std::make_shared<DailySeries>(history);
}

void LstmForecaster::advance(const DailySeries &history) {
	require_fitted(params_.get(), name());
	history_ = std::make_shared<DailySeries>(history);
}

ForecastResult LstmForecaster::predict(int horizon, const ExogTable &future_exog, double alpha) {
	require_fitted(params_.get(), name());
	if (horizon < 1 || horizon > spec_.horizon) {
		throw ConfigError(name() + ": horizon must lie in [1, " + std::to_string(spec_.horizon) +
		                  "]");
	}
	const DailySeries &history = *history_;
	if (history.size() < static_cast<std::size_t>(spec_.window)) {
		throw ConfigError(name() + ": history shorter than the input window");
	}
	const std::size_t w0 = history.size() - static_cast<std::size_t>(spec_.window);
	Eigen::MatrixXd window(spec_.window, spec_.input_dim);
	for (int t = 0; t < spec_.window; ++t) {
		window(t, 0) = target_scaler_.apply(history.values()[w0 + static_cast<std::size_t>(t)]);
	}
	if (!exog_names_.empty()) {
		window.rightCols(spec_.input_dim - 1) =
		    standardized_exog_rows(history.exog(), w0, static_cast<std::size_t>(spec_.window),
		                           true);
	}
	Eigen::MatrixXd fexog;
	if (!exog_names_.empty()) {
		fexog = standardized_exog_rows(future_exog, 0, static_cast<std::size_t>(spec_.horizon),
		                               false);
	}
	const LstmForecast fc = lstm_forward(*params_, window, fexog);

	ForecastResult out;
	out.mean.resize(static_cast<std::size_t>(horizon));
	out.lower.resize(out.mean.size());
	out.upper.resize(out.mean.size());
	const double hw = interval_z(alpha) * fc.sigma * target_scaler_.stddev();
	for (int t = 0; t < horizon; ++t) {
		const double m = target_scaler_.invert(fc.mean[t]);
		out.mean[static_cast<std::size_t>(t)] = m;
		out.lower[static_cast<std::size_t>(t)] = m - hw;
		out.upper[static_cast<std::size_t>(t)] = m + hw;
	}
	return out;
}

std::string LstmForecaster::name() const {
	return exog_names_.empty() ? "lstm" : "lstm_mv";
}

std::string LstmForecaster::checkpoint() const {
	require_fitted(params_.get(), name());
	std::ostringstream out;
	out << "kind=lstm_forecaster\n";
	std::string joined;
	for (std::size_t i = 0; i < exog_names_.size(); ++i) {
		if (i > 0) {
			joined += ',';
		}
		joined += exog_names_[i];
	}
	out << "exog=" << joined << "\n";
	out << "target_scaler_mean=" << format_double(target_scaler_.mean()) << "\n";
	out << "target_scaler_std=" << format_double(target_scaler_.stddev()) << "\n";
	for (std::size_t k = 0; k < exog_scalers_.size(); ++k) {
		out << "exog_scaler_mean." << k << '=' << format_double(exog_scalers_[k].mean()) << "\n";
		out << "exog_scaler_std." << k << '=' << format_double(exog_scalers_[k].stddev()) << "\n";
	}
	out << "[model]\n" << lstm_checkpoint(*params_);
	return out.str();
}

const LstmParams &LstmForecaster::model() const {
	require_fitted(params_.get(), name());
	return *params_;
}

void LstmForecaster::restore(const LstmParams &params, Scaler target_scaler,
                             std::vector<Scaler> exog_scalers, const DailySeries &history) {
	params_ = std::make_unique<LstmParams>(params);
	spec_ = params.spec;
	target_scaler_ = target_scaler;
	exog_scalers_ = std::move(exog_scalers);
	history_ = std::make_shared<DailySeries>(history);
}

void HybridForecaster::fit(const DailySeries &history) {
	LstmSpec residual = residual_spec_;
	fit_ = std::make_unique<HybridFit>(fit_hybrid(history, base_spec_, residual));
}

ForecastResult HybridForecaster::predict(int horizon, const ExogTable &future_exog,
                                         double alpha) {
	require_fitted(fit_.get(), name());
	return forecast_hybrid(*fit_, horizon, future_exog, alpha);
}

std::string HybridForecaster::name() const {
	return base_spec_.exog_names.empty() ? "hybrid_sarima_lstm" : "hybrid_sarimax_lstm";
}

std::string HybridForecaster::checkpoint() const {
	require_fitted(fit_.get(), name());
	return hybrid_checkpoint(*fit_);
}

const HybridFit &HybridForecaster::model() const {
	require_fitted(fit_.get(), name());
	return *fit_;
}

void HybridForecaster::restore(HybridFit fit) {
	base_spec_ = fit.base.spec;
	residual_spec_ = fit.residual_model.spec;
	fit_ = std::make_unique<HybridFit>(std::move(fit));
}

void SeasonalNaiveForecaster::fit(const DailySeries &history) {
	if (history.size() < static_cast<std::size_t>(2 * period_)) {
		throw ConfigError("seasonal naive needs at least two full periods of history");
	}
	history_ = std::make_shared<DailySeries>(history);
	const auto diffs = difference(history.values(), static_cast<std::size_t>(period_));
	double ss = 0.0;
	for (double d : diffs) {
		ss += d * d;
	}
	diff_sd_ = std::sqrt(ss / static_cast<double>(diffs.size()));
}

ForecastResult SeasonalNaiveForecaster::predict(int horizon, const ExogTable &future_exog,
                                                double alpha) {
	(void)future_exog;
	require_fitted(history_.get(), name());
	const auto &values = history_->values();
	const std::size_t n = values.size();
	ForecastResult out;
	out.mean.resize(static_cast<std::size_t>(horizon));
	out.lower.resize(out.mean.size());
	out.upper.resize(out.mean.size());
	const double hw = interval_z(alpha) * diff_sd_;
	for (int h = 1; h <= horizon; ++h) {
		const int k = (h + period_ - 1) / period_;
		const std::size_t src = n + static_cast<std::size_t>(h) - 1 -
		                        static_cast<std::size_t>(k * period_);
		const double m = values[src];
		out.mean[static_cast<std::size_t>(h - 1)] = m;
		out.lower[static_cast<std::size_t>(h - 1)] = m - hw;
		out.upper[static_cast<std::size_t>(h - 1)] = m + hw;
	}
	return out;
}

std::string SeasonalNaiveForecaster::checkpoint() const {
	KeyValueDoc doc;
	doc.set("kind", "seasonal_naive");
	doc.set_int("period", period_);
	return doc.to_string();
}

std::unique_ptr<Forecaster> forecaster_from_checkpoint(const std::string &content,
                                                       const DailySeries &history) {
	// Kind is on the first non-comment line.
	std::istringstream in(content);
	std::string line;
	std::string kind;
	while (std::getline(in, line)) {
		if (line.rfind("kind=", 0) == 0) {
			kind = line.substr(5);
			break;
		}
	}
	if (kind == "sarimax") {
		SarimaxFit fit = sarimax_from_report(content, history);
		auto fc = std::make_unique<SarimaxForecaster>(fit.spec);
		fc->restore(std::move(fit));
		return fc;
	}
	if (kind == "decomposable") {
		DecomposableFit fit = decomposable_from_report(content, history);
		auto fc = std::make_unique<DecomposableForecaster>(fit.spec);
		fc->restore(std::move(fit));
		return fc;
	}
	if (kind == "lstm_forecaster") {
		const auto model_at = content.find("[model]\n");
		if (model_at == std::string::npos) {
			throw DataError("lstm checkpoint missing [model] section");
		}
		const KeyValueDoc header = KeyValueDoc::parse(content.substr(0, model_at));
		const LstmParams params = lstm_from_checkpoint(content.substr(model_at + 8));
		std::vector<std::string> exog_names = header.get_strings("exog");
		const Scaler target(header.get_double("target_scaler_mean"),
		                    header.get_double("target_scaler_std"));
		std::vector<Scaler> exog_scalers;
		for (std::size_t k = 0; k < exog_names.size(); ++k) {
			exog_scalers.emplace_back(
			    header.get_double("exog_scaler_mean." + std::to_string(k)),
			    header.get_double("exog_scaler_std." + std::to_string(k)));
		}
		auto fc = std::make_unique<LstmForecaster>(params.spec, exog_names);
		fc->restore(params, target, std::move(exog_scalers), history);
		return fc;
	}
	if (kind == "hybrid") {
		HybridFit fit = hybrid_from_checkpoint(content, history);
		auto fc = std::make_unique<HybridForecaster>(fit.base.spec, fit.residual_model.spec);
		fc->restore(std::move(fit));
		return fc;
	}
	if (kind == "seasonal_naive") {
		const KeyValueDoc doc = KeyValueDoc::parse(content);
		auto fc = std::make_unique<SeasonalNaiveForecaster>(
		    static_cast<int>(doc.get_int("period")));
		fc->fit(history);
		return fc;
	}
	throw DataError("unknown checkpoint kind '" + kind + "'");
}

std::vector<GridCandidate> sarimax_default_grid(const std::vector<std::string> &exog_names,
                                                int season) {
	std::vector<GridCandidate> grid;
	for (int p = 0; p <= 3; ++p) {
		for (int d = 0; d <= 1; ++d) {
			for (int q = 0; q <= 3; ++q) {
				for (int P = 0; P <= 3; ++P) {
					for (int D = 0; D <= 1; ++D) {
						for (int Q = 0; Q <= 3; ++Q) {
							SarimaxSpec spec;
							spec.p = p;
							spec.d = d;
							spec.q = q;
							spec.P = P;
							spec.D = D;
							spec.Q = Q;
							spec.s = season;
							spec.exog_names = exog_names;
							if (p + q + P + Q == 0 && d + D == 0 && exog_names.empty()) {
								continue; // nothing to estimate beyond a constant
							}
							grid.push_back({spec.label(), [spec]() {
								                return std::make_unique<SarimaxForecaster>(spec);
							                }});
						}
					}
				}
			}
		}
	}
	return grid;
}

std::vector<GridCandidate>
decomposable_default_grid(const std::vector<std::string> &extra_regressors) {
	std::vector<GridCandidate> grid;
	for (double cp : {0.001, 0.01, 0.1, 0.5}) {
		for (double seas : {0.01, 0.1, 1.0, 10.0}) {
			DecomposableSpec spec;
			spec.changepoint_prior_scale = cp;
			spec.seasonality_prior_scale = seas;
			spec.extra_regressors = extra_regressors;
			std::ostringstream label;
			label << "decomposable(cp=" << cp << ",seas=" << seas << ")";
			grid.push_back({label.str(), [spec]() {
				                return std::make_unique<DecomposableForecaster>(spec);
			                }});
		}
	}
	return grid;
}

std::vector<GridCandidate> lstm_default_grid(const std::vector<std::string> &exog_names,
                                             int horizon, std::uint64_t seed) {
	std::vector<GridCandidate> grid;
	for (int window : {14, 28, 56}) {
		for (int layers : {1, 2}) {
			for (int hidden : {16, 32, 64}) {
				LstmSpec spec;
				spec.window = window;
				spec.n_layers = layers;
				spec.hidden_dim = hidden;
				spec.horizon = horizon;
				spec.seed = seed;
				std::ostringstream label;
				label << "lstm(w=" << window << ",l=" << layers << ",h=" << hidden << ")";
				grid.push_back({label.str(), [spec, exog_names]() {
					                return std::make_unique<LstmForecaster>(spec, exog_names);
				                }});
			}
		}
	}
	return grid;
}

} // namespace fuelcast
