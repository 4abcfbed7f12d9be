#pragma once

#include "fuelcast/decomposable.hpp"
#include "fuelcast/hybrid.hpp"
#include "fuelcast/lstm.hpp"
#include "fuelcast/sarimax.hpp"
#include "fuelcast/series.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace fuelcast {

// Common face of every model family for backtesting and tuning.
class Forecaster {
public:
	virtual ~Forecaster() = default;

	virtual void fit(const DailySeries &history) = 0;
	// Re-anchor on extended history without re-estimating; defaults to refit.
	virtual void advance(const DailySeries &history) { fit(history); }
	virtual ForecastResult predict(int horizon, const ExogTable &future_exog, double alpha) = 0;
	virtual std::string name() const = 0;
	// Serialized model state; reload with forecaster_from_checkpoint.
	virtual std::string checkpoint() const = 0;
};

class SarimaxForecaster : public Forecaster {
public:
	explicit SarimaxForecaster(SarimaxSpec spec) : spec_(std::move(spec)) {}

	void fit(const DailySeries &history) override;
	void advance(const DailySeries &history) override;
	ForecastResult predict(int horizon, const ExogTable &future_exog, double alpha) override;
	std::string name() const override { return spec_.label(); }
	std::string checkpoint() const override;

	const SarimaxFit &model() const;
	void restore(SarimaxFit fit);

private:
	SarimaxSpec spec_;
	std::unique_ptr<SarimaxFit> fit_;
};

class DecomposableForecaster : public Forecaster {
public:
	explicit DecomposableForecaster(DecomposableSpec spec) : spec_(std::move(spec)) {}

	void fit(const DailySeries &history) override;
	ForecastResult predict(int horizon, const ExogTable &future_exog, double alpha) override;
	std::string name() const override;
	std::string checkpoint() const override;

	const DecomposableFit &model() const;
	void restore(DecomposableFit fit);

private:
	DecomposableSpec spec_;
	std::unique_ptr<DecomposableFit> fit_;
};

// Standardizes the target (and any exogenous columns) with scalers fit on the
// training history, trains the seq2seq network, and maps forecasts back to the
// original scale with a constant-width interval from the trained sigma.
class LstmForecaster : public Forecaster {
public:
	LstmForecaster(LstmSpec spec, std::vector<std::string> exog_names = {});

	void fit(const DailySeries &history) override;
	void advance(const DailySeries &history) override;
	ForecastResult predict(int horizon, const ExogTable &future_exog, double alpha) override;
	std::string name() const override;
	std::string checkpoint() const override;

	const LstmParams &model() const;
	void restore(const LstmParams &params, Scaler target_scaler, std::vector<Scaler> exog_scalers,
	             const DailySeries &history);

private:
	Eigen::MatrixXd standardized_exog_rows(const ExogTable &exog, std::size_t start,
	                                       std::size_t count, bool from_history) const;

	LstmSpec spec_;
	std::vector<std::string> exog_names_;
	std::unique_ptr<LstmParams> params_;
	Scaler target_scaler_;
	std::vector<Scaler> exog_scalers_;
	std::shared_ptr<const DailySeries> history_;
};

class HybridForecaster : public Forecaster {
public:
	HybridForecaster(SarimaxSpec base_spec, LstmSpec residual_spec)
	    : base_spec_(std::move(base_spec)), residual_spec_(residual_spec) {}

	void fit(const DailySeries &history) override;
	ForecastResult predict(int horizon, const ExogTable &future_exog, double alpha) override;
	std::string name() const override;
	std::string checkpoint() const override;

	const HybridFit &model() const;
	void restore(HybridFit fit);

private:
	SarimaxSpec base_spec_;
	LstmSpec residual_spec_;
	std::unique_ptr<HybridFit> fit_;
};

// Repeats the last observed seasonal period.
class SeasonalNaiveForecaster : public Forecaster {
public:
	explicit SeasonalNaiveForecaster(int period = 7) : period_(period) {}

	void fit(const DailySeries &history) override;
	void advance(const DailySeries &history) override { fit(history); }
	ForecastResult predict(int horizon, const ExogTable &future_exog, double alpha) override;
	std::string name() const override { return "seasonal_naive"; }
	std::string checkpoint() const override;

private:
	int period_;
	std::shared_ptr<const DailySeries> history_;
	double diff_sd_ = 0.0;
};

std::unique_ptr<Forecaster> forecaster_from_checkpoint(const std::string &content,
                                                       const DailySeries &history);

// One cell of a hyperparameter grid.
struct GridCandidate {
	std::string label;
	std::function<std::unique_ptr<Forecaster>()> make;
};

// Default grids: SARIMA p,q,P,Q in 0..3 and d,D in {0,1} with s fixed;
// decomposable prior scales {0.001,0.01,0.1,0.5} x {0.01,0.1,1,10};
// LSTM window {14,28,56} x layers {1,2} x hidden {16,32,64}.
std::vector<GridCandidate> sarimax_default_grid(const std::vector<std::string> &exog_names,
                                                int season = 7);
std::vector<GridCandidate>
decomposable_default_grid(const std::vector<std::string> &extra_regressors);
std::vector<GridCandidate> lstm_default_grid(const std::vector<std::string> &exog_names,
                                             int horizon, std::uint64_t seed);

} // namespace fuelcast
