#pragma once

#include "fuelcast/lstm.hpp"
#include "fuelcast/sarimax.hpp"
#include "fuelcast/series.hpp"

#include <string>

namespace fuelcast {

// Two-stage stack: a SARIMA(X) base model plus a univariate LSTM trained on
// the base model's standardized in-sample residuals. Forecasts are summed;
// interval half-widths combine by independent-variance addition.
struct HybridFit {
	SarimaxFit base;
	LstmParams residual_model;
	Scaler residual_scaler;
	// Residuals were identically zero: stage 2 is the structural zero model.
	bool null_residual_model = false;
};

HybridFit fit_hybrid(const DailySeries &series, const SarimaxSpec &base_spec,
                     const LstmSpec &residual_spec);

ForecastResult forecast_hybrid(const HybridFit &fit, int horizon, const ExogTable &future_exog,
                               double alpha = 0.05);

// Residual-stage mean contribution on the original scale (base + this = hybrid).
std::vector<double> hybrid_residual_forecast(const HybridFit &fit, int horizon);

std::string hybrid_checkpoint(const HybridFit &fit);
HybridFit hybrid_from_checkpoint(const std::string &content, const DailySeries &series);

} // namespace fuelcast
