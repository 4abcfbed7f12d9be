#pragma once

#include "fuelcast/forecaster.hpp"
#include "fuelcast/metrics.hpp"
#include "fuelcast/series.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace fuelcast {

// Builds a fresh forecaster for a fold; the fold index lets callers derive
// fold-indexed seeds for stochastic trainers.
using ForecasterFactory = std::function<std::unique_ptr<Forecaster>(int fold)>;

struct FoldPath {
	std::size_t start_index = 0; // series index of the first forecast day
	std::vector<double> actual;
	std::vector<double> mean;
	std::vector<double> lower;
	std::vector<double> upper;
};

struct BacktestReport {
	std::vector<MetricSet> fold_metrics;
	MetricSet pooled;    // over the concatenated test residuals (default view)
	MetricSet mean_fold; // average of per-fold metrics
	std::vector<FoldPath> paths;
};

// Walk-forward evaluation over the final `test_len` observations in
// `fold_len`-day folds: each fold refits on all data before the fold start,
// forecasts the fold with known future exogenous rows, then the fold's actuals
// join the training window.
BacktestReport walk_forward(const ForecasterFactory &factory, const DailySeries &series,
                            std::size_t test_len = 90, std::size_t fold_len = 30,
                            double alpha = 0.05);

struct GridCellResult {
	std::string label;
	double validation_mse = std::numeric_limits<double>::quiet_NaN();
	bool failed = false;
	std::string message;
};

struct GridSearchResult {
	std::vector<GridCellResult> cells; // declaration order
	int winner_index = -1;             // -1 when every cell failed

	bool has_winner() const { return winner_index >= 0; }
	const GridCellResult &winner() const;
};

// Scores each candidate by pooled MSE of rolling `horizon`-step forecasts
// (stride = horizon) across the validation segment: one fit on the training
// segment, then re-anchored (Forecaster::advance) at each later origin.
// Failed cells are recorded and skipped; ties keep the earlier candidate.
GridSearchResult grid_search(const std::vector<GridCandidate> &grid, const DailySeries &series,
                             const SplitIndex &split, int horizon = 30, int jobs = 1);

} // namespace fuelcast
