#include "fuelcast/backtest.hpp"

#include "fuelcast/errors.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace fuelcast {

BacktestReport walk_forward(const ForecasterFactory &factory, const DailySeries &series,
                            std::size_t test_len, std::size_t fold_len, double alpha) {
	if (fold_len == 0 || test_len == 0 || test_len % fold_len != 0) {
		throw ConfigError("test_len must be a positive multiple of fold_len");
	}
	if (test_len >= series.size()) {
		throw ConfigError("insufficient history before the test window");
	}
	const std::size_t n_folds = test_len / fold_len;
	const std::size_t test_start = series.size() - test_len;

	BacktestReport report;
	std::vector<double> all_actual, all_pred;
	all_actual.reserve(test_len);
	all_pred.reserve(test_len);

	for (std::size_t k = 0; k < n_folds; ++k) {
		const std::size_t origin = test_start + k * fold_len;
		auto forecaster = factory(static_cast<int>(k));
		forecaster->fit(series.prefix(origin));
		const ExogTable future_exog = series.exog_rows(origin, fold_len);
		const ForecastResult fc =
		    forecaster->predict(static_cast<int>(fold_len), future_exog, alpha);

		FoldPath path;
		path.start_index = origin;
		path.mean = fc.mean;
		path.lower = fc.lower;
		path.upper = fc.upper;
		path.actual.assign(series.values().begin() + static_cast<std::ptrdiff_t>(origin),
		                   series.values().begin() +
		                       static_cast<std::ptrdiff_t>(origin + fold_len));
		report.fold_metrics.push_back(compute_metrics(path.actual, path.mean));
		all_actual.insert(all_actual.end(), path.actual.begin(), path.actual.end());
		all_pred.insert(all_pred.end(), path.mean.begin(), path.mean.end());
		report.paths.push_back(std::move(path));
	}

	report.pooled = compute_metrics(all_actual, all_pred);
	MetricSet mean_fold;
	for (const auto &m : report.fold_metrics) {
		mean_fold.rmse += m.rmse;
		mean_fold.mae += m.mae;
		mean_fold.smape += m.smape;
	}
	const double nf = static_cast<double>(n_folds);
	mean_fold.rmse /= nf;
	mean_fold.mae /= nf;
	mean_fold.smape /= nf;
	report.mean_fold = mean_fold;
	return report;
}

const GridCellResult &GridSearchResult::winner() const {
	if (!has_winner()) {
		throw EstimationError("grid search has no successful cell");
	}
	return cells[static_cast<std::size_t>(winner_index)];
}

namespace {

GridCellResult score_cell(const GridCandidate &candidate, const DailySeries &series,
                          const SplitIndex &split, int horizon) {
	GridCellResult cell;
	cell.label = candidate.label;
	try {
		auto forecaster = candidate.make();
		forecaster->fit(series.prefix(split.train_end));
		double total_sq = 0.0;
		std::size_t total_points = 0;
		for (std::size_t origin = split.train_end; origin < split.val_end;
		     origin += static_cast<std::size_t>(horizon)) {
			const std::size_t h =
			    std::min<std::size_t>(static_cast<std::size_t>(horizon), split.val_end - origin);
			if (origin > split.train_end) {
				forecaster->advance(series.prefix(origin));
			}
			const ForecastResult fc =
			    forecaster->predict(static_cast<int>(h), series.exog_rows(origin, h), 0.05);
			for (std::size_t i = 0; i < h; ++i) {
				const double err = series.values()[origin + i] - fc.mean[i];
				total_sq += err * err;
			}
			total_points += h;
		}
		if (total_points == 0) {
			throw ConfigError("empty validation segment");
		}
		cell.validation_mse = total_sq / static_cast<double>(total_points);
		if (!std::isfinite(cell.validation_mse)) {
			cell.failed = true;
			cell.message = "non-finite validation MSE";
		}
	} catch (const std::exception &e) {
		cell.failed = true;
		cell.message = e.what();
	}
	return cell;
}

} // namespace

GridSearchResult grid_search(const std::vector<GridCandidate> &grid, const DailySeries &series,
                             const SplitIndex &split, int horizon, int jobs) {
	if (grid.empty()) {
		throw ConfigError("grid must not be empty");
	}
	if (horizon < 1) {
		throw ConfigError("grid search horizon must be >= 1");
	}
	if (split.val_end <= split.train_end || split.val_end > series.size()) {
		throw ConfigError("invalid split for grid search");
	}

	GridSearchResult result;
	result.cells.resize(grid.size());

	if (jobs <= 1) {
		for (std::size_t i = 0; i < grid.size(); ++i) {
			result.cells[i] = score_cell(grid[i], series, split, horizon);
		}
	} else {
		std::atomic<std::size_t> next{0};
		auto worker = [&]() {
			for (;;) {
				const std::size_t i = next.fetch_add(1);
				if (i >= grid.size()) {
					return;
				}
				result.cells[i] = score_cell(grid[i], series, split, horizon);
			}
		};
		std::vector<std::thread> threads;
		const int n_threads = std::min<int>(jobs, static_cast<int>(grid.size()));
		threads.reserve(static_cast<std::size_t>(n_threads));
		for (int t = 0; t < n_threads; ++t) {
			threads.emplace_back(worker);
		}
		for (auto &t : threads) {
			t.join();
		}
	}

	for (std::size_t i = 0; i < result.cells.size(); ++i) {
		const auto &cell = result.cells[i];
		if (cell.failed) {
			continue;
		}
		if (result.winner_index < 0 ||
		    cell.validation_mse <
		        result.cells[static_cast<std::size_t>(result.winner_index)].validation_mse) {
			result.winner_index = static_cast<int>(i);
		}
	}
	return result;
}

} // namespace fuelcast
