#pragma once

#include "fuelcast/date.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fuelcast {

struct ExogColumn {
	std::string name;
	std::vector<double> values;
};

using ExogTable = std::vector<ExogColumn>;

// Daily demand observations on a gapless calendar grid, with optional aligned
// exogenous columns. Immutable after construction; all operations are pure.
class DailySeries {
public:
	DailySeries(Date start_date, std::vector<double> values, ExogTable exog = {});

	Date start_date() const { return start_; }
	Date date_at(std::size_t index) const { return start_ + static_cast<std::int64_t>(index); }
	std::size_t size() const { return values_.size(); }
	const std::vector<double> &values() const { return values_; }
	const ExogTable &exog() const { return exog_; }
	bool has_exog() const { return !exog_.empty(); }

	const ExogColumn &exog_column(const std::string &name) const;
	std::vector<std::string> exog_names() const;

	// First `length` observations (all exog columns truncated alongside).
	DailySeries prefix(std::size_t length) const;
	// Exog rows [start, start + length), e.g. the known future schedule block.
	ExogTable exog_rows(std::size_t start, std::size_t length) const;

private:
	Date start_;
	std::vector<double> values_;
	ExogTable exog_;
};

struct SplitIndex {
	std::size_t train_end = 0; // exclusive
	std::size_t val_end = 0;   // exclusive
	std::size_t total_len = 0;
};

// Strictly chronological train/validation/test split.
SplitIndex split(const DailySeries &series, double train_frac, double val_frac);

// output[k] = series[k + lag] - series[k].
std::vector<double> difference(std::span<const double> series, std::size_t lag);

// Inverse of difference given the first `lag` original values.
std::vector<double> undifference(std::span<const double> diffed,
                                 std::span<const double> initial_values, std::size_t lag);

// Z-score transform with the n-1 stddev convention. Fit on the training
// segment only and reuse unchanged elsewhere.
class Scaler {
public:
	Scaler() = default;
	Scaler(double mean, double stddev);

	static Scaler fit(std::span<const double> series);

	double mean() const { return mean_; }
	double stddev() const { return stddev_; }

	double apply(double x) const { return (x - mean_) / stddev_; }
	double invert(double z) const { return z * stddev_ + mean_; }
	std::vector<double> apply(std::span<const double> xs) const;
	std::vector<double> invert(std::span<const double> zs) const;

private:
	double mean_ = 0.0;
	double stddev_ = 1.0;
};

// Per-horizon-step forecast mean with two-sided interval bounds.
struct ForecastResult {
	std::vector<double> mean;
	std::vector<double> lower;
	std::vector<double> upper;
};

} // namespace fuelcast
