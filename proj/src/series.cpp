#include "fuelcast/series.hpp"

#include "fuelcast/errors.hpp"

#include <cmath>

namespace fuelcast {

DailySeries::DailySeries(Date start_date, std::vector<double> values, ExogTable exog)
    : start_(start_date), values_(std::move(values)), exog_(std::move(exog)) {
	if (values_.empty()) {
		throw DataError("series must contain at least one observation");
	}
	for (std::size_t i = 0; i < values_.size(); ++i) {
		if (!std::isfinite(values_[i])) {
			throw DataError("non-finite target value at row " + std::to_string(i + 1));
		}
	}
	for (const auto &col : exog_) {
		if (col.values.size() != values_.size()) {
			throw DataError("exogenous column '" + col.name + "' has length " +
			                std::to_string(col.values.size()) + ", expected " +
			                std::to_string(values_.size()));
		}
		for (std::size_t i = 0; i < col.values.size(); ++i) {
			if (!std::isfinite(col.values[i])) {
				throw DataError("non-finite value in column '" + col.name + "' at row " +
				                std::to_string(i + 1));
			}
		}
	}
}

const ExogColumn &DailySeries::exog_column(const std::string &name) const {
	for (const auto &col : exog_) {
		if (col.name == name) {
			return col;
		}
	}
	throw ConfigError("unknown exogenous column '" + name + "'");
}

std::vector<std::string> DailySeries::exog_names() const {
	std::vector<std::string> names;
	names.reserve(exog_.size());
	for (const auto &col : exog_) {
		names.push_back(col.name);
	}
	return names;
}

DailySeries DailySeries::prefix(std::size_t length) const {
	if (length == 0 || length > size()) {
		throw ConfigError("prefix length " + std::to_string(length) +
		                  " out of range for series of length " + std::to_string(size()));
	}
	std::vector<double> vals(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(length));
	ExogTable exog;
	exog.reserve(exog_.size());
	for (const auto &col : exog_) {
		exog.push_back({col.name, std::vector<double>(col.values.begin(),
		                                              col.values.begin() +
		                                                  static_cast<std::ptrdiff_t>(length))});
	}
	return DailySeries(start_, std::move(vals), std::move(exog));
}

ExogTable DailySeries::exog_rows(std::size_t start, std::size_t length) const {
	if (start + length > size()) {
		throw ConfigError("exog row range [" + std::to_string(start) + ", " +
		                  std::to_string(start + length) + ") exceeds series length " +
		                  std::to_string(size()));
	}
	ExogTable rows;
	rows.reserve(exog_.size());
	for (const auto &col : exog_) {
		rows.push_back({col.name,
		                std::vector<double>(col.values.begin() + static_cast<std::ptrdiff_t>(start),
		                                    col.values.begin() +
		                                        static_cast<std::ptrdiff_t>(start + length))});
	}
	return rows;
}

SplitIndex split(const DailySeries &series, double train_frac, double val_frac) {
	if (!(train_frac > 0.0) || !(val_frac > 0.0) || train_frac + val_frac >= 1.0) {
		throw ConfigError("split fractions must be positive and sum to less than 1");
	}
	const std::size_t n = series.size();
	SplitIndex idx;
	idx.total_len = n;
	idx.train_end = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_frac));
	idx.val_end =
	    static_cast<std::size_t>(std::floor(static_cast<double>(n) * (train_frac + val_frac)));
	if (idx.train_end == 0 || idx.val_end <= idx.train_end || idx.val_end >= n) {
		throw ConfigError("split produces an empty train, validation, or test segment");
	}
	return idx;
}

std::vector<double> difference(std::span<const double> series, std::size_t lag) {
	if (lag < 1) {
		throw ConfigError("difference lag must be >= 1");
	}
	if (series.size() <= lag) {
		throw ConfigError("series of length " + std::to_string(series.size()) +
		                  " is too short to difference at lag " + std::to_string(lag));
	}
	std::vector<double> out(series.size() - lag);
	for (std::size_t k = 0; k < out.size(); ++k) {
		out[k] = series[k + lag] - series[k];
	}
	return out;
}

std::vector<double> undifference(std::span<const double> diffed,
                                 std::span<const double> initial_values, std::size_t lag) {
	if (lag < 1) {
		throw ConfigError("undifference lag must be >= 1");
	}
	if (initial_values.size() != lag) {
		throw ConfigError("undifference needs exactly " + std::to_string(lag) +
		                  " initial values, got " + std::to_string(initial_values.size()));
	}
	std::vector<double> out(diffed.size() + lag);
	for (std::size_t i = 0; i < lag; ++i) {
		out[i] = initial_values[i];
	}
	for (std::size_t k = 0; k < diffed.size(); ++k) {
		out[k + lag] = diffed[k] + out[k];
	}
	return out;
}

Scaler::Scaler(double mean, double stddev) : mean_(mean), stddev_(stddev) {
	if (!(stddev_ > 0.0)) {
		throw ConfigError("scaler stddev must be positive");
	}
}

Scaler Scaler::fit(std::span<const double> series) {
	if (series.size() < 2) {
		throw ConfigError("scaler needs at least 2 points");
	}
	double m = 0.0;
	for (double x : series) {
		m += x;
	}
	m /= static_cast<double>(series.size());
	double ss = 0.0;
	for (double x : series) {
		const double d = x - m;
		ss += d * d;
	}
	const double var = ss / static_cast<double>(series.size() - 1);
	if (!(var > 0.0)) {
		throw DataError("degenerate variance: cannot standardize a constant series");
	}
	return Scaler(m, std::sqrt(var));
}

std::vector<double> Scaler::apply(std::span<const double> xs) const {
	std::vector<double> out(xs.size());
	for (std::size_t i = 0; i < xs.size(); ++i) {
		out[i] = apply(xs[i]);
	}
	return out;
}

std::vector<double> Scaler::invert(std::span<const double> zs) const {
	std::vector<double> out(zs.size());
	for (std::size_t i = 0; i < zs.size(); ++i) {
		out[i] = invert(zs[i]);
	}
	return out;
}

} // namespace fuelcast
