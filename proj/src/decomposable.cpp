#include "fuelcast/decomposable.hpp"

#include "fuelcast/errors.hpp"
#include "fuelcast/io.hpp"
#include "fuelcast/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

namespace fuelcast {

namespace {

constexpr double kSigmaFloor = 1e-8;
constexpr double kWeeklyPeriod = 7.0;
constexpr double kYearlyPeriod = 365.25;

struct DesignInfo {
	int weekly_terms = 0; // column count
	int yearly_terms = 0;
	std::vector<std::pair<int, int>> classes; // (month, day)
	int n_extra = 0;
	bool yearly_enabled = false;

	int ls_columns() const { return 2 + weekly_terms + yearly_terms +
	                                static_cast<int>(classes.size()) + n_extra; }
};

std::vector<std::pair<int, int>> holiday_classes_of(const std::vector<Date> &dates) {
	std::set<std::pair<int, int>> classes;
	for (const Date &d : dates) {
		int y, m, day;
		d.to_ymd(y, m, day);
		classes.insert({m, day});
	}
	return {classes.begin(), classes.end()};
}

int class_index(const std::vector<std::pair<int, int>> &classes, const Date &d) {
	int y, m, day;
	d.to_ymd(y, m, day);
	const auto it = std::lower_bound(classes.begin(), classes.end(), std::make_pair(m, day));
	if (it != classes.end() && *it == std::make_pair(m, day)) {
		return static_cast<int>(it - classes.begin());
	}
	return -1;
}

void fill_fourier(double t, double period, int order, double *out) {
	for (int k = 1; k <= order; ++k) {
		const double angle = 2.0 * M_PI * static_cast<double>(k) * t / period;
		out[2 * (k - 1)] = std::cos(angle);
		out[2 * (k - 1) + 1] = std::sin(angle);
	}
}

// Linear (non-changepoint) design matrix rows for day indices [start, start+len).
Eigen::MatrixXd build_ls_matrix(const DesignInfo &info, const DecomposableSpec &spec,
                                Date start_date, std::size_t start, std::size_t len,
                                const std::vector<Date> &holidays, const ExogTable &exog) {
	Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(len), info.ls_columns());
	std::set<std::int64_t> holiday_days;
	for (const Date &d : holidays) {
		holiday_days.insert(d.days_since_epoch());
	}
	std::vector<double> buf(static_cast<std::size_t>(std::max(info.weekly_terms,
	                                                          info.yearly_terms)));
	for (std::size_t i = 0; i < len; ++i) {
		const double t = static_cast<double>(start + i);
		const Eigen::Index row = static_cast<Eigen::Index>(i);
		int col = 0;
		X(row, col++) = t;
		X(row, col++) = 1.0;
		if (info.weekly_terms > 0) {
			fill_fourier(t, kWeeklyPeriod, spec.fourier_order_weekly, buf.data());
			for (int k = 0; k < info.weekly_terms; ++k) {
				X(row, col + k) = buf[static_cast<std::size_t>(k)];
			}
			col += info.weekly_terms;
		}
		if (info.yearly_terms > 0) {
			fill_fourier(t, kYearlyPeriod, spec.fourier_order_yearly, buf.data());
			for (int k = 0; k < info.yearly_terms; ++k) {
				X(row, col + k) = buf[static_cast<std::size_t>(k)];
			}
			col += info.yearly_terms;
		}
		if (!info.classes.empty()) {
			const Date d = start_date + static_cast<std::int64_t>(start + i);
			if (holiday_days.count(d.days_since_epoch()) > 0) {
				const int ci = class_index(info.classes, d);
				if (ci >= 0) {
					X(row, col + ci) = 1.0;
				}
			}
			col += static_cast<int>(info.classes.size());
		}
		for (int k = 0; k < info.n_extra; ++k) {
			X(row, col + k) = exog[static_cast<std::size_t>(k)].values[i];
		}
	}
	return X;
}

std::vector<double> make_changepoints(std::size_t n_train, int n_changepoints) {
	std::vector<double> times(static_cast<std::size_t>(n_changepoints));
	const double span = 0.8 * static_cast<double>(n_train - 1);
	for (int j = 1; j <= n_changepoints; ++j) {
		times[static_cast<std::size_t>(j - 1)] =
		    span * static_cast<double>(j) / static_cast<double>(n_changepoints);
	}
	return times;
}

} // namespace

DecomposableFit fit_decomposable(const DailySeries &series, const DecomposableSpec &spec) {
	if (!(spec.changepoint_prior_scale > 0.0) || !(spec.seasonality_prior_scale > 0.0)) {
		throw ConfigError("prior scales must be positive");
	}
	if (spec.n_changepoints < 0 || spec.fourier_order_weekly < 1 || spec.fourier_order_yearly < 0) {
		throw ConfigError("invalid decomposable model structure");
	}
	if (spec.fourier_order_weekly > 3) {
		// Daily sampling aliases weekly frequencies above 3/7: the columns
		// duplicate and the unpenalized design is singular.
		throw EstimationError("singular design: weekly Fourier order above 3 aliases on a daily grid");
	}
	const std::size_t n = series.size();
	if (spec.n_changepoints >= static_cast<int>(n) / 2) {
		throw ConfigError("n_changepoints must be below half the training length");
	}

	DesignInfo info;
	info.yearly_enabled = spec.fourier_order_yearly > 0 && n >= 730;
	info.weekly_terms = 2 * spec.fourier_order_weekly;
	info.yearly_terms = info.yearly_enabled ? 2 * spec.fourier_order_yearly : 0;
	info.classes = holiday_classes_of(spec.holidays);
	info.n_extra = static_cast<int>(spec.extra_regressors.size());

	const int total_terms = info.ls_columns() + spec.n_changepoints;
	if (n < 2 * static_cast<std::size_t>(spec.n_changepoints + info.weekly_terms +
	                                     info.yearly_terms +
	                                     static_cast<int>(info.classes.size()) + 2)) {
		throw ConfigError("training length " + std::to_string(n) +
		                  " too short for the requested decomposable structure");
	}
	if (static_cast<std::size_t>(total_terms) > n) {
		throw EstimationError("singular design: more parameters than observations");
	}

	ExogTable exog;
	for (const auto &name : spec.extra_regressors) {
		exog.push_back(series.exog_column(name));
	}

	const Eigen::Map<const Eigen::VectorXd> y(series.values().data(),
	                                          static_cast<Eigen::Index>(n));
	const Eigen::MatrixXd X =
	    build_ls_matrix(info, spec, series.start_date(), 0, n, spec.holidays, exog);

	// Hinge features max(0, t - s_j) for the changepoint block.
	const std::vector<double> cp_times =
	    spec.n_changepoints > 0 ? make_changepoints(n, spec.n_changepoints) : std::vector<double>{};
	Eigen::MatrixXd H(static_cast<Eigen::Index>(n), spec.n_changepoints);
	for (int j = 0; j < spec.n_changepoints; ++j) {
		for (std::size_t i = 0; i < n; ++i) {
			H(static_cast<Eigen::Index>(i), j) =
			    std::max(0.0, static_cast<double>(i) - cp_times[static_cast<std::size_t>(j)]);
		}
	}

	const double l1_weight = 1.0 / spec.changepoint_prior_scale;
	const double l2_weight =
	    1.0 / (2.0 * spec.seasonality_prior_scale * spec.seasonality_prior_scale);

	Eigen::MatrixXd gram = X.transpose() * X;
	for (int c = 2; c < info.ls_columns(); ++c) {
		gram(c, c) += l2_weight; // trend slope and offset stay unpenalized
	}
	const Eigen::LDLT<Eigen::MatrixXd> solver(gram);
	if (solver.info() != Eigen::Success) {
		throw EstimationError("singular design in decomposable fit");
	}

	// Eliminate the ridge block in closed form: beta(delta) = beta0 - G*delta.
	// The objective then reduces to a small quadratic-plus-L1 problem in delta,
	// solved exactly by coordinate descent with soft thresholding.
	const Eigen::VectorXd beta0 = solver.solve(X.transpose() * y);
	Eigen::VectorXd delta = Eigen::VectorXd::Zero(spec.n_changepoints);
	Eigen::VectorXd beta = beta0;
	if (spec.n_changepoints > 0) {
		const Eigen::MatrixXd G = solver.solve(X.transpose() * H);
		const Eigen::MatrixXd H_adj = H - X * G;
		const Eigen::VectorXd y_adj = y - X * beta0;

		Eigen::VectorXd pen_diag = Eigen::VectorXd::Zero(info.ls_columns());
		for (int c = 2; c < info.ls_columns(); ++c) {
			pen_diag[c] = l2_weight;
		}
		const Eigen::MatrixXd Q =
		    H_adj.transpose() * H_adj + G.transpose() * pen_diag.asDiagonal() * G;
		const Eigen::VectorXd b =
		    H_adj.transpose() * y_adj + G.transpose() * pen_diag.cwiseProduct(beta0);

		Eigen::VectorXd qd = Q * delta;
		for (int pass = 0; pass < 100000; ++pass) {
			double max_change = 0.0;
			for (int j = 0; j < spec.n_changepoints; ++j) {
				if (Q(j, j) <= 0.0) {
					continue;
				}
				const double old = delta[j];
				const double rho = b[j] - qd[j] + Q(j, j) * old;
				const double thresholded =
				    std::copysign(std::max(0.0, std::abs(rho) - l1_weight / 2.0), rho);
				const double updated = thresholded / Q(j, j);
				if (updated != old) {
					qd += (updated - old) * Q.col(j);
					delta[j] = updated;
					max_change = std::max(max_change, std::abs(updated - old));
				}
			}
			if (max_change < 1e-10) {
				break;
			}
		}
		beta = beta0 - G * delta;
	}

	DecomposableFit fit;
	fit.spec = spec;
	fit.start_date = series.start_date();
	fit.n_train = n;
	fit.base_rate = beta[0];
	fit.offset = beta[1];
	fit.changepoint_times = cp_times;
	fit.rate_adjustments.assign(delta.data(), delta.data() + delta.size());
	int col = 2;
	fit.weekly_coeffs.assign(beta.data() + col, beta.data() + col + info.weekly_terms);
	col += info.weekly_terms;
	fit.yearly_coeffs.assign(beta.data() + col, beta.data() + col + info.yearly_terms);
	col += info.yearly_terms;
	for (std::size_t ci = 0; ci < info.classes.size(); ++ci) {
		fit.holiday_classes.push_back(
		    {info.classes[ci].first, info.classes[ci].second, beta[col + static_cast<int>(ci)]});
	}
	col += static_cast<int>(info.classes.size());
	fit.extra_coef.assign(beta.data() + col, beta.data() + col + info.n_extra);

	const double sse = (y - X * beta - H * delta).squaredNorm();
	const double sigma = std::sqrt(sse / static_cast<double>(n));
	fit.degenerate_sigma = sigma < kSigmaFloor;
	fit.residual_sigma = std::max(sigma, kSigmaFloor);
	fit.data = std::make_shared<DailySeries>(series);
	return fit;
}

ComponentPaths evaluate_components(const DecomposableFit &fit, std::size_t start_index,
                                   std::size_t length, const std::vector<Date> &holidays,
                                   const ExogTable &exog) {
	if (fit.spec.extra_regressors.size() != exog.size()) {
		throw ConfigError("expected " + std::to_string(fit.spec.extra_regressors.size()) +
		                  " exogenous columns, got " + std::to_string(exog.size()));
	}
	for (const auto &col : exog) {
		if (col.values.size() < length) {
			throw ConfigError("exogenous column '" + col.name + "' shorter than requested range");
		}
	}
	std::set<std::int64_t> holiday_days;
	for (const Date &d : holidays) {
		holiday_days.insert(d.days_since_epoch());
	}
	std::vector<std::pair<int, int>> classes;
	classes.reserve(fit.holiday_classes.size());
	for (const auto &hc : fit.holiday_classes) {
		classes.push_back({hc.month, hc.day});
	}

	ComponentPaths paths;
	paths.trend.resize(length);
	paths.seasonal.resize(length);
	paths.holiday.resize(length);
	paths.regressors.resize(length);
	paths.total.resize(length);
	for (std::size_t i = 0; i < length; ++i) {
		const double t = static_cast<double>(start_index + i);
		double trend = fit.base_rate * t + fit.offset;
		for (std::size_t j = 0; j < fit.changepoint_times.size(); ++j) {
			trend += fit.rate_adjustments[j] * std::max(0.0, t - fit.changepoint_times[j]);
		}
		double seasonal = 0.0;
		for (std::size_t k = 0; 2 * k + 1 < fit.weekly_coeffs.size(); ++k) {
			const double angle = 2.0 * M_PI * static_cast<double>(k + 1) * t / kWeeklyPeriod;
			seasonal += fit.weekly_coeffs[2 * k] * std::cos(angle) +
			            fit.weekly_coeffs[2 * k + 1] * std::sin(angle);
		}
		for (std::size_t k = 0; 2 * k < fit.yearly_coeffs.size(); ++k) {
			const double angle = 2.0 * M_PI * static_cast<double>(k + 1) * t / kYearlyPeriod;
			seasonal += fit.yearly_coeffs[2 * k] * std::cos(angle) +
			            fit.yearly_coeffs[2 * k + 1] * std::sin(angle);
		}
		double holiday = 0.0;
		if (!classes.empty()) {
			const Date d = fit.start_date + static_cast<std::int64_t>(start_index + i);
			if (holiday_days.count(d.days_since_epoch()) > 0) {
				const int ci = class_index(classes, d);
				if (ci >= 0) {
					holiday = fit.holiday_classes[static_cast<std::size_t>(ci)].effect;
				}
			}
		}
		double regressors = 0.0;
		for (std::size_t k = 0; k < exog.size(); ++k) {
			regressors += fit.extra_coef[k] * exog[k].values[i];
		}
		paths.trend[i] = trend;
		paths.seasonal[i] = seasonal;
		paths.holiday[i] = holiday;
		paths.regressors[i] = regressors;
		paths.total[i] = trend + seasonal + holiday + regressors;
	}
	return paths;
}

ComponentPaths fitted_components(const DecomposableFit &fit) {
	if (!fit.data) {
		throw ConfigError("fit has no attached training data");
	}
	ExogTable exog;
	for (const auto &name : fit.spec.extra_regressors) {
		exog.push_back(fit.data->exog_column(name));
	}
	return evaluate_components(fit, 0, fit.n_train, fit.spec.holidays, exog);
}

ForecastResult forecast_decomposable(const DecomposableFit &fit, int horizon,
                                     const std::vector<Date> &future_holidays, double alpha,
                                     const ExogTable &future_exog) {
	if (horizon < 1) {
		throw ConfigError("forecast horizon must be >= 1");
	}
	ExogTable exog;
	for (const auto &name : fit.spec.extra_regressors) {
		const ExogColumn *found = nullptr;
		for (const auto &col : future_exog) {
			if (col.name == name) {
				found = &col;
				break;
			}
		}
		if (found == nullptr || found->values.size() < static_cast<std::size_t>(horizon)) {
			throw ConfigError("missing future values for extra regressor '" + name + "'");
		}
		exog.push_back(*found);
	}
	const ComponentPaths paths = evaluate_components(
	    fit, fit.n_train, static_cast<std::size_t>(horizon), future_holidays, exog);

	ForecastResult out;
	out.mean = paths.total;
	out.lower.resize(out.mean.size());
	out.upper.resize(out.mean.size());
	const double hw = interval_z(alpha) * fit.residual_sigma;
	for (std::size_t i = 0; i < out.mean.size(); ++i) {
		out.lower[i] = out.mean[i] - hw;
		out.upper[i] = out.mean[i] + hw;
	}
	return out;
}

std::string decomposable_report(const DecomposableFit &fit) {
	KeyValueDoc doc;
	doc.set("kind", "decomposable");
	doc.set_double("changepoint_prior_scale", fit.spec.changepoint_prior_scale);
	doc.set_double("seasonality_prior_scale", fit.spec.seasonality_prior_scale);
	doc.set_int("n_changepoints", fit.spec.n_changepoints);
	doc.set_int("fourier_order_weekly", fit.spec.fourier_order_weekly);
	doc.set_int("fourier_order_yearly", fit.spec.fourier_order_yearly);
	std::vector<std::string> holiday_dates;
	for (const Date &d : fit.spec.holidays) {
		holiday_dates.push_back(d.to_string());
	}
	doc.set_strings("holidays", holiday_dates);
	doc.set_strings("extra_regressors", fit.spec.extra_regressors);
	doc.set("start_date", fit.start_date.to_string());
	doc.set_int("n_train", static_cast<long long>(fit.n_train));
	doc.set_double("base_rate", fit.base_rate);
	doc.set_double("offset", fit.offset);
	doc.set_doubles("changepoint_times", fit.changepoint_times);
	doc.set_doubles("rate_adjustments", fit.rate_adjustments);
	doc.set_doubles("weekly_coeffs", fit.weekly_coeffs);
	doc.set_doubles("yearly_coeffs", fit.yearly_coeffs);
	std::vector<double> class_effects;
	std::vector<std::string> class_keys;
	for (const auto &hc : fit.holiday_classes) {
		class_keys.push_back(std::to_string(hc.month) + "/" + std::to_string(hc.day));
		class_effects.push_back(hc.effect);
	}
	doc.set_strings("holiday_class_keys", class_keys);
	doc.set_doubles("holiday_class_effects", class_effects);
	doc.set_doubles("extra_coef", fit.extra_coef);
	doc.set_double("residual_sigma", fit.residual_sigma);
	doc.set_int("degenerate_sigma", fit.degenerate_sigma ? 1 : 0);
	return doc.to_string();
}

DecomposableFit decomposable_from_report(const std::string &report, const DailySeries &series) {
	const KeyValueDoc doc = KeyValueDoc::parse(report);
	if (doc.get("kind") != "decomposable") {
		throw DataError("checkpoint is not a decomposable model");
	}
	DecomposableFit fit;
	fit.spec.changepoint_prior_scale = doc.get_double("changepoint_prior_scale");
	fit.spec.seasonality_prior_scale = doc.get_double("seasonality_prior_scale");
	fit.spec.n_changepoints = static_cast<int>(doc.get_int("n_changepoints"));
	fit.spec.fourier_order_weekly = static_cast<int>(doc.get_int("fourier_order_weekly"));
	fit.spec.fourier_order_yearly = static_cast<int>(doc.get_int("fourier_order_yearly"));
	for (const auto &ds : doc.get_strings("holidays")) {
		fit.spec.holidays.push_back(Date::parse(ds));
	}
	fit.spec.extra_regressors = doc.get_strings("extra_regressors");
	fit.start_date = Date::parse(doc.get("start_date"));
	fit.n_train = static_cast<std::size_t>(doc.get_int("n_train"));
	fit.base_rate = doc.get_double("base_rate");
	fit.offset = doc.get_double("offset");
	fit.changepoint_times = doc.get_doubles("changepoint_times");
	fit.rate_adjustments = doc.get_doubles("rate_adjustments");
	fit.weekly_coeffs = doc.get_doubles("weekly_coeffs");
	fit.yearly_coeffs = doc.get_doubles("yearly_coeffs");
	const auto keys = doc.get_strings("holiday_class_keys");
	const auto effects = doc.get_doubles("holiday_class_effects");
	for (std::size_t i = 0; i < keys.size(); ++i) {
		const auto slash = keys[i].find('/');
		fit.holiday_classes.push_back({std::stoi(keys[i].substr(0, slash)),
		                               std::stoi(keys[i].substr(slash + 1)), effects[i]});
	}
	fit.extra_coef = doc.get_doubles("extra_coef");
	fit.residual_sigma = doc.get_double("residual_sigma");
	fit.degenerate_sigma = doc.get_int("degenerate_sigma") != 0;
	fit.data = std::make_shared<DailySeries>(series);
	return fit;
}

} // namespace fuelcast
