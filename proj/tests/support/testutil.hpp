#pragma once

#include "fuelcast/date.hpp"
#include "fuelcast/series.hpp"

#include <cmath>
#include <vector>

namespace testutil {

inline fuelcast::Date start_date() {
	return fuelcast::Date::from_ymd(2019, 1, 1);
}

inline fuelcast::DailySeries make_series(std::vector<double> values,
                                         fuelcast::ExogTable exog = {}) {
	return fuelcast::DailySeries(start_date(), std::move(values), std::move(exog));
}

inline double max_abs_diff(const std::vector<double> &a, const std::vector<double> &b) {
	double m = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i) {
		m = std::max(m, std::abs(a[i] - b[i]));
	}
	return a.size() == b.size() ? m : std::numeric_limits<double>::infinity();
}

} // namespace testutil
