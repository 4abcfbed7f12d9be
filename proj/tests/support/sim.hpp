#pragma once

// Independent SARIMA process simulator used as the oracle for estimation
// tests. Generates through the defining recursion (not via the fitted model's
// code path beyond the shared polynomial expansion), keeping the innovation
// stream for residual-reproduction checks.

#include "fuelcast/rng.hpp"
#include "fuelcast/sarimax.hpp"
#include "fuelcast/series.hpp"

#include <cstdint>
#include <vector>

namespace testutil {

struct SimModel {
	std::vector<double> ar;
	std::vector<double> ma; // paper sign convention: a_t - theta_1 a_{t-1} - ...
	std::vector<double> seasonal_ar;
	std::vector<double> seasonal_ma;
	int d = 0;
	int D = 0;
	int s = 7;
	double sigma = 1.0;
	double level = 0.0; // added to the integrated series
};

struct SimResult {
	std::vector<double> series;      // length n
	std::vector<double> innovations; // aligned to the differenced scale, length n - d - s*D
};

inline SimResult simulate_sarima(const SimModel &model, int n, std::uint64_t seed,
                                 int burn = 600) {
	const auto pf =
	    fuelcast::expand_seasonal_polynomial(model.ar, model.seasonal_ar, model.s);
	const auto mf =
	    fuelcast::expand_seasonal_polynomial(model.ma, model.seasonal_ma, model.s);
	const int n_w = n - model.d - model.s * model.D;
	const int total = burn + n_w;

	fuelcast::Rng rng(seed);
	std::vector<double> w(static_cast<std::size_t>(total), 0.0);
	std::vector<double> a(static_cast<std::size_t>(total), 0.0);
	for (int t = 0; t < total; ++t) {
		const double at = model.sigma * rng.normal();
		a[static_cast<std::size_t>(t)] = at;
		double v = at;
		for (std::size_t j = 1; j <= pf.size(); ++j) {
			if (t >= static_cast<int>(j)) {
				v += pf[j - 1] * w[static_cast<std::size_t>(t) - j];
			}
		}
		for (std::size_t j = 1; j <= mf.size(); ++j) {
			if (t >= static_cast<int>(j)) {
				v -= mf[j - 1] * a[static_cast<std::size_t>(t) - j];
			}
		}
		w[static_cast<std::size_t>(t)] = v;
	}

	SimResult out;
	out.innovations.assign(a.begin() + burn, a.end());
	std::vector<double> x(w.begin() + burn, w.end());
	// Integrate: regular differences first (inverse of the fit order, which
	// seasonally differences before regular differencing).
	for (int i = 0; i < model.d; ++i) {
		std::vector<double> seed_vals(1, 0.0);
		x = fuelcast::undifference(x, seed_vals, 1);
	}
	for (int i = 0; i < model.D; ++i) {
		std::vector<double> seed_vals(static_cast<std::size_t>(model.s), 0.0);
		x = fuelcast::undifference(x, seed_vals, static_cast<std::size_t>(model.s));
	}
	if (model.level != 0.0) {
		for (double &v : x) {
			v += model.level;
		}
	}
	out.series = std::move(x);
	return out;
}

} // namespace testutil
