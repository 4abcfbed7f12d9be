#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fuelcast/errors.hpp"
#include "fuelcast/io.hpp"
#include "fuelcast/stats.hpp"
#include "fuelcast/synth.hpp"

#include <cmath>

using namespace fuelcast;

namespace {

// Ratio of day-of-week mean variance to total variance.
double weekly_strength(const std::vector<double> &y) {
	double total_mean = 0.0;
	for (double v : y) {
		total_mean += v;
	}
	total_mean /= static_cast<double>(y.size());

	double day_mean[7] = {0};
	int day_count[7] = {0};
	for (std::size_t t = 0; t < y.size(); ++t) {
		day_mean[t % 7] += y[t];
		++day_count[t % 7];
	}
	double between = 0.0;
	for (int d = 0; d < 7; ++d) {
		day_mean[d] /= day_count[d];
		between += (day_mean[d] - total_mean) * (day_mean[d] - total_mean);
	}
	between /= 7.0;
	double total = 0.0;
	for (double v : y) {
		total += (v - total_mean) * (v - total_mean);
	}
	total /= static_cast<double>(y.size());
	return between / total;
}

} // namespace

TEST_CASE("flag carrier schedule correlation sits in the weak band") {
	ScenarioSpec spec;
	spec.profile = ScenarioProfile::FlagCarrier;
	spec.n_days = 1000;
	spec.seed = 1;
	const DailySeries series = generate(spec);
	const double corr =
	    pearson_correlation(series.exog_column("schedule_carrier").values, series.values());
	CHECK(corr >= 0.05);
	CHECK(corr <= 0.35);
}

TEST_CASE("low cost schedule correlation sits in the strong band") {
	ScenarioSpec spec;
	spec.profile = ScenarioProfile::LowCost;
	spec.n_days = 1000;
	spec.seed = 2;
	spec.exog_reliability = 0.9;
	const DailySeries series = generate(spec);
	const double corr =
	    pearson_correlation(series.exog_column("schedule_carrier").values, series.values());
	CHECK(corr >= 0.8);
	CHECK(corr <= 0.95);
}

TEST_CASE("shock collapses demand inside its window") {
	ScenarioSpec spec;
	spec.profile = ScenarioProfile::LowCost;
	spec.n_days = 1000;
	spec.seed = 3;
	spec.shock = ShockSpec{400, 60, 0.9};
	const DailySeries series = generate(spec);
	double pre = 0.0, in = 0.0;
	for (int t = 340; t < 400; ++t) {
		pre += series.values()[static_cast<std::size_t>(t)];
	}
	for (int t = 400; t < 460; ++t) {
		in += series.values()[static_cast<std::size_t>(t)];
	}
	pre /= 60.0;
	in /= 60.0;
	CHECK(in < 0.2 * pre);
}

TEST_CASE("shock window is validated") {
	ScenarioSpec spec;
	spec.n_days = 500;
	spec.shock = ShockSpec{480, 60, 0.5};
	CHECK_THROWS_AS(generate(spec), ConfigError);
	spec.shock = ShockSpec{100, 50, 1.5};
	CHECK_THROWS_AS(generate(spec), ConfigError);
	spec.shock = ShockSpec{-5, 50, 0.5};
	CHECK_THROWS_AS(generate(spec), ConfigError);
}

TEST_CASE("same seed gives bit-identical output") {
	for (const auto profile : {ScenarioProfile::FlagCarrier, ScenarioProfile::LowCost,
	                           ScenarioProfile::AirportAggregate}) {
		ScenarioSpec spec;
		spec.profile = profile;
		spec.n_days = 400;
		spec.seed = 11;
		const DailySeries a = generate(spec);
		const DailySeries b = generate(spec);
		CHECK(a.values() == b.values());
		REQUIRE(a.exog().size() == b.exog().size());
		for (std::size_t k = 0; k < a.exog().size(); ++k) {
			CHECK(a.exog()[k].values == b.exog()[k].values);
		}
		CHECK(format_series_csv(a) == format_series_csv(b));
	}
}

TEST_CASE("weekly seasonality is stronger for the low cost carrier") {
	for (std::uint64_t seed = 0; seed < 10; ++seed) {
		ScenarioSpec flag;
		flag.profile = ScenarioProfile::FlagCarrier;
		flag.n_days = 700;
		flag.seed = seed;
		ScenarioSpec lc = flag;
		lc.profile = ScenarioProfile::LowCost;
		CHECK(weekly_strength(generate(lc).values()) >
		      weekly_strength(generate(flag).values()));
	}
}

TEST_CASE("airport aggregate equals the exact sum of its components") {
	ScenarioSpec spec;
	spec.profile = ScenarioProfile::AirportAggregate;
	spec.n_days = 600;
	spec.seed = 21;
	const DailySeries total = generate(spec);
	const auto components = generate_airport_components(spec);
	REQUIRE(components.size() == 3);
	for (std::size_t t = 0; t < total.size(); ++t) {
		double s = 0.0;
		for (const auto &comp : components) {
			s += comp.values()[t];
		}
		CHECK(total.values()[t] == s);
	}
}

TEST_CASE("generated files round-trip through ingestion") {
	ScenarioSpec spec;
	spec.profile = ScenarioProfile::AirportAggregate;
	spec.n_days = 250;
	spec.seed = 5;
	const DailySeries series = generate(spec);
	const DailySeries parsed =
	    parse_series_csv(format_series_csv(series, {"config_hash=test"}), "mem");
	CHECK(parsed.values() == series.values());
	for (std::size_t k = 0; k < series.exog().size(); ++k) {
		CHECK(parsed.exog()[k].name == series.exog()[k].name);
		CHECK(parsed.exog()[k].values == series.exog()[k].values);
	}
}

TEST_CASE("scenario validation") {
	ScenarioSpec spec;
	spec.n_days = 100;
	CHECK_THROWS_AS(generate(spec), ConfigError);
	CHECK_THROWS_AS(scenario_profile_from_string("bogus"), ConfigError);
	CHECK(scenario_profile_from_string("flag_carrier") == ScenarioProfile::FlagCarrier);
	CHECK(to_string(ScenarioProfile::LowCost) == "low_cost");
}
