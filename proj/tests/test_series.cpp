#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fuelcast/errors.hpp"
#include "fuelcast/io.hpp"
#include "fuelcast/rng.hpp"
#include "fuelcast/series.hpp"
#include "support/testutil.hpp"

#include <cmath>

using namespace fuelcast;
using testutil::make_series;

TEST_CASE("difference basic examples") {
	CHECK(difference(std::vector<double>{1, 3, 6}, 1) == std::vector<double>{2, 3});
	CHECK(difference(std::vector<double>{5, 5, 5, 5}, 1) == std::vector<double>{0, 0, 0});

	// Weekly sawtooth over 21 days: lag-7 difference removes it entirely.
	std::vector<double> sawtooth(21);
	for (int t = 0; t < 21; ++t) {
		sawtooth[static_cast<std::size_t>(t)] = static_cast<double>(t % 7);
	}
	const auto diffed = difference(sawtooth, 7);
	REQUIRE(diffed.size() == 14);
	for (double v : diffed) {
		CHECK(v == 0.0);
	}
}

TEST_CASE("difference rejects short input") {
	CHECK_THROWS_AS(difference(std::vector<double>{1.0, 2.0}, 2), ConfigError);
	CHECK_THROWS_AS(difference(std::vector<double>{1.0}, 1), ConfigError);
}

TEST_CASE("undifference basic examples") {
	CHECK(undifference(std::vector<double>{2, 3}, std::vector<double>{1}, 1) ==
	      std::vector<double>{1, 3, 6});
	CHECK(undifference(std::vector<double>{0, 0, 0}, std::vector<double>{5}, 1) ==
	      std::vector<double>{5, 5, 5, 5});

	std::vector<double> sawtooth(21);
	for (int t = 0; t < 21; ++t) {
		sawtooth[static_cast<std::size_t>(t)] = static_cast<double>(t % 7);
	}
	const std::vector<double> zeros(14, 0.0);
	const std::vector<double> head(sawtooth.begin(), sawtooth.begin() + 7);
	CHECK(undifference(zeros, head, 7) == sawtooth);
}

TEST_CASE("undifference validates initial values") {
	CHECK_THROWS_AS(undifference(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}, 1),
	                ConfigError);
}

TEST_CASE("difference/undifference roundtrip property, lags 1 and 7") {
	Rng rng(42);
	for (int trial = 0; trial < 1000; ++trial) {
		const std::size_t lag = trial % 2 == 0 ? 1 : 7;
		const std::size_t n = lag + 1 + rng.below(60);
		std::vector<double> x(n);
		for (double &v : x) {
			v = rng.uniform(-50.0, 50.0);
		}
		const auto diffed = difference(x, lag);
		const std::vector<double> head(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(lag));
		const auto rebuilt = undifference(diffed, head, lag);
		REQUIRE(rebuilt.size() == x.size());
		CHECK(testutil::max_abs_diff(rebuilt, x) < 1e-12);
	}
}

TEST_CASE("differencing operators commute") {
	Rng rng(7);
	for (int trial = 0; trial < 200; ++trial) {
		const std::size_t n = 40 + rng.below(80);
		std::vector<double> x(n);
		for (double &v : x) {
			v = rng.uniform(-10.0, 10.0);
		}
		// d=1 then D=1 at s=7 vs the reverse order.
		const auto a = difference(difference(x, 1), 7);
		const auto b = difference(difference(x, 7), 1);
		REQUIRE(a.size() == b.size());
		CHECK(testutil::max_abs_diff(a, b) < 1e-10);
	}
}

TEST_CASE("scaler standardizes and round-trips") {
	const std::vector<double> xs{2.0, 4.0};
	const Scaler sc = Scaler::fit(xs);
	CHECK(sc.mean() == doctest::Approx(3.0));
	const auto z = sc.apply(xs);
	CHECK(z[0] == doctest::Approx(-z[1])); // symmetric around the mean

	const std::vector<double> ys{1.5, -2.0, 7.3};
	const Scaler sy = Scaler::fit(ys);
	const auto round = sy.invert(sy.apply(ys));
	CHECK(testutil::max_abs_diff(round, ys) < 1e-12);
}

TEST_CASE("scaler output has mean 0 and sample std 1") {
	Rng rng(3);
	std::vector<double> xs(500);
	for (double &v : xs) {
		v = rng.normal(12.0, 4.0);
	}
	const Scaler sc = Scaler::fit(xs);
	const auto z = sc.apply(xs);
	double m = 0.0;
	for (double v : z) {
		m += v;
	}
	m /= static_cast<double>(z.size());
	double ss = 0.0;
	for (double v : z) {
		ss += (v - m) * (v - m);
	}
	const double sd = std::sqrt(ss / static_cast<double>(z.size() - 1));
	CHECK(std::abs(m) < 1e-10);
	CHECK(std::abs(sd - 1.0) < 1e-10);
}

TEST_CASE("scaler fit on train leaks nothing into test") {
	Rng rng(11);
	std::vector<double> xs(300);
	for (std::size_t i = 0; i < xs.size(); ++i) {
		xs[i] = 0.05 * static_cast<double>(i) + rng.normal();
	}
	const std::span<const double> train(xs.data(), 200);
	const Scaler sc = Scaler::fit(train);
	// Refitting on the same train segment reproduces the stored parameters.
	const Scaler sc2 = Scaler::fit(train);
	CHECK(sc.mean() == sc2.mean());
	CHECK(sc.stddev() == sc2.stddev());
	// Applied to the drifting test segment the mean is clearly nonzero.
	double m = 0.0;
	for (std::size_t i = 200; i < xs.size(); ++i) {
		m += sc.apply(xs[i]);
	}
	m /= 100.0;
	CHECK(std::abs(m) > 0.5);
}

TEST_CASE("scaler rejects degenerate input") {
	CHECK_THROWS_AS(Scaler::fit(std::vector<double>{3.0, 3.0, 3.0}), DataError);
	CHECK_THROWS_AS(Scaler::fit(std::vector<double>{3.0}), ConfigError);
}

TEST_CASE("split arithmetic") {
	{
		const auto idx = split(make_series(std::vector<double>(1000, 1.0)), 0.7, 0.15);
		CHECK(idx.train_end == 700);
		CHECK(idx.val_end == 850);
		CHECK(idx.total_len == 1000);
	}
	{
		const auto idx = split(make_series(std::vector<double>(10, 1.0)), 0.5, 0.4);
		CHECK(idx.train_end == 5);
		CHECK(idx.val_end == 9);
	}
	CHECK_THROWS_AS(split(make_series(std::vector<double>(100, 1.0)), 0.9, 0.2), ConfigError);
}

TEST_CASE("split segments cover the series without overlap") {
	Rng rng(5);
	for (int trial = 0; trial < 100; ++trial) {
		const std::size_t n = 20 + rng.below(500);
		const double train = rng.uniform(0.2, 0.7);
		const double val = rng.uniform(0.05, 0.9 - train);
		SplitIndex idx;
		try {
			idx = split(make_series(std::vector<double>(n, 1.0)), train, val);
		} catch (const ConfigError &) {
			continue; // degenerate segment for this draw
		}
		CHECK(idx.train_end > 0);
		CHECK(idx.train_end < idx.val_end);
		CHECK(idx.val_end < n);
		CHECK(idx.total_len == n);
	}
}

TEST_CASE("daily series validates construction") {
	CHECK_THROWS_AS(make_series({}), DataError);
	CHECK_THROWS_AS(make_series({1.0, std::nan("")}), DataError);
	ExogTable exog;
	exog.push_back({"x", {1.0}});
	CHECK_THROWS_AS(make_series({1.0, 2.0}, exog), DataError);
}

TEST_CASE("csv ingestion round-trips and validates") {
	ExogTable exog;
	exog.push_back({"schedule_carrier", {10.0, 11.5, 9.25}});
	const DailySeries series = make_series({1.5, 2.5, 3.75}, exog);
	const std::string csv = format_series_csv(series, {"config_hash=deadbeef"});
	const DailySeries parsed = parse_series_csv(csv, "mem");
	CHECK(parsed.values() == series.values());
	CHECK(parsed.exog()[0].values == series.exog()[0].values);
	CHECK(parsed.start_date() == series.start_date());
}

TEST_CASE("csv ingestion names the offending row") {
	const std::string missing_day = "date,volume\n2019-01-01,1\n2019-01-03,2\n";
	CHECK_THROWS_WITH_AS(parse_series_csv(missing_day, "t"),
	                     doctest::Contains("row 2"), DataError);

	const std::string bad_number = "date,volume\n2019-01-01,1\n2019-01-02,abc\n";
	CHECK_THROWS_WITH_AS(parse_series_csv(bad_number, "t"),
	                     doctest::Contains("row 2"), DataError);

	const std::string bad_date = "date,volume\n2019-01-01,1\n2019-13-01,2\n";
	CHECK_THROWS_WITH_AS(parse_series_csv(bad_date, "t"),
	                     doctest::Contains("row 2"), DataError);

	const std::string bad_header = "when,volume\n2019-01-01,1\n";
	CHECK_THROWS_AS(parse_series_csv(bad_header, "t"), DataError);
}

TEST_CASE("key-value doc round-trips doubles losslessly") {
	Rng rng(17);
	KeyValueDoc doc;
	std::vector<double> values(200);
	for (double &v : values) {
		v = rng.normal(0.0, 1e3) * std::pow(10.0, rng.uniform(-12.0, 12.0));
	}
	doc.set_doubles("values", values);
	const KeyValueDoc parsed = KeyValueDoc::parse(doc.to_string());
	const auto round = parsed.get_doubles("values");
	REQUIRE(round.size() == values.size());
	for (std::size_t i = 0; i < values.size(); ++i) {
		CHECK(round[i] == values[i]); // bit-exact
	}
}
