#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fuelcast/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using fuelcast::read_text_file;
using fuelcast::write_text_file;

namespace {

const std::string kCli = FUELCAST_CLI_PATH;

struct TempDir {
	fs::path path;
	TempDir() {
		path = fs::temp_directory_path() /
		       ("fuelcast_test_" + std::to_string(::getpid()) + "_" +
		        std::to_string(counter()++));
		fs::create_directories(path);
	}
	~TempDir() { fs::remove_all(path); }
	static int &counter() {
		static int c = 0;
		return c;
	}
	std::string file(const std::string &name) const { return (path / name).string(); }
};

int run(const std::string &args) {
	const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
	const int status = std::system(cmd.c_str());
	return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int run_capture(const std::string &args, const std::string &stderr_file) {
	const std::string cmd = kCli + " " + args + " > /dev/null 2> " + stderr_file;
	const int status = std::system(cmd.c_str());
	return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("simulate is byte-deterministic") {
	TempDir dir;
	const std::string a = dir.file("a.csv");
	const std::string b = dir.file("b.csv");
	CHECK(run("simulate --set scenario=low_cost --set seed=7 --set n_days=400 --set out=" + a) ==
	      0);
	CHECK(run("simulate --set scenario=low_cost --set seed=7 --set n_days=400 --set out=" + b) ==
	      0);
	CHECK(read_text_file(a) == read_text_file(b));
	CHECK(read_text_file(a).rfind("# config_hash=", 0) == 0); // provenance first line
}

TEST_CASE("fit then forecast produces an ordered interval table") {
	TempDir dir;
	const std::string data = dir.file("data.csv");
	REQUIRE(run("simulate --set scenario=flag_carrier --set seed=3 --set n_days=420 --set out=" +
	            data) == 0);
	REQUIRE(run("fit --set data=" + data +
	            " --set model=sarima --set p=1 --set d=0 --set q=1 --set P=0 --set D=1 --set "
	            "Q=1 --set out_dir=" +
	            dir.path.string()) == 0);
	REQUIRE(run("forecast --set data=" + data + " --set model_file=" + dir.file("model.ckpt") +
	            " --set horizon=30 --set out=" + dir.file("forecast.csv")) == 0);

	std::istringstream in(read_text_file(dir.file("forecast.csv")));
	std::string line;
	int rows = 0;
	bool header_seen = false;
	while (std::getline(in, line)) {
		if (line.empty() || line[0] == '#') {
			continue;
		}
		if (!header_seen) {
			CHECK(line == "date,mean,lower,upper");
			header_seen = true;
			continue;
		}
		++rows;
		std::istringstream rs(line);
		std::string date, mean, lower, upper;
		std::getline(rs, date, ',');
		std::getline(rs, mean, ',');
		std::getline(rs, lower, ',');
		std::getline(rs, upper, ',');
		const double m = std::stod(mean), lo = std::stod(lower), up = std::stod(upper);
		CHECK(lo <= m);
		CHECK(m <= up);
	}
	CHECK(rows == 30);
}

TEST_CASE("checkpoint reload reproduces forecasts bit-for-bit") {
	TempDir dir;
	const std::string data = dir.file("data.csv");
	REQUIRE(run("simulate --set scenario=low_cost --set seed=5 --set n_days=400 --set out=" +
	            data) == 0);
	REQUIRE(run("fit --set data=" + data +
	            " --set model=lstm --set window=14 --set hidden=8 --set max_epochs=10 "
	            "--set seed=5 --set out_dir=" +
	            dir.path.string()) == 0);
	const std::string fc1 = dir.file("f1.csv");
	const std::string fc2 = dir.file("f2.csv");
	REQUIRE(run("forecast --set data=" + data + " --set model_file=" + dir.file("model.ckpt") +
	            " --set out=" + fc1) == 0);
	REQUIRE(run("forecast --set data=" + data + " --set model_file=" + dir.file("model.ckpt") +
	            " --set out=" + fc2) == 0);
	CHECK(read_text_file(fc1) == read_text_file(fc2));
}

TEST_CASE("backtest emits metrics json, csv table, and per-day paths") {
	TempDir dir;
	const std::string data = dir.file("data.csv");
	REQUIRE(run("simulate --set scenario=flag_carrier --set seed=2 --set n_days=400 --set out=" +
	            data) == 0);
	REQUIRE(run("backtest --set data=" + data +
	            " --set model=seasonal_naive,sarima --set p=1 --set q=0 --set D=1 "
	            "--set out_dir=" +
	            dir.path.string()) == 0);
	const std::string metrics = read_text_file(dir.file("backtest_metrics.json"));
	CHECK(metrics.find("seasonal_naive") != std::string::npos);
	CHECK(metrics.find("sarima") != std::string::npos);
	CHECK(metrics.find("smape") != std::string::npos);
	CHECK(metrics.find("config_hash") != std::string::npos);
	const std::string paths = read_text_file(dir.file("backtest_paths.csv"));
	CHECK(paths.find("model,date,fold,actual,mean,lower,upper") != std::string::npos);
	const std::string table = read_text_file(dir.file("backtest_metrics.csv"));
	CHECK(table.find("model,rmse,mae,smape") != std::string::npos);
}

TEST_CASE("backtest on a noiseless weekly series scores zero for seasonal naive") {
	TempDir dir;
	std::ostringstream csv;
	csv << "date,volume\n";
	fuelcast::Date d = fuelcast::Date::from_ymd(2020, 1, 1);
	for (int t = 0; t < 300; ++t) {
		csv << (d + t).to_string() << ',' << (10 + t % 7) << '\n';
	}
	const std::string data = dir.file("weekly.csv");
	write_text_file(data, csv.str());
	REQUIRE(run("backtest --set data=" + data + " --set model=seasonal_naive --set out_dir=" +
	            dir.path.string()) == 0);
	const std::string table = read_text_file(dir.file("backtest_metrics.csv"));
	CHECK(table.find("seasonal_naive,0,0,0") != std::string::npos);
}

TEST_CASE("pipeline: simulate, tune, backtest across all three scenarios") {
	for (const std::string scenario : {"flag_carrier", "low_cost", "airport_aggregate"}) {
		TempDir dir;
		const std::string data = dir.file("data.csv");
		REQUIRE(run("simulate --set scenario=" + scenario +
		            " --set seed=4 --set n_days=420 --set out=" + data) == 0);
		// Restrict the decomposable grid family (16 cells) to keep the unit
		// suite quick; the full default grids run in the acceptance binary.
		REQUIRE(run("tune --set data=" + data +
		            " --set family=decomposable --set out_dir=" + dir.path.string()) == 0);
		const std::string winner = read_text_file(dir.file("winner.cfg"));
		CHECK(winner.find("model=decomposable") != std::string::npos);
		REQUIRE(run("backtest --config " + dir.file("winner.cfg") + " --set out_dir=" +
		            dir.path.string()) == 0);
		CHECK(fs::exists(dir.file("backtest_metrics.json")));
	}
}

TEST_CASE("tune writes a report with every cell") {
	TempDir dir;
	const std::string data = dir.file("data.csv");
	REQUIRE(run("simulate --set scenario=low_cost --set seed=6 --set n_days=420 --set out=" +
	            data) == 0);
	REQUIRE(run("tune --set data=" + data + " --set family=decomposable --set out_dir=" +
	            dir.path.string()) == 0);
	const std::string report = read_text_file(dir.file("tune_report.json"));
	CHECK(report.find("\"winner\"") != std::string::npos);
	std::size_t cells = 0;
	for (std::size_t at = report.find("\"label\""); at != std::string::npos;
	     at = report.find("\"label\"", at + 1)) {
		++cells;
	}
	CHECK(cells == 16); // 4 x 4 decomposable default grid
}

TEST_CASE("exit codes distinguish config, data, and estimation failures") {
	TempDir dir;
	// Config error: no data source.
	CHECK(run_capture("backtest", dir.file("e1")) == 2);
	CHECK(read_text_file(dir.file("e1")).find("kind=config") != std::string::npos);

	// Config error: both data sources.
	CHECK(run("backtest --set data=x.csv --set scenario=low_cost") == 2);

	// Data error: missing file.
	CHECK(run_capture("backtest --set data=" + dir.file("nope.csv"), dir.file("e2")) == 3);
	CHECK(read_text_file(dir.file("e2")).find("kind=data") != std::string::npos);

	// Data error: malformed rows (gap in the calendar).
	write_text_file(dir.file("gap.csv"), "date,volume\n2020-01-01,1\n2020-01-05,2\n");
	CHECK(run_capture("backtest --set data=" + dir.file("gap.csv"), dir.file("e3")) == 3);
	const std::string msg = read_text_file(dir.file("e3"));
	CHECK(msg.find("kind=data") != std::string::npos);
	CHECK(msg.find("row 2") != std::string::npos);

	// Config error: unknown model.
	write_text_file(dir.file("ok.csv"), [] {
		std::ostringstream csv;
		csv << "date,volume\n";
		fuelcast::Date d = fuelcast::Date::from_ymd(2020, 1, 1);
		for (int t = 0; t < 200; ++t) {
			csv << (d + t).to_string() << ',' << (10 + t % 7) << '\n';
		}
		return csv.str();
	}());
	CHECK(run("backtest --set data=" + dir.file("ok.csv") + " --set model=nope") == 2);

	// Unknown CLI flag.
	CHECK(run("backtest --bogus") == 2);
}

TEST_CASE("config file plus overrides and embedded hash") {
	TempDir dir;
	write_text_file(dir.file("run.cfg"),
	                "scenario=low_cost\nseed=9\nn_days=400\nout=" + dir.file("x.csv") + "\n");
	REQUIRE(run("simulate --config " + dir.file("run.cfg")) == 0);
	const std::string first = read_text_file(dir.file("x.csv"));

	// Overriding the seed changes both data and hash line.
	REQUIRE(run("simulate --config " + dir.file("run.cfg") + " --set seed=10") == 0);
	const std::string second = read_text_file(dir.file("x.csv"));
	CHECK(first != second);
	CHECK(first.substr(0, first.find('\n')) != second.substr(0, second.find('\n')));
}
