// fuelcast: daily demand forecasting toolkit.
//
// Subcommands: simulate, fit, forecast, backtest, tune. Runs are driven by a
// key=value config file plus flag overrides; every output file embeds the
// config hash for provenance. Exit codes: 0 success, 2 config error, 3 data
// error, 4 estimation failure.

#include "fuelcast/backtest.hpp"
#include "fuelcast/errors.hpp"
#include "fuelcast/forecaster.hpp"
#include "fuelcast/io.hpp"
#include "fuelcast/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fuelcast;

namespace {

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
	std::map<std::string, std::string> values;

	bool has(const std::string &key) const { return values.count(key) > 0; }
	std::string get(const std::string &key, const std::string &fallback = "") const {
		const auto it = values.find(key);
		return it == values.end() ? fallback : it->second;
	}
	double get_double(const std::string &key, double fallback) const {
		const auto it = values.find(key);
		return it == values.end() ? fallback : parse_double(it->second);
	}
	long long get_int(const std::string &key, long long fallback) const {
		const auto it = values.find(key);
		if (it == values.end()) {
			return fallback;
		}
		try {
			return std::stoll(it->second);
		} catch (const std::exception &) {
			throw ConfigError("config key '" + key + "': cannot parse '" + it->second +
			                  "' as integer");
		}
	}
	std::vector<std::string> get_list(const std::string &key) const {
		std::vector<std::string> out;
		const std::string v = get(key);
		if (v.empty()) {
			return out;
		}
		std::istringstream ss(v);
		std::string item;
		while (std::getline(ss, item, ',')) {
			out.push_back(item);
		}
		return out;
	}

	// FNV-1a over the canonical sorted key=value view. Output locations are
	// not part of the run's semantic configuration.
	std::string hash() const {
		std::uint64_t h = 1469598103934665603ull;
		for (const auto &[k, v] : values) {
			if (k == "out" || k == "out_dir") {
				continue;
			}
			for (const char c : k + "=" + v + "\n") {
				h ^= static_cast<unsigned char>(c);
				h *= 1099511628211ull;
			}
		}
		char buf[20];
		std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
		return buf;
	}
};

RunConfig load_config(const std::string &config_path,
                      const std::vector<std::string> &overrides) {
	RunConfig cfg;
	if (!config_path.empty()) {
		std::istringstream in(read_text_file(config_path));
		std::string line;
		while (std::getline(in, line)) {
			if (!line.empty() && line.back() == '\r') {
				line.pop_back();
			}
			if (line.empty() || line[0] == '#') {
				continue;
			}
			const auto eq = line.find('=');
			if (eq == std::string::npos) {
				throw ConfigError("config: malformed line '" + line + "'");
			}
			cfg.values[line.substr(0, eq)] = line.substr(eq + 1);
		}
	}
	for (const auto &ov : overrides) {
		const auto eq = ov.find('=');
		if (eq == std::string::npos) {
			throw ConfigError("override must look like key=value, got '" + ov + "'");
		}
		cfg.values[ov.substr(0, eq)] = ov.substr(eq + 1);
	}
	return cfg;
}

// ---------------------------------------------------------------------------
// Data loading

ScenarioSpec scenario_from_config(const RunConfig &cfg) {
	ScenarioSpec spec;
	spec.profile = scenario_profile_from_string(cfg.get("scenario"));
	spec.n_days = static_cast<int>(cfg.get_int("n_days", 1000));
	spec.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
	spec.exog_reliability = cfg.get_double("exog_reliability", -1.0);
	const auto shock = cfg.get_list("shock");
	if (!shock.empty()) {
		if (shock.size() != 3) {
			throw ConfigError("shock must be start,duration,depth");
		}
		spec.shock = ShockSpec{std::stoi(shock[0]), std::stoi(shock[1]),
		                       parse_double(shock[2])};
	}
	return spec;
}

DailySeries load_data(const RunConfig &cfg) {
	const bool has_data = cfg.has("data");
	const bool has_scenario = cfg.has("scenario");
	if (has_data == has_scenario) {
		throw ConfigError("exactly one data source required: set either data= or scenario=");
	}
	if (has_data) {
		return read_series_csv(cfg.get("data"));
	}
	return generate(scenario_from_config(cfg));
}

// ---------------------------------------------------------------------------
// Model construction

std::vector<std::string> exog_names_for(const RunConfig &cfg, const DailySeries &series) {
	std::vector<std::string> names = cfg.get_list("exog");
	if (names.empty()) {
		names = series.exog_names();
	}
	for (const auto &n : names) {
		series.exog_column(n); // throws ConfigError when missing
	}
	return names;
}

SarimaxSpec sarimax_spec_from_config(const RunConfig &cfg, const DailySeries &series,
                                     bool with_exog) {
	SarimaxSpec spec;
	spec.p = static_cast<int>(cfg.get_int("p", 1));
	spec.d = static_cast<int>(cfg.get_int("d", 0));
	spec.q = static_cast<int>(cfg.get_int("q", 1));
	spec.P = static_cast<int>(cfg.get_int("P", 1));
	spec.D = static_cast<int>(cfg.get_int("D", 0));
	spec.Q = static_cast<int>(cfg.get_int("Q", 1));
	spec.s = static_cast<int>(cfg.get_int("s", 7));
	if (with_exog) {
		spec.exog_names = exog_names_for(cfg, series);
	}
	return spec;
}

DecomposableSpec decomposable_spec_from_config(const RunConfig &cfg, const DailySeries &series,
                                               bool with_exog) {
	DecomposableSpec spec;
	spec.changepoint_prior_scale = cfg.get_double("cp_scale", 0.05);
	spec.seasonality_prior_scale = cfg.get_double("seas_scale", 10.0);
	spec.n_changepoints = static_cast<int>(cfg.get_int("n_changepoints", 25));
	spec.fourier_order_weekly = static_cast<int>(cfg.get_int("fourier_weekly", 3));
	spec.fourier_order_yearly = static_cast<int>(cfg.get_int("fourier_yearly", 10));
	for (const auto &h : cfg.get_list("holidays")) {
		spec.holidays.push_back(Date::parse(h));
	}
	if (with_exog) {
		spec.extra_regressors = exog_names_for(cfg, series);
	}
	return spec;
}

LstmSpec lstm_spec_from_config(const RunConfig &cfg, int horizon, std::uint64_t seed) {
	LstmSpec spec;
	spec.window = static_cast<int>(cfg.get_int("window", 28));
	spec.hidden_dim = static_cast<int>(cfg.get_int("hidden", 32));
	spec.n_layers = static_cast<int>(cfg.get_int("layers", 1));
	spec.horizon = horizon;
	spec.learning_rate = cfg.get_double("lr", 0.01);
	spec.patience = static_cast<int>(cfg.get_int("patience", 10));
	spec.max_epochs = static_cast<int>(cfg.get_int("max_epochs", 500));
	spec.val_fraction = cfg.get_double("val_fraction", 0.15);
	spec.seed = seed;
	return spec;
}

std::unique_ptr<Forecaster> make_model(const std::string &model, const RunConfig &cfg,
                                       const DailySeries &series, int horizon,
                                       std::uint64_t seed) {
	if (model == "sarima") {
		return std::make_unique<SarimaxForecaster>(sarimax_spec_from_config(cfg, series, false));
	}
	if (model == "sarimax") {
		return std::make_unique<SarimaxForecaster>(sarimax_spec_from_config(cfg, series, true));
	}
	if (model == "decomposable") {
		return std::make_unique<DecomposableForecaster>(
		    decomposable_spec_from_config(cfg, series, false));
	}
	if (model == "decomposable_mv") {
		return std::make_unique<DecomposableForecaster>(
		    decomposable_spec_from_config(cfg, series, true));
	}
	if (model == "lstm") {
		return std::make_unique<LstmForecaster>(lstm_spec_from_config(cfg, horizon, seed));
	}
	if (model == "lstm_mv") {
		return std::make_unique<LstmForecaster>(lstm_spec_from_config(cfg, horizon, seed),
		                                        exog_names_for(cfg, series));
	}
	if (model == "hybrid_sarima" || model == "hybrid_sarimax") {
		LstmSpec residual = lstm_spec_from_config(cfg, horizon, seed);
		residual.input_dim = 1;
		residual.window = static_cast<int>(cfg.get_int("window", 14));
		residual.hidden_dim = static_cast<int>(cfg.get_int("hidden", 16));
		return std::make_unique<HybridForecaster>(
		    sarimax_spec_from_config(cfg, series, model == "hybrid_sarimax"), residual);
	}
	if (model == "seasonal_naive") {
		return std::make_unique<SeasonalNaiveForecaster>(static_cast<int>(cfg.get_int("s", 7)));
	}
	throw ConfigError("unknown model '" + model + "'");
}

// ---------------------------------------------------------------------------
// Output helpers

void ensure_out_dir(const std::string &dir) {
	std::error_code ec;
	fs::create_directories(dir, ec);
	if (ec) {
		throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
	}
}

std::string out_path(const RunConfig &cfg, const std::string &filename) {
	const std::string dir = cfg.get("out_dir", ".");
	ensure_out_dir(dir);
	return (fs::path(dir) / filename).string();
}

json metrics_json(const MetricSet &m) {
	return json{{"rmse", m.rmse}, {"mae", m.mae}, {"smape", m.smape}};
}

// ---------------------------------------------------------------------------
// Commands

int cmd_simulate(const RunConfig &cfg) {
	if (!cfg.has("scenario")) {
		throw ConfigError("simulate requires scenario=");
	}
	const DailySeries series = generate(scenario_from_config(cfg));
	const std::string path =
	    cfg.has("out") ? cfg.get("out") : out_path(cfg, to_string(scenario_from_config(cfg).profile) + ".csv");
	write_series_csv(path, series, {"config_hash=" + cfg.hash()});
	std::cout << "wrote " << path << " (" << series.size() << " days)\n";
	return 0;
}

int cmd_fit(const RunConfig &cfg) {
	const DailySeries series = load_data(cfg);
	const int horizon = static_cast<int>(cfg.get_int("horizon", 30));
	const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
	const std::string model_name = cfg.get("model", "sarima");
	auto model = make_model(model_name, cfg, series, horizon, seed);
	model->fit(series);

	const std::string ckpt_path = out_path(cfg, "model.ckpt");
	write_text_file(ckpt_path, "# config_hash=" + cfg.hash() + "\n" + model->checkpoint());
	const std::string report_path = out_path(cfg, "fit_report.txt");
	write_text_file(report_path, "# config_hash=" + cfg.hash() + "\nmodel=" + model->name() +
	                                 "\n" + model->checkpoint());
	std::cout << "fitted " << model->name() << "; checkpoint " << ckpt_path << "\n";
	return 0;
}

int cmd_forecast(const RunConfig &cfg) {
	const DailySeries series = load_data(cfg);
	const int horizon = static_cast<int>(cfg.get_int("horizon", 30));
	const double alpha = cfg.get_double("alpha", 0.05);
	if (!cfg.has("model_file")) {
		throw ConfigError("forecast requires model_file= (a checkpoint from fit)");
	}
	auto model = forecaster_from_checkpoint(read_text_file(cfg.get("model_file")), series);

	ExogTable future_exog;
	if (cfg.has("future_exog")) {
		// Same delimited layout minus the volume column: date,<name>,...
		const std::string content = read_text_file(cfg.get("future_exog"));
		std::istringstream in(content);
		std::string line;
		std::vector<std::string> header;
		while (std::getline(in, line)) {
			if (line.empty() || line[0] == '#') {
				continue;
			}
			std::istringstream hs(line);
			std::string f;
			while (std::getline(hs, f, ',')) {
				header.push_back(f);
			}
			break;
		}
		if (header.empty() || header[0] != "date") {
			throw DataError(cfg.get("future_exog") + ": expected header 'date,<exog...>'");
		}
		future_exog.resize(header.size() - 1);
		for (std::size_t i = 1; i < header.size(); ++i) {
			future_exog[i - 1].name = header[i];
		}
		std::size_t row = 0;
		while (std::getline(in, line)) {
			if (line.empty() || line[0] == '#') {
				continue;
			}
			++row;
			std::istringstream rs(line);
			std::string f;
			std::vector<std::string> fields;
			while (std::getline(rs, f, ',')) {
				fields.push_back(f);
			}
			if (fields.size() != header.size()) {
				throw DataError(cfg.get("future_exog") + ": row " + std::to_string(row) +
				                ": wrong field count");
			}
			for (std::size_t i = 1; i < fields.size(); ++i) {
				future_exog[i - 1].values.push_back(parse_double(fields[i]));
			}
		}
	}

	const ForecastResult fc = model->predict(horizon, future_exog, alpha);
	std::ostringstream out;
	out << "# config_hash=" << cfg.hash() << "\n";
	out << "date,mean,lower,upper\n";
	for (int h = 0; h < horizon; ++h) {
		const Date d = series.date_at(series.size() - 1) + (h + 1);
		out << d.to_string() << ',' << format_double(fc.mean[static_cast<std::size_t>(h)]) << ','
		    << format_double(fc.lower[static_cast<std::size_t>(h)]) << ','
		    << format_double(fc.upper[static_cast<std::size_t>(h)]) << '\n';
	}
	const std::string path = cfg.has("out") ? cfg.get("out") : out_path(cfg, "forecast.csv");
	write_text_file(path, out.str());
	std::cout << "wrote " << path << "\n";
	return 0;
}

int cmd_backtest(const RunConfig &cfg) {
	const DailySeries series = load_data(cfg);
	const std::size_t test_len = static_cast<std::size_t>(cfg.get_int("test_len", 90));
	const std::size_t fold_len = static_cast<std::size_t>(cfg.get_int("fold_len", 30));
	const double alpha = cfg.get_double("alpha", 0.05);
	const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
	std::vector<std::string> models = cfg.get_list("model");
	if (models.empty()) {
		models = {"sarima"};
	}

	json doc;
	doc["command"] = "backtest";
	doc["config_hash"] = cfg.hash();
	doc["test_len"] = test_len;
	doc["fold_len"] = fold_len;

	std::ostringstream paths_csv;
	paths_csv << "# config_hash=" << cfg.hash() << "\n";
	paths_csv << "model,date,fold,actual,mean,lower,upper\n";
	std::ostringstream table_csv;
	table_csv << "# config_hash=" << cfg.hash() << "\n";
	table_csv << "model,rmse,mae,smape\n";

	for (const auto &model_name : models) {
		const ForecasterFactory factory = [&](int fold) {
			return make_model(model_name, cfg, series, static_cast<int>(fold_len),
			                  seed + static_cast<std::uint64_t>(fold));
		};
		const BacktestReport report = walk_forward(factory, series, test_len, fold_len, alpha);
		json jm;
		jm["pooled"] = metrics_json(report.pooled);
		jm["mean_fold"] = metrics_json(report.mean_fold);
		jm["folds"] = json::array();
		for (const auto &m : report.fold_metrics) {
			jm["folds"].push_back(metrics_json(m));
		}
		doc["models"][model_name] = jm;
		table_csv << model_name << ',' << format_double(report.pooled.rmse) << ','
		          << format_double(report.pooled.mae) << ','
		          << format_double(report.pooled.smape) << '\n';
		for (std::size_t f = 0; f < report.paths.size(); ++f) {
			const FoldPath &p = report.paths[f];
			for (std::size_t i = 0; i < p.mean.size(); ++i) {
				paths_csv << model_name << ',' << series.date_at(p.start_index + i).to_string()
				          << ',' << f << ',' << format_double(p.actual[i]) << ','
				          << format_double(p.mean[i]) << ',' << format_double(p.lower[i]) << ','
				          << format_double(p.upper[i]) << '\n';
			}
		}
	}

	const std::string metrics_path = out_path(cfg, "backtest_metrics.json");
	write_text_file(metrics_path, doc.dump(2) + "\n");
	write_text_file(out_path(cfg, "backtest_metrics.csv"), table_csv.str());
	write_text_file(out_path(cfg, "backtest_paths.csv"), paths_csv.str());
	std::cout << "wrote " << metrics_path << "\n";
	for (const auto &model_name : models) {
		std::cout << model_name << ": pooled smape "
		          << doc["models"][model_name]["pooled"]["smape"] << "\n";
	}
	return 0;
}

std::vector<GridCandidate> grid_for_family(const std::string &family, const RunConfig &cfg,
                                           const DailySeries &series, int horizon,
                                           std::uint64_t seed) {
	const bool mv = family.size() > 3 && family.substr(family.size() - 3) == "_mv";
	if (family == "sarima") {
		return sarimax_default_grid({}, static_cast<int>(cfg.get_int("s", 7)));
	}
	if (family == "sarimax") {
		return sarimax_default_grid(exog_names_for(cfg, series),
		                            static_cast<int>(cfg.get_int("s", 7)));
	}
	if (family == "decomposable" || family == "decomposable_mv") {
		return decomposable_default_grid(mv ? exog_names_for(cfg, series)
		                                    : std::vector<std::string>{});
	}
	if (family == "lstm" || family == "lstm_mv") {
		return lstm_default_grid(mv ? exog_names_for(cfg, series) : std::vector<std::string>{},
		                         horizon, seed);
	}
	throw ConfigError("unknown tune family '" + family + "'");
}

int cmd_tune(const RunConfig &cfg) {
	const DailySeries series = load_data(cfg);
	const int horizon = static_cast<int>(cfg.get_int("horizon", 30));
	const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
	const int jobs = static_cast<int>(cfg.get_int("jobs", 1));
	const std::string family = cfg.get("family", "sarima");
	const SplitIndex idx =
	    split(series, cfg.get_double("train_frac", 0.7), cfg.get_double("val_frac", 0.15));

	const auto grid = grid_for_family(family, cfg, series, horizon, seed);
	const GridSearchResult result = grid_search(grid, series, idx, horizon, jobs);

	json doc;
	doc["command"] = "tune";
	doc["config_hash"] = cfg.hash();
	doc["family"] = family;
	doc["cells"] = json::array();
	for (const auto &cell : result.cells) {
		json jc;
		jc["label"] = cell.label;
		jc["failed"] = cell.failed;
		if (cell.failed) {
			jc["message"] = cell.message;
		} else {
			jc["validation_mse"] = cell.validation_mse;
		}
		doc["cells"].push_back(jc);
	}
	if (result.has_winner()) {
		doc["winner"] = result.winner().label;
		doc["winner_mse"] = result.winner().validation_mse;
	}
	write_text_file(out_path(cfg, "tune_report.json"), doc.dump(2) + "\n");

	if (!result.has_winner()) {
		throw EstimationError("all " + std::to_string(result.cells.size()) +
		                      " grid cells failed; see tune_report.json");
	}

	// Winner spec as a ready-to-run config for fit/backtest.
	RunConfig winner_cfg = cfg;
	winner_cfg.values.erase("family");
	const std::string &label = result.winner().label;
	if (family == "sarima" || family == "sarimax") {
		int p, d, q, P, D, Q, s;
		if (std::sscanf(label.c_str() + label.find('('), "(%d,%d,%d)x(%d,%d,%d,%d)", &p, &d, &q,
		                &P, &D, &Q, &s) != 7) {
			throw EstimationError("cannot parse winner label '" + label + "'");
		}
		winner_cfg.values["model"] = family;
		winner_cfg.values["p"] = std::to_string(p);
		winner_cfg.values["d"] = std::to_string(d);
		winner_cfg.values["q"] = std::to_string(q);
		winner_cfg.values["P"] = std::to_string(P);
		winner_cfg.values["D"] = std::to_string(D);
		winner_cfg.values["Q"] = std::to_string(Q);
		winner_cfg.values["s"] = std::to_string(s);
	} else if (family.rfind("decomposable", 0) == 0) {
		double cp, seas;
		if (std::sscanf(label.c_str(), "decomposable(cp=%lf,seas=%lf)", &cp, &seas) != 2) {
			throw EstimationError("cannot parse winner label '" + label + "'");
		}
		winner_cfg.values["model"] = family;
		winner_cfg.values["cp_scale"] = format_double(cp);
		winner_cfg.values["seas_scale"] = format_double(seas);
	} else {
		int w, l, h;
		if (std::sscanf(label.c_str(), "lstm(w=%d,l=%d,h=%d)", &w, &l, &h) != 3) {
			throw EstimationError("cannot parse winner label '" + label + "'");
		}
		winner_cfg.values["model"] = family;
		winner_cfg.values["window"] = std::to_string(w);
		winner_cfg.values["layers"] = std::to_string(l);
		winner_cfg.values["hidden"] = std::to_string(h);
	}
	std::ostringstream out;
	out << "# config_hash=" << cfg.hash() << "\n";
	for (const auto &[k, v] : winner_cfg.values) {
		out << k << '=' << v << '\n';
	}
	write_text_file(out_path(cfg, "winner.cfg"), out.str());
	std::cout << "winner: " << result.winner().label << " (validation MSE "
	          << result.winner().validation_mse << ")\n";
	return 0;
}

} // namespace

int main(int argc, char **argv) {
	CLI::App app{"fuelcast: daily demand forecasting toolkit"};
	app.require_subcommand(1);

	std::string config_path;
	std::vector<std::string> overrides;

	auto add_common = [&](CLI::App *sub) {
		sub->add_option("--config", config_path, "key=value config file");
		sub->add_option("--set", overrides, "override config entries (key=value)");
	};

	auto *sim = app.add_subcommand("simulate", "generate a synthetic scenario data file");
	auto *fit = app.add_subcommand("fit", "fit one model and persist a checkpoint");
	auto *fc = app.add_subcommand("forecast", "forecast from a saved checkpoint");
	auto *bt = app.add_subcommand("backtest", "walk-forward backtest of one or more models");
	auto *tn = app.add_subcommand("tune", "grid-search a model family on the validation split");
	for (auto *sub : {sim, fit, fc, bt, tn}) {
		add_common(sub);
	}

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		if (e.get_exit_code() == 0) {
			return app.exit(e); // --help
		}
		std::cerr << "error kind=config code=2 msg=\"" << e.what() << "\"\n";
		std::cerr << "invalid command line; see --help\n";
		return 2;
	}

	try {
		const RunConfig cfg = load_config(config_path, overrides);
		if (sim->parsed()) {
			return cmd_simulate(cfg);
		}
		if (fit->parsed()) {
			return cmd_fit(cfg);
		}
		if (fc->parsed()) {
			return cmd_forecast(cfg);
		}
		if (bt->parsed()) {
			return cmd_backtest(cfg);
		}
		if (tn->parsed()) {
			return cmd_tune(cfg);
		}
		throw ConfigError("no subcommand selected");
	} catch (const ConfigError &e) {
		std::cerr << "error kind=config code=2 msg=\"" << e.what() << "\"\n";
		std::cerr << "configuration problem: " << e.what() << "\n";
		return 2;
	} catch (const DataError &e) {
		std::cerr << "error kind=data code=3 msg=\"" << e.what() << "\"\n";
		std::cerr << "data problem: " << e.what() << "\n";
		return 3;
	} catch (const EstimationError &e) {
		std::cerr << "error kind=estimation code=4 msg=\"" << e.what() << "\"\n";
		std::cerr << "estimation failed: " << e.what() << "\n";
		return 4;
	} catch (const std::exception &e) {
		std::cerr << "error kind=internal code=1 msg=\"" << e.what() << "\"\n";
		return 1;
	}
}
