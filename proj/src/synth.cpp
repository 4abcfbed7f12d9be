#include "fuelcast/synth.hpp"

#include "fuelcast/errors.hpp"
#include "fuelcast/rng.hpp"
#include "fuelcast/stats.hpp"

#include <algorithm>
#include <cmath>

namespace fuelcast {

namespace {

const Date kStartDate = Date::from_ymd(2019, 1, 1);

struct CarrierParams {
	double level = 100.0;
	double trend_slope = 0.0; // per day
	double weekly_amp1 = 1.0;
	double weekly_amp2 = 0.3;
	double weekly_phase = 0.0;
	double ar_rho = 0.6;
	double ar_sigma = 2.0;
	int n_mid_shifts = 0;      // latent level shifts inside the training span
	bool late_shift = false;   // one shift inside the final 90-day window
	double shift_scale = 10.0; // magnitude scale of level shifts
	double sched_level = 20.0;
	double sched_sd = 3.0;
};

struct CarrierSeries {
	std::vector<double> demand;
	std::vector<double> latent; // deterministic demand driver (pre-noise, pre-shock)
	std::vector<double> schedule;
};

double weekly_pattern(const CarrierParams &cp, int t) {
	const double w = 2.0 * M_PI * static_cast<double>(t) / 7.0;
	return cp.weekly_amp1 * std::sin(w + cp.weekly_phase) +
	       cp.weekly_amp2 * std::sin(2.0 * w + 0.7 * cp.weekly_phase);
}

// Builds one carrier: latent driver, realized demand (without shock), and the
// schedule column calibrated to the requested correlation.
CarrierSeries build_carrier(const CarrierParams &cp, int n, double reliability, Rng &rng) {
	CarrierSeries out;
	out.latent.resize(static_cast<std::size_t>(n));
	out.demand.resize(static_cast<std::size_t>(n));
	out.schedule.resize(static_cast<std::size_t>(n));

	// Level shifts are planned by the carrier, so the schedule sees them.
	std::vector<std::pair<int, double>> shifts;
	for (int k = 0; k < cp.n_mid_shifts; ++k) {
		const int day = static_cast<int>(rng.uniform(0.30, 0.55) * static_cast<double>(n));
		shifts.push_back({day, cp.shift_scale * (rng.uniform01() < 0.5 ? -1.0 : 1.0) *
		                           rng.uniform(0.8, 1.4)});
	}
	if (cp.late_shift) {
		const int day = n - static_cast<int>(rng.uniform(40.0, 85.0));
		shifts.push_back({day, cp.shift_scale * (rng.uniform01() < 0.5 ? -1.0 : 1.0) *
		                           rng.uniform(0.9, 1.4)});
	}

	for (int t = 0; t < n; ++t) {
		double level = cp.level + cp.trend_slope * static_cast<double>(t);
		for (const auto &[day, mag] : shifts) {
			if (t >= day) {
				level += mag;
			}
		}
		out.latent[static_cast<std::size_t>(t)] = level + weekly_pattern(cp, t);
	}

	double ar = 0.0;
	for (int t = 0; t < n; ++t) {
		ar = cp.ar_rho * ar + cp.ar_sigma * rng.normal();
		out.demand[static_cast<std::size_t>(t)] = out.latent[static_cast<std::size_t>(t)] + ar;
	}

	// Schedule: mix of the standardized latent and independent noise, with the
	// mixing weight set from the sample moments so corr(schedule, demand) lands
	// near `reliability`.
	const double lat_mean = mean(out.latent);
	const double lat_sd = sample_stddev(out.latent);
	const double dem_sd = sample_stddev(out.demand);
	double mix = lat_sd > 0.0 ? reliability * dem_sd / lat_sd : 0.0;
	mix = std::clamp(mix, 0.0, 1.0);
	const double noise_w = std::sqrt(std::max(0.0, 1.0 - mix * mix));
	for (int t = 0; t < n; ++t) {
		const double z = lat_sd > 0.0
		                     ? (out.latent[static_cast<std::size_t>(t)] - lat_mean) / lat_sd
		                     : 0.0;
		out.schedule[static_cast<std::size_t>(t)] =
		    cp.sched_level + cp.sched_sd * (mix * z + noise_w * rng.normal());
	}
	return out;
}

void apply_shock(std::vector<double> &demand, const std::optional<ShockSpec> &shock, int n) {
	if (!shock) {
		return;
	}
	if (shock->start_day < 0 || shock->duration <= 0 ||
	    shock->start_day + shock->duration > n) {
		throw ConfigError("shock window must lie inside [0, n_days)");
	}
	if (!(shock->depth > 0.0 && shock->depth <= 1.0)) {
		throw ConfigError("shock depth must lie in (0, 1]");
	}
	for (int t = shock->start_day; t < shock->start_day + shock->duration; ++t) {
		demand[static_cast<std::size_t>(t)] *= 1.0 - shock->depth;
	}
}

// Total CPH departures: weakly coupled to the carrier latent.
std::vector<double> build_cph_departures(const std::vector<double> &carrier_latent, int n,
                                         Rng &rng) {
	const double lat_mean = mean(carrier_latent);
	const double lat_sd = sample_stddev(carrier_latent);
	std::vector<double> out(static_cast<std::size_t>(n));
	double ar = 0.0;
	for (int t = 0; t < n; ++t) {
		ar = 0.7 * ar + 4.0 * rng.normal();
		const double weekly = 14.0 * std::sin(2.0 * M_PI * static_cast<double>(t) / 7.0 + 0.4);
		const double coupling =
		    lat_sd > 0.0
		        ? 5.0 * (carrier_latent[static_cast<std::size_t>(t)] - lat_mean) / lat_sd * 0.25
		        : 0.0;
		out[static_cast<std::size_t>(t)] = 260.0 + weekly + ar + coupling;
	}
	return out;
}

double default_reliability(ScenarioProfile profile) {
	return profile == ScenarioProfile::FlagCarrier ? 0.2 : 0.9;
}

void validate(const ScenarioSpec &spec) {
	if (spec.n_days < 200) {
		throw ConfigError("scenario needs n_days >= 200 for usable splits");
	}
	if (spec.exog_reliability > 1.0) {
		throw ConfigError("exog_reliability must lie in [0, 1]");
	}
}

std::vector<CarrierParams> airport_component_params() {
	// Heterogeneous customers: one stable long-haul carrier, one volatile
	// low-cost carrier, one mid-size operator.
	CarrierParams stable;
	stable.level = 60.0;
	stable.trend_slope = 0.003;
	stable.weekly_amp1 = 1.0;
	stable.weekly_amp2 = 0.4;
	stable.weekly_phase = 0.3;
	stable.ar_rho = 0.6;
	stable.ar_sigma = 1.4;
	stable.sched_level = 14.0;
	stable.sched_sd = 2.0;

	CarrierParams volatile_lc;
	volatile_lc.level = 55.0;
	volatile_lc.trend_slope = 0.012;
	volatile_lc.weekly_amp1 = 6.5;
	volatile_lc.weekly_amp2 = 2.0;
	volatile_lc.weekly_phase = 1.1;
	volatile_lc.ar_rho = 0.5;
	volatile_lc.ar_sigma = 1.8;
	volatile_lc.n_mid_shifts = 2;
	volatile_lc.late_shift = true;
	volatile_lc.shift_scale = 9.0;
	volatile_lc.sched_level = 38.0;
	volatile_lc.sched_sd = 6.0;

	CarrierParams mid;
	mid.level = 40.0;
	mid.trend_slope = 0.006;
	mid.weekly_amp1 = 3.0;
	mid.weekly_amp2 = 1.0;
	mid.weekly_phase = 2.0;
	mid.ar_rho = 0.55;
	mid.ar_sigma = 1.2;
	mid.n_mid_shifts = 1;
	mid.late_shift = true;
	mid.shift_scale = 6.0;
	mid.sched_level = 20.0;
	mid.sched_sd = 3.0;

	return {stable, volatile_lc, mid};
}

} // namespace

ScenarioProfile scenario_profile_from_string(const std::string &name) {
	if (name == "flag_carrier") {
		return ScenarioProfile::FlagCarrier;
	}
	if (name == "low_cost") {
		return ScenarioProfile::LowCost;
	}
	if (name == "airport_aggregate") {
		return ScenarioProfile::AirportAggregate;
	}
	throw ConfigError("unknown scenario profile '" + name +
	                  "' (expected flag_carrier, low_cost, or airport_aggregate)");
}

std::string to_string(ScenarioProfile profile) {
	switch (profile) {
	case ScenarioProfile::FlagCarrier:
		return "flag_carrier";
	case ScenarioProfile::LowCost:
		return "low_cost";
	case ScenarioProfile::AirportAggregate:
		return "airport_aggregate";
	}
	throw ConfigError("invalid scenario profile");
}

std::vector<DailySeries> generate_airport_components(const ScenarioSpec &spec) {
	validate(spec);
	const double reliability =
	    spec.exog_reliability >= 0.0 ? spec.exog_reliability : default_reliability(spec.profile);
	std::vector<DailySeries> components;
	const auto params = airport_component_params();
	for (std::size_t k = 0; k < params.size(); ++k) {
		Rng rng(spec.seed * 0x9E3779B97F4A7C15ull + 0x1000193ull * (k + 1));
		CarrierSeries cs = build_carrier(params[k], spec.n_days, reliability, rng);
		apply_shock(cs.demand, spec.shock, spec.n_days);
		ExogTable exog;
		exog.push_back({"schedule_carrier", cs.schedule});
		components.emplace_back(kStartDate, std::move(cs.demand), std::move(exog));
	}
	return components;
}

DailySeries generate(const ScenarioSpec &spec) {
	validate(spec);
	const double reliability =
	    spec.exog_reliability >= 0.0 ? spec.exog_reliability : default_reliability(spec.profile);

	if (spec.profile == ScenarioProfile::AirportAggregate) {
		const auto components = generate_airport_components(spec);
		const int n = spec.n_days;
		std::vector<double> total(static_cast<std::size_t>(n), 0.0);
		std::vector<double> schedule_total(static_cast<std::size_t>(n), 0.0);
		for (const auto &comp : components) {
			for (int t = 0; t < n; ++t) {
				total[static_cast<std::size_t>(t)] += comp.values()[static_cast<std::size_t>(t)];
				schedule_total[static_cast<std::size_t>(t)] +=
				    comp.exog()[0].values[static_cast<std::size_t>(t)];
			}
		}
		// Customer-count feature: active customers tracking aggregate activity.
		Rng rng(spec.seed * 0x9E3779B97F4A7C15ull + 0xABCDu);
		const double sched_mean = mean(schedule_total);
		const double sched_sd = sample_stddev(schedule_total);
		std::vector<double> customers(static_cast<std::size_t>(n));
		for (int t = 0; t < n; ++t) {
			const double z =
			    sched_sd > 0.0
			        ? (schedule_total[static_cast<std::size_t>(t)] - sched_mean) / sched_sd
			        : 0.0;
			customers[static_cast<std::size_t>(t)] =
			    std::round(30.0 + 3.5 * z + 1.5 * rng.normal());
		}
		ExogTable exog;
		exog.push_back({"schedule_total", std::move(schedule_total)});
		exog.push_back({"customers_active", std::move(customers)});
		return DailySeries(kStartDate, std::move(total), std::move(exog));
	}

	CarrierParams cp;
	if (spec.profile == ScenarioProfile::FlagCarrier) {
		cp.level = 100.0;
		cp.trend_slope = 0.004;
		cp.weekly_amp1 = 1.2;
		cp.weekly_amp2 = 0.4;
		cp.weekly_phase = 0.5;
		cp.ar_rho = 0.65;
		cp.ar_sigma = 2.0;
		cp.sched_level = 18.0;
		cp.sched_sd = 2.5;
	} else {
		cp.level = 80.0;
		cp.trend_slope = 0.01;
		cp.weekly_amp1 = 8.0;
		cp.weekly_amp2 = 3.0;
		cp.weekly_phase = 1.2;
		cp.ar_rho = 0.5;
		cp.ar_sigma = 2.5;
		cp.n_mid_shifts = 2;
		cp.late_shift = true;
		cp.shift_scale = 12.0;
		cp.sched_level = 45.0;
		cp.sched_sd = 8.0;
	}

	Rng rng(spec.seed);
	CarrierSeries cs = build_carrier(cp, spec.n_days, reliability, rng);
	std::vector<double> cph = build_cph_departures(cs.latent, spec.n_days, rng);
	apply_shock(cs.demand, spec.shock, spec.n_days);

	ExogTable exog;
	exog.push_back({"schedule_carrier", std::move(cs.schedule)});
	exog.push_back({"schedule_cph", std::move(cph)});
	return DailySeries(kStartDate, std::move(cs.demand), std::move(exog));
}

} // namespace fuelcast
