#pragma once

#include "fuelcast/series.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fuelcast {

enum class ScenarioProfile { FlagCarrier, LowCost, AirportAggregate };

ScenarioProfile scenario_profile_from_string(const std::string &name);
std::string to_string(ScenarioProfile profile);

// Demand collapse over [start_day, start_day + duration): demand is multiplied
// by (1 - depth). Schedules are published ahead and do not anticipate it.
struct ShockSpec {
	int start_day = 0;
	int duration = 0;
	double depth = 0.0; // in (0, 1]
};

struct ScenarioSpec {
	ScenarioProfile profile = ScenarioProfile::FlagCarrier;
	int n_days = 1000;
	std::uint64_t seed = 0;
	// Target correlation between the schedule column and realized demand;
	// negative selects the profile default (0.2 flag carrier, 0.9 otherwise).
	double exog_reliability = -1.0;
	std::optional<ShockSpec> shock;
};

// Deterministic synthetic daily demand with schedule exogenous columns.
// Demand = level + piecewise trend + weekly Fourier seasonality + AR(1) noise,
// times the shock multiplier; the schedule column mixes the standardized
// latent (deterministic) demand driver with independent noise, mixed so the
// sample correlation lands near exog_reliability.
DailySeries generate(const ScenarioSpec &spec);

// The airport aggregate is the exact sum of these component carriers.
std::vector<DailySeries> generate_airport_components(const ScenarioSpec &spec);

} // namespace fuelcast
