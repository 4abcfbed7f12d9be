#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace fuelcast {

// Deterministic random source. Wraps std::mt19937_64 (whose output sequence is
// fully specified by the standard) with explicit uniform/normal mappings so the
// generated streams are identical on every platform; std::normal_distribution
// et al. are implementation-defined and would break bit-reproducibility.
class Rng {
public:
	explicit Rng(std::uint64_t seed) : engine_(seed) {}

	// Uniform in [0, 1) with 53-bit resolution.
	double uniform01() {
		return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
	}

	double uniform(double lo, double hi) {
		return lo + (hi - lo) * uniform01();
	}

	// Standard normal via Box-Muller; caches the spare deviate.
	double normal() {
		if (has_spare_) {
			has_spare_ = false;
			return spare_;
		}
		double u1 = uniform01();
		while (u1 <= 0.0) {
			u1 = uniform01();
		}
		const double u2 = uniform01();
		const double r = std::sqrt(-2.0 * std::log(u1));
		const double theta = 2.0 * M_PI * u2;
		spare_ = r * std::sin(theta);
		has_spare_ = true;
		return r * std::cos(theta);
	}

	double normal(double mean, double stddev) {
		return mean + stddev * normal();
	}

	// Integer in [0, n).
	std::uint64_t below(std::uint64_t n) {
		// Modulo bias is irrelevant at our n (<< 2^64), but rejection keeps it exact.
		const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
		std::uint64_t v = engine_();
		while (v >= limit) {
			v = engine_();
		}
		return v % n;
	}

	template <typename T>
	void shuffle(std::vector<T> &items) {
		for (std::size_t i = items.size(); i > 1; --i) {
			std::swap(items[i - 1], items[below(i)]);
		}
	}

private:
	std::mt19937_64 engine_;
	double spare_ = 0.0;
	bool has_spare_ = false;
};

} // namespace fuelcast
