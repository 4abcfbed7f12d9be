#pragma once

#include <stdexcept>
#include <string>

namespace fuelcast {

// Invalid configuration, arguments, or preconditions (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
	explicit ConfigError(const std::string &msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data (CLI exit code 3).
class DataError : public std::runtime_error {
public:
	explicit DataError(const std::string &msg) : std::runtime_error(msg) {}
};

// Model estimation failed; message carries best-so-far diagnostics (CLI exit code 4).
class EstimationError : public std::runtime_error {
public:
	explicit EstimationError(const std::string &msg) : std::runtime_error(msg) {}
};

} // namespace fuelcast
