#pragma once

#include "fuelcast/series.hpp"

#include <map>
#include <string>
#include <vector>

namespace fuelcast {

// Reads the delimited daily table: optional leading '#' comment lines, then a
// header row `date,volume[,exog1,...]`, then one row per consecutive calendar
// day. Validation errors name the offending row.
DailySeries read_series_csv(const std::string &path);
DailySeries parse_series_csv(const std::string &content, const std::string &origin);

// Writes the same format; `header_comments` lines are emitted as '# ...'.
void write_series_csv(const std::string &path, const DailySeries &series,
                      const std::vector<std::string> &header_comments = {});
std::string format_series_csv(const DailySeries &series,
                              const std::vector<std::string> &header_comments = {});

// Flat key=value document used for fit reports and model checkpoints.
// Preserves insertion order on write; '#' lines are comments.
class KeyValueDoc {
public:
	void set(const std::string &key, const std::string &value);
	void set_double(const std::string &key, double value);
	void set_int(const std::string &key, long long value);
	void set_doubles(const std::string &key, const std::vector<double> &values);
	void set_strings(const std::string &key, const std::vector<std::string> &values);

	bool has(const std::string &key) const;
	const std::string &get(const std::string &key) const;
	double get_double(const std::string &key) const;
	long long get_int(const std::string &key) const;
	std::vector<double> get_doubles(const std::string &key) const;
	std::vector<std::string> get_strings(const std::string &key) const;

	std::string to_string() const;
	static KeyValueDoc parse(const std::string &content);
	static KeyValueDoc read_file(const std::string &path);
	void write_file(const std::string &path) const;

private:
	std::vector<std::pair<std::string, std::string>> entries_;
	std::map<std::string, std::size_t> index_;
};

// Exact decimal rendering that round-trips IEEE doubles bit-for-bit.
std::string format_double(double value);
double parse_double(const std::string &text);

std::string read_text_file(const std::string &path);
void write_text_file(const std::string &path, const std::string &content);

} // namespace fuelcast
