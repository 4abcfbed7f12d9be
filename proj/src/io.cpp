#include "fuelcast/io.hpp"

#include "fuelcast/errors.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fuelcast {

namespace {

std::vector<std::string> split_fields(const std::string &line, char delim) {
	std::vector<std::string> fields;
	std::string field;
	std::istringstream ss(line);
	while (std::getline(ss, field, delim)) {
		fields.push_back(field);
	}
	if (!line.empty() && line.back() == delim) {
		fields.emplace_back();
	}
	return fields;
}

std::string strip_cr(std::string line) {
	if (!line.empty() && line.back() == '\r') {
		line.pop_back();
	}
	return line;
}

double parse_field_double(const std::string &text, const std::string &origin, std::size_t row,
                          const std::string &column) {
	errno = 0;
	char *end = nullptr;
	const double v = std::strtod(text.c_str(), &end);
	if (end == text.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
		throw DataError(origin + ": row " + std::to_string(row) + ": column '" + column +
		                "': cannot parse '" + text + "' as a finite number");
	}
	return v;
}

} // namespace

DailySeries parse_series_csv(const std::string &content, const std::string &origin) {
	std::istringstream in(content);
	std::string line;
	std::size_t lineno = 0;

	// Skip comment lines, find the header.
	std::vector<std::string> header;
	while (std::getline(in, line)) {
		++lineno;
		line = strip_cr(line);
		if (line.empty() || line[0] == '#') {
			continue;
		}
		header = split_fields(line, ',');
		break;
	}
	if (header.size() < 2 || header[0] != "date" || header[1] != "volume") {
		throw DataError(origin + ": expected header 'date,volume[,exog...]'");
	}

	ExogTable exog;
	for (std::size_t i = 2; i < header.size(); ++i) {
		if (header[i].empty()) {
			throw DataError(origin + ": empty exogenous column name in header");
		}
		exog.push_back({header[i], {}});
	}

	std::vector<double> values;
	Date start;
	Date expected;
	bool first = true;
	std::size_t row = 0;
	while (std::getline(in, line)) {
		++lineno;
		line = strip_cr(line);
		if (line.empty() || line[0] == '#') {
			continue;
		}
		++row;
		const auto fields = split_fields(line, ',');
		if (fields.size() != header.size()) {
			throw DataError(origin + ": row " + std::to_string(row) + ": expected " +
			                std::to_string(header.size()) + " fields, got " +
			                std::to_string(fields.size()));
		}
		Date d;
		try {
			d = Date::parse(fields[0]);
		} catch (const DataError &e) {
			throw DataError(origin + ": row " + std::to_string(row) + ": " + e.what());
		}
		if (first) {
			start = d;
			expected = d;
			first = false;
		} else if (d != expected) {
			throw DataError(origin + ": row " + std::to_string(row) + ": date " +
			                d.to_string() + " breaks the daily grid (expected " +
			                expected.to_string() + "); missing days are rejected, not imputed");
		}
		expected = expected + 1;
		values.push_back(parse_field_double(fields[1], origin, row, "volume"));
		for (std::size_t i = 0; i < exog.size(); ++i) {
			exog[i].values.push_back(parse_field_double(fields[i + 2], origin, row, exog[i].name));
		}
	}
	if (values.empty()) {
		throw DataError(origin + ": no data rows");
	}
	return DailySeries(start, std::move(values), std::move(exog));
}

DailySeries read_series_csv(const std::string &path) {
	return parse_series_csv(read_text_file(path), path);
}

std::string format_series_csv(const DailySeries &series,
                              const std::vector<std::string> &header_comments) {
	std::ostringstream out;
	for (const auto &c : header_comments) {
		out << "# " << c << '\n';
	}
	out << "date,volume";
	for (const auto &col : series.exog()) {
		out << ',' << col.name;
	}
	out << '\n';
	for (std::size_t i = 0; i < series.size(); ++i) {
		out << series.date_at(i).to_string() << ',' << format_double(series.values()[i]);
		for (const auto &col : series.exog()) {
			out << ',' << format_double(col.values[i]);
		}
		out << '\n';
	}
	return out.str();
}

void write_series_csv(const std::string &path, const DailySeries &series,
                      const std::vector<std::string> &header_comments) {
	write_text_file(path, format_series_csv(series, header_comments));
}

void KeyValueDoc::set(const std::string &key, const std::string &value) {
	auto it = index_.find(key);
	if (it != index_.end()) {
		entries_[it->second].second = value;
		return;
	}
	index_[key] = entries_.size();
	entries_.emplace_back(key, value);
}

void KeyValueDoc::set_double(const std::string &key, double value) {
	set(key, format_double(value));
}

void KeyValueDoc::set_int(const std::string &key, long long value) {
	set(key, std::to_string(value));
}

void KeyValueDoc::set_doubles(const std::string &key, const std::vector<double> &values) {
	std::string joined;
	for (std::size_t i = 0; i < values.size(); ++i) {
		if (i > 0) {
			joined += ',';
		}
		joined += format_double(values[i]);
	}
	set(key, joined);
}

void KeyValueDoc::set_strings(const std::string &key, const std::vector<std::string> &values) {
	std::string joined;
	for (std::size_t i = 0; i < values.size(); ++i) {
		if (i > 0) {
			joined += ',';
		}
		joined += values[i];
	}
	set(key, joined);
}

bool KeyValueDoc::has(const std::string &key) const {
	return index_.count(key) > 0;
}

const std::string &KeyValueDoc::get(const std::string &key) const {
	auto it = index_.find(key);
	if (it == index_.end()) {
		throw DataError("missing key '" + key + "'");
	}
	return entries_[it->second].second;
}

double KeyValueDoc::get_double(const std::string &key) const {
	return parse_double(get(key));
}

long long KeyValueDoc::get_int(const std::string &key) const {
	const std::string &v = get(key);
	errno = 0;
	char *end = nullptr;
	const long long r = std::strtoll(v.c_str(), &end, 10);
	if (end == v.c_str() || *end != '\0' || errno == ERANGE) {
		throw DataError("key '" + key + "': cannot parse '" + v + "' as integer");
	}
	return r;
}

std::vector<double> KeyValueDoc::get_doubles(const std::string &key) const {
	const std::string &v = get(key);
	std::vector<double> out;
	if (v.empty()) {
		return out;
	}
	for (const auto &f : split_fields(v, ',')) {
		out.push_back(parse_double(f));
	}
	return out;
}

std::vector<std::string> KeyValueDoc::get_strings(const std::string &key) const {
	const std::string &v = get(key);
	if (v.empty()) {
		return {};
	}
	return split_fields(v, ',');
}

std::string KeyValueDoc::to_string() const {
	std::ostringstream out;
	for (const auto &[k, v] : entries_) {
		out << k << '=' << v << '\n';
	}
	return out.str();
}

KeyValueDoc KeyValueDoc::parse(const std::string &content) {
	KeyValueDoc doc;
	std::istringstream in(content);
	std::string line;
	while (std::getline(in, line)) {
		line = strip_cr(line);
		if (line.empty() || line[0] == '#') {
			continue;
		}
		const auto eq = line.find('=');
		if (eq == std::string::npos) {
			throw DataError("malformed key=value line: '" + line + "'");
		}
		doc.set(line.substr(0, eq), line.substr(eq + 1));
	}
	return doc;
}

KeyValueDoc KeyValueDoc::read_file(const std::string &path) {
	return parse(read_text_file(path));
}

void KeyValueDoc::write_file(const std::string &path) const {
	write_text_file(path, to_string());
}

std::string format_double(double value) {
	char buf[32];
	std::snprintf(buf, sizeof(buf), "%.17g", value);
	return buf;
}

double parse_double(const std::string &text) {
	errno = 0;
	char *end = nullptr;
	const double v = std::strtod(text.c_str(), &end);
	if (end == text.c_str() || *end != '\0') {
		throw DataError("cannot parse '" + text + "' as a number");
	}
	return v;
}

std::string read_text_file(const std::string &path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw DataError("cannot open file '" + path + "'");
	}
	std::ostringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

void write_text_file(const std::string &path, const std::string &content) {
	std::ofstream out(path, std::ios::binary);
	if (!out) {
		throw DataError("cannot write file '" + path + "'");
	}
	out << content;
}

} // namespace fuelcast
