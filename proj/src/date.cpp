#include "fuelcast/date.hpp"

#include "fuelcast/errors.hpp"

#include <cstdio>

namespace fuelcast {

namespace {

// Civil-from-days and days-from-civil, Hinnant's algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
	y -= m <= 2;
	const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
	const unsigned yoe = static_cast<unsigned>(y - era * 400);
	const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
	                     static_cast<unsigned>(d) - 1u;
	const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
	return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int &y, int &m, int &d) {
	z += 719468;
	const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
	const unsigned doe = static_cast<unsigned>(z - era * 146097);
	const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
	const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
	const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
	const unsigned mp = (5 * doy + 2) / 153;
	d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
	m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
	y = static_cast<int>(yy + (m <= 2));
}

bool is_leap(int y) {
	return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int days_in_month(int y, int m) {
	static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
	if (m == 2 && is_leap(y)) {
		return 29;
	}
	return lengths[m - 1];
}

} // namespace

Date Date::from_ymd(int year, int month, int day) {
	if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month)) {
		throw DataError("invalid calendar date: " + std::to_string(year) + "-" +
		                std::to_string(month) + "-" + std::to_string(day));
	}
	return Date(days_from_civil(year, month, day));
}

Date Date::parse(const std::string &iso) {
	int y = 0, m = 0, d = 0;
	char tail = 0;
	const int got = std::sscanf(iso.c_str(), "%d-%d-%d%c", &y, &m, &d, &tail);
	if (got != 3 || iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
		throw DataError("malformed ISO-8601 date: '" + iso + "'");
	}
	return from_ymd(y, m, d);
}

void Date::to_ymd(int &year, int &month, int &day) const {
	civil_from_days(days_, year, month, day);
}

std::string Date::to_string() const {
	int y, m, d;
	to_ymd(y, m, d);
	char buf[16];
	std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
	return buf;
}

int Date::weekday() const {
	// 1970-01-01 was a Thursday (weekday 3 with Monday = 0).
	std::int64_t w = (days_ + 3) % 7;
	if (w < 0) {
		w += 7;
	}
	return static_cast<int>(w);
}

} // namespace fuelcast
