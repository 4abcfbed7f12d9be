#pragma once

#include <cstdint>
#include <string>

namespace fuelcast {

// Calendar date stored as days since 1970-01-01 (proleptic Gregorian).
// Cheap value type; arithmetic in whole days.
class Date {
public:
	Date() = default;
	explicit Date(std::int64_t days_since_epoch) : days_(days_since_epoch) {}

	static Date from_ymd(int year, int month, int day);
	// Parses "YYYY-MM-DD". Throws DataError on malformed input or impossible dates.
	static Date parse(const std::string &iso);

	std::int64_t days_since_epoch() const { return days_; }
	void to_ymd(int &year, int &month, int &day) const;
	std::string to_string() const;

	// 0 = Monday ... 6 = Sunday.
	int weekday() const;

	Date operator+(std::int64_t days) const { return Date(days_ + days); }
	std::int64_t operator-(const Date &other) const { return days_ - other.days_; }
	bool operator==(const Date &other) const { return days_ == other.days_; }
	bool operator!=(const Date &other) const { return days_ != other.days_; }
	bool operator<(const Date &other) const { return days_ < other.days_; }

private:
	std::int64_t days_ = 0;
};

} // namespace fuelcast
