#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace ftf {

// Calendar day stored as a serial day number (days since 1970-01-01,
// proleptic Gregorian). Cheap to compare and hash; converts to/from
// civil dates with the usual era arithmetic.
class Date {
  public:
    Date() = default;
    constexpr explicit Date(int serial) : serial_(serial) {}

    static Date from_ymd(int year, int month, int day);
    static Date parse_iso(const std::string& text);  // "YYYY-MM-DD", throws MalformedRow-free Error

    [[nodiscard]] int serial() const { return serial_; }
    [[nodiscard]] std::string to_iso() const;
    void to_ymd(int& year, int& month, int& day) const;

    // 0 = Monday ... 6 = Sunday
    [[nodiscard]] int weekday() const;
    [[nodiscard]] bool is_weekend() const { return weekday() >= 5; }

    [[nodiscard]] int year() const;
    [[nodiscard]] int month() const;

    Date& operator+=(int days) {
        serial_ += days;
        return *this;
    }
    friend Date operator+(Date d, int days) { return Date(d.serial_ + days); }
    friend Date operator-(Date d, int days) { return Date(d.serial_ - days); }
    friend int operator-(Date a, Date b) { return a.serial_ - b.serial_; }
    friend auto operator<=>(Date, Date) = default;

  private:
    int serial_ = 0;
};

// Month-granular shifts clamp the day-of-month (Jan 31 + 1m -> Feb 28).
Date add_months(Date d, int months);
Date add_years(Date d, int years);

// Business-day set: weekdays minus an explicit holiday list. Exchange
// holiday tables vary by venue, so they are an input, not built in.
class Calendar {
  public:
    Calendar() = default;
    explicit Calendar(std::vector<Date> holidays);

    [[nodiscard]] bool is_business_day(Date d) const;
    [[nodiscard]] std::vector<Date> business_days(Date first, Date last) const;  // inclusive
    [[nodiscard]] Date next_business_day(Date d) const;                          // first business day >= d
    [[nodiscard]] const std::vector<Date>& holidays() const { return holidays_; }

  private:
    std::vector<Date> holidays_;  // sorted, unique
};

}  // namespace ftf
