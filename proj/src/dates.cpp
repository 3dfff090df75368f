#include "ftf/dates.hpp"

#include <algorithm>
#include <cstdio>

#include "ftf/errors.hpp"

namespace ftf {

namespace {

// Howard Hinnant's civil-date algorithms.
int days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<int>(doe) - 719468;
}

void civil_from_days(int z, int& y, int& m, int& d) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int yr = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    y = yr + (m <= 2);
}

int days_in_month(int y, int m) {
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2) {
        const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        return leap ? 29 : 28;
    }
    return lengths[m - 1];
}

}  // namespace

Date Date::from_ymd(int year, int month, int day) {
    if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month))
        throw Error("invalid calendar date " + std::to_string(year) + "-" + std::to_string(month) +
                    "-" + std::to_string(day));
    return Date(days_from_civil(year, month, day));
}

Date Date::parse_iso(const std::string& text) {
    int y = 0, m = 0, d = 0;
    char tail = '\0';
    if (std::sscanf(text.c_str(), "%d-%d-%d%c", &y, &m, &d, &tail) != 3)
        throw Error("date not ISO-8601 (YYYY-MM-DD): '" + text + "'");
    return from_ymd(y, m, d);
}

std::string Date::to_iso() const {
    int y, m, d;
    to_ymd(y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

void Date::to_ymd(int& year, int& month, int& day) const {
    civil_from_days(serial_, year, month, day);
}

int Date::weekday() const {
    // serial 0 (1970-01-01) was a Thursday = 3 in Monday-based numbering.
    return ((serial_ + 3) % 7 + 7) % 7;
}

int Date::year() const {
    int y, m, d;
    to_ymd(y, m, d);
    return y;
}

int Date::month() const {
    int y, m, d;
    to_ymd(y, m, d);
    return m;
}

Date add_months(Date date, int months) {
    int y, m, d;
    date.to_ymd(y, m, d);
    const int idx = (y * 12 + (m - 1)) + months;
    y = idx >= 0 ? idx / 12 : (idx - 11) / 12;
    m = idx - y * 12 + 1;
    d = std::min(d, days_in_month(y, m));
    return Date::from_ymd(y, m, d);
}

Date add_years(Date date, int years) { return add_months(date, 12 * years); }

Calendar::Calendar(std::vector<Date> holidays) : holidays_(std::move(holidays)) {
    std::sort(holidays_.begin(), holidays_.end());
    holidays_.erase(std::unique(holidays_.begin(), holidays_.end()), holidays_.end());
}

bool Calendar::is_business_day(Date d) const {
    if (d.is_weekend()) return false;
    return !std::binary_search(holidays_.begin(), holidays_.end(), d);
}

std::vector<Date> Calendar::business_days(Date first, Date last) const {
    std::vector<Date> out;
    if (last < first) return out;
    out.reserve(static_cast<size_t>((last - first) * 5 / 7 + 2));
    for (Date d = first; d <= last; d += 1)
        if (is_business_day(d)) out.push_back(d);
    return out;
}

Date Calendar::next_business_day(Date d) const {
    while (!is_business_day(d)) d += 1;
    return d;
}

}  // namespace ftf
