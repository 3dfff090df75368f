#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ftf/dates.hpp"

namespace ftf {

// One daily OHLC observation. Prices are strictly positive and satisfy
// low <= min(open, close) <= max(open, close) <= high.
struct Bar {
    Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
};

// Ordered daily bars with strictly increasing dates.
struct PriceSeries {
    std::vector<Bar> bars;

    [[nodiscard]] size_t size() const { return bars.size(); }
    [[nodiscard]] bool empty() const { return bars.empty(); }
    [[nodiscard]] const Bar& operator[](size_t i) const { return bars[i]; }
    [[nodiscard]] Date first_date() const { return bars.front().date; }
    [[nodiscard]] Date last_date() const { return bars.back().date; }

    // Index of the first bar with date >= d.
    [[nodiscard]] size_t lower_bound(Date d) const;
    // Bars with first_date <= date < end (copy).
    [[nodiscard]] PriceSeries slice(Date begin, Date end) const;

    [[nodiscard]] Eigen::ArrayXd closes() const;
};

// Daily simple returns r_t = close_t / close_{t-1} - 1. values[i] is the
// return of bars[i + 1]; dates carry the day each return realizes on.
struct ReturnSeries {
    std::vector<Date> dates;
    Eigen::ArrayXd values;

    [[nodiscard]] size_t size() const { return dates.size(); }
};

struct CsvSchema {
    std::string date = "date";
    std::string open = "open";
    std::string high = "high";
    std::string low = "low";
    std::string close = "close";
    char delimiter = ',';
};

// Parses a headered CSV into a validated series sorted by date.
// Throws MalformedRow / NonPositivePrice / UnsortedDuplicateDate.
PriceSeries load_csv(const std::string& path, const CsvSchema& schema = {});

// Validation shared by load_csv and synthetic generation.
void validate_bar(const Bar& bar, long line);
void validate_series(PriceSeries& series);  // sorts, rejects duplicate dates

// Fills every business day of `calendar` over its span [first, last] with a
// bar; days absent from the input get a synthetic flat bar O=H=L=C equal to
// the previous close, so prices (never returns) are carried forward.
// Input bars on non-calendar days are dropped. Throws LeadingGap when the
// calendar starts before the first available price.
PriceSeries align_calendar(const PriceSeries& series, const Calendar& calendar, Date first,
                           Date last);

// Convenience overload spanning the series' own date range.
PriceSeries align_calendar(const PriceSeries& series, const Calendar& calendar);

ReturnSeries simple_returns(const PriceSeries& series);  // throws TooShort for len < 2

// y_t = log(close_t), aligned 1:1 with the input bars.
Eigen::ArrayXd log_prices(const PriceSeries& series);

}  // namespace ftf
