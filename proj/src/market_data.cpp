#include "ftf/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ftf/errors.hpp"

namespace ftf {

namespace {

std::string trim(const std::string& s) {
    const size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) out.push_back(trim(field));
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

double parse_price(const std::string& text, long line, const std::string& column) {
    try {
        size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw MalformedRow(line, "unparseable " + column + " value '" + text + "'");
    }
}

}  // namespace

size_t PriceSeries::lower_bound(Date d) const {
    auto it = std::lower_bound(bars.begin(), bars.end(), d,
                               [](const Bar& b, Date x) { return b.date < x; });
    return static_cast<size_t>(it - bars.begin());
}

PriceSeries PriceSeries::slice(Date begin, Date end) const {
    PriceSeries out;
    const size_t lo = lower_bound(begin);
    const size_t hi = lower_bound(end);
    out.bars.assign(bars.begin() + static_cast<long>(lo), bars.begin() + static_cast<long>(hi));
    return out;
}

Eigen::ArrayXd PriceSeries::closes() const {
    Eigen::ArrayXd out(static_cast<Eigen::Index>(bars.size()));
    for (size_t i = 0; i < bars.size(); ++i) out[static_cast<Eigen::Index>(i)] = bars[i].close;
    return out;
}

void validate_bar(const Bar& bar, long line) {
    if (!(bar.open > 0.0) || !(bar.high > 0.0) || !(bar.low > 0.0) || !(bar.close > 0.0))
        throw NonPositivePrice(line, "prices must be strictly positive");
    if (bar.low > std::min(bar.open, bar.close) || bar.high < std::max(bar.open, bar.close))
        throw MalformedRow(line, "OHLC invariant violated (low <= min(o,c) <= max(o,c) <= high)");
}

void validate_series(PriceSeries& series) {
    std::stable_sort(series.bars.begin(), series.bars.end(),
                     [](const Bar& a, const Bar& b) { return a.date < b.date; });
    for (size_t i = 1; i < series.bars.size(); ++i)
        if (series.bars[i].date == series.bars[i - 1].date)
            throw UnsortedDuplicateDate("duplicate date " + series.bars[i].date.to_iso());
}

PriceSeries load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream file(path);
    if (!file.is_open()) throw DataError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(file, line)) throw DataError("'" + path + "': empty file");

    // Strip a UTF-8 BOM if present, then resolve column positions.
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = split(line, schema.delimiter);
    auto column = [&](const std::string& name) {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<long>(i);
        throw DataError("'" + path + "': column '" + name + "' not found in header");
    };
    const long c_date = column(schema.date);
    const long c_open = column(schema.open);
    const long c_high = column(schema.high);
    const long c_low = column(schema.low);
    const long c_close = column(schema.close);
    const long needed = std::max({c_date, c_open, c_high, c_low, c_close});

    PriceSeries series;
    long line_no = 1;
    while (std::getline(file, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split(line, schema.delimiter);
        if (static_cast<long>(fields.size()) <= needed)
            throw MalformedRow(line_no, "expected at least " + std::to_string(needed + 1) +
                                            " columns, got " + std::to_string(fields.size()));
        Bar bar;
        try {
            bar.date = Date::parse_iso(fields[static_cast<size_t>(c_date)]);
        } catch (const Error& e) {
            throw MalformedRow(line_no, e.what());
        }
        bar.open = parse_price(fields[static_cast<size_t>(c_open)], line_no, schema.open);
        bar.high = parse_price(fields[static_cast<size_t>(c_high)], line_no, schema.high);
        bar.low = parse_price(fields[static_cast<size_t>(c_low)], line_no, schema.low);
        bar.close = parse_price(fields[static_cast<size_t>(c_close)], line_no, schema.close);
        validate_bar(bar, line_no);
        series.bars.push_back(bar);
    }
    validate_series(series);
    return series;
}

PriceSeries align_calendar(const PriceSeries& series, const Calendar& calendar, Date first,
                           Date last) {
    if (series.empty()) throw LeadingGap("cannot align an empty series");
    const auto days = calendar.business_days(first, last);
    if (days.empty()) return {};
    if (days.front() < series.first_date())
        throw LeadingGap("calendar starts " + days.front().to_iso() +
                         " but first price is " + series.first_date().to_iso());

    PriceSeries out;
    out.bars.reserve(days.size());
    size_t src = 0;
    double prev_close = series.bars.front().close;
    for (Date d : days) {
        while (src < series.size() && series[src].date < d) {
            prev_close = series[src].close;  // skipped non-calendar bars still inform the fill
            ++src;
        }
        if (src < series.size() && series[src].date == d) {
            out.bars.push_back(series[src]);
            prev_close = series[src].close;
            ++src;
        } else {
            out.bars.push_back(Bar{d, prev_close, prev_close, prev_close, prev_close});
        }
    }
    return out;
}

PriceSeries align_calendar(const PriceSeries& series, const Calendar& calendar) {
    if (series.empty()) throw LeadingGap("cannot align an empty series");
    return align_calendar(series, calendar, series.first_date(), series.last_date());
}

ReturnSeries simple_returns(const PriceSeries& series) {
    if (series.size() < 2) throw TooShort("need at least 2 bars for returns");
    ReturnSeries out;
    const size_t n = series.size() - 1;
    out.dates.reserve(n);
    out.values.resize(static_cast<Eigen::Index>(n));
    for (size_t i = 1; i < series.size(); ++i) {
        out.dates.push_back(series[i].date);
        out.values[static_cast<Eigen::Index>(i - 1)] =
            series[i].close / series[i - 1].close - 1.0;
    }
    return out;
}

Eigen::ArrayXd log_prices(const PriceSeries& series) {
    return series.closes().log();
}

}  // namespace ftf
