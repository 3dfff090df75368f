#include "ftf/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "ftf/errors.hpp"

namespace ftf {

SyntheticSpec trending_spec(std::uint64_t seed, int days) {
    SyntheticSpec spec;
    spec.seed = seed;
    spec.days = days;
    spec.daily_vol = 0.007;
    spec.segment_drifts = {2.5e-3, 5e-4, 2.0e-3, 1.0e-3};
    spec.segment_days = 180;
    return spec;
}

PriceSeries generate_synthetic(const SyntheticSpec& spec, const Calendar& calendar) {
    if (spec.days < 1) throw Error("synthetic series needs at least one day");
    if (!(spec.start_price > 0.0)) throw Error("start_price must be positive");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    PriceSeries series;
    series.bars.reserve(static_cast<size_t>(spec.days));
    Date date = calendar.next_business_day(spec.start);
    double log_close = std::log(spec.start_price);
    double prev_close = spec.start_price;
    for (int i = 0; i < spec.days; ++i) {
        const double drift =
            spec.segment_drifts.empty()
                ? 0.0
                : spec.segment_drifts[static_cast<size_t>(i / std::max(1, spec.segment_days)) %
                                      spec.segment_drifts.size()];
        log_close += drift + spec.daily_vol * gauss(rng);
        const double close = std::exp(log_close);

        Bar bar;
        bar.date = date;
        bar.open = prev_close;
        bar.close = close;
        const double hi_ext = std::abs(gauss(rng)) * spec.daily_vol * spec.range_scale;
        const double lo_ext = std::abs(gauss(rng)) * spec.daily_vol * spec.range_scale;
        bar.high = std::max(bar.open, bar.close) * (1.0 + hi_ext);
        bar.low = std::min(bar.open, bar.close) * (1.0 - lo_ext);
        series.bars.push_back(bar);

        prev_close = close;
        date = calendar.next_business_day(date + 1);
    }
    return series;
}

void write_csv(const PriceSeries& series, const std::string& path) {
    std::ofstream file(path);
    if (!file.is_open()) throw Error("cannot write '" + path + "'");
    file << "date,open,high,low,close\n";
    char buf[160];
    for (const Bar& bar : series.bars) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g\n", bar.date.to_iso().c_str(),
                      bar.open, bar.high, bar.low, bar.close);
        file << buf;
    }
}

}  // namespace ftf
