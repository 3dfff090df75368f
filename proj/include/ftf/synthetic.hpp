#pragma once

#include <cstdint>
#include <vector>

#include "ftf/market_data.hpp"

namespace ftf {

// Seeded geometric random walk with injected trend segments; stands in for
// proprietary price data in tests and demos.
struct SyntheticSpec {
    std::uint64_t seed = 42;
    int days = 2520;
    Date start = Date::from_ymd(2005, 1, 3);
    double start_price = 1000.0;
    double daily_vol = 0.01;
    // Per-segment drifts cycled over segment_days-long stretches.
    std::vector<double> segment_drifts{8e-4, 0.0, -5e-4, 0.0};
    int segment_days = 120;
    double range_scale = 0.5;  // high/low extension relative to daily vol
};

// Upward-biased preset used by the reversal falsification checks.
SyntheticSpec trending_spec(std::uint64_t seed, int days);

PriceSeries generate_synthetic(const SyntheticSpec& spec, const Calendar& calendar = Calendar{});

void write_csv(const PriceSeries& series, const std::string& path);

}  // namespace ftf
