#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ftf/analytics.hpp"
#include "ftf/market_data.hpp"
#include "ftf/walkforward.hpp"

namespace ftf {

struct DataConfig {
    std::string path;
    CsvSchema schema;
    std::vector<Date> holidays;
};

struct CapacityConfig {
    double adv_dollars = 5e10;
    double reference_lmax = 2.9e-6;  // external reference point; divergence is reported, not forced
    int grid_points = 50;
};

struct AnalyticsConfig {
    int bootstrap_B = 1000;
    int bootstrap_block_length = 20;
    int spa_B = 800;
    int spa_block_length = 20;
    int hac_lags = 5;
    std::uint64_t seed = 20150102;
    double active_threshold = 1e-3;
    double target_vol = 0.15;
    std::vector<std::pair<std::string, Date>> subperiods;
    CapacityConfig capacity;
};

// Candidate grid expanded by the multiple-testing command (4 x 4 x 4 = 64).
struct SpaGridConfig {
    std::vector<double> lambda_grid{0.85, 0.90, 0.94, 0.97};
    std::vector<int> momentum_windows{20, 50, 100, 150};
    std::vector<double> activation_thresholds{0.51, 0.52, 0.55, 0.60};
};

struct RunConfig {
    DataConfig data;
    WindowSpec window;
    PipelineParams pipeline;
    LatencyMode latency;
    AnalyticsConfig analytics;
    SpaGridConfig spa_grid;
    std::string output_dir = "out";

    // Parses and validates; env vars with the FTF_ prefix override file
    // values (FTF_SECTION__KEY=value, e.g. FTF_SIGNAL__LAMBDA_EMA=0.9).
    static RunConfig from_file(const std::string& path, bool apply_env = true);
    static RunConfig from_json(const nlohmann::json& j);

    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] std::uint64_t hash() const;

    void validate() const;  // throws ConfigError naming the offending field

    [[nodiscard]] AnalyticsParams analytics_params() const;
    [[nodiscard]] Calendar calendar() const { return Calendar(data.holidays); }
};

RunConfig default_config();

}  // namespace ftf
