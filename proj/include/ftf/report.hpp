#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ftf/analytics.hpp"
#include "ftf/config.hpp"
#include "ftf/walkforward.hpp"

namespace ftf {

// Everything cmd_backtest reports on the stitched out-of-sample ledger.
struct ReportBundle {
    PerfSummary summary;
    RegressionResult regression;
    BootstrapResult bootstrap;
    TailMetrics tails;
    ScaledReport scaled;
    CapacityResult capacity;
    Attribution attribution;
    int num_windows = 0;
    bool overlapping = false;
};

nlohmann::json to_json(const PerfSummary& s);
nlohmann::json to_json(const RegressionResult& r);
nlohmann::json to_json(const BootstrapResult& b);
nlohmann::json to_json(const TailMetrics& t);
nlohmann::json to_json(const ScaledReport& s);
nlohmann::json to_json(const CapacityResult& c, double reference_lmax);
nlohmann::json to_json(const Attribution& a);
nlohmann::json to_json(const FrozenParams& f);

// report.json: stable key schema, no timestamps (those live in the manifest).
void write_report(const ReportBundle& bundle, double reference_lmax, const std::string& path);

// equity.csv: date, net_return, equity.
void write_equity_csv(const Ledger& ledger, const std::string& path);

// manifest.json: config hash, data checksum, window boundaries, frozen
// parameter bundles, wall-clock timestamp.
void write_manifest(const RunConfig& config, const BacktestResult& result,
                    const std::string& data_checksum, const std::string& path);

std::string file_checksum(const std::string& path);  // fnv1a64 hex of file bytes

}  // namespace ftf
