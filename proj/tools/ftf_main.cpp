// Command-line front end: backtest, stress, capacity, spa, gen-data.
//
// Exit codes: 0 success, 1 configuration error (offending field on stderr),
// 2 data error, 3 runtime error.

#include <CLI11.hpp>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <nlohmann/json.hpp>

#include "ftf/analytics.hpp"
#include "ftf/config.hpp"
#include "ftf/errors.hpp"
#include "ftf/hashing.hpp"
#include "ftf/report.hpp"
#include "ftf/synthetic.hpp"
#include "ftf/walkforward.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

ftf::RunConfig load_config(const CommonFlags& flags) {
    ftf::RunConfig config = ftf::RunConfig::from_file(flags.config_path);
    if (!flags.out_dir.empty()) config.output_dir = flags.out_dir;
    if (flags.seed_set) config.analytics.seed = flags.seed;
    return config;
}

ftf::PriceSeries load_aligned(const ftf::RunConfig& config) {
    const ftf::PriceSeries raw = ftf::load_csv(config.data.path, config.data.schema);
    return ftf::align_calendar(raw, config.calendar());
}

// Asset simple returns matched to the ledger's dates (the regression
// benchmark).
Eigen::ArrayXd benchmark_returns(const ftf::PriceSeries& aligned, const ftf::Ledger& ledger) {
    Eigen::ArrayXd out(ledger.size());
    for (Eigen::Index i = 0; i < ledger.size(); ++i) {
        const size_t idx = aligned.lower_bound(ledger.dates[static_cast<size_t>(i)]);
        if (idx >= aligned.size() || idx == 0 ||
            aligned[idx].date != ledger.dates[static_cast<size_t>(i)])
            throw ftf::DataError("ledger date " + ledger.dates[static_cast<size_t>(i)].to_iso() +
                                 " not found in the aligned series");
        out[i] = aligned[idx].close / aligned[idx - 1].close - 1.0;
    }
    return out;
}

ftf::CapacityResult build_capacity(const ftf::RunConfig& config, const ftf::FrozenParams& frozen,
                                   double mean_abs_turnover) {
    const auto& kelly = config.pipeline.kelly;
    const auto& cap = config.analytics.capacity;

    // Probe the root once to size the grid, then evaluate with g(0) = 0 first.
    double span = cap.reference_lmax > 0.0 ? 2.0 * cap.reference_lmax : 1e-5;
    try {
        const ftf::CapacityResult probe =
            ftf::capacity_curve(frozen.moments.mu_u, frozen.moments.sigma_u, kelly.k, kelly.gamma,
                                kelly.n, Eigen::ArrayXd::Zero(2));
        if (probe.l_max > 0.0) span = 1.5 * probe.l_max;
    } catch (const ftf::Error&) {
    }
    const Eigen::ArrayXd grid = Eigen::ArrayXd::LinSpaced(cap.grid_points, 0.0, span);
    ftf::CapacityResult result =
        ftf::capacity_curve(frozen.moments.mu_u, frozen.moments.sigma_u, kelly.k, kelly.gamma,
                            kelly.n, grid);
    result.adv_dollars = cap.adv_dollars;
    result.mean_abs_turnover = mean_abs_turnover;
    if (result.l_max > 0.0 && mean_abs_turnover > 0.0)
        result.aum_max = ftf::aum_mapping(result.l_max, cap.adv_dollars, mean_abs_turnover);
    return result;
}

void write_summary_csv_row(std::ofstream& file, const std::string& kind, double cost_mult,
                           double impact_mult, int latency, const std::string& variant,
                           const ftf::PerfSummary& s, bool degenerate) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%d,%s,%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                  kind.c_str(), cost_mult, impact_mult, latency, variant.c_str(), s.days,
                  s.sharpe, s.ann_return, s.ann_vol, s.max_drawdown, s.calmar,
                  s.mean_abs_turnover, degenerate ? 1 : 0);
    file << buf;
}

int cmd_backtest(const CommonFlags& flags) {
    const ftf::RunConfig config = load_config(flags);
    const ftf::PriceSeries aligned = load_aligned(config);

    ftf::RunVariant variant;
    variant.latency = config.latency;
    const ftf::BacktestResult result =
        ftf::run_walkforward(aligned, config.window, config.pipeline, variant);

    fs::create_directories(config.output_dir);
    const std::string report_path = config.output_dir + "/report.json";

    if (result.overlapping) {
        // Overlapping slices are never concatenated; emit per-slice summaries.
        json slices = json::array();
        for (size_t i = 0; i < result.per_window.size(); ++i) {
            json row{{"test_begin", result.windows[i].test_begin.to_iso()},
                     {"test_end", result.windows[i].test_end.to_iso()}};
            try {
                row["summary"] = ftf::to_json(
                    ftf::perf_summary(result.per_window[i], config.analytics_params()));
            } catch (const ftf::ZeroVol&) {
                row["summary"] = nullptr;
            }
            slices.push_back(row);
        }
        std::ofstream file(report_path);
        file << json{{"overlapping", true}, {"slices", slices}}.dump(2) << "\n";
    } else {
        const ftf::Ledger& ledger = result.stitched;
        ftf::ReportBundle bundle;
        bundle.summary = ftf::perf_summary(ledger, config.analytics_params());
        bundle.regression = ftf::capm_regression(ledger.net_return,
                                                 benchmark_returns(aligned, ledger),
                                                 config.analytics.hac_lags,
                                                 config.pipeline.vol.trading_days);
        bundle.bootstrap = ftf::block_bootstrap_sharpe(
            ledger.net_return, config.analytics.bootstrap_B,
            config.analytics.bootstrap_block_length, config.analytics.seed,
            config.pipeline.vol.trading_days);
        bundle.tails = ftf::tail_metrics(ledger.net_return, ledger.dates);
        bundle.scaled = ftf::vol_scaling(bundle.summary, bundle.regression,
                                         config.analytics.target_vol);
        bundle.capacity =
            build_capacity(config, result.frozen.back(), bundle.summary.mean_abs_turnover);
        bundle.attribution =
            ftf::attribution(ledger, config.analytics_params(), config.analytics.subperiods);
        bundle.num_windows = static_cast<int>(result.windows.size());
        bundle.overlapping = false;

        ftf::write_report(bundle, config.analytics.capacity.reference_lmax, report_path);
        ftf::write_ledger_csv(ledger, config.output_dir + "/ledger.csv");
        ftf::write_equity_csv(ledger, config.output_dir + "/equity.csv");
    }
    ftf::write_manifest(config, result, ftf::file_checksum(config.data.path),
                        config.output_dir + "/manifest.json");
    std::cout << "report written to " << report_path << "\n";
    return 0;
}

int cmd_stress(const CommonFlags& flags) {
    const ftf::RunConfig config = load_config(flags);
    const ftf::PriceSeries aligned = load_aligned(config);
    const ftf::AnalyticsParams analytics = config.analytics_params();

    ftf::StressGridSpec grid;  // 4 x 4 cost/impact at T+0
    const auto cells = ftf::run_stress_grid(aligned, config.window, config.pipeline, grid,
                                            analytics, flags.threads);

    fs::create_directories(config.output_dir);
    std::ofstream file(config.output_dir + "/stress.csv");
    if (!file.is_open()) throw ftf::Error("cannot write stress.csv");
    file << "kind,cost_multiplier,impact_multiplier,latency,variant,days,sharpe,ann_return,"
            "ann_vol,max_drawdown,calmar,mean_abs_turnover,degenerate\n";
    for (const auto& cell : cells)
        write_summary_csv_row(file, "cost_impact", cell.cost_multiplier, cell.impact_multiplier,
                              cell.latency_days, "full", cell.summary, false);

    auto variant_row = [&](const std::string& kind, const std::string& name,
                           const ftf::RunVariant& variant) {
        ftf::PerfSummary summary;
        bool degenerate = false;
        try {
            const ftf::BacktestResult r =
                ftf::run_walkforward(aligned, config.window, config.pipeline, variant);
            summary = ftf::perf_summary(r.stitched, analytics);
        } catch (const ftf::ZeroVol&) {
            degenerate = true;
        }
        write_summary_csv_row(file, kind, variant.cost_multiplier, variant.impact_multiplier,
                              variant.latency.delay_days, name, summary, degenerate);
    };

    for (int delay : {0, 1, 2}) {
        ftf::RunVariant v;
        v.latency.delay_days = delay;
        variant_row("latency", "T+" + std::to_string(delay), v);
    }
    variant_row("ablation", "full", ftf::RunVariant{});
    ftf::RunVariant slope_only;
    slope_only.ablation = ftf::Ablation::slope_only;
    variant_row("ablation", "slope_only", slope_only);
    ftf::RunVariant momentum_only;
    momentum_only.ablation = ftf::Ablation::momentum_only;
    variant_row("ablation", "momentum_only", momentum_only);
    ftf::RunVariant reversed;
    reversed.reversed = true;
    variant_row("ablation", "reversed", reversed);

    std::cout << "stress grid written to " << config.output_dir << "/stress.csv\n";
    return 0;
}

int cmd_capacity(const CommonFlags& flags, std::optional<double> adv_override) {
    ftf::RunConfig config = load_config(flags);
    if (adv_override) config.analytics.capacity.adv_dollars = *adv_override;
    const ftf::PriceSeries aligned = load_aligned(config);

    ftf::RunVariant variant;
    variant.latency = config.latency;
    const ftf::BacktestResult result =
        ftf::run_walkforward(aligned, config.window, config.pipeline, variant);
    double turnover = 0.0;
    if (!result.overlapping) {
        turnover = result.stitched.turnover.mean();
    } else {
        double acc = 0.0;
        Eigen::Index days = 0;
        for (const auto& l : result.per_window) {
            acc += l.turnover.sum();
            days += l.size();
        }
        turnover = days > 0 ? acc / static_cast<double>(days) : 0.0;
    }

    const ftf::CapacityResult capacity =
        build_capacity(config, result.frozen.back(), turnover);
    if (capacity.no_positive_branch)
        std::cerr << "warning: no net edge after linear costs; capacity is zero\n";

    fs::create_directories(config.output_dir);
    {
        std::ofstream file(config.output_dir + "/capacity.json");
        file << ftf::to_json(capacity, config.analytics.capacity.reference_lmax).dump(2) << "\n";
    }
    {
        std::ofstream file(config.output_dir + "/capacity_curve.csv");
        file << "L,g\n";
        char buf[96];
        for (Eigen::Index i = 0; i < capacity.grid.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", capacity.grid[i],
                          capacity.g_values[i]);
            file << buf;
        }
    }
    std::cout << "capacity report written to " << config.output_dir << "/capacity.json\n";
    return 0;
}

int cmd_spa(const CommonFlags& flags) {
    const ftf::RunConfig config = load_config(flags);
    const ftf::PriceSeries aligned = load_aligned(config);

    const auto& grid = config.spa_grid;
    const size_t num_configs = grid.lambda_grid.size() * grid.momentum_windows.size() *
                               grid.activation_thresholds.size();
    if (num_configs < 2) throw ftf::ConfigError("spa", "candidate grid needs >= 2 configs");

    // Zero-cost benchmark: the base configuration run without frictions.
    ftf::PipelineParams bench_params = config.pipeline;
    bench_params.costs.cost_multiplier = 0.0;
    bench_params.costs.impact_multiplier = 0.0;
    const ftf::BacktestResult bench =
        ftf::run_walkforward(aligned, config.window, bench_params, ftf::RunVariant{});
    if (bench.overlapping)
        throw ftf::ConfigError("window.advance_months",
                               "spa requires non-overlapping test slices");
    const Eigen::ArrayXd bench_returns = bench.stitched.net_return;

    std::vector<ftf::PipelineParams> candidate_params;
    candidate_params.reserve(num_configs);
    for (double lambda : grid.lambda_grid)
        for (int window : grid.momentum_windows)
            for (double threshold : grid.activation_thresholds) {
                ftf::PipelineParams params = config.pipeline;
                params.signal.lambda_ema = lambda;
                params.signal.momentum_window = window;
                params.signal.activation_threshold = threshold;
                candidate_params.push_back(params);
            }

    // Candidate pipelines are independent; schedule them across workers. Each
    // writes only its own row, so thread count cannot change the result.
    Eigen::MatrixXd candidates(static_cast<Eigen::Index>(num_configs), bench_returns.size());
    std::atomic<size_t> next{0};
    std::atomic<bool> mismatch{false};
    auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < candidate_params.size(); i = next.fetch_add(1)) {
            const ftf::BacktestResult run = ftf::run_walkforward(
                aligned, config.window, candidate_params[i], ftf::RunVariant{});
            if (run.stitched.size() != bench_returns.size()) {
                mismatch = true;
                return;
            }
            candidates.row(static_cast<Eigen::Index>(i)) =
                run.stitched.net_return.matrix().transpose();
        }
    };
    unsigned int workers = flags.threads > 0 ? static_cast<unsigned int>(flags.threads)
                                             : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned int>(workers, static_cast<unsigned int>(num_configs));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (mismatch) throw ftf::Error("candidate day count mismatch");

    const ftf::SpaResult result =
        ftf::spa_test(candidates, bench_returns, config.analytics.spa_B,
                      config.analytics.spa_block_length, config.analytics.seed);

    fs::create_directories(config.output_dir);
    json grid_json{{"lambda_grid", grid.lambda_grid},
                   {"momentum_windows", grid.momentum_windows},
                   {"activation_thresholds", grid.activation_thresholds}};
    json j{{"p_value", result.p_value},
           {"num_configs", result.num_configs},
           {"B", result.resamples},
           {"block_length", result.block_length},
           {"seed", result.seed},
           {"statistic_type", result.statistic_type},
           {"grid", grid_json}};
    std::ofstream file(config.output_dir + "/spa.json");
    file << j.dump(2) << "\n";
    std::cout << "spa result written to " << config.output_dir << "/spa.json (p = "
              << result.p_value << ")\n";
    return 0;
}

int cmd_gen_data(const std::string& out_path, int days, std::uint64_t seed,
                 const std::string& trend, const std::string& start_iso) {
    ftf::SyntheticSpec spec;
    if (trend == "up")
        spec = ftf::trending_spec(seed, days);
    else if (trend == "mixed") {
        spec.seed = seed;
        spec.days = days;
    } else {
        throw ftf::ConfigError("trend", "must be 'up' or 'mixed'");
    }
    if (!start_iso.empty()) spec.start = ftf::Date::parse_iso(start_iso);
    const ftf::PriceSeries series = ftf::generate_synthetic(spec);
    ftf::write_csv(series, out_path);
    std::cout << "wrote " << series.size() << " bars to " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"walk-forward backtesting engine for daily single-asset OHLC data"};
    app.require_subcommand(1);

    CommonFlags flags;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", flags.config_path, "configuration file (JSON)")
            ->required();
        cmd->add_option("--out", flags.out_dir, "output directory override");
        cmd->add_option("--seed", flags.seed, "seed override")
            ->each([&](const std::string&) { flags.seed_set = true; });
        cmd->add_option("--threads", flags.threads, "worker thread count (0 = auto)");
    };

    auto* backtest = app.add_subcommand("backtest", "run the walk-forward backtest");
    add_common(backtest);
    auto* stress = app.add_subcommand("stress", "cost/impact/latency/ablation stress grids");
    add_common(stress);
    auto* capacity = app.add_subcommand("capacity", "friction-adjusted capacity analysis");
    add_common(capacity);
    double adv_dollars = 0.0;
    bool adv_set = false;
    capacity->add_option("--adv", adv_dollars, "average daily volume in dollars")
        ->each([&](const std::string&) { adv_set = true; });
    auto* spa = app.add_subcommand("spa", "superior predictive ability test over a config grid");
    add_common(spa);

    auto* gen = app.add_subcommand("gen-data", "write a synthetic OHLC dataset");
    std::string gen_out = "synthetic.csv";
    int gen_days = 4000;
    std::uint64_t gen_seed = 42;
    std::string gen_trend = "mixed";
    std::string gen_start;
    gen->add_option("--out", gen_out, "output CSV path");
    gen->add_option("--days", gen_days, "number of business days");
    gen->add_option("--seed", gen_seed, "random seed");
    gen->add_option("--trend", gen_trend, "'mixed' (default) or 'up'");
    gen->add_option("--start", gen_start, "first date (ISO-8601)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (backtest->parsed()) return cmd_backtest(flags);
        if (stress->parsed()) return cmd_stress(flags);
        if (capacity->parsed())
            return cmd_capacity(flags, adv_set ? std::optional<double>(adv_dollars)
                                               : std::nullopt);
        if (spa->parsed()) return cmd_spa(flags);
        if (gen->parsed()) return cmd_gen_data(gen_out, gen_days, gen_seed, gen_trend, gen_start);
    } catch (const ftf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const ftf::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
