#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ftf/analytics.hpp"
#include "ftf/execution.hpp"
#include "ftf/market_data.hpp"
#include "ftf/signal.hpp"
#include "ftf/sizing.hpp"

namespace ftf {

struct WindowSpec {
    int train_years = 10;
    int test_months = 6;
    int advance_months = 6;  // < test_months gives overlapping slices
    Date first_test_start;

    [[nodiscard]] bool overlapping() const { return advance_months < test_months; }
    void validate() const;
};

// One walk-forward window: train on [train_begin, test_begin), test on
// [test_begin, test_end).
struct Window {
    Date train_begin;
    Date test_begin;
    Date test_end;
};

struct WindowPlan {
    std::vector<Window> windows;
    std::vector<std::string> rejected;  // human-readable reasons
};

// Immutable per-window parameter bundle. Everything data-dependent is
// estimated on the training slice; test-day computation references this
// bundle only.
struct FrozenParams {
    double lambda_ema = 0.0;
    double mu_train = 0.0;
    double sigma_train = 0.0;
    double omega = 0.0;
    double activation_threshold = 0.0;
    double hard_stop_mult = 0.0;
    double trail_stop_mult = 0.0;
    int timeout_days = 0;
    double lambda_kelly = 0.0;
    TrainMoments moments;     // (mu, sigma) and the capacity pair (mu_u, sigma_u)
    double f_star = 0.0;      // closed-form friction-adjusted Kelly fraction
    double theta = 0.0;
    double seed_variance = 0.0;

    [[nodiscard]] std::string canonical() const;  // full-precision key=value text
    [[nodiscard]] std::uint64_t hash() const;
};

enum class Ablation { full, slope_only, momentum_only };

const char* to_string(Ablation a);

struct RunVariant {
    LatencyMode latency{};
    bool reversed = false;
    Ablation ablation = Ablation::full;
    double cost_multiplier = 1.0;
    double impact_multiplier = 1.0;
};

// Everything the pipeline needs besides the data and window layout.
struct PipelineParams {
    SignalParams signal;
    VolParams vol;
    KellyParams kelly;
    ExitParams exits;
    CostModel costs;
    bool select_lambda = false;
    std::vector<double> lambda_grid{0.80, 0.85, 0.90, 0.94, 0.97};
    bool select_omega = false;
    std::vector<double> omega_grid{0.4, 0.5, 0.6, 0.7};
};

// Tiles test ranges from first_test_start while data remains; each window's
// train range must be fully covered by data or it is rejected. Throws
// InsufficientHistory when the plan is empty.
WindowPlan generate_windows(Date data_first, Date data_last, const WindowSpec& spec);

// Estimates and freezes the full bundle on the training slice. Optional
// lambda/omega grids are scored by the in-sample Sharpe of the unit-weight
// gated rule. Deterministic: refitting the same slice is bit-identical.
FrozenParams fit_window(const PriceSeries& series, const Window& window,
                        const PipelineParams& params);

// Runs the frozen bundle over one test slice. Recursions (EMA, EWMA variance,
// momentum and ATR warm-ups) are seeded by recomputing over train + test, so
// the first test day matches a continuous computation; the ledger covers only
// [test_begin, test_end).
Ledger run_oos(const PriceSeries& series, const Window& window, const FrozenParams& frozen,
               const PipelineParams& params, const RunVariant& variant);

// Concatenates per-window ledgers; refuses overlapping slices. Slices are
// independent experiments: each starts flat, so a position still open at a
// window's final day is not carried into (or liquidated against) the next.
Ledger stitch(const std::vector<Ledger>& ledgers);

struct BacktestResult {
    std::vector<Window> windows;
    std::vector<std::string> rejected_windows;
    std::vector<FrozenParams> frozen;
    std::vector<Ledger> per_window;
    Ledger stitched;        // valid only when !overlapping
    bool overlapping = false;
};

BacktestResult run_walkforward(const PriceSeries& aligned, const WindowSpec& spec,
                               const PipelineParams& params, const RunVariant& variant);

struct StressCell {
    double cost_multiplier = 1.0;
    double impact_multiplier = 1.0;
    int latency_days = 0;
    PerfSummary summary;
};

struct StressGridSpec {
    std::vector<double> cost_multipliers{0.5, 1.0, 1.5, 2.0};
    std::vector<double> impact_multipliers{0.5, 1.0, 1.5, 2.0};
    std::vector<int> latencies{0};
};

// One full pipeline run per cell; cells are independent and the result order
// follows the grid's cartesian order regardless of thread count.
std::vector<StressCell> run_stress_grid(const PriceSeries& aligned, const WindowSpec& spec,
                                        const PipelineParams& params, const StressGridSpec& grid,
                                        const AnalyticsParams& analytics, int threads = 0);

}  // namespace ftf
