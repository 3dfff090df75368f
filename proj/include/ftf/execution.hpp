#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ftf/market_data.hpp"
#include "ftf/signal.hpp"

namespace ftf {

enum class ExitReason { none, hard_stop, trail_stop, timeout, derisk, signal_off };
enum class RegimeLabel { bull, chop, bear };
enum class DeriskMode { halve, close };
enum class StopBasis { close_only, intraday_touch };

const char* to_string(ExitReason r);
const char* to_string(RegimeLabel r);

struct ExitParams {
    int atr_window = 14;
    double hard_stop_mult = 2.0;
    double trail_stop_mult = 1.5;
    int timeout_days = 30;
    double derisk_threshold = 0.5;
    DeriskMode derisk_mode = DeriskMode::halve;
    StopBasis stop_basis = StopBasis::close_only;

    void validate() const;
};

struct PositionState {
    enum class Status { flat, open };
    Status status = Status::flat;
    double entry_price = 0.0;
    Date entry_date{};
    double peak_price = 0.0;  // running max close while long, min close while short
    int age = 0;              // trading days since entry
    double current_weight = 0.0;  // magnitude; 0 iff flat
    int derisk_streak = 0;

    [[nodiscard]] bool is_open() const { return status == Status::open; }
};

struct CostModel {
    double k = 7e-5;
    double gamma = 0.02;
    double cost_multiplier = 1.0;
    double impact_multiplier = 1.0;

    void validate() const;
};

struct LatencyMode {
    int delay_days = 0;  // 0, 1, or 2

    void validate() const;
};

// Column-oriented daily ledger covering one simulated slice.
struct Ledger {
    std::vector<Date> dates;
    Eigen::ArrayXd target_weight;  // decision weight, signed
    Eigen::ArrayXd filled_weight;  // after latency shift, signed
    Eigen::ArrayXd turnover;       // |filled_t - filled_{t-1}|
    Eigen::ArrayXd gross_return;
    Eigen::ArrayXd linear_cost;
    Eigen::ArrayXd impact_cost;
    Eigen::ArrayXd net_return;
    std::vector<PositionState::Status> status;
    Eigen::ArrayXd entry_price;  // 0 while flat
    Eigen::ArrayXi age;
    std::vector<RegimeLabel> regime;
    std::vector<ExitReason> exit_reason;
    std::vector<uint8_t> entered;

    [[nodiscard]] Eigen::Index size() const { return target_weight.size(); }
    [[nodiscard]] Eigen::Index entries() const;
    void append(const Ledger& tail);  // no date checks; see walkforward::stitch
};

void write_ledger_csv(const Ledger& ledger, const std::string& path);

// True range; the first bar (no previous close) falls back to high - low.
double true_range(const Bar& bar, std::optional<double> prev_close);

// Simple n-day mean of the trailing true ranges; throws Warmup when fewer
// than n values are available.
double atr(const Eigen::ArrayXd& true_ranges, int atr_window);

// Per-day TR and ATR over a whole series; ATR is NaN inside the warm-up.
Eigen::ArrayXd true_range_series(const PriceSeries& series);
Eigen::ArrayXd atr_series(const Eigen::ArrayXd& true_ranges, int atr_window);

// Inputs for one day of the position state machine. low/high matter only
// under the intraday_touch stop basis.
struct DayInputs {
    double close = 0.0;
    double low = 0.0;
    double high = 0.0;
    double atr = 0.0;           // NaN blocks entries (warm-up)
    bool gate_active = false;   // activation gate incl. tradeable flag
    double derisk_prob = 0.0;   // p_bear for longs, p_bull for shorts
    double sizing_weight = 0.0; // magnitude supplied by the sizing stack
};

struct StepResult {
    double realized_weight = 0.0;  // signed
    ExitReason exit = ExitReason::none;
    bool entered = false;
};

// Advances the state machine one day. Priority while open: hard stop,
// trailing stop, timeout, regime de-risk; then the entry gate when flat and
// the weight refresh when still open. direction is +1 (long) or -1 (the
// mirrored short used by the reversal variant).
StepResult step_position(PositionState& state, const DayInputs& in, const ExitParams& params,
                         int direction = +1);

// filled[t] = target[t - delay], leading days 0.
Eigen::ArrayXd apply_latency(const Eigen::ArrayXd& target_weights, const LatencyMode& mode);

struct CostBreakdown {
    Eigen::ArrayXd turnover;
    Eigen::ArrayXd linear_cost;
    Eigen::ArrayXd impact_cost;
    Eigen::ArrayXd net_return;
};

// linear = cost_mult * k * |dw|, impact = impact_mult * gamma * |dw|^{3/2},
// net = gross - linear - impact. prev_weight seeds the first day's turnover.
CostBreakdown apply_costs(const Eigen::ArrayXd& filled_weights, const Eigen::ArrayXd& gross_returns,
                          const CostModel& model, double prev_weight = 0.0);

struct PathParams {
    ExitParams exits;
    CostModel costs;
    LatencyMode latency;
    double activation_threshold = 0.52;
    int direction = +1;
    double bull_label_threshold = 0.55;
    double bear_label_threshold = 0.45;
};

// Entry eligibility per day: tradeable and p_bull >= threshold with positive
// slope (longs), or the mirrored condition p_bull <= 1 - threshold with
// negative slope (shorts). The sizing baseline keys off the same gate.
std::vector<uint8_t> activation_gate(const SignalSeries& signal, double threshold,
                                     int direction = +1);

// Runs the daily loop over bars[begin..] given the full-series signal and
// per-day sizing weights; emits one ledger row per simulated day. The day-t
// net return uses the fill established at the prior close, so
// gross[t] = filled[t-1] * r_t.
Ledger simulate_path(const PriceSeries& bars, const SignalSeries& signal,
                     const Eigen::ArrayXd& sizing_weight, const PathParams& params,
                     Eigen::Index begin = 0);

}  // namespace ftf
