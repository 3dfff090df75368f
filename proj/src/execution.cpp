#include "ftf/execution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "ftf/errors.hpp"

namespace ftf {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

const char* to_string(ExitReason r) {
    switch (r) {
        case ExitReason::none: return "none";
        case ExitReason::hard_stop: return "hard_stop";
        case ExitReason::trail_stop: return "trail_stop";
        case ExitReason::timeout: return "timeout";
        case ExitReason::derisk: return "derisk";
        case ExitReason::signal_off: return "signal_off";
    }
    return "none";
}

const char* to_string(RegimeLabel r) {
    switch (r) {
        case RegimeLabel::bull: return "bull";
        case RegimeLabel::chop: return "chop";
        case RegimeLabel::bear: return "bear";
    }
    return "chop";
}

void ExitParams::validate() const {
    if (atr_window < 1) throw Error("atr_window must be >= 1");
    if (!(hard_stop_mult > 0.0) || !(trail_stop_mult > 0.0))
        throw Error("stop multipliers must be positive");
    if (timeout_days < 1) throw Error("timeout_days must be >= 1");
    if (!(derisk_threshold > 0.0) || derisk_threshold >= 1.0)
        throw Error("derisk_threshold must lie in (0,1)");
}

void CostModel::validate() const {
    if (k < 0.0 || gamma < 0.0) throw Error("cost coefficients must be nonnegative");
    if (cost_multiplier < 0.0 || impact_multiplier < 0.0)
        throw Error("cost multipliers must be nonnegative");
}

void LatencyMode::validate() const {
    if (delay_days < 0 || delay_days > 2)
        throw Error("delay_days must be 0, 1, or 2, got " + std::to_string(delay_days));
}

Eigen::Index Ledger::entries() const {
    Eigen::Index n = 0;
    for (uint8_t e : entered) n += e;
    return n;
}

void Ledger::append(const Ledger& tail) {
    auto cat = [](Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
        Eigen::ArrayXd joined(a.size() + b.size());
        joined << a, b;
        a = std::move(joined);
    };
    auto cati = [](Eigen::ArrayXi& a, const Eigen::ArrayXi& b) {
        Eigen::ArrayXi joined(a.size() + b.size());
        joined << a, b;
        a = std::move(joined);
    };
    dates.insert(dates.end(), tail.dates.begin(), tail.dates.end());
    cat(target_weight, tail.target_weight);
    cat(filled_weight, tail.filled_weight);
    cat(turnover, tail.turnover);
    cat(gross_return, tail.gross_return);
    cat(linear_cost, tail.linear_cost);
    cat(impact_cost, tail.impact_cost);
    cat(net_return, tail.net_return);
    status.insert(status.end(), tail.status.begin(), tail.status.end());
    cat(entry_price, tail.entry_price);
    cati(age, tail.age);
    regime.insert(regime.end(), tail.regime.begin(), tail.regime.end());
    exit_reason.insert(exit_reason.end(), tail.exit_reason.begin(), tail.exit_reason.end());
    entered.insert(entered.end(), tail.entered.begin(), tail.entered.end());
}

void write_ledger_csv(const Ledger& ledger, const std::string& path) {
    std::ofstream file(path);
    if (!file.is_open()) throw Error("cannot write '" + path + "'");
    file << "date,target_weight,filled_weight,turnover,gross_return,linear_cost,impact_cost,"
            "net_return,status,entry_price,age,regime,exit_reason,entered\n";
    char buf[384];
    for (Eigen::Index t = 0; t < ledger.size(); ++t) {
        const auto i = static_cast<size_t>(t);
        std::snprintf(buf, sizeof(buf),
                      "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s,%.17g,%d,%s,%s,%d\n",
                      ledger.dates[i].to_iso().c_str(), ledger.target_weight[t],
                      ledger.filled_weight[t], ledger.turnover[t], ledger.gross_return[t],
                      ledger.linear_cost[t], ledger.impact_cost[t], ledger.net_return[t],
                      ledger.status[i] == PositionState::Status::open ? "open" : "flat",
                      ledger.entry_price[t], ledger.age[t], to_string(ledger.regime[i]),
                      to_string(ledger.exit_reason[i]), static_cast<int>(ledger.entered[i]));
        file << buf;
    }
}

double true_range(const Bar& bar, std::optional<double> prev_close) {
    if (!prev_close) return bar.high - bar.low;
    return std::max({bar.high - bar.low, std::abs(bar.high - *prev_close),
                     std::abs(bar.low - *prev_close)});
}

double atr(const Eigen::ArrayXd& true_ranges, int atr_window) {
    if (true_ranges.size() < atr_window)
        throw Warmup("atr needs " + std::to_string(atr_window) + " true ranges, got " +
                     std::to_string(true_ranges.size()));
    return true_ranges.tail(atr_window).mean();
}

Eigen::ArrayXd true_range_series(const PriceSeries& series) {
    Eigen::ArrayXd out(static_cast<Eigen::Index>(series.size()));
    for (size_t t = 0; t < series.size(); ++t) {
        const auto prev =
            t == 0 ? std::nullopt : std::optional<double>(series[t - 1].close);
        out[static_cast<Eigen::Index>(t)] = true_range(series[t], prev);
    }
    return out;
}

Eigen::ArrayXd atr_series(const Eigen::ArrayXd& true_ranges, int atr_window) {
    Eigen::ArrayXd out = Eigen::ArrayXd::Constant(true_ranges.size(), kNaN);
    double window_sum = 0.0;
    for (Eigen::Index t = 0; t < true_ranges.size(); ++t) {
        window_sum += true_ranges[t];
        if (t >= atr_window) window_sum -= true_ranges[t - atr_window];
        if (t >= atr_window - 1) out[t] = window_sum / atr_window;
    }
    return out;
}

StepResult step_position(PositionState& state, const DayInputs& in, const ExitParams& params,
                         int direction) {
    StepResult result;
    const double dir = direction < 0 ? -1.0 : 1.0;

    auto close_position = [&](ExitReason reason) {
        state = PositionState{};
        result.realized_weight = 0.0;
        result.exit = reason;
    };

    if (state.is_open()) {
        state.age += 1;
        // Track the favorable extreme; intraday basis uses the bar extremes,
        // the default close_only basis uses closes throughout.
        const bool touch = params.stop_basis == StopBasis::intraday_touch;
        const double favorable = touch ? (dir > 0 ? in.high : in.low) : in.close;
        state.peak_price = dir > 0 ? std::max(state.peak_price, favorable)
                                   : std::min(state.peak_price, favorable);

        const double adverse = touch ? (dir > 0 ? in.low : in.high) : in.close;
        const double hard_level = state.entry_price - dir * params.hard_stop_mult * in.atr;
        const double trail_level = state.peak_price - dir * params.trail_stop_mult * in.atr;
        const bool hard_hit = dir > 0 ? adverse <= hard_level : adverse >= hard_level;
        const bool trail_hit = dir > 0 ? adverse <= trail_level : adverse >= trail_level;

        if (hard_hit) {
            close_position(ExitReason::hard_stop);
            return result;
        }
        if (trail_hit) {
            close_position(ExitReason::trail_stop);
            return result;
        }
        if (state.age >= params.timeout_days) {
            close_position(ExitReason::timeout);
            return result;
        }
        if (in.derisk_prob > params.derisk_threshold) {
            state.derisk_streak += 1;
            if (params.derisk_mode == DeriskMode::close || state.derisk_streak >= 2) {
                close_position(ExitReason::derisk);
                return result;
            }
            state.current_weight *= 0.5;
            result.realized_weight = dir * state.current_weight;
            return result;
        }
        state.derisk_streak = 0;
        // Weight refresh: track the sizing stack daily while the position
        // stays on; a zero budget closes it.
        if (in.sizing_weight <= 0.0) {
            close_position(ExitReason::signal_off);
            return result;
        }
        state.current_weight = in.sizing_weight;
        result.realized_weight = dir * state.current_weight;
        return result;
    }

    // Flat: entry gate.
    if (in.gate_active && std::isfinite(in.atr) && in.sizing_weight > 0.0) {
        state.status = PositionState::Status::open;
        state.entry_price = in.close;
        state.peak_price = in.close;
        state.age = 0;
        state.current_weight = in.sizing_weight;
        state.derisk_streak = 0;
        result.realized_weight = dir * state.current_weight;
        result.entered = true;
    }
    return result;
}

Eigen::ArrayXd apply_latency(const Eigen::ArrayXd& target_weights, const LatencyMode& mode) {
    mode.validate();
    const Eigen::Index n = target_weights.size();
    Eigen::ArrayXd filled = Eigen::ArrayXd::Zero(n);
    if (mode.delay_days < n)
        filled.tail(n - mode.delay_days) = target_weights.head(n - mode.delay_days);
    return filled;
}

CostBreakdown apply_costs(const Eigen::ArrayXd& filled_weights,
                          const Eigen::ArrayXd& gross_returns, const CostModel& model,
                          double prev_weight) {
    model.validate();
    if (filled_weights.size() != gross_returns.size())
        throw Error("apply_costs: weight and return lengths differ");
    const Eigen::Index n = filled_weights.size();
    CostBreakdown out;
    out.turnover.resize(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        const double prev = t == 0 ? prev_weight : filled_weights[t - 1];
        out.turnover[t] = std::abs(filled_weights[t] - prev);
    }
    out.linear_cost = model.cost_multiplier * model.k * out.turnover;
    out.impact_cost = model.impact_multiplier * model.gamma * out.turnover.pow(1.5);
    out.net_return = gross_returns - out.linear_cost - out.impact_cost;
    return out;
}

std::vector<uint8_t> activation_gate(const SignalSeries& signal, double threshold, int direction) {
    std::vector<uint8_t> gate(static_cast<size_t>(signal.size()), 0);
    for (Eigen::Index t = 0; t < signal.size(); ++t) {
        if (!signal.tradeable[static_cast<size_t>(t)]) continue;
        const bool on = direction >= 0
                            ? (signal.p_bull[t] >= threshold && signal.slope[t] > 0.0)
                            : (signal.p_bull[t] <= 1.0 - threshold && signal.slope[t] < 0.0);
        gate[static_cast<size_t>(t)] = on ? 1 : 0;
    }
    return gate;
}

Ledger simulate_path(const PriceSeries& bars, const SignalSeries& signal,
                     const Eigen::ArrayXd& sizing_weight, const PathParams& params,
                     Eigen::Index begin) {
    params.exits.validate();
    params.costs.validate();
    params.latency.validate();
    const auto n = static_cast<Eigen::Index>(bars.size());
    if (signal.size() != n || sizing_weight.size() != n)
        throw Error("simulate_path: bar, signal, and sizing lengths differ");
    if (begin < 0 || begin >= n) throw Error("simulate_path: begin out of range");

    const Eigen::ArrayXd atr_values = atr_series(true_range_series(bars), params.exits.atr_window);
    const auto gate = activation_gate(signal, params.activation_threshold, params.direction);

    const Eigen::Index m = n - begin;
    Ledger ledger;
    ledger.dates.reserve(static_cast<size_t>(m));
    ledger.target_weight.resize(m);
    ledger.entry_price.setZero(m);
    ledger.age.setZero(m);
    ledger.status.resize(static_cast<size_t>(m), PositionState::Status::flat);
    ledger.regime.resize(static_cast<size_t>(m), RegimeLabel::chop);
    ledger.exit_reason.resize(static_cast<size_t>(m), ExitReason::none);
    ledger.entered.resize(static_cast<size_t>(m), 0);

    PositionState state;
    for (Eigen::Index t = begin; t < n; ++t) {
        const Eigen::Index i = t - begin;
        const auto iu = static_cast<size_t>(i);
        DayInputs in;
        in.close = bars[static_cast<size_t>(t)].close;
        in.low = bars[static_cast<size_t>(t)].low;
        in.high = bars[static_cast<size_t>(t)].high;
        in.atr = atr_values[t];
        in.gate_active = gate[static_cast<size_t>(t)] != 0;
        in.derisk_prob = params.direction >= 0 ? signal.p_bear[t] : signal.p_bull[t];
        in.sizing_weight = sizing_weight[t];

        const StepResult step = step_position(state, in, params.exits, params.direction);
        ledger.dates.push_back(bars[static_cast<size_t>(t)].date);
        ledger.target_weight[i] = step.realized_weight;
        ledger.status[iu] = state.status;
        ledger.entry_price[i] = state.is_open() ? state.entry_price : 0.0;
        ledger.age[i] = state.is_open() ? state.age : 0;
        ledger.exit_reason[iu] = step.exit;
        ledger.entered[iu] = step.entered ? 1 : 0;

        const double p_bull = signal.p_bull[t];
        ledger.regime[iu] = p_bull > params.bull_label_threshold  ? RegimeLabel::bull
                            : p_bull < params.bear_label_threshold ? RegimeLabel::bear
                                                                   : RegimeLabel::chop;
    }

    ledger.filled_weight = apply_latency(ledger.target_weight, params.latency);

    // Day-t gross uses the fill standing at the prior close; the slice's
    // first day starts flat, so its gross is zero by construction.
    ledger.gross_return.setZero(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index t = begin + i;
        if (t == 0 || i == 0) continue;
        const double r = bars[static_cast<size_t>(t)].close / bars[static_cast<size_t>(t - 1)].close - 1.0;
        ledger.gross_return[i] = ledger.filled_weight[i - 1] * r;
    }

    const CostBreakdown costs =
        apply_costs(ledger.filled_weight, ledger.gross_return, params.costs, 0.0);
    ledger.turnover = costs.turnover;
    ledger.linear_cost = costs.linear_cost;
    ledger.impact_cost = costs.impact_cost;
    ledger.net_return = costs.net_return;
    return ledger;
}

}  // namespace ftf
