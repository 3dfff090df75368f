#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <vector>

#include "ftf/errors.hpp"
#include "ftf/execution.hpp"
#include "ftf/synthetic.hpp"
#include "oracles.hpp"

using namespace ftf;

namespace {

PriceSeries flat_bar_series(const std::vector<double>& closes, int start_serial = 16400) {
    PriceSeries s;
    for (size_t i = 0; i < closes.size(); ++i) {
        const double c = closes[i];
        s.bars.push_back(Bar{Date(start_serial + static_cast<int>(i)), c, c, c, c});
    }
    return s;
}

}  // namespace

TEST_CASE("true range") {
    CHECK(true_range(Bar{Date(0), 100, 102, 98, 100}, 100.0) == doctest::Approx(4.0));
    // Gap up: max{2, 5, 3} = 5.
    CHECK(true_range(Bar{Date(0), 104, 105, 103, 104}, 100.0) == doctest::Approx(5.0));
    CHECK(true_range(Bar{Date(0), 100, 101, 99, 100}, std::nullopt) == doctest::Approx(2.0));
}

TEST_CASE("atr") {
    CHECK(atr(Eigen::ArrayXd::Constant(20, 3.5), 14) == doctest::Approx(3.5));

    Eigen::ArrayXd ramp(14);
    for (int i = 0; i < 14; ++i) ramp[i] = i + 1.0;
    CHECK(atr(ramp, 14) == doctest::Approx(7.5));  // mean of 1..14

    CHECK_THROWS_AS(atr(Eigen::ArrayXd::Constant(13, 1.0), 14), Warmup);

    const Eigen::ArrayXd series = atr_series(ramp, 14);
    CHECK(std::isnan(series[12]));
    CHECK(series[13] == doctest::Approx(7.5));
}

TEST_CASE("position state machine") {
    ExitParams exits;  // 2 ATR hard, 1.5 ATR trail, 30d timeout, derisk at 0.5

    SUBCASE("entry at sizing weight when the gate is active") {
        PositionState state;
        DayInputs in{.close = 100.0, .low = 100.0, .high = 100.0, .atr = 2.0, .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.7};
        const StepResult r = step_position(state, in, exits);
        CHECK(r.entered);
        CHECK(r.realized_weight == doctest::Approx(0.7));
        CHECK(state.is_open());
        CHECK(state.entry_price == 100.0);
        CHECK(state.age == 0);
    }

    SUBCASE("no entry when flat conditions fail") {
        PositionState state;
        DayInputs gate_off{.close = 100.0, .low = 100.0, .high = 100.0, .atr = 2.0, .gate_active = false, .derisk_prob = 0.2, .sizing_weight = 0.7};
        CHECK_FALSE(step_position(state, gate_off, exits).entered);
        DayInputs no_atr{.close = 100.0, .low = 100.0, .high = 100.0, .atr = std::numeric_limits<double>::quiet_NaN(), .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.7};
        CHECK_FALSE(step_position(state, no_atr, exits).entered);
        CHECK(state.current_weight == 0.0);  // flat iff zero weight
    }

    SUBCASE("hard stop at entry - 2 ATR") {
        PositionState state;
        step_position(state, DayInputs{.close = 100.0, .low = 100.0, .high = 100.0, .atr = 2.0, .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.5}, exits);
        const StepResult r = step_position(state, DayInputs{.close = 96.0, .low = 96.0, .high = 96.0, .atr = 2.0, .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.5}, exits);
        CHECK(r.exit == ExitReason::hard_stop);
        CHECK(r.realized_weight == 0.0);
        CHECK_FALSE(state.is_open());
    }

    SUBCASE("hard stop takes priority over the trailing stop") {
        PositionState state;
        step_position(state, DayInputs{.close = 100.0, .low = 100.0, .high = 100.0, .atr = 2.0, .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.5}, exits);
        // close 95: breaches hard (96) and trail (100 - 3 = 97) simultaneously.
        const StepResult r = step_position(state, DayInputs{.close = 95.0, .low = 95.0, .high = 95.0, .atr = 2.0, .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.5}, exits);
        CHECK(r.exit == ExitReason::hard_stop);
    }

    SUBCASE("trailing stop tracks the running peak") {
        PositionState state;
        step_position(state, DayInputs{.close = 100.0, .low = 100.0, .high = 100.0, .atr = 2.0, .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.5}, exits);
        step_position(state, DayInputs{.close = 110.0, .low = 110.0, .high = 110.0, .atr = 2.0, .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.5}, exits);  // peak 110
        CHECK(state.peak_price == doctest::Approx(110.0));
        // 106.9 < 110 - 3: trail fires while hard (96) does not.
        const StepResult r = step_position(state, DayInputs{.close = 106.9, .low = 106.9, .high = 106.9, .atr = 2.0, .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.5}, exits);
        CHECK(r.exit == ExitReason::trail_stop);
    }

    SUBCASE("intraday touch basis fires on the bar low") {
        ExitParams touch = exits;
        touch.stop_basis = StopBasis::intraday_touch;
        PositionState state;
        step_position(state, DayInputs{.close = 100.0, .low = 99.5, .high = 100.5, .atr = 2.0,
                                       .gate_active = true, .derisk_prob = 0.2,
                                       .sizing_weight = 0.5},
                      touch);
        // Close holds above the hard level (96) but the low pierces it.
        const StepResult r = step_position(
            state, DayInputs{.close = 98.0, .low = 95.9, .high = 100.2, .atr = 2.0,
                             .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.5},
            touch);
        CHECK(r.exit == ExitReason::hard_stop);

        // The default close basis ignores the same touch.
        PositionState close_state;
        step_position(close_state,
                      DayInputs{.close = 100.0, .low = 99.5, .high = 100.5, .atr = 2.0,
                                .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.5},
                      exits);
        const StepResult held = step_position(
            close_state, DayInputs{.close = 98.0, .low = 95.9, .high = 100.2, .atr = 2.0,
                                   .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.5},
            exits);
        CHECK(held.exit == ExitReason::none);
        CHECK(close_state.is_open());
    }

    SUBCASE("timeout forces an exit at age 30") {
        PositionState state;
        step_position(state, DayInputs{.close = 100.0, .low = 100.0, .high = 100.0, .atr = 2.0, .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.5}, exits);
        StepResult last;
        for (int day = 1; day <= 30; ++day)
            last = step_position(state, DayInputs{.close = 100.0 + day, .low = 100.0 + day, .high = 100.0 + day, .atr = 2.0, .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.5}, exits);
        CHECK(last.exit == ExitReason::timeout);
        CHECK_FALSE(state.is_open());
    }

    SUBCASE("derisk halves, then closes on the second consecutive day") {
        PositionState state;
        step_position(state, DayInputs{.close = 100.0, .low = 100.0, .high = 100.0, .atr = 2.0, .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.8}, exits);
        const StepResult halved =
            step_position(state, DayInputs{.close = 100.5, .low = 100.5, .high = 100.5, .atr = 2.0, .gate_active = false, .derisk_prob = 0.6, .sizing_weight = 0.8}, exits);
        CHECK(halved.exit == ExitReason::none);
        CHECK(halved.realized_weight == doctest::Approx(0.4));
        const StepResult closed =
            step_position(state, DayInputs{.close = 100.5, .low = 100.5, .high = 100.5, .atr = 2.0, .gate_active = false, .derisk_prob = 0.6, .sizing_weight = 0.8}, exits);
        CHECK(closed.exit == ExitReason::derisk);
    }

    SUBCASE("derisk mode close exits immediately") {
        ExitParams immediate = exits;
        immediate.derisk_mode = DeriskMode::close;
        PositionState state;
        step_position(state, DayInputs{.close = 100.0, .low = 100.0, .high = 100.0, .atr = 2.0, .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.8}, immediate);
        const StepResult r =
            step_position(state, DayInputs{.close = 100.5, .low = 100.5, .high = 100.5, .atr = 2.0, .gate_active = false, .derisk_prob = 0.6, .sizing_weight = 0.8}, immediate);
        CHECK(r.exit == ExitReason::derisk);
    }

    SUBCASE("weight refresh tracks sizing; zero budget closes with signal_off") {
        PositionState state;
        step_position(state, DayInputs{.close = 100.0, .low = 100.0, .high = 100.0, .atr = 2.0, .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.8}, exits);
        const StepResult refreshed =
            step_position(state, DayInputs{.close = 101.0, .low = 101.0, .high = 101.0, .atr = 2.0, .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.55}, exits);
        CHECK(refreshed.realized_weight == doctest::Approx(0.55));
        const StepResult off = step_position(state, DayInputs{.close = 101.5, .low = 101.5, .high = 101.5, .atr = 2.0, .gate_active = false, .derisk_prob = 0.2, .sizing_weight = 0.0}, exits);
        CHECK(off.exit == ExitReason::signal_off);
    }

    SUBCASE("mirrored short stops for the reversal variant") {
        PositionState state;
        step_position(state, DayInputs{.close = 100.0, .low = 100.0, .high = 100.0, .atr = 2.0, .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.5}, exits, -1);
        CHECK(state.is_open());
        // Short hard stop at entry + 2 ATR = 104.
        const StepResult r = step_position(state, DayInputs{.close = 104.0, .low = 104.0, .high = 104.0, .atr = 2.0, .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.5}, exits, -1);
        CHECK(r.exit == ExitReason::hard_stop);

        PositionState trail_state;
        step_position(trail_state, DayInputs{.close = 100.0, .low = 100.0, .high = 100.0, .atr = 2.0, .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.5}, exits, -1);
        step_position(trail_state, DayInputs{.close = 95.0, .low = 95.0, .high = 95.0, .atr = 2.0, .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.5}, exits, -1);  // trough 95
        const StepResult t =
            step_position(trail_state, DayInputs{.close = 98.1, .low = 98.1, .high = 98.1, .atr = 2.0, .gate_active = true, .derisk_prob = 0.2, .sizing_weight = 0.5}, exits, -1);
        CHECK(t.exit == ExitReason::trail_stop);
    }
}

TEST_CASE("apply_latency shifts targets") {
    Eigen::ArrayXd targets(3);
    targets << 0.0, 1.0, 1.0;
    CHECK((apply_latency(targets, LatencyMode{0}) == targets).all());

    const Eigen::ArrayXd d1 = apply_latency(targets, LatencyMode{1});
    CHECK(d1[0] == 0.0);
    CHECK(d1[1] == 0.0);
    CHECK(d1[2] == 1.0);

    const Eigen::ArrayXd d2 = apply_latency(targets, LatencyMode{2});
    const Eigen::ArrayXd d11 = apply_latency(apply_latency(targets, LatencyMode{1}), LatencyMode{1});
    CHECK((d2 == d11).all());

    CHECK_THROWS_AS(apply_latency(targets, LatencyMode{3}), Error);
}

TEST_CASE("apply_costs") {
    CostModel model;  // k = 7e-5, gamma = 0.02

    Eigen::ArrayXd w(3), gross(3);
    w << 0.0, 0.04, 0.04;
    gross << 0.0, 1e-3, -2e-4;
    const CostBreakdown c = apply_costs(w, gross, model);
    CHECK(c.turnover[0] == 0.0);
    CHECK(c.linear_cost[0] == 0.0);
    CHECK(c.impact_cost[0] == 0.0);
    CHECK(c.linear_cost[1] == doctest::Approx(2.8e-6).epsilon(1e-12));
    CHECK(c.impact_cost[1] == doctest::Approx(0.02 * std::pow(0.04, 1.5)).epsilon(1e-12));
    CHECK(c.turnover[2] == 0.0);  // no trade, no cost
    CHECK(c.net_return[1] == doctest::Approx(gross[1] - c.linear_cost[1] - c.impact_cost[1]));

    CostModel doubled = model;
    doubled.cost_multiplier = 2.0;
    const CostBreakdown c2 = apply_costs(w, gross, doubled);
    CHECK(c2.linear_cost[1] == doctest::Approx(2.0 * c.linear_cost[1]).epsilon(1e-15));
    CHECK(c2.impact_cost[1] == doctest::Approx(c.impact_cost[1]).epsilon(1e-15));
}

namespace {

struct SimFixture {
    PriceSeries bars;
    SignalSeries signal;
    Eigen::ArrayXd sizing;
    PathParams path;
};

// Small noisy uptrend with enough history for the 5-day momentum and 3-day
// ATR warm-ups used in the fast tests.
SimFixture make_fixture(std::uint64_t seed, int days = 80) {
    SyntheticSpec spec;
    spec.seed = seed;
    spec.days = days;
    spec.daily_vol = 0.012;
    spec.segment_drifts = {1.5e-3, -5e-4};
    spec.segment_days = 25;

    SimFixture fx;
    fx.bars = generate_synthetic(spec);

    SignalParams sig_params;
    sig_params.momentum_window = 5;
    fx.signal = build_signal(fx.bars, sig_params, TrainStats{0.0, 5e-4});

    fx.sizing = Eigen::ArrayXd::Constant(static_cast<Eigen::Index>(days), 0.8);
    fx.path.exits.atr_window = 3;
    fx.path.activation_threshold = 0.52;
    return fx;
}

// Straight-line transliteration of the daily loop: gate, stop priority,
// latency shift, cost arithmetic. Kept deliberately flat so it can be read
// top to bottom against the documented behavior.
Ledger reference_simulation(const SimFixture& fx) {
    const auto n = static_cast<Eigen::Index>(fx.bars.size());
    const ExitParams& xp = fx.path.exits;

    std::vector<double> tr(static_cast<size_t>(n)), atr_v(static_cast<size_t>(n),
                                                          std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index t = 0; t < n; ++t) {
        const Bar& b = fx.bars[static_cast<size_t>(t)];
        if (t == 0)
            tr[0] = b.high - b.low;
        else {
            const double pc = fx.bars[static_cast<size_t>(t - 1)].close;
            tr[static_cast<size_t>(t)] =
                std::max({b.high - b.low, std::abs(b.high - pc), std::abs(b.low - pc)});
        }
        if (t >= xp.atr_window - 1) {
            double acc = 0.0;
            for (int j = 0; j < xp.atr_window; ++j) acc += tr[static_cast<size_t>(t - j)];
            atr_v[static_cast<size_t>(t)] = acc / xp.atr_window;
        }
    }

    std::vector<double> target(static_cast<size_t>(n), 0.0);
    bool open = false;
    double entry = 0.0, peak = 0.0, weight = 0.0;
    int age = 0, streak = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const double close = fx.bars[static_cast<size_t>(t)].close;
        const double a = atr_v[static_cast<size_t>(t)];
        const bool gate = fx.signal.tradeable[static_cast<size_t>(t)] &&
                          fx.signal.p_bull[t] >= fx.path.activation_threshold &&
                          fx.signal.slope[t] > 0.0;
        if (open) {
            age += 1;
            peak = std::max(peak, close);
            if (close <= entry - xp.hard_stop_mult * a) {
                open = false;
            } else if (close <= peak - xp.trail_stop_mult * a) {
                open = false;
            } else if (age >= xp.timeout_days) {
                open = false;
            } else if (fx.signal.p_bear[t] > xp.derisk_threshold) {
                streak += 1;
                if (streak >= 2)
                    open = false;
                else {
                    weight *= 0.5;
                    target[static_cast<size_t>(t)] = weight;
                }
            } else {
                streak = 0;
                if (fx.sizing[t] <= 0.0)
                    open = false;
                else {
                    weight = fx.sizing[t];
                    target[static_cast<size_t>(t)] = weight;
                }
            }
        } else if (gate && std::isfinite(a) && fx.sizing[t] > 0.0) {
            open = true;
            entry = close;
            peak = close;
            age = 0;
            streak = 0;
            weight = fx.sizing[t];
            target[static_cast<size_t>(t)] = weight;
        }
    }

    Ledger ref;
    ref.target_weight.resize(n);
    for (Eigen::Index t = 0; t < n; ++t) ref.target_weight[t] = target[static_cast<size_t>(t)];
    ref.filled_weight.setZero(n);
    const int d = fx.path.latency.delay_days;
    for (Eigen::Index t = d; t < n; ++t) ref.filled_weight[t] = ref.target_weight[t - d];
    ref.gross_return.setZero(n);
    for (Eigen::Index t = 1; t < n; ++t) {
        const double r = fx.bars[static_cast<size_t>(t)].close /
                             fx.bars[static_cast<size_t>(t - 1)].close -
                         1.0;
        ref.gross_return[t] = ref.filled_weight[t - 1] * r;
    }
    ref.turnover.resize(n);
    ref.linear_cost.resize(n);
    ref.impact_cost.resize(n);
    ref.net_return.resize(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        const double prev = t == 0 ? 0.0 : ref.filled_weight[t - 1];
        ref.turnover[t] = std::abs(ref.filled_weight[t] - prev);
        ref.linear_cost[t] = fx.path.costs.cost_multiplier * fx.path.costs.k * ref.turnover[t];
        ref.impact_cost[t] =
            fx.path.costs.impact_multiplier * fx.path.costs.gamma * std::pow(ref.turnover[t], 1.5);
        ref.net_return[t] = ref.gross_return[t] - ref.linear_cost[t] - ref.impact_cost[t];
    }
    return ref;
}

}  // namespace

TEST_CASE("simulate_path: zero sizing weight means zero returns") {
    SimFixture fx = make_fixture(21);
    fx.sizing.setZero();
    const Ledger ledger = simulate_path(fx.bars, fx.signal, fx.sizing, fx.path);
    CHECK(ledger.net_return.abs().maxCoeff() == 0.0);
    CHECK(ledger.entries() == 0);
}

TEST_CASE("simulate_path: frictionless unit weight passes through asset returns") {
    // Deterministic rising closes: no stop can fire, the gate turns on after
    // warm-up, and the ledger then replicates close-to-close returns.
    std::vector<double> closes;
    for (int i = 0; i < 40; ++i) closes.push_back(100.0 * std::pow(1.002, i));
    SimFixture fx;
    fx.bars = flat_bar_series(closes);
    SignalParams sig_params;
    sig_params.momentum_window = 5;
    fx.signal = build_signal(fx.bars, sig_params, TrainStats{0.0, 1e-4});
    fx.sizing = Eigen::ArrayXd::Ones(40);
    fx.path.exits.atr_window = 3;
    fx.path.exits.timeout_days = 1000;
    fx.path.exits.hard_stop_mult = 1e9;
    fx.path.exits.trail_stop_mult = 1e9;
    fx.path.costs = CostModel{0.0, 0.0, 0.0, 0.0};

    const Ledger ledger = simulate_path(fx.bars, fx.signal, fx.sizing, fx.path);
    Eigen::Index first_on = -1;
    for (Eigen::Index t = 0; t < 40; ++t)
        if (ledger.filled_weight[t] == 1.0) {
            first_on = t;
            break;
        }
    REQUIRE(first_on >= 0);
    for (Eigen::Index t = first_on + 1; t < 40; ++t) {
        const double r = closes[static_cast<size_t>(t)] / closes[static_cast<size_t>(t - 1)] - 1.0;
        CHECK(ledger.net_return[t] == doctest::Approx(r).epsilon(1e-14));
    }
}

TEST_CASE("simulate_path matches the straight-line reference day by day") {
    for (std::uint64_t seed : {3u, 14u, 59u}) {
        for (int delay : {0, 1, 2}) {
            SimFixture fx = make_fixture(seed);
            fx.path.latency.delay_days = delay;
            const Ledger ledger = simulate_path(fx.bars, fx.signal, fx.sizing, fx.path);
            const Ledger ref = reference_simulation(fx);
            REQUIRE(ledger.size() == ref.size());
            for (Eigen::Index t = 0; t < ledger.size(); ++t) {
                CHECK(ledger.target_weight[t] == doctest::Approx(ref.target_weight[t]).epsilon(1e-12));
                CHECK(ledger.filled_weight[t] == doctest::Approx(ref.filled_weight[t]).epsilon(1e-12));
                CHECK(ledger.gross_return[t] == doctest::Approx(ref.gross_return[t]).epsilon(1e-12));
                CHECK(ledger.net_return[t] == doctest::Approx(ref.net_return[t]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("simulate_path invariants") {
    SimFixture fx = make_fixture(77, 120);

    SUBCASE("determinism") {
        const Ledger a = simulate_path(fx.bars, fx.signal, fx.sizing, fx.path);
        const Ledger b = simulate_path(fx.bars, fx.signal, fx.sizing, fx.path);
        CHECK((a.net_return == b.net_return).all());
        CHECK((a.target_weight == b.target_weight).all());
    }

    SUBCASE("no look-ahead: truncation reproduces the prefix") {
        const Ledger full = simulate_path(fx.bars, fx.signal, fx.sizing, fx.path);
        SimFixture cut = fx;
        cut.bars.bars.resize(70);
        SignalParams sig_params;
        sig_params.momentum_window = 5;
        cut.signal = build_signal(cut.bars, sig_params, TrainStats{0.0, 5e-4});
        cut.sizing = fx.sizing.head(70);
        const Ledger prefix = simulate_path(cut.bars, cut.signal, cut.sizing, cut.path);
        for (Eigen::Index t = 0; t < 70; ++t) {
            CHECK(prefix.target_weight[t] == full.target_weight[t]);
            CHECK(prefix.net_return[t] == full.net_return[t]);
        }
    }

    SUBCASE("accounting identity") {
        const Ledger ledger = simulate_path(fx.bars, fx.signal, fx.sizing, fx.path);
        const double lhs = ledger.net_return.sum();
        const double rhs =
            ledger.gross_return.sum() - ledger.linear_cost.sum() - ledger.impact_cost.sum();
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }

    SUBCASE("weights stay inside [0, W_max] on random paths") {
        for (std::uint64_t seed : {101u, 202u, 303u, 404u}) {
            SimFixture random_fx = make_fixture(seed, 150);
            const Ledger ledger =
                simulate_path(random_fx.bars, random_fx.signal, random_fx.sizing, random_fx.path);
            CHECK(ledger.target_weight.minCoeff() >= 0.0);
            CHECK(ledger.target_weight.maxCoeff() <= 2.0);
            CHECK(ledger.turnover.minCoeff() >= 0.0);
            // Flat status must mean zero weight on that day's decision.
            for (Eigen::Index t = 0; t < ledger.size(); ++t)
                if (ledger.status[static_cast<size_t>(t)] == PositionState::Status::flat)
                    CHECK(ledger.target_weight[t] == 0.0);
        }
    }

    SUBCASE("net mean is nonincreasing in cost multipliers") {
        double prev_mean = std::numeric_limits<double>::infinity();
        for (double mult : {0.5, 1.0, 1.5, 2.0}) {
            SimFixture stressed = fx;
            stressed.path.costs.cost_multiplier = mult;
            stressed.path.costs.impact_multiplier = mult;
            const Ledger ledger =
                simulate_path(stressed.bars, stressed.signal, stressed.sizing, stressed.path);
            const double mean = ledger.net_return.mean();
            CHECK(mean <= prev_mean + 1e-15);
            prev_mean = mean;
        }
    }
}

TEST_CASE("ledger csv export") {
    SimFixture fx = make_fixture(8);
    const Ledger ledger = simulate_path(fx.bars, fx.signal, fx.sizing, fx.path);
    const std::string path = "/tmp/ftf_ledger_test.csv";
    write_ledger_csv(ledger, path);
    std::ifstream file(path);
    std::string header;
    std::getline(file, header);
    CHECK(header ==
          "date,target_weight,filled_weight,turnover,gross_return,linear_cost,impact_cost,"
          "net_return,status,entry_price,age,regime,exit_reason,entered");
    size_t rows = 0;
    std::string line;
    while (std::getline(file, line))
        if (!line.empty()) ++rows;
    CHECK(rows == static_cast<size_t>(ledger.size()));
}
