#include <doctest.h>

#include <cmath>

#include "ftf/errors.hpp"
#include "ftf/synthetic.hpp"
#include "ftf/walkforward.hpp"
#include "oracles.hpp"

using namespace ftf;

namespace {

// ~3.5 years of daily data so a 2-year train / 6-month test spec fits
// several windows.
PriceSeries fixture_series(std::uint64_t seed = 123, int days = 900) {
    SyntheticSpec spec;
    spec.seed = seed;
    spec.days = days;
    spec.start = Date::from_ymd(2012, 1, 2);
    spec.daily_vol = 0.011;
    return align_calendar(generate_synthetic(spec), Calendar{});
}

WindowSpec fixture_spec() {
    WindowSpec spec;
    spec.train_years = 2;
    spec.test_months = 6;
    spec.advance_months = 6;
    spec.first_test_start = Date::from_ymd(2014, 1, 2);
    return spec;
}

PipelineParams fixture_params() {
    PipelineParams params;
    params.signal.momentum_window = 30;
    return params;
}

}  // namespace

TEST_CASE("generate_windows") {
    SUBCASE("ten-year train before a 2015 test start") {
        WindowSpec spec;
        spec.first_test_start = Date::from_ymd(2015, 1, 2);
        const WindowPlan plan = generate_windows(Date::from_ymd(2004, 12, 1),
                                                 Date::from_ymd(2016, 6, 30), spec);
        REQUIRE_FALSE(plan.windows.empty());
        CHECK(plan.windows.front().train_begin == Date::from_ymd(2005, 1, 2));
        CHECK(plan.windows.front().test_begin == Date::from_ymd(2015, 1, 2));
    }

    SUBCASE("non-overlapping advance tiles without gaps") {
        WindowSpec spec = fixture_spec();
        const WindowPlan plan =
            generate_windows(Date::from_ymd(2012, 1, 2), Date::from_ymd(2015, 12, 31), spec);
        REQUIRE(plan.windows.size() >= 3);
        for (size_t i = 1; i < plan.windows.size(); ++i)
            CHECK(plan.windows[i].test_begin == plan.windows[i - 1].test_end);
    }

    SUBCASE("insufficient history is rejected with a reason") {
        WindowSpec spec;
        spec.train_years = 10;
        spec.first_test_start = Date::from_ymd(2015, 1, 2);
        CHECK_THROWS_AS(
            generate_windows(Date::from_ymd(2010, 1, 4), Date::from_ymd(2014, 1, 1), spec),
            InsufficientHistory);
        // Later windows clear the bar once data reaches back far enough.
        const WindowPlan plan =
            generate_windows(Date::from_ymd(2005, 6, 1), Date::from_ymd(2016, 6, 30), spec);
        CHECK_FALSE(plan.windows.empty());
        CHECK_FALSE(plan.rejected.empty());
        CHECK(plan.windows.front().test_begin > spec.first_test_start);
    }
}

TEST_CASE("fit_window") {
    const PriceSeries series = fixture_series();
    const WindowSpec spec = fixture_spec();
    const PipelineParams params = fixture_params();
    const WindowPlan plan = generate_windows(series.first_date(), series.last_date(), spec);
    REQUIRE_FALSE(plan.windows.empty());
    const Window w = plan.windows.front();

    SUBCASE("two fits of the same slice are byte-identical") {
        const FrozenParams a = fit_window(series, w, params);
        const FrozenParams b = fit_window(series, w, params);
        CHECK(a.canonical() == b.canonical());
        CHECK(a.hash() == b.hash());
    }

    SUBCASE("constant prices degenerate") {
        PriceSeries flat;
        Date d = Date::from_ymd(2012, 1, 2);
        const Calendar cal;
        for (int i = 0; i < 900; ++i) {
            flat.bars.push_back(Bar{d, 100, 100, 100, 100});
            d = cal.next_business_day(d + 1);
        }
        CHECK_THROWS_AS(fit_window(flat, Window{flat.first_date(), flat.bars[700].date,
                                                flat.last_date() + 1},
                                   params),
                        DegenerateTraining);
    }

    SUBCASE("moments equal an independent recomputation of the unit rule") {
        const FrozenParams frozen = fit_window(series, w, params);
        // Rebuild the gated unit-weight rule from the frozen stats and
        // recompute its moments with a two-pass oracle.
        const PriceSeries train = series.slice(w.train_begin, w.test_begin);
        SignalParams sig = params.signal;
        sig.lambda_ema = frozen.lambda_ema;
        sig.blend_weight = frozen.omega;
        const SignalSeries signal =
            build_signal(train, sig, TrainStats{frozen.mu_train, frozen.sigma_train});
        PathParams path;
        path.exits = params.exits;
        path.costs = CostModel{0.0, 0.0, 0.0, 0.0};
        path.activation_threshold = frozen.activation_threshold;
        const Ledger unit = simulate_path(
            train, signal, Eigen::ArrayXd::Ones(static_cast<Eigen::Index>(train.size())), path);
        std::vector<double> r(unit.net_return.data(), unit.net_return.data() + unit.size());
        const auto [mu, sd] = oracle::moments_two_pass(r);
        CHECK(frozen.moments.mu == doctest::Approx(mu).epsilon(1e-12));
        CHECK(frozen.moments.sigma == doctest::Approx(sd).epsilon(1e-12));
        CHECK(frozen.moments.mu_u == frozen.moments.mu);
        CHECK(frozen.f_star >= 0.0);
    }

    SUBCASE("leakage: perturbing test prices never changes the fit") {
        const FrozenParams base = fit_window(series, w, params);
        PriceSeries bumped = series;
        const size_t idx = bumped.lower_bound(w.test_begin) + 5;
        REQUIRE(idx < bumped.size());
        bumped.bars[idx].close *= 1.10;
        bumped.bars[idx].high *= 1.10;
        const FrozenParams after = fit_window(bumped, w, params);
        CHECK(base.canonical() == after.canonical());
    }
}

TEST_CASE("run_oos") {
    const PriceSeries series = fixture_series();
    const WindowSpec spec = fixture_spec();
    const PipelineParams params = fixture_params();
    const WindowPlan plan = generate_windows(series.first_date(), series.last_date(), spec);
    const Window w = plan.windows.front();
    const FrozenParams frozen = fit_window(series, w, params);

    SUBCASE("ledger covers exactly the test slice") {
        const Ledger ledger = run_oos(series, w, frozen, params, RunVariant{});
        REQUIRE(ledger.size() > 0);
        CHECK(ledger.dates.front() >= w.test_begin);
        CHECK(ledger.dates.back() < w.test_end);
        const PriceSeries test = series.slice(w.test_begin, w.test_end);
        CHECK(static_cast<size_t>(ledger.size()) == test.size());
    }

    SUBCASE("frozen bundle hash is unchanged by running") {
        const std::uint64_t before = frozen.hash();
        (void)run_oos(series, w, frozen, params, RunVariant{});
        CHECK(frozen.hash() == before);
    }

    SUBCASE("data beyond the test end cannot affect the ledger") {
        const Ledger full = run_oos(series, w, frozen, params, RunVariant{});
        PriceSeries truncated = series;
        truncated.bars.resize(truncated.lower_bound(w.test_end));
        const Ledger cut = run_oos(truncated, w, frozen, params, RunVariant{});
        REQUIRE(cut.size() == full.size());
        for (Eigen::Index t = 0; t < full.size(); ++t) {
            CHECK(cut.net_return[t] == full.net_return[t]);
            CHECK(cut.target_weight[t] == full.target_weight[t]);
        }
    }

    SUBCASE("latency variant shifts fills, not decisions") {
        const Ledger t0 = run_oos(series, w, frozen, params, RunVariant{});
        RunVariant delayed;
        delayed.latency.delay_days = 1;
        const Ledger t1 = run_oos(series, w, frozen, params, delayed);
        REQUIRE(t0.size() == t1.size());
        for (Eigen::Index t = 0; t < t0.size(); ++t) {
            CHECK(t1.target_weight[t] == t0.target_weight[t]);
            if (t >= 1) CHECK(t1.filled_weight[t] == t0.target_weight[t - 1]);
        }
        CHECK(t1.filled_weight[0] == 0.0);
    }

    SUBCASE("ablations pin the blend weight") {
        RunVariant slope_only;
        slope_only.ablation = Ablation::slope_only;
        RunVariant momentum_only;
        momentum_only.ablation = Ablation::momentum_only;
        const Ledger ls = run_oos(series, w, frozen, params, slope_only);
        const Ledger lm = run_oos(series, w, frozen, params, momentum_only);
        const Ledger lf = run_oos(series, w, frozen, params, RunVariant{});
        // The three variants genuinely differ on this data.
        CHECK((ls.target_weight != lf.target_weight).any());
        CHECK((lm.target_weight != lf.target_weight).any());
    }

    SUBCASE("reversal holds only nonpositive weights") {
        RunVariant reversed;
        reversed.reversed = true;
        const Ledger lr = run_oos(series, w, frozen, params, reversed);
        CHECK(lr.target_weight.maxCoeff() <= 0.0);
        const Ledger lf = run_oos(series, w, frozen, params, RunVariant{});
        CHECK(lf.target_weight.minCoeff() >= 0.0);
    }
}

TEST_CASE("train state seeds the test recursions") {
    const PriceSeries series = fixture_series();
    const WindowSpec spec = fixture_spec();
    const PipelineParams params = fixture_params();
    const WindowPlan plan = generate_windows(series.first_date(), series.last_date(), spec);
    const Window w = plan.windows.front();
    const FrozenParams frozen = fit_window(series, w, params);

    // Same frozen numbers, but a train range shortened by a year: the EMA and
    // EWMA enter the test slice in a different state, so early test days
    // cannot all coincide.
    Window shifted = w;
    shifted.train_begin = add_years(w.train_begin, 1);
    const Ledger full = run_oos(series, w, frozen, params, RunVariant{});
    const Ledger short_train = run_oos(series, shifted, frozen, params, RunVariant{});
    REQUIRE(full.size() == short_train.size());
    bool differs = false;
    for (Eigen::Index t = 0; t < full.size() && !differs; ++t)
        differs = full.target_weight[t] != short_train.target_weight[t];
    CHECK(differs);
}

TEST_CASE("stitch") {
    const PriceSeries series = fixture_series();
    const WindowSpec spec = fixture_spec();
    const PipelineParams params = fixture_params();
    const BacktestResult result = run_walkforward(series, spec, params, RunVariant{});

    SUBCASE("adjacent slices concatenate") {
        REQUIRE(result.per_window.size() >= 2);
        Eigen::Index total = 0;
        for (const Ledger& l : result.per_window) total += l.size();
        CHECK(result.stitched.size() == total);
        for (size_t i = 1; i < result.stitched.dates.size(); ++i)
            CHECK(result.stitched.dates[i - 1] < result.stitched.dates[i]);
    }

    SUBCASE("each window restarts without inherited exposure") {
        for (const Ledger& l : result.per_window) {
            REQUIRE(l.size() > 0);
            // No position is carried in: day one earns nothing, and any
            // same-day entry is charged as a full trade from zero.
            CHECK(l.gross_return[0] == 0.0);
            CHECK(l.turnover[0] == std::abs(l.filled_weight[0]));
        }
    }

    SUBCASE("overlapping slices refuse to stitch") {
        std::vector<Ledger> slices{result.per_window[0], result.per_window[0]};
        CHECK_THROWS_AS(stitch(slices), OverlapInStitch);
    }

    SUBCASE("overlapping window mode skips the stitched curve") {
        WindowSpec monthly = spec;
        monthly.advance_months = 1;
        const BacktestResult overlapped = run_walkforward(series, monthly, params, RunVariant{});
        CHECK(overlapped.overlapping);
        CHECK(overlapped.stitched.size() == 0);
        CHECK(overlapped.per_window.size() > result.per_window.size());
    }
}

TEST_CASE("stress grid") {
    const PriceSeries series = fixture_series(7, 800);
    WindowSpec spec = fixture_spec();
    const PipelineParams params = fixture_params();
    AnalyticsParams analytics;

    StressGridSpec grid;
    grid.cost_multipliers = {0.5, 1.0};
    grid.impact_multipliers = {1.0, 2.0};
    grid.latencies = {0, 1};
    const auto cells = run_stress_grid(series, spec, params, grid, analytics, 2);
    CHECK(cells.size() == 8);  // cartesian count

    // Identity cell equals the plain run.
    const BacktestResult base = run_walkforward(series, spec, params, RunVariant{});
    const PerfSummary base_summary = perf_summary(base.stitched, analytics);
    for (const auto& cell : cells) {
        if (cell.cost_multiplier == 1.0 && cell.impact_multiplier == 1.0 &&
            cell.latency_days == 0) {
            CHECK(cell.summary.sharpe == doctest::Approx(base_summary.sharpe).epsilon(1e-12));
            CHECK(cell.summary.ann_return ==
                  doctest::Approx(base_summary.ann_return).epsilon(1e-12));
        }
    }

    // Thread count cannot change results.
    const auto serial = run_stress_grid(series, spec, params, grid, analytics, 1);
    REQUIRE(serial.size() == cells.size());
    for (size_t i = 0; i < cells.size(); ++i)
        CHECK(serial[i].summary.sharpe == cells[i].summary.sharpe);
}

TEST_CASE("full grid shape is 4 x 4 x 3 = 48") {
    StressGridSpec grid;
    grid.latencies = {0, 1, 2};
    size_t count = grid.cost_multipliers.size() * grid.impact_multipliers.size() *
                   grid.latencies.size();
    CHECK(count == 48);
}
