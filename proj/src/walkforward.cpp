#include "ftf/walkforward.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include "ftf/errors.hpp"
#include "ftf/hashing.hpp"

namespace ftf {

void WindowSpec::validate() const {
    if (train_years < 1) throw Error("train_years must be >= 1");
    if (test_months < 1) throw Error("test_months must be >= 1");
    if (advance_months < 1) throw Error("advance_months must be >= 1");
    if (advance_months > test_months)
        throw Error("advance_months > test_months would leave coverage gaps");
}

const char* to_string(Ablation a) {
    switch (a) {
        case Ablation::full: return "full";
        case Ablation::slope_only: return "slope_only";
        case Ablation::momentum_only: return "momentum_only";
    }
    return "full";
}

std::string FrozenParams::canonical() const {
    char buf[1024];
    std::snprintf(buf, sizeof(buf),
                  "lambda_ema=%.17g\nmu_train=%.17g\nsigma_train=%.17g\nomega=%.17g\n"
                  "activation_threshold=%.17g\nhard_stop_mult=%.17g\ntrail_stop_mult=%.17g\n"
                  "timeout_days=%d\nlambda_kelly=%.17g\nmu=%.17g\nsigma=%.17g\nmu_u=%.17g\n"
                  "sigma_u=%.17g\nf_star=%.17g\ntheta=%.17g\nseed_variance=%.17g\n",
                  lambda_ema, mu_train, sigma_train, omega, activation_threshold, hard_stop_mult,
                  trail_stop_mult, timeout_days, lambda_kelly, moments.mu, moments.sigma,
                  moments.mu_u, moments.sigma_u, f_star, theta, seed_variance);
    return buf;
}

std::uint64_t FrozenParams::hash() const { return fnv1a64(canonical()); }

WindowPlan generate_windows(Date data_first, Date data_last, const WindowSpec& spec) {
    spec.validate();
    WindowPlan plan;
    for (Date test_begin = spec.first_test_start; test_begin <= data_last;
         test_begin = add_months(test_begin, spec.advance_months)) {
        Window w;
        w.train_begin = add_years(test_begin, -spec.train_years);
        w.test_begin = test_begin;
        w.test_end = std::min(add_months(test_begin, spec.test_months), data_last + 1);
        if (w.train_begin < data_first) {
            plan.rejected.push_back("window testing " + w.test_begin.to_iso() +
                                    ": train start " + w.train_begin.to_iso() +
                                    " precedes first data day " + data_first.to_iso());
            continue;
        }
        plan.windows.push_back(w);
    }
    if (plan.windows.empty()) {
        std::string detail = plan.rejected.empty() ? "no test window fits the data span"
                                                   : plan.rejected.front();
        throw InsufficientHistory(detail);
    }
    return plan;
}

namespace {

struct TrainFit {
    TrainStats stats;
    double unit_sharpe = 0.0;  // selection objective
    TrainMoments moments;
    bool usable = false;
};

// Unit-weight gated rule on the training slice: the full state machine with
// sizing weight pinned to 1 and no frictions. Its daily returns define the
// training moments and the lambda/omega selection objective.
TrainFit fit_candidate(const PriceSeries& train, double lambda_ema, double omega,
                       const PipelineParams& params) {
    TrainFit fit;
    Eigen::ArrayXd y_tilde = ema_smooth(log_prices(train), lambda_ema);
    const Eigen::Index n = y_tilde.size();
    if (n < 2) return fit;
    Eigen::ArrayXd slope = y_tilde.tail(n - 1) - y_tilde.head(n - 1);
    fit.stats.mu_train = slope.mean();
    fit.stats.sigma_train = population_stdev(slope);
    if (!(fit.stats.sigma_train > 0.0)) return fit;

    SignalParams sig = params.signal;
    sig.lambda_ema = lambda_ema;
    sig.blend_weight = omega;
    const SignalSeries signal = build_signal(train, sig, fit.stats);

    PathParams path;
    path.exits = params.exits;
    path.costs = CostModel{0.0, 0.0, 0.0, 0.0};
    path.latency = LatencyMode{0};
    path.activation_threshold = sig.activation_threshold;
    const Eigen::ArrayXd unit = Eigen::ArrayXd::Ones(n);
    const Ledger ledger = simulate_path(train, signal, unit, path);

    const Eigen::ArrayXd& r = ledger.net_return;
    fit.moments.mu = r.mean();
    fit.moments.sigma = population_stdev(r);
    fit.moments.mu_u = fit.moments.mu;
    fit.moments.sigma_u = fit.moments.sigma;
    if (!(fit.moments.sigma > 0.0)) return fit;
    fit.unit_sharpe = fit.moments.mu / fit.moments.sigma;
    fit.usable = true;
    return fit;
}

}  // namespace

FrozenParams fit_window(const PriceSeries& series, const Window& window,
                        const PipelineParams& params) {
    params.signal.validate();
    params.vol.validate();
    params.kelly.validate();
    params.exits.validate();

    const PriceSeries train = series.slice(window.train_begin, window.test_begin);
    const Eigen::Index min_days =
        std::max(params.signal.momentum_window, params.exits.atr_window) + 2;
    if (static_cast<Eigen::Index>(train.size()) < min_days)
        throw InsufficientHistory("train slice has " + std::to_string(train.size()) +
                                  " days; need at least " + std::to_string(min_days));

    const std::vector<double> lambdas =
        params.select_lambda ? params.lambda_grid : std::vector<double>{params.signal.lambda_ema};
    const std::vector<double> omegas =
        params.select_omega ? params.omega_grid : std::vector<double>{params.signal.blend_weight};

    TrainFit best;
    double best_lambda = lambdas.front();
    double best_omega = omegas.front();
    bool any = false;
    for (double lambda : lambdas) {
        for (double omega : omegas) {
            const TrainFit fit = fit_candidate(train, lambda, omega, params);
            if (!fit.usable) continue;
            if (!any || fit.unit_sharpe > best.unit_sharpe) {
                best = fit;
                best_lambda = lambda;
                best_omega = omega;
                any = true;
            }
        }
    }
    if (!any)
        throw DegenerateTraining(
            "training window produced no usable fit (constant prices or an always-flat rule)");

    FrozenParams frozen;
    frozen.lambda_ema = best_lambda;
    frozen.mu_train = best.stats.mu_train;
    frozen.sigma_train = best.stats.sigma_train;
    frozen.omega = best_omega;
    frozen.activation_threshold = params.signal.activation_threshold;
    frozen.hard_stop_mult = params.exits.hard_stop_mult;
    frozen.trail_stop_mult = params.exits.trail_stop_mult;
    frozen.timeout_days = params.exits.timeout_days;
    frozen.lambda_kelly = params.kelly.lambda_kelly;
    frozen.moments = best.moments;
    frozen.f_star = kelly_fraction(best.moments, params.kelly);
    frozen.theta = params.vol.theta;
    const ReturnSeries train_returns = simple_returns(train);
    const double sd = population_stdev(train_returns.values);
    frozen.seed_variance = sd * sd;
    return frozen;
}

Ledger run_oos(const PriceSeries& series, const Window& window, const FrozenParams& frozen,
               const PipelineParams& params, const RunVariant& variant) {
    const PriceSeries slice = series.slice(window.train_begin, window.test_end);
    if (slice.empty() || slice.last_date() < window.test_begin)
        throw InsufficientHistory("no data in test range starting " +
                                  window.test_begin.to_iso());

    SignalParams sig = params.signal;
    sig.lambda_ema = frozen.lambda_ema;
    sig.activation_threshold = frozen.activation_threshold;
    switch (variant.ablation) {
        case Ablation::full: sig.blend_weight = frozen.omega; break;
        case Ablation::slope_only: sig.blend_weight = 1.0; break;
        case Ablation::momentum_only: sig.blend_weight = 0.0; break;
    }
    TrainStats stats{frozen.mu_train, frozen.sigma_train};
    const SignalSeries signal = build_signal(slice, sig, stats);

    // One-step-ahead vol forecasts over train + test, seeded at the train
    // start; by the first test day the recursion state equals a continuous
    // computation's.
    const ReturnSeries returns = simple_returns(slice);
    const Eigen::ArrayXd forecasts =
        ewma_variance(returns.values, frozen.theta, frozen.seed_variance);

    const int direction = variant.reversed ? -1 : +1;
    const auto n = static_cast<Eigen::Index>(slice.size());
    const auto gate = activation_gate(signal, frozen.activation_threshold, direction);

    KellyParams kelly = params.kelly;
    kelly.lambda_kelly = frozen.lambda_kelly;
    Eigen::ArrayXd sizing_weight(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        const double sigma_hat = std::sqrt(forecasts[t]);
        const double w_vol = vol_target_weight(sigma_hat, params.vol);
        const double conviction = direction >= 0 ? signal.p_bull[t] : signal.p_bear[t];
        const double w_conf = confidence_weight(w_vol, conviction);
        sizing_weight[t] =
            final_weight(frozen.f_star, w_conf, w_vol, gate[static_cast<size_t>(t)] != 0, kelly,
                         params.vol);
    }

    PathParams path;
    path.exits = params.exits;
    path.exits.hard_stop_mult = frozen.hard_stop_mult;
    path.exits.trail_stop_mult = frozen.trail_stop_mult;
    path.exits.timeout_days = frozen.timeout_days;
    path.costs = params.costs;
    path.costs.cost_multiplier *= variant.cost_multiplier;
    path.costs.impact_multiplier *= variant.impact_multiplier;
    path.latency = variant.latency;
    path.activation_threshold = frozen.activation_threshold;
    path.direction = direction;

    const auto begin = static_cast<Eigen::Index>(slice.lower_bound(window.test_begin));
    return simulate_path(slice, signal, sizing_weight, path, begin);
}

Ledger stitch(const std::vector<Ledger>& ledgers) {
    if (ledgers.empty()) throw TooShort("stitch needs at least one ledger");
    Ledger out = ledgers.front();
    for (size_t i = 1; i < ledgers.size(); ++i) {
        if (ledgers[i].size() == 0) continue;
        if (out.size() > 0 && !(out.dates.back() < ledgers[i].dates.front()))
            throw OverlapInStitch("slice starting " + ledgers[i].dates.front().to_iso() +
                                  " overlaps the previous slice ending " +
                                  out.dates.back().to_iso());
        out.append(ledgers[i]);
    }
    return out;
}

BacktestResult run_walkforward(const PriceSeries& aligned, const WindowSpec& spec,
                               const PipelineParams& params, const RunVariant& variant) {
    if (aligned.empty()) throw TooShort("run_walkforward needs data");
    BacktestResult result;
    result.overlapping = spec.overlapping();
    WindowPlan plan = generate_windows(aligned.first_date(), aligned.last_date(), spec);
    result.windows = plan.windows;
    result.rejected_windows = std::move(plan.rejected);
    result.frozen.reserve(result.windows.size());
    result.per_window.reserve(result.windows.size());
    for (const Window& w : result.windows) {
        FrozenParams frozen = fit_window(aligned, w, params);
        result.per_window.push_back(run_oos(aligned, w, frozen, params, variant));
        result.frozen.push_back(frozen);
    }
    if (!result.overlapping) result.stitched = stitch(result.per_window);
    return result;
}

std::vector<StressCell> run_stress_grid(const PriceSeries& aligned, const WindowSpec& spec,
                                        const PipelineParams& params, const StressGridSpec& grid,
                                        const AnalyticsParams& analytics, int threads) {
    std::vector<StressCell> cells;
    for (double cost : grid.cost_multipliers)
        for (double impact : grid.impact_multipliers)
            for (int latency : grid.latencies)
                cells.push_back(StressCell{cost, impact, latency, {}});

    // Fits do not depend on the variant, so share them across cells.
    WindowPlan plan = generate_windows(aligned.first_date(), aligned.last_date(), spec);
    std::vector<FrozenParams> frozen;
    frozen.reserve(plan.windows.size());
    for (const Window& w : plan.windows) frozen.push_back(fit_window(aligned, w, params));

    auto run_cell = [&](StressCell& cell) {
        RunVariant variant;
        variant.cost_multiplier = cell.cost_multiplier;
        variant.impact_multiplier = cell.impact_multiplier;
        variant.latency.delay_days = cell.latency_days;
        std::vector<Ledger> ledgers;
        ledgers.reserve(plan.windows.size());
        for (size_t i = 0; i < plan.windows.size(); ++i)
            ledgers.push_back(run_oos(aligned, plan.windows[i], frozen[i], params, variant));
        cell.summary = perf_summary(stitch(ledgers), analytics);
    };

    unsigned int worker_count = threads > 0 ? static_cast<unsigned int>(threads)
                                            : std::max(1u, std::thread::hardware_concurrency());
    worker_count = std::min<unsigned int>(worker_count, static_cast<unsigned int>(cells.size()));
    if (worker_count <= 1) {
        for (auto& cell : cells) run_cell(cell);
        return cells;
    }
    std::vector<std::thread> workers;
    std::atomic<size_t> next{0};
    for (unsigned int w = 0; w < worker_count; ++w)
        workers.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1))
                run_cell(cells[i]);
        });
    for (auto& worker : workers) worker.join();
    return cells;
}

}  // namespace ftf
