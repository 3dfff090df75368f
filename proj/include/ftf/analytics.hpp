#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ftf/dates.hpp"
#include "ftf/execution.hpp"

namespace ftf {

struct AnalyticsParams {
    int trading_days = 252;
    double active_threshold = 1e-3;  // |w_t| above this counts as an active day
};

struct PerfSummary {
    double ann_return = 0.0;
    double ann_vol = 0.0;
    double sharpe = 0.0;
    double cagr = 0.0;
    double max_drawdown = 0.0;
    double calmar = 0.0;
    double hit_rate_calendar = 0.0;  // wins over all days (zero days in the denominator)
    double hit_rate_active = 0.0;    // wins over active days only
    double up_month_share = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;           // raw standardized fourth moment, not excess
    double var95 = 0.0;              // positive loss magnitudes
    double cvar95 = 0.0;
    double avg_gain_bps = 0.0;
    double avg_loss_bps = 0.0;       // negative by convention
    double payoff_ratio = 0.0;
    double ev_per_active_day_bps = 0.0;
    long entries = 0;
    long active_days = 0;
    long days = 0;
    double mean_abs_weight = 0.0;
    double mean_abs_turnover = 0.0;
};

struct RegressionResult {
    double alpha_daily = 0.0;
    double alpha_annual = 0.0;
    double beta = 0.0;
    double t_alpha = 0.0;
    double t_beta = 0.0;
    double r_squared = 0.0;
    double tracking_error = 0.0;      // annualized residual volatility
    double information_ratio = 0.0;   // alpha_annual / tracking_error
    int hac_lags = 0;
};

struct BootstrapResult {
    double point_sharpe = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int resamples = 0;
    int block_length = 0;
    std::uint64_t seed = 0;
};

struct SpaResult {
    double p_value = 1.0;
    int num_configs = 0;
    int resamples = 0;
    int block_length = 0;
    std::uint64_t seed = 0;
    std::string statistic_type = "studentized";
};

struct CapacityResult {
    double mu_u = 0.0;
    double sigma_u = 0.0;
    double k = 0.0;
    double gamma = 0.0;
    double n = 1.0;
    double l_star = 0.0;   // growth-maximizing participation
    double l_max = 0.0;    // zero-growth root (0 when no positive branch)
    bool no_positive_branch = false;
    Eigen::ArrayXd grid;
    Eigen::ArrayXd g_values;
    double adv_dollars = 0.0;
    double mean_abs_turnover = 0.0;
    double aum_max = 0.0;
};

struct TailMetrics {
    double var95 = 0.0;
    double cvar95 = 0.0;
    double worst_month = 0.0;
};

struct ScaledReport {
    double c = 0.0;  // target_vol / realized ann vol
    double target_vol = 0.0;
    double scaled_return = 0.0;   // sharpe * target_vol
    double scaled_alpha = 0.0;    // c * alpha_annual
    double sharpe = 0.0;          // unchanged under scaling
    double information_ratio = 0.0;
};

struct AttributionRow {
    std::string label;
    long days = 0;
    PerfSummary summary;
    bool degenerate = false;  // constant returns in the slice; summary zeroed
};

struct Attribution {
    std::vector<AttributionRow> regimes;     // bull / chop / bear
    std::vector<AttributionRow> subperiods;  // configured spans
};

// Basic moments. sample_stdev divides by N-1 (performance reporting);
// population_stdev divides by N (frozen training statistics).
double sample_stdev(const Eigen::ArrayXd& x);
double population_stdev(const Eigen::ArrayXd& x);

// Annualized mean / annualized sample stdev; throws ZeroVol on constant input.
double sharpe_ratio(const Eigen::ArrayXd& daily_returns, int trading_days = 252);

// Linear-interpolation quantile on a sorted copy (the common type-7 rule).
double quantile(const Eigen::ArrayXd& x, double p);

// Largest peak-to-trough fraction of an equity curve (values > 0).
double max_drawdown(const Eigen::ArrayXd& equity);

Eigen::ArrayXd equity_curve(const Eigen::ArrayXd& daily_returns);  // cumprod(1 + r)

PerfSummary perf_summary(const Ledger& ledger, const AnalyticsParams& params = {});

TailMetrics tail_metrics(const Eigen::ArrayXd& daily_returns, const std::vector<Date>& dates);

// OLS of strat on [1, bench] with Newey-West (Bartlett) HAC t-statistics.
RegressionResult capm_regression(const Eigen::ArrayXd& strat, const Eigen::ArrayXd& bench,
                                 int hac_lags, int trading_days = 252);

// Circular moving-block bootstrap of the annualized Sharpe ratio with a
// percentile 95% interval. Deterministic per seed; iteration b draws from its
// own derived stream, so results do not depend on evaluation order.
BootstrapResult block_bootstrap_sharpe(const Eigen::ArrayXd& returns, int B, int block_length,
                                       std::uint64_t seed, int trading_days = 252);

// Hansen-style SPA test over studentized mean loss differentials
// d_{k,t} = candidate_k(t) - benchmark(t), using the stationary bootstrap
// (geometric blocks with the given mean length).
SpaResult spa_test(const Eigen::MatrixXd& candidates, const Eigen::ArrayXd& benchmark, int B,
                   int block_length, std::uint64_t seed);

// Friction-adjusted growth curve g(L) over a participation grid, its argmax
// (same closed form as kelly_fraction), and the zero-growth root found by
// bracketed bisection.
CapacityResult capacity_curve(double mu_u, double sigma_u, double k, double gamma, double n,
                              const Eigen::ArrayXd& grid);

double aum_mapping(double l_max, double adv_dollars, double mean_abs_turnover);

ScaledReport vol_scaling(const PerfSummary& summary, const RegressionResult& regression,
                         double target_vol);

Attribution attribution(const Ledger& ledger, const AnalyticsParams& params,
                        const std::vector<std::pair<std::string, Date>>& subperiod_starts);

}  // namespace ftf
