#pragma once

#include <Eigen/Dense>

namespace ftf {

struct VolParams {
    double theta = 0.94;             // EWMA variance decay in (0,1)
    double target_vol_annual = 0.15;
    int trading_days = 252;
    double max_leverage = 2.0;       // W_max

    [[nodiscard]] double target_vol_daily() const;
    void validate() const;
};

struct KellyParams {
    double k = 7e-5;                  // linear round-trip cost, return units (0.7 bps)
    double gamma = 0.02;              // square-root impact coefficient
    double n = 1.0;                   // round trips per day
    double lambda_kelly = 0.40;       // fractional Kelly multiplier
    double baseline_fraction = 0.25;  // share of the budget used when f* is tiny
    double f_star_epsilon = 1e-6;     // floor below which f* counts as tiny
    // Baseline scales the confidence-shaped budget by default; set true to
    // scale the full volatility budget instead.
    bool baseline_on_full_budget = false;

    void validate() const;
};

// Daily mean / stdev of the unit-notional gated rule on the training window.
// (mu_u, sigma_u) are the same moments routed to the capacity analysis.
struct TrainMoments {
    double mu = 0.0;
    double sigma = 0.0;
    double mu_u = 0.0;
    double sigma_u = 0.0;
};

// One-step-ahead variance forecasts. Given returns r_0..r_{m-1}, returns a
// length m+1 array with out[0] = seed_variance and
// out[i+1] = theta * out[i] + (1 - theta) * r_i^2, so out[i] is the forecast
// for the period of r_i and uses only returns before it.
Eigen::ArrayXd ewma_variance(const Eigen::ArrayXd& returns, double theta, double seed_variance);

// w_vol = min(W_max, sigma*_daily / sigma_hat). A zero forecast maps to the
// cap; the min() already encodes that limit.
double vol_target_weight(double sigma_hat_daily, const VolParams& params);

// w_conf = w_vol * max(0, (p_bull - 0.5) / 0.5); long-only, so the negative
// branch clamps to zero.
double confidence_weight(double w_vol, double p_bull);

// Growth objective with linear and square-root frictions:
//   g(f) = mu f - 0.5 sigma^2 f^2 - n k f - gamma (n f)^{3/2}.
double kelly_growth(double f, double mu, double sigma, double k, double gamma, double n);

// Maximizer of kelly_growth via the nonnegative root of the quadratic in
// x = sqrt(f): f* = x*^2 with
//   x* = (-3 gamma n^{3/2} + sqrt(9 gamma^2 n^3 + 16 sigma^2 (mu - n k))) / (4 sigma^2),
// and f* = 0 when mu <= n k. With gamma = k = 0, n = 1 this reduces to the
// classic mu / sigma^2.
double kelly_fraction(const TrainMoments& moments, const KellyParams& params);

// Final weight assembly: w = min(W_max, lambda_kelly * f* * w_conf), with the
// baseline rule replacing it on gate-active days where f* <= f_star_epsilon.
double final_weight(double f_star, double w_conf, double w_vol, bool gate_active,
                    const KellyParams& kelly, const VolParams& vol);

}  // namespace ftf
