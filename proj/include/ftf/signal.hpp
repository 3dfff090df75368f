#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ftf/market_data.hpp"

namespace ftf {

struct SignalParams {
    double lambda_ema = 0.94;          // EMA decay in (0,1)
    int momentum_window = 50;          // K
    double blend_weight = 0.6;         // omega in [0,1]
    double clip_bound = 3.0;           // z clip
    double activation_threshold = 0.52;

    void validate() const;  // throws InvalidLambda / Error on bad ranges
};

// Slope moments frozen on the training window (population standard deviation).
struct TrainStats {
    double mu_train = 0.0;
    double sigma_train = 0.0;
};

// Per-day signal state. Warm-up days (t < max(K, 1)) are flagged
// non-tradeable; their momentum bit is undefined and p_bull is pinned to the
// neutral 0.5 so downstream code never reads a biased value by accident.
struct SignalSeries {
    std::vector<Date> dates;
    Eigen::ArrayXd y_tilde;   // smoothed log-price
    Eigen::ArrayXd slope;     // first difference of y_tilde (0 at t = 0)
    Eigen::ArrayXd z;         // standardized slope
    Eigen::ArrayXd p_trend;   // clipped affine map of z into [0,1]
    Eigen::ArrayXi momentum;  // 0/1; -1 inside the warm-up region
    Eigen::ArrayXd p_bull;
    Eigen::ArrayXd p_bear;
    std::vector<uint8_t> tradeable;

    [[nodiscard]] Eigen::Index size() const { return y_tilde.size(); }
};

// y~_t = lambda * y~_{t-1} + (1 - lambda) * y_t, seeded with y_0.
Eigen::ArrayXd ema_smooth(const Eigen::ArrayXd& y, double lambda_ema);

// z_t = (slope_t - mu_train) / sigma_train. Throws DegenerateTraining when
// sigma_train is zero.
Eigen::ArrayXd standardize_slope(const Eigen::ArrayXd& slope, const TrainStats& stats);

// (clip(z, -b, b) + b) / (2b); monotone, saturating at 0 and 1.
double trend_probability(double z, double clip_bound = 3.0);
Eigen::ArrayXd trend_probability(const Eigen::ArrayXd& z, double clip_bound = 3.0);

// m_t = 1{close_t / close_{t-K} > 1}; -1 marks the undefined first K days.
Eigen::ArrayXi momentum_indicator(const PriceSeries& series, int momentum_window);

// p_bull = omega * p_trend + (1 - omega) * m. Throws UndefinedMomentum when
// m is the warm-up marker.
struct RegimeBlend {
    double p_bull;
    double p_bear;
};
RegimeBlend blend_regime(double p_trend, int momentum_bit, double omega);

// Full per-day signal stack with frozen training stats. Every value at day t
// depends only on bars [0..t].
SignalSeries build_signal(const PriceSeries& series, const SignalParams& params,
                          const TrainStats& stats);

// Debug export, one row per day with all fields.
void write_signal_csv(const SignalSeries& signal, const std::string& path);

}  // namespace ftf
