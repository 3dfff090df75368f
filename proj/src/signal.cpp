#include "ftf/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ftf/errors.hpp"

namespace ftf {

void SignalParams::validate() const {
    if (!(lambda_ema > 0.0) || !(lambda_ema < 1.0))
        throw InvalidLambda("lambda_ema must lie in (0,1), got " + std::to_string(lambda_ema));
    if (momentum_window < 1)
        throw Error("momentum_window must be >= 1, got " + std::to_string(momentum_window));
    if (blend_weight < 0.0 || blend_weight > 1.0)
        throw Error("blend_weight must lie in [0,1], got " + std::to_string(blend_weight));
    if (!(clip_bound > 0.0)) throw Error("clip_bound must be positive");
    if (!(activation_threshold > 0.5) || activation_threshold > 1.0)
        throw Error("activation_threshold must lie in (0.5, 1], got " +
                    std::to_string(activation_threshold));
}

Eigen::ArrayXd ema_smooth(const Eigen::ArrayXd& y, double lambda_ema) {
    if (!(lambda_ema > 0.0) || !(lambda_ema < 1.0))
        throw InvalidLambda("lambda_ema must lie in (0,1), got " + std::to_string(lambda_ema));
    if (y.size() == 0) throw TooShort("ema_smooth needs a nonempty sequence");
    Eigen::ArrayXd out(y.size());
    out[0] = y[0];
    for (Eigen::Index t = 1; t < y.size(); ++t)
        out[t] = lambda_ema * out[t - 1] + (1.0 - lambda_ema) * y[t];
    return out;
}

Eigen::ArrayXd standardize_slope(const Eigen::ArrayXd& slope, const TrainStats& stats) {
    if (!(stats.sigma_train > 0.0))
        throw DegenerateTraining("sigma_train must be positive, got " +
                                 std::to_string(stats.sigma_train));
    return (slope - stats.mu_train) / stats.sigma_train;
}

double trend_probability(double z, double clip_bound) {
    const double clipped = std::clamp(z, -clip_bound, clip_bound);
    return (clipped + clip_bound) / (2.0 * clip_bound);
}

Eigen::ArrayXd trend_probability(const Eigen::ArrayXd& z, double clip_bound) {
    return (z.min(clip_bound).max(-clip_bound) + clip_bound) / (2.0 * clip_bound);
}

Eigen::ArrayXi momentum_indicator(const PriceSeries& series, int momentum_window) {
    const auto n = static_cast<Eigen::Index>(series.size());
    Eigen::ArrayXi out = Eigen::ArrayXi::Constant(n, -1);
    for (Eigen::Index t = momentum_window; t < n; ++t) {
        const double ratio = series[static_cast<size_t>(t)].close /
                             series[static_cast<size_t>(t - momentum_window)].close;
        out[t] = ratio > 1.0 ? 1 : 0;  // strict inequality
    }
    return out;
}

RegimeBlend blend_regime(double p_trend, int momentum_bit, double omega) {
    if (momentum_bit < 0)
        throw UndefinedMomentum("momentum bit undefined inside the warm-up window");
    const double p_bull = omega * p_trend + (1.0 - omega) * static_cast<double>(momentum_bit);
    return {p_bull, 1.0 - p_bull};
}

SignalSeries build_signal(const PriceSeries& series, const SignalParams& params,
                          const TrainStats& stats) {
    params.validate();
    if (series.empty()) throw TooShort("build_signal needs a nonempty series");

    SignalSeries out;
    const auto n = static_cast<Eigen::Index>(series.size());
    out.dates.reserve(series.size());
    for (const Bar& b : series.bars) out.dates.push_back(b.date);

    out.y_tilde = ema_smooth(log_prices(series), params.lambda_ema);
    out.slope = Eigen::ArrayXd::Zero(n);
    if (n > 1) out.slope.tail(n - 1) = out.y_tilde.tail(n - 1) - out.y_tilde.head(n - 1);
    out.z = standardize_slope(out.slope, stats);
    out.p_trend = trend_probability(out.z, params.clip_bound);
    out.momentum = momentum_indicator(series, params.momentum_window);

    const Eigen::Index warmup = std::max<Eigen::Index>(params.momentum_window, 1);
    out.p_bull.resize(n);
    out.p_bear.resize(n);
    out.tradeable.assign(series.size(), 0);
    for (Eigen::Index t = 0; t < n; ++t) {
        if (t < warmup) {
            out.p_bull[t] = 0.5;  // neutral placeholder, gated off below
            out.p_bear[t] = 0.5;
            continue;
        }
        const RegimeBlend blend = blend_regime(out.p_trend[t], out.momentum[t], params.blend_weight);
        out.p_bull[t] = blend.p_bull;
        out.p_bear[t] = blend.p_bear;
        out.tradeable[static_cast<size_t>(t)] = 1;
    }
    return out;
}

void write_signal_csv(const SignalSeries& signal, const std::string& path) {
    std::ofstream file(path);
    if (!file.is_open()) throw Error("cannot write '" + path + "'");
    file << "date,y_tilde,slope,z,p_trend,momentum,p_bull,p_bear,tradeable\n";
    char buf[256];
    for (Eigen::Index t = 0; t < signal.size(); ++t) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%d\n",
                      signal.dates[static_cast<size_t>(t)].to_iso().c_str(), signal.y_tilde[t],
                      signal.slope[t], signal.z[t], signal.p_trend[t], signal.momentum[t],
                      signal.p_bull[t], signal.p_bear[t],
                      static_cast<int>(signal.tradeable[static_cast<size_t>(t)]));
        file << buf;
    }
}

}  // namespace ftf
