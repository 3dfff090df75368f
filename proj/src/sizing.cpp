#include "ftf/sizing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ftf/errors.hpp"

namespace ftf {

double VolParams::target_vol_daily() const {
    return target_vol_annual / std::sqrt(static_cast<double>(trading_days));
}

void VolParams::validate() const {
    if (!(theta > 0.0) || !(theta < 1.0))
        throw InvalidTheta("theta must lie in (0,1), got " + std::to_string(theta));
    if (!(target_vol_annual > 0.0)) throw Error("target_vol_annual must be positive");
    if (trading_days < 1) throw Error("trading_days must be >= 1");
    if (!(max_leverage > 0.0)) throw Error("max_leverage must be positive");
}

void KellyParams::validate() const {
    if (k < 0.0) throw Error("k must be nonnegative");
    if (gamma < 0.0) throw Error("gamma must be nonnegative");
    if (!(n > 0.0)) throw Error("n must be positive");
    if (!(lambda_kelly > 0.0) || lambda_kelly > 1.0)
        throw Error("lambda_kelly must lie in (0,1], got " + std::to_string(lambda_kelly));
    if (baseline_fraction < 0.0 || baseline_fraction > 1.0)
        throw Error("baseline_fraction must lie in [0,1]");
    if (f_star_epsilon < 0.0) throw Error("f_star_epsilon must be nonnegative");
}

Eigen::ArrayXd ewma_variance(const Eigen::ArrayXd& returns, double theta, double seed_variance) {
    if (!(theta > 0.0) || !(theta < 1.0))
        throw InvalidTheta("theta must lie in (0,1), got " + std::to_string(theta));
    if (seed_variance < 0.0) throw Error("seed_variance must be nonnegative");
    Eigen::ArrayXd out(returns.size() + 1);
    out[0] = seed_variance;
    for (Eigen::Index i = 0; i < returns.size(); ++i)
        out[i + 1] = theta * out[i] + (1.0 - theta) * returns[i] * returns[i];
    return out;
}

double vol_target_weight(double sigma_hat_daily, const VolParams& params) {
    const double target = params.target_vol_daily();
    if (sigma_hat_daily <= 0.0) return params.max_leverage;
    return std::min(params.max_leverage, target / sigma_hat_daily);
}

double confidence_weight(double w_vol, double p_bull) {
    const double share = std::max(0.0, (p_bull - 0.5) / 0.5);
    return w_vol * share;
}

double kelly_growth(double f, double mu, double sigma, double k, double gamma, double n) {
    return mu * f - 0.5 * sigma * sigma * f * f - n * k * f - gamma * std::pow(n * f, 1.5);
}

double kelly_fraction(const TrainMoments& moments, const KellyParams& params) {
    const double mu = moments.mu;
    const double sigma = moments.sigma;
    if (!(sigma > 0.0)) throw DegenerateTraining("kelly_fraction requires sigma > 0");
    const double edge = mu - params.n * params.k;
    if (edge <= 0.0) return 0.0;  // no net edge after linear costs

    // Nonnegative root of 2 sigma^2 x^2 + 3 gamma n^{3/2} x - 2 (mu - nk) = 0,
    // evaluated in the rationalized form x* = 4e / (b + sqrt(b^2 + 16 sigma^2 e))
    // so a dominant impact term cannot cancel the discriminant.
    const double sigma2 = sigma * sigma;
    const double b = 3.0 * params.gamma * std::pow(params.n, 1.5);
    const double disc = b * b + 16.0 * sigma2 * edge;
    const double x_star = 4.0 * edge / (b + std::sqrt(disc));
    return x_star * x_star;
}

double final_weight(double f_star, double w_conf, double w_vol, bool gate_active,
                    const KellyParams& kelly, const VolParams& vol) {
    double w;
    if (f_star <= kelly.f_star_epsilon && gate_active) {
        const double budget = kelly.baseline_on_full_budget ? w_vol : w_conf;
        w = kelly.baseline_fraction * budget;
    } else {
        w = kelly.lambda_kelly * f_star * w_conf;
    }
    return std::clamp(w, 0.0, vol.max_leverage);
}

}  // namespace ftf
