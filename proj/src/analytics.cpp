#include "ftf/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "ftf/errors.hpp"
#include "ftf/sizing.hpp"

namespace ftf {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Independent stream for iteration b of a seeded resampling loop.
std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t iteration) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(iteration + 1)));
}

// Rounding in the mean leaves O(1e-20) residuals on constant inputs, so
// degeneracy checks compare elements exactly instead of testing var > 0.
bool is_constant(const Eigen::ArrayXd& x) {
    return x.size() == 0 || (x == x[0]).all();
}

}  // namespace

double sample_stdev(const Eigen::ArrayXd& x) {
    if (x.size() < 2) return 0.0;
    const double mu = x.mean();
    return std::sqrt((x - mu).square().sum() / static_cast<double>(x.size() - 1));
}

double population_stdev(const Eigen::ArrayXd& x) {
    if (x.size() < 1) return 0.0;
    const double mu = x.mean();
    return std::sqrt((x - mu).square().mean());
}

double sharpe_ratio(const Eigen::ArrayXd& daily_returns, int trading_days) {
    if (is_constant(daily_returns)) throw ZeroVol("sharpe undefined for constant returns");
    const double sd = sample_stdev(daily_returns);
    if (!(sd > 0.0)) throw ZeroVol("sharpe undefined for constant returns");
    return daily_returns.mean() * static_cast<double>(trading_days) /
           (sd * std::sqrt(static_cast<double>(trading_days)));
}

double quantile(const Eigen::ArrayXd& x, double p) {
    if (x.size() == 0) throw TooShort("quantile of empty array");
    std::vector<double> sorted(x.data(), x.data() + x.size());
    std::sort(sorted.begin(), sorted.end());
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double max_drawdown(const Eigen::ArrayXd& equity) {
    double peak = -std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < equity.size(); ++i) {
        peak = std::max(peak, equity[i]);
        worst = std::max(worst, 1.0 - equity[i] / peak);
    }
    return worst;
}

Eigen::ArrayXd equity_curve(const Eigen::ArrayXd& daily_returns) {
    Eigen::ArrayXd out(daily_returns.size());
    double acc = 1.0;
    for (Eigen::Index i = 0; i < daily_returns.size(); ++i) {
        acc *= 1.0 + daily_returns[i];
        out[i] = acc;
    }
    return out;
}

PerfSummary perf_summary(const Ledger& ledger, const AnalyticsParams& params) {
    if (ledger.size() == 0) throw TooShort("perf_summary needs a nonempty ledger");
    const Eigen::ArrayXd& r = ledger.net_return;
    const auto n = static_cast<double>(r.size());
    const double days_per_year = static_cast<double>(params.trading_days);

    PerfSummary s;
    s.days = static_cast<long>(r.size());
    s.ann_return = r.mean() * days_per_year;
    if (is_constant(r)) throw ZeroVol("perf_summary: constant net returns");
    const double sd = sample_stdev(r);
    if (!(sd > 0.0)) throw ZeroVol("perf_summary: constant net returns");
    s.ann_vol = sd * std::sqrt(days_per_year);
    s.sharpe = s.ann_return / s.ann_vol;

    const Eigen::ArrayXd equity = equity_curve(r);
    s.cagr = std::pow(equity[equity.size() - 1], days_per_year / n) - 1.0;
    s.max_drawdown = max_drawdown(equity);
    s.calmar = s.max_drawdown > 0.0 ? s.ann_return / s.max_drawdown : 0.0;

    s.hit_rate_calendar = (r > 0.0).count() / n;

    // Moments (population convention for shape statistics).
    const double mu = r.mean();
    const double m2 = (r - mu).square().mean();
    if (m2 > 0.0) {
        s.skewness = (r - mu).cube().mean() / std::pow(m2, 1.5);
        s.kurtosis = (r - mu).pow(4).mean() / (m2 * m2);
    }

    const double q05 = quantile(r, 0.05);
    s.var95 = std::max(0.0, -q05);
    const auto tail_mask = r <= q05;
    if (tail_mask.count() > 0) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < r.size(); ++i)
            if (r[i] <= q05) acc += r[i];
        s.cvar95 = std::max(0.0, -acc / static_cast<double>(tail_mask.count()));
    }

    // Active-day statistics.
    std::vector<double> active, gains, losses;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        if (std::abs(ledger.filled_weight[i]) > params.active_threshold) {
            active.push_back(r[i]);
            if (r[i] > 0.0) gains.push_back(r[i]);
            if (r[i] < 0.0) losses.push_back(r[i]);
        }
    }
    s.active_days = static_cast<long>(active.size());
    if (!active.empty()) {
        double sum = 0.0, wins = 0.0;
        for (double v : active) {
            sum += v;
            wins += v > 0.0 ? 1.0 : 0.0;
        }
        s.hit_rate_active = wins / static_cast<double>(active.size());
        s.ev_per_active_day_bps = 1e4 * sum / static_cast<double>(active.size());
    }
    if (!gains.empty()) {
        double sum = 0.0;
        for (double v : gains) sum += v;
        s.avg_gain_bps = 1e4 * sum / static_cast<double>(gains.size());
    }
    if (!losses.empty()) {
        double sum = 0.0;
        for (double v : losses) sum += v;
        s.avg_loss_bps = 1e4 * sum / static_cast<double>(losses.size());
    }
    if (!gains.empty() && !losses.empty()) s.payoff_ratio = s.avg_gain_bps / -s.avg_loss_bps;

    // Calendar-month compounding.
    std::map<std::pair<int, int>, double> months;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        const Date d = ledger.dates[static_cast<size_t>(i)];
        auto [it, inserted] = months.try_emplace({d.year(), d.month()}, 1.0);
        it->second *= 1.0 + r[i];
    }
    if (!months.empty()) {
        double up = 0.0;
        for (const auto& [key, growth] : months) up += growth > 1.0 ? 1.0 : 0.0;
        s.up_month_share = up / static_cast<double>(months.size());
    }

    s.entries = static_cast<long>(ledger.entries());
    s.mean_abs_weight = ledger.filled_weight.abs().mean();
    s.mean_abs_turnover = ledger.turnover.mean();
    return s;
}

TailMetrics tail_metrics(const Eigen::ArrayXd& daily_returns, const std::vector<Date>& dates) {
    if (daily_returns.size() < 20) throw TooShort("tail_metrics needs >= 20 observations");
    if (dates.size() != static_cast<size_t>(daily_returns.size()))
        throw Error("tail_metrics: date/return lengths differ");
    TailMetrics out;
    const double q05 = quantile(daily_returns, 0.05);
    out.var95 = std::max(0.0, -q05);
    double acc = 0.0;
    long count = 0;
    for (Eigen::Index i = 0; i < daily_returns.size(); ++i)
        if (daily_returns[i] <= q05) {
            acc += daily_returns[i];
            ++count;
        }
    out.cvar95 = count > 0 ? std::max(0.0, -acc / static_cast<double>(count)) : 0.0;

    std::map<std::pair<int, int>, double> months;
    for (Eigen::Index i = 0; i < daily_returns.size(); ++i) {
        const Date d = dates[static_cast<size_t>(i)];
        auto [it, inserted] = months.try_emplace({d.year(), d.month()}, 1.0);
        it->second *= 1.0 + daily_returns[i];
    }
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& [key, growth] : months) worst = std::min(worst, growth - 1.0);
    out.worst_month = months.empty() ? 0.0 : worst;
    return out;
}

RegressionResult capm_regression(const Eigen::ArrayXd& strat, const Eigen::ArrayXd& bench,
                                 int hac_lags, int trading_days) {
    if (strat.size() != bench.size()) throw Error("capm_regression: lengths differ");
    if (strat.size() < 30) throw TooShort("capm_regression needs >= 30 observations");
    if (hac_lags < 0) throw Error("hac_lags must be nonnegative");
    const auto n = strat.size();
    if (is_constant(bench)) throw DegenerateBenchmark("benchmark has zero variance");

    Eigen::MatrixXd X(n, 2);
    X.col(0).setOnes();
    X.col(1) = bench.matrix();
    const Eigen::Matrix2d xtx = X.transpose() * X;
    const Eigen::Matrix2d xtx_inv = xtx.inverse();
    const Eigen::Vector2d coef = xtx_inv * (X.transpose() * strat.matrix());
    const Eigen::ArrayXd resid = strat - (X * coef).array();

    // Newey-West: S = G_0 + sum_j w_j (G_j + G_j'), w_j = 1 - j/(q+1),
    // G_j = sum_t u_t u_{t-j}' with u_t = x_t e_t. Sandwich gives Var(coef).
    Eigen::MatrixXd scores(n, 2);
    scores.col(0) = resid.matrix();
    scores.col(1) = (bench * resid).matrix();
    Eigen::Matrix2d S = scores.transpose() * scores;
    for (int j = 1; j <= hac_lags && j < n; ++j) {
        const double w = 1.0 - static_cast<double>(j) / static_cast<double>(hac_lags + 1);
        const Eigen::Matrix2d gamma =
            scores.bottomRows(n - j).transpose() * scores.topRows(n - j);
        S += w * (gamma + gamma.transpose());
    }
    const Eigen::Matrix2d cov = xtx_inv * S * xtx_inv;

    RegressionResult out;
    out.alpha_daily = coef[0];
    out.beta = coef[1];
    out.alpha_annual = coef[0] * static_cast<double>(trading_days);
    out.hac_lags = hac_lags;
    auto t_stat = [](double est, double var) {
        if (var > 0.0) return est / std::sqrt(var);
        if (est == 0.0) return 0.0;
        return est > 0.0 ? std::numeric_limits<double>::infinity()
                         : -std::numeric_limits<double>::infinity();
    };
    out.t_alpha = t_stat(coef[0], cov(0, 0));
    out.t_beta = t_stat(coef[1], cov(1, 1));

    const double sst = (strat - strat.mean()).square().sum();
    const double sse = resid.square().sum();
    out.r_squared = sst > 0.0 ? 1.0 - sse / sst : 0.0;
    out.tracking_error = sample_stdev(resid) * std::sqrt(static_cast<double>(trading_days));
    out.information_ratio =
        out.tracking_error > 0.0 ? out.alpha_annual / out.tracking_error : 0.0;
    return out;
}

BootstrapResult block_bootstrap_sharpe(const Eigen::ArrayXd& returns, int B, int block_length,
                                       std::uint64_t seed, int trading_days) {
    if (B < 1 || block_length < 1) throw Error("B and block_length must be positive");
    if (returns.size() < 2 * block_length)
        throw TooShort("need at least 2 * block_length observations");
    const auto n = returns.size();

    BootstrapResult out;
    out.point_sharpe = sharpe_ratio(returns, trading_days);
    out.resamples = B;
    out.block_length = block_length;
    out.seed = seed;

    const double ann = std::sqrt(static_cast<double>(trading_days));
    std::vector<double> sharpes(static_cast<size_t>(B));
    Eigen::ArrayXd sample(n);
    for (int b = 0; b < B; ++b) {
        auto rng = derived_rng(seed, static_cast<std::uint64_t>(b));
        std::uniform_int_distribution<Eigen::Index> start(0, n - 1);
        Eigen::Index filled = 0;
        while (filled < n) {
            Eigen::Index src = start(rng);
            for (int j = 0; j < block_length && filled < n; ++j) {
                sample[filled++] = returns[src];
                src = (src + 1) % n;  // circular wrap
            }
        }
        const double sd = sample_stdev(sample);
        sharpes[static_cast<size_t>(b)] =
            sd > 0.0 ? sample.mean() * static_cast<double>(trading_days) / (sd * ann) : 0.0;
    }
    Eigen::Map<Eigen::ArrayXd> dist(sharpes.data(), static_cast<Eigen::Index>(sharpes.size()));
    out.ci_low = quantile(dist, 0.025);
    out.ci_high = quantile(dist, 0.975);
    return out;
}

SpaResult spa_test(const Eigen::MatrixXd& candidates, const Eigen::ArrayXd& benchmark, int B,
                   int block_length, std::uint64_t seed) {
    const Eigen::Index num_configs = candidates.rows();
    const Eigen::Index n = candidates.cols();
    if (num_configs < 2) throw Error("spa_test needs >= 2 candidate configs");
    if (n != benchmark.size()) throw Error("spa_test: day counts differ");
    if (B < 1 || block_length < 1) throw Error("B and block_length must be positive");

    // Performance differentials d_{k,t}; positive means the candidate beats
    // the benchmark that day.
    Eigen::MatrixXd d = candidates;
    d.rowwise() -= benchmark.matrix().transpose();
    const Eigen::VectorXd d_bar = d.rowwise().mean();

    // Exactly constant differentials cannot be studentized. A constant zero
    // carries no evidence and drops out; a constant nonzero edge is
    // degenerate by construction.
    std::vector<bool> skip(static_cast<size_t>(num_configs), false);
    for (Eigen::Index k = 0; k < num_configs; ++k) {
        if ((d.row(k).array() == d(k, 0)).all()) {
            if (d(k, 0) != 0.0)
                throw DegenerateLoss("zero-variance loss differential with nonzero mean");
            skip[static_cast<size_t>(k)] = true;
        }
    }

    // Stationary bootstrap (geometric blocks, mean = block_length) of the
    // per-candidate means; iteration streams derive from the master seed.
    const double restart_prob = 1.0 / static_cast<double>(block_length);
    Eigen::MatrixXd boot_means(B, num_configs);
    std::vector<Eigen::Index> index_path(static_cast<size_t>(n));
    for (int b = 0; b < B; ++b) {
        auto rng = derived_rng(seed, static_cast<std::uint64_t>(b));
        std::uniform_int_distribution<Eigen::Index> uniform_idx(0, n - 1);
        std::uniform_real_distribution<double> uniform01(0.0, 1.0);
        Eigen::Index src = uniform_idx(rng);
        for (Eigen::Index t = 0; t < n; ++t) {
            index_path[static_cast<size_t>(t)] = src;
            src = uniform01(rng) < restart_prob ? uniform_idx(rng) : (src + 1) % n;
        }
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(num_configs);
        for (Eigen::Index t = 0; t < n; ++t) acc += d.col(index_path[static_cast<size_t>(t)]);
        boot_means.row(b) = acc.transpose() / static_cast<double>(n);
    }

    // Studentization scale: omega_k^2 = n * Var(d_bar*_k) in closed form (the
    // B -> infinity limit of the stationary bootstrap),
    //   omega^2 = gamma_0 + 2 sum_j kappa(j) gamma_j,
    //   kappa(j) = ((n-j)/n)(1-q)^j + (j/n)(1-q)^{n-j},  q = 1/block_length.
    const double root_n = std::sqrt(static_cast<double>(n));
    const double q = restart_prob;
    Eigen::Index max_lag = n - 1;
    if (q >= 1.0) {
        max_lag = 0;
    } else {
        const double cutoff = std::log(1e-14) / std::log1p(-q);
        max_lag = std::min<Eigen::Index>(max_lag, static_cast<Eigen::Index>(cutoff) + 1);
    }
    Eigen::VectorXd omega(num_configs);
    for (Eigen::Index k = 0; k < num_configs; ++k) {
        const Eigen::ArrayXd centered = d.row(k).transpose().array() - d_bar[k];
        double acc = centered.square().sum() / static_cast<double>(n);
        for (Eigen::Index j = 1; j <= max_lag; ++j) {
            const double gamma_j =
                (centered.tail(n - j) * centered.head(n - j)).sum() / static_cast<double>(n);
            const double decay = std::pow(1.0 - q, static_cast<double>(j));
            const double wrap = std::pow(1.0 - q, static_cast<double>(n - j));
            const double kappa = (static_cast<double>(n - j) / n) * decay +
                                 (static_cast<double>(j) / n) * wrap;
            acc += 2.0 * kappa * gamma_j;
        }
        omega[k] = std::sqrt(std::max(acc, 0.0));
    }

    double t_stat = 0.0;
    for (Eigen::Index k = 0; k < num_configs; ++k) {
        if (skip[static_cast<size_t>(k)]) continue;
        if (!(omega[k] > 0.0)) {
            if (d_bar[k] == 0.0) continue;
            throw DegenerateLoss("zero-variance loss differential with nonzero mean");
        }
        t_stat = std::max(t_stat, root_n * d_bar[k] / omega[k]);
    }

    // Hansen's consistent recentering: candidates whose studentized mean sits
    // below -sqrt(2 log log n) keep their (negative) location instead of
    // being recentered to zero.
    const double lln = std::sqrt(2.0 * std::log(std::log(static_cast<double>(std::max<Eigen::Index>(n, 3)))));
    Eigen::VectorXd center(num_configs);
    for (Eigen::Index k = 0; k < num_configs; ++k) {
        if (skip[static_cast<size_t>(k)] || !(omega[k] > 0.0)) {
            center[k] = 0.0;
            continue;
        }
        const double studentized = root_n * d_bar[k] / omega[k];
        center[k] = studentized >= -lln ? d_bar[k] : 0.0;
    }

    int exceed = 0;
    for (int b = 0; b < B; ++b) {
        double t_boot = 0.0;
        for (Eigen::Index k = 0; k < num_configs; ++k) {
            if (skip[static_cast<size_t>(k)] || !(omega[k] > 0.0)) continue;
            t_boot = std::max(t_boot, root_n * (boot_means(b, k) - center[k]) / omega[k]);
        }
        if (t_boot >= t_stat) ++exceed;
    }

    SpaResult out;
    out.p_value = static_cast<double>(exceed) / static_cast<double>(B);
    out.num_configs = static_cast<int>(num_configs);
    out.resamples = B;
    out.block_length = block_length;
    out.seed = seed;
    return out;
}

CapacityResult capacity_curve(double mu_u, double sigma_u, double k, double gamma, double n,
                              const Eigen::ArrayXd& grid) {
    if (!(sigma_u > 0.0)) throw DegenerateTraining("capacity_curve requires sigma_u > 0");
    CapacityResult out;
    out.mu_u = mu_u;
    out.sigma_u = sigma_u;
    out.k = k;
    out.gamma = gamma;
    out.n = n;
    out.grid = grid;
    out.g_values.resize(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        if (grid[i] < 0.0) throw Error("capacity grid must be nonnegative");
        out.g_values[i] = kelly_growth(grid[i], mu_u, sigma_u, k, gamma, n);
    }

    const double edge = mu_u - n * k;
    if (edge <= 0.0) {
        out.no_positive_branch = true;
        return out;
    }

    KellyParams kp;
    kp.k = k;
    kp.gamma = gamma;
    kp.n = n;
    TrainMoments moments;
    moments.mu = mu_u;
    moments.sigma = sigma_u;
    out.l_star = kelly_fraction(moments, kp);

    // Zero-growth root: g is strictly decreasing past l_star, so expand an
    // upper bracket then bisect to machine resolution.
    auto g = [&](double L) { return kelly_growth(L, mu_u, sigma_u, k, gamma, n); };
    double lo = out.l_star;
    double hi = std::max(out.l_star * 2.0, 1e-12);
    while (g(hi) > 0.0) hi *= 2.0;
    for (int iter = 0; iter < 200 && (hi - lo) > 1e-17 * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    out.l_max = 0.5 * (lo + hi);
    return out;
}

double aum_mapping(double l_max, double adv_dollars, double mean_abs_turnover) {
    if (!(adv_dollars > 0.0) || !(mean_abs_turnover > 0.0))
        throw Error("aum_mapping requires positive ADV and turnover");
    return l_max * adv_dollars / mean_abs_turnover;
}

ScaledReport vol_scaling(const PerfSummary& summary, const RegressionResult& regression,
                         double target_vol) {
    if (!(summary.ann_vol > 0.0)) throw ZeroVol("vol_scaling requires ann_vol > 0");
    ScaledReport out;
    out.target_vol = target_vol;
    out.c = target_vol / summary.ann_vol;
    out.scaled_return = summary.sharpe * target_vol;
    out.scaled_alpha = out.c * regression.alpha_annual;
    out.sharpe = summary.sharpe;
    out.information_ratio = regression.information_ratio;
    return out;
}

namespace {

Ledger filter_ledger(const Ledger& ledger, const std::vector<Eigen::Index>& idx) {
    Ledger out;
    const auto m = static_cast<Eigen::Index>(idx.size());
    out.target_weight.resize(m);
    out.filled_weight.resize(m);
    out.turnover.resize(m);
    out.gross_return.resize(m);
    out.linear_cost.resize(m);
    out.impact_cost.resize(m);
    out.net_return.resize(m);
    out.entry_price.resize(m);
    out.age.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::Index i = idx[static_cast<size_t>(j)];
        out.dates.push_back(ledger.dates[static_cast<size_t>(i)]);
        out.target_weight[j] = ledger.target_weight[i];
        out.filled_weight[j] = ledger.filled_weight[i];
        out.turnover[j] = ledger.turnover[i];
        out.gross_return[j] = ledger.gross_return[i];
        out.linear_cost[j] = ledger.linear_cost[i];
        out.impact_cost[j] = ledger.impact_cost[i];
        out.net_return[j] = ledger.net_return[i];
        out.entry_price[j] = ledger.entry_price[i];
        out.age[j] = ledger.age[i];
        out.status.push_back(ledger.status[static_cast<size_t>(i)]);
        out.regime.push_back(ledger.regime[static_cast<size_t>(i)]);
        out.exit_reason.push_back(ledger.exit_reason[static_cast<size_t>(i)]);
        out.entered.push_back(ledger.entered[static_cast<size_t>(i)]);
    }
    return out;
}

AttributionRow summarize_slice(std::string label, const Ledger& slice,
                               const AnalyticsParams& params) {
    AttributionRow row;
    row.label = std::move(label);
    row.days = static_cast<long>(slice.size());
    if (slice.size() == 0) {
        row.degenerate = true;
        return row;
    }
    try {
        row.summary = perf_summary(slice, params);
    } catch (const ZeroVol&) {
        row.degenerate = true;  // flat slice; counts stay, ratios zeroed
        row.summary.days = static_cast<long>(slice.size());
    }
    return row;
}

}  // namespace

Attribution attribution(const Ledger& ledger, const AnalyticsParams& params,
                        const std::vector<std::pair<std::string, Date>>& subperiod_starts) {
    Attribution out;
    for (RegimeLabel label : {RegimeLabel::bull, RegimeLabel::chop, RegimeLabel::bear}) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < ledger.size(); ++i)
            if (ledger.regime[static_cast<size_t>(i)] == label) idx.push_back(i);
        out.regimes.push_back(summarize_slice(to_string(label), filter_ledger(ledger, idx), params));
    }
    for (const auto& [label, start] : subperiod_starts) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < ledger.size(); ++i)
            if (ledger.dates[static_cast<size_t>(i)] >= start) idx.push_back(i);
        out.subperiods.push_back(summarize_slice(label, filter_ledger(ledger, idx), params));
    }
    return out;
}

}  // namespace ftf
