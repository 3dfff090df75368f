#include "ftf/report.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ftf/errors.hpp"
#include "ftf/hashing.hpp"

namespace ftf {

using nlohmann::json;

json to_json(const PerfSummary& s) {
    return json{{"days", s.days},
                {"ann_return", s.ann_return},
                {"ann_vol", s.ann_vol},
                {"sharpe", s.sharpe},
                {"cagr", s.cagr},
                {"max_drawdown", s.max_drawdown},
                {"calmar", s.calmar},
                {"hit_rate_calendar", s.hit_rate_calendar},
                {"hit_rate_active", s.hit_rate_active},
                {"up_month_share", s.up_month_share},
                {"skewness", s.skewness},
                {"kurtosis", s.kurtosis},
                {"var95", s.var95},
                {"cvar95", s.cvar95},
                {"avg_gain_bps", s.avg_gain_bps},
                {"avg_loss_bps", s.avg_loss_bps},
                {"payoff_ratio", s.payoff_ratio},
                {"ev_per_active_day_bps", s.ev_per_active_day_bps},
                {"entries", s.entries},
                {"active_days", s.active_days},
                {"mean_abs_weight", s.mean_abs_weight},
                {"mean_abs_turnover", s.mean_abs_turnover}};
}

json to_json(const RegressionResult& r) {
    return json{{"alpha_daily", r.alpha_daily},   {"alpha_annual", r.alpha_annual},
                {"beta", r.beta},                 {"t_alpha", r.t_alpha},
                {"t_beta", r.t_beta},             {"r_squared", r.r_squared},
                {"tracking_error", r.tracking_error},
                {"information_ratio", r.information_ratio},
                {"hac_lags", r.hac_lags}};
}

json to_json(const BootstrapResult& b) {
    return json{{"point_sharpe", b.point_sharpe}, {"ci_low", b.ci_low},
                {"ci_high", b.ci_high},           {"resamples", b.resamples},
                {"block_length", b.block_length}, {"seed", b.seed}};
}

json to_json(const TailMetrics& t) {
    return json{{"var95", t.var95}, {"cvar95", t.cvar95}, {"worst_month", t.worst_month}};
}

json to_json(const ScaledReport& s) {
    return json{{"c", s.c},
                {"target_vol", s.target_vol},
                {"scaled_return", s.scaled_return},
                {"scaled_alpha", s.scaled_alpha},
                {"sharpe", s.sharpe},
                {"information_ratio", s.information_ratio}};
}

json to_json(const CapacityResult& c, double reference_lmax) {
    json curve = json::array();
    for (Eigen::Index i = 0; i < c.grid.size(); ++i)
        curve.push_back({{"L", c.grid[i]}, {"g", c.g_values[i]}});
    json out{{"mu_u", c.mu_u},
             {"sigma_u", c.sigma_u},
             {"k", c.k},
             {"gamma", c.gamma},
             {"n", c.n},
             {"l_star", c.l_star},
             {"l_max", c.l_max},
             {"no_positive_branch", c.no_positive_branch},
             {"adv_dollars", c.adv_dollars},
             {"mean_abs_turnover", c.mean_abs_turnover},
             {"aum_max", c.aum_max},
             {"reference_lmax", reference_lmax},
             {"curve", curve}};
    // Reference comparisons are reported, never forced into agreement.
    if (reference_lmax > 0.0 && c.l_max > 0.0) {
        const double ratio = c.l_max / reference_lmax;
        out["reference_note"] =
            ratio < 0.9 || ratio > 1.1
                ? "computed zero-growth root diverges from the configured reference value"
                : "computed zero-growth root is close to the configured reference value";
    }
    return out;
}

json to_json(const Attribution& a) {
    auto rows = [](const std::vector<AttributionRow>& rows_in) {
        json arr = json::array();
        for (const auto& row : rows_in) {
            json r{{"label", row.label}, {"days", row.days}, {"degenerate", row.degenerate}};
            r["summary"] = row.degenerate ? json(nullptr) : to_json(row.summary);
            arr.push_back(r);
        }
        return arr;
    };
    return json{{"regimes", rows(a.regimes)}, {"subperiods", rows(a.subperiods)}};
}

json to_json(const FrozenParams& f) {
    return json{{"lambda_ema", f.lambda_ema},
                {"mu_train", f.mu_train},
                {"sigma_train", f.sigma_train},
                {"omega", f.omega},
                {"activation_threshold", f.activation_threshold},
                {"hard_stop_mult", f.hard_stop_mult},
                {"trail_stop_mult", f.trail_stop_mult},
                {"timeout_days", f.timeout_days},
                {"lambda_kelly", f.lambda_kelly},
                {"mu", f.moments.mu},
                {"sigma", f.moments.sigma},
                {"mu_u", f.moments.mu_u},
                {"sigma_u", f.moments.sigma_u},
                {"f_star", f.f_star},
                {"theta", f.theta},
                {"seed_variance", f.seed_variance},
                {"hash", hex64(f.hash())}};
}

void write_report(const ReportBundle& bundle, double reference_lmax, const std::string& path) {
    json j{{"summary", to_json(bundle.summary)},
           {"regression", to_json(bundle.regression)},
           {"bootstrap", to_json(bundle.bootstrap)},
           {"tails", to_json(bundle.tails)},
           {"scaled", to_json(bundle.scaled)},
           {"capacity", to_json(bundle.capacity, reference_lmax)},
           {"attribution", to_json(bundle.attribution)},
           {"num_windows", bundle.num_windows},
           {"overlapping", bundle.overlapping}};
    std::ofstream file(path);
    if (!file.is_open()) throw Error("cannot write '" + path + "'");
    file << j.dump(2) << "\n";
}

void write_equity_csv(const Ledger& ledger, const std::string& path) {
    std::ofstream file(path);
    if (!file.is_open()) throw Error("cannot write '" + path + "'");
    file << "date,net_return,equity\n";
    const Eigen::ArrayXd equity = equity_curve(ledger.net_return);
    char buf[128];
    for (Eigen::Index i = 0; i < ledger.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g\n",
                      ledger.dates[static_cast<size_t>(i)].to_iso().c_str(), ledger.net_return[i],
                      equity[i]);
        file << buf;
    }
}

void write_manifest(const RunConfig& config, const BacktestResult& result,
                    const std::string& data_checksum, const std::string& path) {
    json windows = json::array();
    for (size_t i = 0; i < result.windows.size(); ++i) {
        const Window& w = result.windows[i];
        json entry{{"train_begin", w.train_begin.to_iso()},
                   {"test_begin", w.test_begin.to_iso()},
                   {"test_end", w.test_end.to_iso()}};
        if (i < result.frozen.size()) entry["frozen"] = to_json(result.frozen[i]);
        windows.push_back(entry);
    }
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    json j{{"config_hash", hex64(config.hash())},
           {"data_checksum", data_checksum},
           {"windows", windows},
           {"rejected_windows", result.rejected_windows},
           {"overlapping", result.overlapping},
           {"generated_unix_ms",
            std::chrono::duration_cast<std::chrono::milliseconds>(now).count()}};
    std::ofstream file(path);
    if (!file.is_open()) throw Error("cannot write '" + path + "'");
    file << j.dump(2) << "\n";
}

std::string file_checksum(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file.is_open()) throw DataError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << file.rdbuf();
    return hex64(fnv1a64(ss.str()));
}

}  // namespace ftf
