#include "ftf/config.hpp"

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ftf/errors.hpp"
#include "ftf/hashing.hpp"

extern char** environ;

namespace ftf {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::string& section,
                  std::initializer_list<const char*> known) {
    if (!j.is_object()) throw ConfigError(section, "expected an object");
    for (const auto& [key, value] : j.items()) {
        bool found = false;
        for (const char* k : known)
            if (key == k) {
                found = true;
                break;
            }
        if (!found) throw ConfigError(section + "." + key, "unknown key");
    }
}

template <typename T>
T get_or(const json& j, const std::string& section, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(section + "." + key, e.what());
    }
}

Date get_date(const json& j, const std::string& section, const char* key, Date fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return Date::parse_iso(j.at(key).get<std::string>());
    } catch (const std::exception& e) {
        throw ConfigError(section + "." + key, e.what());
    }
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// FTF_SECTION__KEY=value -> root["section"]["key"] = parsed value.
void apply_env_overrides(json& root) {
    for (char** env = environ; env && *env; ++env) {
        const std::string entry(*env);
        if (entry.rfind("FTF_", 0) != 0) continue;
        const size_t eq = entry.find('=');
        if (eq == std::string::npos) continue;
        const std::string path = entry.substr(4, eq - 4);
        const std::string value = entry.substr(eq + 1);

        std::vector<std::string> keys;
        size_t pos = 0;
        while (pos <= path.size()) {
            const size_t sep = path.find("__", pos);
            if (sep == std::string::npos) {
                keys.push_back(lower(path.substr(pos)));
                break;
            }
            keys.push_back(lower(path.substr(pos, sep - pos)));
            pos = sep + 2;
        }
        if (keys.empty() || keys.front().empty()) continue;

        json* node = &root;
        for (size_t i = 0; i + 1 < keys.size(); ++i) node = &(*node)[keys[i]];
        json parsed = json::parse(value, nullptr, false);
        (*node)[keys.back()] = parsed.is_discarded() ? json(value) : parsed;
    }
}

}  // namespace

RunConfig default_config() { return RunConfig{}; }

RunConfig RunConfig::from_file(const std::string& path, bool apply_env) {
    std::ifstream file(path);
    if (!file.is_open()) throw ConfigError("config", "cannot open '" + path + "'");
    json j;
    try {
        file >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config", std::string("parse error: ") + e.what());
    }
    if (apply_env) apply_env_overrides(j);
    return from_json(j);
}

RunConfig RunConfig::from_json(const json& j) {
    require_keys(j, "config",
                 {"data", "window", "signal", "vol", "kelly", "exits", "costs", "latency",
                  "analytics", "spa", "output"});
    RunConfig cfg;

    if (j.contains("data")) {
        const json& d = j.at("data");
        require_keys(d, "data", {"path", "columns", "holidays"});
        cfg.data.path = get_or<std::string>(d, "data", "path", "");
        if (d.contains("columns")) {
            const json& c = d.at("columns");
            require_keys(c, "data.columns", {"date", "open", "high", "low", "close"});
            cfg.data.schema.date = get_or<std::string>(c, "data.columns", "date", "date");
            cfg.data.schema.open = get_or<std::string>(c, "data.columns", "open", "open");
            cfg.data.schema.high = get_or<std::string>(c, "data.columns", "high", "high");
            cfg.data.schema.low = get_or<std::string>(c, "data.columns", "low", "low");
            cfg.data.schema.close = get_or<std::string>(c, "data.columns", "close", "close");
        }
        if (d.contains("holidays")) {
            try {
                for (const auto& h : d.at("holidays"))
                    cfg.data.holidays.push_back(Date::parse_iso(h.get<std::string>()));
            } catch (const std::exception& e) {
                throw ConfigError("data.holidays", e.what());
            }
        }
    }

    cfg.window.first_test_start = Date::from_ymd(2015, 1, 1);
    if (j.contains("window")) {
        const json& w = j.at("window");
        require_keys(w, "window",
                     {"train_years", "test_months", "advance_months", "first_test_start"});
        cfg.window.train_years = get_or<int>(w, "window", "train_years", 10);
        cfg.window.test_months = get_or<int>(w, "window", "test_months", 6);
        cfg.window.advance_months = get_or<int>(w, "window", "advance_months", 6);
        cfg.window.first_test_start =
            get_date(w, "window", "first_test_start", cfg.window.first_test_start);
    }

    if (j.contains("signal")) {
        const json& s = j.at("signal");
        require_keys(s, "signal",
                     {"lambda_ema", "select_lambda", "lambda_grid", "momentum_window",
                      "blend_weight", "select_omega", "omega_grid", "clip_bound",
                      "activation_threshold"});
        auto& sig = cfg.pipeline.signal;
        sig.lambda_ema = get_or<double>(s, "signal", "lambda_ema", sig.lambda_ema);
        sig.momentum_window = get_or<int>(s, "signal", "momentum_window", sig.momentum_window);
        sig.blend_weight = get_or<double>(s, "signal", "blend_weight", sig.blend_weight);
        sig.clip_bound = get_or<double>(s, "signal", "clip_bound", sig.clip_bound);
        sig.activation_threshold =
            get_or<double>(s, "signal", "activation_threshold", sig.activation_threshold);
        cfg.pipeline.select_lambda =
            get_or<bool>(s, "signal", "select_lambda", cfg.pipeline.select_lambda);
        cfg.pipeline.select_omega =
            get_or<bool>(s, "signal", "select_omega", cfg.pipeline.select_omega);
        cfg.pipeline.lambda_grid =
            get_or<std::vector<double>>(s, "signal", "lambda_grid", cfg.pipeline.lambda_grid);
        cfg.pipeline.omega_grid =
            get_or<std::vector<double>>(s, "signal", "omega_grid", cfg.pipeline.omega_grid);
    }

    if (j.contains("vol")) {
        const json& v = j.at("vol");
        require_keys(v, "vol", {"theta", "target_vol_annual", "trading_days", "max_leverage"});
        auto& vol = cfg.pipeline.vol;
        vol.theta = get_or<double>(v, "vol", "theta", vol.theta);
        vol.target_vol_annual =
            get_or<double>(v, "vol", "target_vol_annual", vol.target_vol_annual);
        vol.trading_days = get_or<int>(v, "vol", "trading_days", vol.trading_days);
        vol.max_leverage = get_or<double>(v, "vol", "max_leverage", vol.max_leverage);
    }

    if (j.contains("kelly")) {
        const json& k = j.at("kelly");
        require_keys(k, "kelly",
                     {"k", "gamma", "n", "lambda_kelly", "baseline_fraction", "f_star_epsilon",
                      "baseline_on_full_budget"});
        auto& kp = cfg.pipeline.kelly;
        kp.k = get_or<double>(k, "kelly", "k", kp.k);
        kp.gamma = get_or<double>(k, "kelly", "gamma", kp.gamma);
        kp.n = get_or<double>(k, "kelly", "n", kp.n);
        kp.lambda_kelly = get_or<double>(k, "kelly", "lambda_kelly", kp.lambda_kelly);
        kp.baseline_fraction =
            get_or<double>(k, "kelly", "baseline_fraction", kp.baseline_fraction);
        kp.f_star_epsilon = get_or<double>(k, "kelly", "f_star_epsilon", kp.f_star_epsilon);
        kp.baseline_on_full_budget =
            get_or<bool>(k, "kelly", "baseline_on_full_budget", kp.baseline_on_full_budget);
    }

    if (j.contains("exits")) {
        const json& e = j.at("exits");
        require_keys(e, "exits",
                     {"atr_window", "hard_stop_mult", "trail_stop_mult", "timeout_days",
                      "derisk_threshold", "derisk_mode", "stop_basis"});
        auto& ex = cfg.pipeline.exits;
        ex.atr_window = get_or<int>(e, "exits", "atr_window", ex.atr_window);
        ex.hard_stop_mult = get_or<double>(e, "exits", "hard_stop_mult", ex.hard_stop_mult);
        ex.trail_stop_mult = get_or<double>(e, "exits", "trail_stop_mult", ex.trail_stop_mult);
        ex.timeout_days = get_or<int>(e, "exits", "timeout_days", ex.timeout_days);
        ex.derisk_threshold =
            get_or<double>(e, "exits", "derisk_threshold", ex.derisk_threshold);
        const std::string mode = get_or<std::string>(e, "exits", "derisk_mode", "halve");
        if (mode == "halve")
            ex.derisk_mode = DeriskMode::halve;
        else if (mode == "close")
            ex.derisk_mode = DeriskMode::close;
        else
            throw ConfigError("exits.derisk_mode", "must be 'halve' or 'close'");
        const std::string basis = get_or<std::string>(e, "exits", "stop_basis", "close_only");
        if (basis == "close_only")
            ex.stop_basis = StopBasis::close_only;
        else if (basis == "intraday_touch")
            ex.stop_basis = StopBasis::intraday_touch;
        else
            throw ConfigError("exits.stop_basis", "must be 'close_only' or 'intraday_touch'");
    }

    if (j.contains("costs")) {
        const json& c = j.at("costs");
        require_keys(c, "costs", {"cost_multiplier", "impact_multiplier"});
        cfg.pipeline.costs.k = cfg.pipeline.kelly.k;
        cfg.pipeline.costs.gamma = cfg.pipeline.kelly.gamma;
        cfg.pipeline.costs.cost_multiplier =
            get_or<double>(c, "costs", "cost_multiplier", 1.0);
        cfg.pipeline.costs.impact_multiplier =
            get_or<double>(c, "costs", "impact_multiplier", 1.0);
    } else {
        cfg.pipeline.costs.k = cfg.pipeline.kelly.k;
        cfg.pipeline.costs.gamma = cfg.pipeline.kelly.gamma;
    }

    if (j.contains("latency")) {
        const json& l = j.at("latency");
        require_keys(l, "latency", {"delay_days"});
        cfg.latency.delay_days = get_or<int>(l, "latency", "delay_days", 0);
    }

    if (j.contains("analytics")) {
        const json& a = j.at("analytics");
        require_keys(a, "analytics",
                     {"bootstrap_b", "bootstrap_block_length", "spa_b", "spa_block_length",
                      "hac_lags", "seed", "active_threshold", "target_vol", "subperiods",
                      "capacity"});
        auto& an = cfg.analytics;
        an.bootstrap_B = get_or<int>(a, "analytics", "bootstrap_b", an.bootstrap_B);
        an.bootstrap_block_length =
            get_or<int>(a, "analytics", "bootstrap_block_length", an.bootstrap_block_length);
        an.spa_B = get_or<int>(a, "analytics", "spa_b", an.spa_B);
        an.spa_block_length =
            get_or<int>(a, "analytics", "spa_block_length", an.spa_block_length);
        an.hac_lags = get_or<int>(a, "analytics", "hac_lags", an.hac_lags);
        an.seed = get_or<std::uint64_t>(a, "analytics", "seed", an.seed);
        an.active_threshold =
            get_or<double>(a, "analytics", "active_threshold", an.active_threshold);
        an.target_vol = get_or<double>(a, "analytics", "target_vol", an.target_vol);
        if (a.contains("subperiods")) {
            try {
                for (const auto& sp : a.at("subperiods"))
                    an.subperiods.emplace_back(sp.at("label").get<std::string>(),
                                               Date::parse_iso(sp.at("start").get<std::string>()));
            } catch (const std::exception& e) {
                throw ConfigError("analytics.subperiods", e.what());
            }
        }
        if (a.contains("capacity")) {
            const json& c = a.at("capacity");
            require_keys(c, "analytics.capacity",
                         {"adv_dollars", "reference_lmax", "grid_points"});
            an.capacity.adv_dollars =
                get_or<double>(c, "analytics.capacity", "adv_dollars", an.capacity.adv_dollars);
            an.capacity.reference_lmax = get_or<double>(c, "analytics.capacity", "reference_lmax",
                                                        an.capacity.reference_lmax);
            an.capacity.grid_points =
                get_or<int>(c, "analytics.capacity", "grid_points", an.capacity.grid_points);
        }
    }

    if (j.contains("spa")) {
        const json& s = j.at("spa");
        require_keys(s, "spa", {"lambda_grid", "momentum_windows", "activation_thresholds"});
        cfg.spa_grid.lambda_grid =
            get_or<std::vector<double>>(s, "spa", "lambda_grid", cfg.spa_grid.lambda_grid);
        cfg.spa_grid.momentum_windows = get_or<std::vector<int>>(s, "spa", "momentum_windows",
                                                                 cfg.spa_grid.momentum_windows);
        cfg.spa_grid.activation_thresholds = get_or<std::vector<double>>(
            s, "spa", "activation_thresholds", cfg.spa_grid.activation_thresholds);
    }

    if (j.contains("output")) {
        const json& o = j.at("output");
        require_keys(o, "output", {"dir"});
        cfg.output_dir = get_or<std::string>(o, "output", "dir", cfg.output_dir);
    }

    cfg.validate();
    return cfg;
}

json RunConfig::to_json() const {
    json j;
    j["data"]["path"] = data.path;
    j["data"]["columns"] = {{"date", data.schema.date},
                            {"open", data.schema.open},
                            {"high", data.schema.high},
                            {"low", data.schema.low},
                            {"close", data.schema.close}};
    json holidays = json::array();
    for (Date h : data.holidays) holidays.push_back(h.to_iso());
    j["data"]["holidays"] = holidays;

    j["window"] = {{"train_years", window.train_years},
                   {"test_months", window.test_months},
                   {"advance_months", window.advance_months},
                   {"first_test_start", window.first_test_start.to_iso()}};

    const auto& sig = pipeline.signal;
    j["signal"] = {{"lambda_ema", sig.lambda_ema},
                   {"select_lambda", pipeline.select_lambda},
                   {"lambda_grid", pipeline.lambda_grid},
                   {"momentum_window", sig.momentum_window},
                   {"blend_weight", sig.blend_weight},
                   {"select_omega", pipeline.select_omega},
                   {"omega_grid", pipeline.omega_grid},
                   {"clip_bound", sig.clip_bound},
                   {"activation_threshold", sig.activation_threshold}};

    j["vol"] = {{"theta", pipeline.vol.theta},
                {"target_vol_annual", pipeline.vol.target_vol_annual},
                {"trading_days", pipeline.vol.trading_days},
                {"max_leverage", pipeline.vol.max_leverage}};

    j["kelly"] = {{"k", pipeline.kelly.k},
                  {"gamma", pipeline.kelly.gamma},
                  {"n", pipeline.kelly.n},
                  {"lambda_kelly", pipeline.kelly.lambda_kelly},
                  {"baseline_fraction", pipeline.kelly.baseline_fraction},
                  {"f_star_epsilon", pipeline.kelly.f_star_epsilon},
                  {"baseline_on_full_budget", pipeline.kelly.baseline_on_full_budget}};

    j["exits"] = {{"atr_window", pipeline.exits.atr_window},
                  {"hard_stop_mult", pipeline.exits.hard_stop_mult},
                  {"trail_stop_mult", pipeline.exits.trail_stop_mult},
                  {"timeout_days", pipeline.exits.timeout_days},
                  {"derisk_threshold", pipeline.exits.derisk_threshold},
                  {"derisk_mode",
                   pipeline.exits.derisk_mode == DeriskMode::halve ? "halve" : "close"},
                  {"stop_basis", pipeline.exits.stop_basis == StopBasis::close_only
                                     ? "close_only"
                                     : "intraday_touch"}};

    j["costs"] = {{"cost_multiplier", pipeline.costs.cost_multiplier},
                  {"impact_multiplier", pipeline.costs.impact_multiplier}};
    j["latency"] = {{"delay_days", latency.delay_days}};

    json subperiods = json::array();
    for (const auto& [label, start] : analytics.subperiods)
        subperiods.push_back({{"label", label}, {"start", start.to_iso()}});
    j["analytics"] = {{"bootstrap_b", analytics.bootstrap_B},
                      {"bootstrap_block_length", analytics.bootstrap_block_length},
                      {"spa_b", analytics.spa_B},
                      {"spa_block_length", analytics.spa_block_length},
                      {"hac_lags", analytics.hac_lags},
                      {"seed", analytics.seed},
                      {"active_threshold", analytics.active_threshold},
                      {"target_vol", analytics.target_vol},
                      {"subperiods", subperiods},
                      {"capacity",
                       {{"adv_dollars", analytics.capacity.adv_dollars},
                        {"reference_lmax", analytics.capacity.reference_lmax},
                        {"grid_points", analytics.capacity.grid_points}}}};

    j["spa"] = {{"lambda_grid", spa_grid.lambda_grid},
                {"momentum_windows", spa_grid.momentum_windows},
                {"activation_thresholds", spa_grid.activation_thresholds}};
    j["output"] = {{"dir", output_dir}};
    return j;
}

std::uint64_t RunConfig::hash() const {
    // Fingerprint the experiment, not its artifact location.
    json j = to_json();
    j.erase("output");
    return fnv1a64(j.dump());
}

void RunConfig::validate() const {
    auto wrap = [](const char* section, auto&& fn) {
        try {
            fn();
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(section, e.what());
        }
    };
    wrap("signal", [&] { pipeline.signal.validate(); });
    wrap("vol", [&] { pipeline.vol.validate(); });
    wrap("kelly", [&] { pipeline.kelly.validate(); });
    wrap("exits", [&] { pipeline.exits.validate(); });
    wrap("costs", [&] { pipeline.costs.validate(); });
    wrap("latency", [&] { latency.validate(); });
    wrap("window", [&] { window.validate(); });
    if (analytics.bootstrap_B < 1) throw ConfigError("analytics.bootstrap_b", "must be >= 1");
    if (analytics.bootstrap_block_length < 1)
        throw ConfigError("analytics.bootstrap_block_length", "must be >= 1");
    if (analytics.spa_B < 1) throw ConfigError("analytics.spa_b", "must be >= 1");
    if (analytics.spa_block_length < 1)
        throw ConfigError("analytics.spa_block_length", "must be >= 1");
    if (analytics.hac_lags < 0) throw ConfigError("analytics.hac_lags", "must be >= 0");
    if (!(analytics.active_threshold >= 0.0))
        throw ConfigError("analytics.active_threshold", "must be >= 0");
    if (!(analytics.target_vol > 0.0)) throw ConfigError("analytics.target_vol", "must be > 0");
    if (!(analytics.capacity.adv_dollars > 0.0))
        throw ConfigError("analytics.capacity.adv_dollars", "must be > 0");
    if (analytics.capacity.grid_points < 2)
        throw ConfigError("analytics.capacity.grid_points", "must be >= 2");
    for (double lambda : pipeline.lambda_grid)
        if (!(lambda > 0.0) || !(lambda < 1.0))
            throw ConfigError("signal.lambda_grid", "entries must lie in (0,1)");
    for (double omega : pipeline.omega_grid)
        if (omega < 0.0 || omega > 1.0)
            throw ConfigError("signal.omega_grid", "entries must lie in [0,1]");
}

AnalyticsParams RunConfig::analytics_params() const {
    AnalyticsParams p;
    p.trading_days = pipeline.vol.trading_days;
    p.active_threshold = analytics.active_threshold;
    return p;
}

}  // namespace ftf
