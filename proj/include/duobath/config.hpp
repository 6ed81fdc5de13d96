// config.hpp — strict scenario configuration (JSON) with field-path diagnostics
#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "duobath/model.hpp"

namespace duobath {

struct ConfigError : std::runtime_error {
    std::string field_path;
    ConfigError(std::string path, const std::string& what)
        : std::runtime_error(path.empty() ? what : path + ": " + what),
          field_path(std::move(path)) {}
};

enum class RunMode { isolated, stationary, nonstationary };

inline std::string to_string(RunMode m) {
    switch (m) {
        case RunMode::isolated: return "isolated";
        case RunMode::stationary: return "stationary";
        default: return "nonstationary";
    }
}

struct TimeGridConfig {
    double t_max = 0.0; // 0: choose 3/Gamma_total automatically
    std::size_t n_points = 500;
};

struct ScanConfig {
    double z_min = 0.0, z_max = 1.0;
    std::size_t n_z = 6;
};

struct CorrelationConfig {
    double t_star = 0.0; // 0: quarter of the time span
    double t_max = 0.0;  // 0: inherit the main time grid
    std::size_t n_points = 200;
};

struct OutputConfig {
    std::string path;          // empty: stdout
    std::string format = "csv"; // csv | json
};

struct ScenarioConfig {
    SystemParams system;
    double x12 = 1.0;
    ReservoirSpec reservoir_a = ReservoirSpec::ohmic();
    ReservoirSpec reservoir_b = ReservoirSpec::ohmic();
    RunMode mode = RunMode::nonstationary;
    TimeGridConfig time;
    std::optional<ScanConfig> scan;
    std::optional<CorrelationConfig> correlation;
    double tolerance = 1e-8;
    OutputConfig output;

    TwoLevelSystem tls() const { return TwoLevelSystem{system, x12}; }

    void validate() const {
        try {
            system.validate();
        } catch (const std::exception& e) {
            throw ConfigError("system", e.what());
        }
        if (!(x12 > 0.0)) throw ConfigError("system.x12", "must be positive");
        try {
            reservoir_a.validate();
        } catch (const std::exception& e) {
            throw ConfigError("reservoir_a", e.what());
        }
        try {
            reservoir_b.validate();
        } catch (const std::exception& e) {
            throw ConfigError("reservoir_b", e.what());
        }
        if (time.t_max < 0.0) throw ConfigError("time.t_max", "must be >= 0");
        if (time.n_points < 2) throw ConfigError("time.n_points", "must be >= 2");
        if (scan) {
            if (scan->n_z < 1) throw ConfigError("scan.n_z", "must be >= 1");
            if (scan->z_max < scan->z_min) throw ConfigError("scan.z_max", "must be >= z_min");
            if (!(1.0 - 0.5 * scan->z_max > 0.0))
                throw ConfigError("scan.z_max", "requires s_A = 1 - z/2 > 0");
        }
        if (correlation) {
            if (correlation->t_star < 0.0) throw ConfigError("correlation.t_star", "must be >= 0");
            if (correlation->t_max < 0.0) throw ConfigError("correlation.t_max", "must be >= 0");
            if (correlation->n_points < 4)
                throw ConfigError("correlation.n_points", "must be >= 4");
        }
        if (!(tolerance > 0.0) || tolerance > 1e-3)
            throw ConfigError("tolerance", "must lie in (0, 1e-3]");
        if (output.format != "csv" && output.format != "json")
            throw ConfigError("output.format", "must be 'csv' or 'json'");
    }
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& path,
                           std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) { known = true; break; }
        if (!known)
            throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
    }
}

inline double get_number(const json& obj, const std::string& path, const char* key,
                         double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number())
        throw ConfigError(path.empty() ? key : path + "." + key, "expected a number");
    return v.get<double>();
}

inline std::size_t get_count(const json& obj, const std::string& path, const char* key,
                             std::size_t fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    const bool ok = v.is_number_unsigned()
                 || (v.is_number_integer() && v.get<long long>() >= 0);
    if (!ok)
        throw ConfigError(path.empty() ? key : path + "." + key,
                          "expected a non-negative integer");
    return v.get<std::size_t>();
}

inline std::string get_string(const json& obj, const std::string& path, const char* key,
                              std::string fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string())
        throw ConfigError(path.empty() ? key : path + "." + key, "expected a string");
    return v.get<std::string>();
}

inline ReservoirSpec parse_reservoir(const json& obj, const std::string& path) {
    if (!obj.is_object()) throw ConfigError(path, "expected an object");
    reject_unknown(obj, path, {"s", "j", "lambda"});
    ReservoirSpec r = ReservoirSpec::ohmic();
    r.s = get_number(obj, path, "s", r.s);
    r.j = get_number(obj, path, "j", r.j);
    r.lambda = get_number(obj, path, "lambda", r.lambda);
    return r;
}

} // namespace detail

inline ScenarioConfig parse_config(const nlohmann::json& root) {
    using detail::get_count;
    using detail::get_number;
    using detail::get_string;
    if (!root.is_object()) throw ConfigError("", "top-level config must be an object");
    detail::reject_unknown(root, "", {"system", "reservoir_a", "reservoir_b", "mode", "time",
                                      "scan", "correlation", "tolerance", "output"});
    ScenarioConfig cfg;
    if (root.contains("system")) {
        const auto& s = root.at("system");
        if (!s.is_object()) throw ConfigError("system", "expected an object");
        detail::reject_unknown(s, "system", {"h", "delta", "omega", "x12"});
        cfg.system.h = get_number(s, "system", "h", cfg.system.h);
        cfg.system.delta = get_number(s, "system", "delta", cfg.system.delta);
        cfg.system.omega0 = get_number(s, "system", "omega", cfg.system.omega0);
        cfg.x12 = get_number(s, "system", "x12", cfg.x12);
    }
    if (root.contains("reservoir_a"))
        cfg.reservoir_a = detail::parse_reservoir(root.at("reservoir_a"), "reservoir_a");
    if (root.contains("reservoir_b"))
        cfg.reservoir_b = detail::parse_reservoir(root.at("reservoir_b"), "reservoir_b");
    const std::string mode = get_string(root, "", "mode", "nonstationary");
    if (mode == "isolated") cfg.mode = RunMode::isolated;
    else if (mode == "stationary") cfg.mode = RunMode::stationary;
    else if (mode == "nonstationary") cfg.mode = RunMode::nonstationary;
    else throw ConfigError("mode", "must be one of isolated|stationary|nonstationary");
    if (root.contains("time")) {
        const auto& t = root.at("time");
        if (!t.is_object()) throw ConfigError("time", "expected an object");
        detail::reject_unknown(t, "time", {"t_max", "n_points"});
        cfg.time.t_max = get_number(t, "time", "t_max", cfg.time.t_max);
        cfg.time.n_points = get_count(t, "time", "n_points", cfg.time.n_points);
    }
    if (root.contains("scan")) {
        const auto& s = root.at("scan");
        if (!s.is_object()) throw ConfigError("scan", "expected an object");
        detail::reject_unknown(s, "scan", {"z_min", "z_max", "n_z"});
        ScanConfig sc;
        sc.z_min = get_number(s, "scan", "z_min", sc.z_min);
        sc.z_max = get_number(s, "scan", "z_max", sc.z_max);
        sc.n_z = get_count(s, "scan", "n_z", sc.n_z);
        cfg.scan = sc;
    }
    if (root.contains("correlation")) {
        const auto& c = root.at("correlation");
        if (!c.is_object()) throw ConfigError("correlation", "expected an object");
        detail::reject_unknown(c, "correlation", {"t_star", "t_max", "n_points"});
        CorrelationConfig cc;
        cc.t_star = get_number(c, "correlation", "t_star", cc.t_star);
        cc.t_max = get_number(c, "correlation", "t_max", cc.t_max);
        cc.n_points = get_count(c, "correlation", "n_points", cc.n_points);
        cfg.correlation = cc;
    }
    cfg.tolerance = get_number(root, "", "tolerance", cfg.tolerance);
    if (root.contains("output")) {
        const auto& o = root.at("output");
        if (!o.is_object()) throw ConfigError("output", "expected an object");
        detail::reject_unknown(o, "output", {"path", "format"});
        cfg.output.path = get_string(o, "output", "path", cfg.output.path);
        cfg.output.format = get_string(o, "output", "format", cfg.output.format);
    }
    cfg.validate();
    return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file: " + path);
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("", std::string("config parse error: ") + e.what());
    }
    return parse_config(root);
}

// Effective configuration as embedded in output metadata; reloading it must
// reproduce identical results.
inline nlohmann::json config_to_json(const ScenarioConfig& cfg) {
    nlohmann::json root;
    root["system"] = {{"h", cfg.system.h},
                      {"delta", cfg.system.delta},
                      {"omega", cfg.system.omega0},
                      {"x12", cfg.x12}};
    root["reservoir_a"] = {{"s", cfg.reservoir_a.s},
                           {"j", cfg.reservoir_a.j},
                           {"lambda", cfg.reservoir_a.lambda}};
    root["reservoir_b"] = {{"s", cfg.reservoir_b.s},
                           {"j", cfg.reservoir_b.j},
                           {"lambda", cfg.reservoir_b.lambda}};
    root["mode"] = to_string(cfg.mode);
    root["time"] = {{"t_max", cfg.time.t_max}, {"n_points", cfg.time.n_points}};
    if (cfg.scan)
        root["scan"] = {{"z_min", cfg.scan->z_min},
                        {"z_max", cfg.scan->z_max},
                        {"n_z", cfg.scan->n_z}};
    if (cfg.correlation)
        root["correlation"] = {{"t_star", cfg.correlation->t_star},
                               {"t_max", cfg.correlation->t_max},
                               {"n_points", cfg.correlation->n_points}};
    root["tolerance"] = cfg.tolerance;
    root["output"] = {{"path", cfg.output.path}, {"format", cfg.output.format}};
    return root;
}

} // namespace duobath
