// config.hpp: flat "key = value" scenario files.
//
//   # fast detector, wide band
//   delta = 15.915494309189533
//   eta = 100
//   products = report, evolve
//
// One scenario per file. '#' starts a comment. Unknown keys are an error.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qze/errors.hpp"
#include "qze/model.hpp"

namespace qze {

enum class Product { FormFactor, Evolve, Spectral, Report, Fig1, Fig2, Fig3 };

inline const char* to_string(Product p) {
    switch (p) {
    case Product::FormFactor: return "formfactor";
    case Product::Evolve: return "evolve";
    case Product::Spectral: return "spectral";
    case Product::Report: return "report";
    case Product::Fig1: return "fig1";
    case Product::Fig2: return "fig2";
    case Product::Fig3: return "fig3";
    }
    return "unknown";
}

inline std::optional<Product> parse_product(const std::string& s) {
    for (Product p : {Product::FormFactor, Product::Evolve, Product::Spectral, Product::Report, Product::Fig1,
                      Product::Fig2, Product::Fig3})
        if (s == to_string(p)) return p;
    return std::nullopt;
}

/// Model keys as written, kept separately so figure presets can be applied
/// underneath them.
using Settings = std::map<std::string, std::string>;

struct ScenarioConfig {
    Settings model;                        // model and numerics keys only
    std::filesystem::path out_dir{"out"};
    std::vector<Product> products;
    std::vector<double> sweep_eta;         // empty: the single base value
    std::vector<double> sweep_delta;
    std::vector<double> sweep_detuning;    // band centre minus omega
    int samples{500};                      // uniform time samples over [0, T]
    VerdictThresholds thresholds{};
};

namespace detail {

inline const std::vector<std::string>& model_keys() {
    static const std::vector<std::string> keys = {
        "gamma", "omega", "eta", "delta", "n", "flat", "center", "cutoff", "cutoff_override",
        "dk", "horizon", "dt", "step_factor", "quad_tol", "norm_tolerance"};
    return keys;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(x))
        throw Error(ErrorCode::ConfigError, key + ": '" + v + "' is not a finite number");
    return x;
}

inline int parse_int(const std::string& key, const std::string& v) {
    const double x = parse_double(key, v);
    if (x != std::floor(x) || std::abs(x) > 1e9) throw Error(ErrorCode::ConfigError, key + ": '" + v + "' is not an integer");
    return static_cast<int>(x);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error(ErrorCode::ConfigError, key + ": '" + v + "' is not a boolean");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split_list(v)) out.push_back(parse_double(key, item));
    if (out.empty()) throw Error(ErrorCode::ConfigError, key + " must list at least one value");
    return out;
}

} // namespace detail

/// Applies one key to the config. Throws ConfigError on unknown keys or
/// malformed values.
inline void apply_setting(ScenarioConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
    using namespace detail;
    const std::string key = trim(raw_key), value = trim(raw_value);
    if (key.empty()) throw Error(ErrorCode::ConfigError, "empty key");
    if (std::find(model_keys().begin(), model_keys().end(), key) != model_keys().end()) {
        // Syntax is checked now; ranges are checked by validate_params.
        if (key == "flat" || key == "cutoff_override") parse_bool(key, value);
        else if (key == "n") parse_int(key, value);
        else parse_double(key, value);
        cfg.model[key] = value;
    } else if (key == "out") {
        if (value.empty()) throw Error(ErrorCode::ConfigError, "out must name a directory");
        cfg.out_dir = value;
    } else if (key == "products") {
        cfg.products.clear();
        for (const auto& item : split_list(value)) {
            auto p = parse_product(item);
            if (!p) throw Error(ErrorCode::ConfigError, "unknown product '" + item + "'");
            cfg.products.push_back(*p);
        }
        if (cfg.products.empty()) throw Error(ErrorCode::ConfigError, "products must list at least one product");
    } else if (key == "sweep_eta") {
        cfg.sweep_eta = parse_list(key, value);
    } else if (key == "sweep_delta") {
        cfg.sweep_delta = parse_list(key, value);
    } else if (key == "sweep_detuning") {
        cfg.sweep_detuning = parse_list(key, value);
    } else if (key == "samples") {
        cfg.samples = parse_int(key, value);
        if (cfg.samples < 4) throw Error(ErrorCode::ConfigError, "samples must be at least 4");
    } else if (key == "max_linewidth_ratio") {
        cfg.thresholds.max_linewidth_ratio = parse_double(key, value);
    } else if (key == "max_response_ratio") {
        cfg.thresholds.max_response_ratio = parse_double(key, value);
    } else {
        throw Error(ErrorCode::ConfigError, "unknown key '" + key + "'");
    }
}

/// "key=value" as given on the command line.
inline void apply_override(ScenarioConfig& cfg, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, "override '" + kv + "' is not key=value");
    apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
}

inline ScenarioConfig parse_config(const std::string& text, ScenarioConfig cfg = {}) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": expected key = value");
        try {
            apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
        } catch (const Error& e) {
            throw Error(e.code(), "line " + std::to_string(lineno) + ": " + e.detail());
        }
    }
    return cfg;
}

inline ScenarioConfig load_config(const std::filesystem::path& path, ScenarioConfig cfg = {}) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::ConfigError, "cannot read config " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), std::move(cfg));
}

/// Layers settings onto params; later layers win.
inline ModelParams apply_settings(ModelParams p, const Settings& s) {
    using namespace detail;
    for (const auto& [k, v] : s) {
        if (k == "gamma") p.gamma = parse_double(k, v);
        else if (k == "omega") p.omega = parse_double(k, v);
        else if (k == "eta") p.band.eta = parse_double(k, v);
        else if (k == "delta") p.band.delta = parse_double(k, v);
        else if (k == "n") {
            p.band.exponent = parse_int(k, v);
            p.band.profile = ProfileKind::PowerLaw;
        } else if (k == "center") p.band.center = parse_double(k, v);
        else if (k == "cutoff") p.numerics.cutoff = parse_double(k, v);
        else if (k == "cutoff_override") p.numerics.cutoff_override = parse_bool(k, v);
        else if (k == "dk") p.numerics.dk = parse_double(k, v);
        else if (k == "horizon") p.numerics.horizon = parse_double(k, v);
        else if (k == "dt") p.numerics.dt = parse_double(k, v);
        else if (k == "step_factor") p.numerics.step_factor = parse_double(k, v);
        else if (k == "quad_tol") p.numerics.quad_tol = parse_double(k, v);
        else if (k == "norm_tolerance") p.numerics.norm_tolerance = parse_double(k, v);
    }
    // "flat" is applied last so it wins over "n" regardless of map order.
    if (auto it = s.find("flat"); it != s.end() && parse_bool("flat", it->second))
        p.band.profile = ProfileKind::FlatInfiniteN;
    return p;
}

} // namespace qze
