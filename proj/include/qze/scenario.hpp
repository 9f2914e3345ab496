// scenario.hpp: runs the requested products for one scenario (or a sweep of
// scenarios) and writes plot-ready CSV plus a summary.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qze/config.hpp"
#include "qze/csv.hpp"
#include "qze/dynamics.hpp"
#include "qze/errors.hpp"
#include "qze/formfactor.hpp"
#include "qze/model.hpp"
#include "qze/spectral.hpp"

namespace qze {

// ---------------------------------------------------------------------------
// Pipelines shared by the products and the acceptance checks.

/// Form-factor window for the spectral route: wide enough for A(E) to die
/// off, spanning both omega and the band centre.
inline Window spectral_grid_window(const ValidatedModel& m) {
    const double w = std::max(60.0 * m.band().delta, 20.0 * m.band().eta);
    return {std::min(m.omega(), m.center()) - w, std::max(m.omega(), m.center()) + w};
}

struct SpectralRoute {
    FormFactorGrid grid;
    SpectralFunction sf;
};

inline SpectralRoute spectral_route(const ValidatedModel& m) {
    SpectralRoute out;
    const Window w = spectral_grid_window(m);
    out.grid = form_factor_grid(m, w);
    // Keep the energy window well inside the grid so the self-energy never
    // sees the truncated far tail.
    const double margin = 0.2 * std::max(60.0 * m.band().delta, 20.0 * m.band().eta);
    SpectralOptions opt;
    opt.window = {w.lo + margin, w.hi - margin};
    opt.horizon = m.horizon();
    out.sf = spectral_function(out.grid, m.omega(), opt);
    return out;
}

/// Time at which ln s / (gamma t) first reaches the midpoint between the free
/// value -1 and the late plateau; linear interpolation between samples.
inline std::optional<double> rate_transition_midpoint(const std::vector<RatePoint>& rates, double plateau) {
    const double target = 0.5 * (-1.0 + plateau);
    for (std::size_t i = 0; i + 1 < rates.size(); ++i) {
        const double a = rates[i].rate - target, b = rates[i + 1].rate - target;
        if (a <= 0.0 && b >= 0.0 && b != a) {
            const double u = -a / (b - a);
            return rates[i].t + u * (rates[i + 1].t - rates[i].t);
        }
    }
    return std::nullopt;
}

/// First time the sampled curve reaches 0.5, linearly interpolated.
inline std::optional<double> half_crossing(std::span<const double> t, std::span<const double> y) {
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
        if (y[i] < 0.5 && y[i + 1] >= 0.5) return t[i] + (0.5 - y[i]) / (y[i + 1] - y[i]) * (t[i + 1] - t[i]);
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Figure presets, in units gamma = 1.

inline constexpr double fig_two_pi_delta = 100.0;

inline Settings fig1_preset() {
    return {{"delta", format_number(fig_two_pi_delta / two_pi)}, {"eta", "1.5"}, {"n", "6"}};
}

inline const std::vector<double>& fig2_eta_ratios() {
    static const std::vector<double> v = {0.01, 0.1, 1.0};
    return v;
}

/// (2 pi Delta, eta) for the three curves of the two-stage decay figure.
inline const std::vector<std::pair<double, double>>& fig3_sets() {
    static const std::vector<std::pair<double, double>> v = {{100.0, 100.0}, {100.0, 10.0}, {1000.0, 1000.0}};
    return v;
}

inline Settings layered(Settings base, const Settings& over) {
    for (const auto& [k, v] : over) base[k] = v;
    return base;
}

inline ValidatedModel model_from(const Settings& s) { return validate_params(apply_settings(ModelParams{}, s)); }

// ---------------------------------------------------------------------------

struct ProductSummary {
    Product product{};
    std::vector<std::pair<std::string, std::string>> scalars;
    std::vector<std::filesystem::path> files;

    void add(const std::string& k, double v) { scalars.emplace_back(k, format_number(v)); }
    void add(const std::string& k, const std::string& v) { scalars.emplace_back(k, v); }
};

struct ScenarioResult {
    std::string label;                      // sweep point name, empty for a single run
    std::vector<ProductSummary> products;
};

inline std::string summary_text(const std::vector<ScenarioResult>& results) {
    std::string out;
    for (const auto& r : results) {
        for (const auto& p : r.products) {
            out += to_string(p.product);
            if (!r.label.empty()) out += "[" + r.label + "]";
            out += ":";
            for (const auto& [k, v] : p.scalars) out += " " + k + "=" + v;
            out += '\n';
        }
    }
    return out;
}

namespace detail {

namespace fs = std::filesystem;

inline ProductSummary run_formfactor(const ScenarioConfig& cfg, const Settings& s, const fs::path& dir) {
    ProductSummary ps{Product::FormFactor, {}, {}};
    const auto m = model_from(s);
    const double w = std::max(50.0 * m.band().delta, min_form_factor_halfwidth(m.band()));
    const Window win{std::min(m.omega(), m.center()) - w, std::max(m.omega(), m.center()) + w};
    const auto grid = form_factor_grid(m, win);
    Table t{{"mu", "g2", "g2_over_free"}, {}};
    for (std::size_t i = 0; i < grid.size(); ++i)
        t.rows.push_back({grid.mu[i], grid.g2[i], grid.g2[i] / grid.free_value()});
    write_csv(dir / "formfactor.csv", t);
    ps.files.push_back(dir / "formfactor.csv");

    const double g2 = renormalized_form_factor(m, m.omega());
    ps.add("g2_omega", g2);
    ps.add("suppression", two_pi * g2 / m.gamma());
    try {
        ps.add("sum_rule_window", sum_rule_defect(grid));
        ps.add("sum_rule_tail_estimate", sum_rule_tail_estimate(grid));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::WindowTooNarrow) throw;
        ps.add("sum_rule_window", "unresolved");
    }
    (void)cfg;
    return ps;
}

inline ProductSummary run_evolve(const ScenarioConfig& cfg, const Settings& s, const fs::path& dir) {
    ProductSummary ps{Product::Evolve, {}, {}};
    const auto m = model_from(s);
    const auto tr = propagate(discretize_continuum(m), uniform_times(m.horizon(), cfg.samples));
    Table t{{"t", "s", "eps", "r", "norm_defect"}, {}};
    for (std::size_t i = 0; i < tr.size(); ++i) t.rows.push_back({tr.t[i], tr.s[i], tr.eps[i], tr.r[i], tr.norm_defect[i]});
    write_csv(dir / "evolve.csv", t);
    ps.files.push_back(dir / "evolve.csv");
    ps.add("s_T", tr.s.back());
    ps.add("eps_T", tr.eps.back());
    ps.add("r_T", tr.r.back());
    ps.add("max_norm_defect", tr.max_norm_defect());
    if (m.band().eta > 0.0 && *std::max_element(tr.r.begin(), tr.r.end()) >= 0.5) ps.add("delay", response_delay(tr));
    return ps;
}

inline ProductSummary run_spectral(const ScenarioConfig& cfg, const Settings& s, const fs::path& dir) {
    ProductSummary ps{Product::Spectral, {}, {}};
    const auto m = model_from(s);
    const auto route = spectral_route(m);
    Table spec{{"E", "A"}, {}};
    for (std::size_t i = 0; i < route.sf.E.size(); ++i) spec.rows.push_back({route.sf.E[i], route.sf.A[i]});
    write_csv(dir / "spectra.csv", spec);

    const auto times = uniform_times(m.horizon(), cfg.samples);
    const auto surv = survival_spectral(route.sf, times);
    Table st{{"t", "s"}, {}};
    Table pert{{"t", "one_minus_s_pert"}, {}};
    for (std::size_t i = 0; i < times.size(); ++i) {
        st.rows.push_back({times[i], surv[i]});
        pert.rows.push_back({times[i], perturbative_decay(route.grid, m.omega(), times[i])});
    }
    write_csv(dir / "survival_spectral.csv", st);
    write_csv(dir / "perturbative.csv", pert);
    ps.files = {dir / "spectra.csv", dir / "survival_spectral.csv", dir / "perturbative.csv"};
    const double g2 = renormalized_form_factor(m, m.omega());
    ps.add("g2_omega", g2);
    ps.add("suppression", two_pi * g2 / m.gamma());
    ps.add("normalization_defect", route.sf.normalization_defect);
    ps.add("s_T", surv.back());
    return ps;
}

inline ProductSummary run_report(const ScenarioConfig& cfg, const Settings& s, const fs::path& dir) {
    ProductSummary ps{Product::Report, {}, {}};
    const auto m = model_from(s);
    const auto rep = qze_condition_report(m, cfg.thresholds);
    const auto rates = stage_rates(m);
    ps.add("gamma_over_delta", rep.ratio_linewidth);
    ps.add("tau_delta", rep.ratio_response);
    ps.add("suppression_estimate", rep.suppression_estimate);
    ps.add("g2_omega", rates.suppressed_rate / two_pi);
    ps.add("suppression", rates.ratio());
    ps.add("verdict", to_string(rep.verdict));
    std::string text;
    for (const auto& [k, v] : ps.scalars) text += k + " = " + v + "\n";
    write_file_atomic(dir / "report.txt", text);
    ps.files.push_back(dir / "report.txt");
    return ps;
}

inline ProductSummary run_fig1(const ScenarioConfig& cfg, const Settings& s, const fs::path& dir) {
    ProductSummary ps{Product::Fig1, {}, {}};
    const auto m = model_from(layered(fig1_preset(), s));
    const auto tr = propagate(discretize_continuum(m), uniform_times(m.horizon(), cfg.samples));
    Table t{{"t", "one_minus_s", "eps", "r"}, {}};
    std::vector<double> decayed(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
        decayed[i] = 1.0 - tr.s[i];
        t.rows.push_back({tr.t[i], decayed[i], tr.eps[i], tr.r[i]});
    }
    write_csv(dir / "fig1.csv", t);
    ps.files.push_back(dir / "fig1.csv");
    ps.add("r_T", tr.r.back());
    ps.add("max_norm_defect", tr.max_norm_defect());
    if (m.band().eta > 0.0) {
        ps.add("tau", 1.0 / m.band().eta);
        ps.add("delay", response_delay(tr));
        const auto a = half_crossing(tr.t, decayed), b = half_crossing(tr.t, tr.r);
        if (a && b) ps.add("half_crossing_gap", *b - *a);
    }
    return ps;
}

inline ProductSummary run_fig2(const ScenarioConfig&, const Settings& s, const fs::path& dir) {
    ProductSummary ps{Product::Fig2, {}, {}};
    Settings base = layered(fig1_preset(), s);
    base.erase("eta");
    const double delta = apply_settings(ModelParams{}, base).band.delta;
    for (double rho : fig2_eta_ratios()) {
        Settings point = base;
        point["eta"] = format_number(rho * two_pi * delta);
        const auto m = model_from(point);
        const double w = min_form_factor_halfwidth(m.band());
        const auto grid = form_factor_grid(m, {m.center() - w, m.center() + w});
        Table t{{"mu", "g2", "g2_over_free"}, {}};
        for (std::size_t i = 0; i < grid.size(); ++i)
            t.rows.push_back({grid.mu[i], grid.g2[i], grid.g2[i] / grid.free_value()});
        const auto name = "fig2_rho" + format_number(rho) + ".csv";
        write_csv(dir / name, t);
        ps.files.push_back(dir / name);
        ps.add("suppression_rho" + format_number(rho), two_pi * renormalized_form_factor(m, m.omega()) / m.gamma());
    }
    return ps;
}

inline ProductSummary run_fig3(const ScenarioConfig& cfg, const Settings& s, const fs::path& dir) {
    ProductSummary ps{Product::Fig3, {}, {}};
    Table refs{{"set", "two_pi_delta", "eta", "free_reference", "suppressed_reference"}, {}};
    int index = 0;
    for (const auto& [two_pi_delta, eta] : fig3_sets()) {
        ++index;
        const Settings preset = {{"delta", format_number(two_pi_delta / two_pi)}, {"eta", format_number(eta)}, {"n", "6"}};
        const auto m = model_from(layered(preset, s));
        const double delta = m.band().delta;
        const auto tr = propagate(discretize_continuum(m), mixed_times(m.horizon(), cfg.samples, 1e-2 / delta, 60));
        const auto rates = decay_rate_trace(tr, m.gamma());
        Table t{{"t", "log_s_over_gamma_t"}, {}};
        for (const auto& p : rates) t.rows.push_back({p.t, p.rate});
        const auto name = "fig3_set" + std::to_string(index) + ".csv";
        write_csv(dir / name, t);
        ps.files.push_back(dir / name);
        const double plateau = -stage_rates(m).ratio();
        refs.rows.push_back({static_cast<double>(index), two_pi * delta, m.band().eta, -1.0, plateau});
        const std::string tag = "_set" + std::to_string(index);
        ps.add("plateau" + tag, plateau);
        ps.add("rate_T" + tag, rates.back().rate);
        if (auto mid = rate_transition_midpoint(rates, plateau)) ps.add("midpoint_times_delta" + tag, *mid * delta);
    }
    write_csv(dir / "fig3_references.csv", refs);
    ps.files.push_back(dir / "fig3_references.csv");
    return ps;
}

inline ProductSummary run_product(Product p, const ScenarioConfig& cfg, const Settings& s, const fs::path& dir) {
    try {
        switch (p) {
        case Product::FormFactor: return run_formfactor(cfg, s, dir);
        case Product::Evolve: return run_evolve(cfg, s, dir);
        case Product::Spectral: return run_spectral(cfg, s, dir);
        case Product::Report: return run_report(cfg, s, dir);
        case Product::Fig1: return run_fig1(cfg, s, dir);
        case Product::Fig2: return run_fig2(cfg, s, dir);
        case Product::Fig3: return run_fig3(cfg, s, dir);
        }
    } catch (const Error& e) {
        throw Error(e.code(), std::string(to_string(p)) + ": " + e.detail());
    }
    throw Error(ErrorCode::ConfigError, "unknown product");
}

struct SweepPoint {
    std::string label;
    Settings settings;
};

inline std::vector<SweepPoint> sweep_points(const ScenarioConfig& cfg) {
    const auto base = apply_settings(ModelParams{}, cfg.model);
    const std::vector<std::optional<double>> none = {std::nullopt};
    auto opt_list = [&](const std::vector<double>& v) {
        if (v.empty()) return none;
        std::vector<std::optional<double>> out(v.begin(), v.end());
        return out;
    };
    std::vector<SweepPoint> pts;
    for (auto eta : opt_list(cfg.sweep_eta))
        for (auto delta : opt_list(cfg.sweep_delta))
            for (auto det : opt_list(cfg.sweep_detuning)) {
                SweepPoint p{"", cfg.model};
                char idx[16];
                std::snprintf(idx, sizeof idx, "p%03zu", pts.size());
                p.label = idx;
                if (eta) {
                    p.settings["eta"] = format_number(*eta);
                    p.label += "_eta" + format_number(*eta);
                }
                if (delta) {
                    p.settings["delta"] = format_number(*delta);
                    p.label += "_delta" + format_number(*delta);
                }
                if (det) {
                    p.settings["center"] = format_number(base.omega + *det);
                    p.label += "_detuning" + format_number(*det);
                }
                pts.push_back(std::move(p));
            }
    return pts;
}

inline ScenarioResult run_point(const ScenarioConfig& cfg, const Settings& s, const fs::path& dir, std::string label) {
    ScenarioResult r{std::move(label), {}};
    for (Product p : cfg.products) r.products.push_back(run_product(p, cfg, s, dir));
    return r;
}

} // namespace detail

inline bool is_sweep(const ScenarioConfig& cfg) {
    return !cfg.sweep_eta.empty() || !cfg.sweep_delta.empty() || !cfg.sweep_detuning.empty();
}

/// Runs every requested product. Sweeps expand to one subdirectory per point
/// and run on up to `threads` workers; results are gathered in point order so
/// the outputs do not depend on scheduling. A summary.txt is written to the
/// output directory.
inline std::vector<ScenarioResult> run_scenario(const ScenarioConfig& cfg, int threads = 1) {
    if (cfg.products.empty()) throw Error(ErrorCode::ConfigError, "no products requested");
    std::vector<ScenarioResult> results;
    if (!is_sweep(cfg)) {
        results.push_back(detail::run_point(cfg, cfg.model, cfg.out_dir, ""));
    } else {
        const auto pts = detail::sweep_points(cfg);
        std::vector<std::optional<ScenarioResult>> slots(pts.size());
        std::vector<std::exception_ptr> errors(pts.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < pts.size(); i = next++) {
                try {
                    slots[i] = detail::run_point(cfg, pts[i].settings, cfg.out_dir / pts[i].label, pts[i].label);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        const int n = std::clamp(threads, 1, static_cast<int>(pts.size()));
        std::vector<std::thread> pool;
        for (int i = 1; i < n; ++i) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (!errors[i]) continue;
            try {
                std::rethrow_exception(errors[i]);
            } catch (const Error& e) {
                throw Error(e.code(), pts[i].label + ": " + e.detail());
            }
        }
        for (auto& s : slots) results.push_back(std::move(*s));
    }
    write_file_atomic(cfg.out_dir / "summary.txt", summary_text(results));
    return results;
}

} // namespace qze
