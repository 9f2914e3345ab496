// formfactor.hpp: renormalized form factor |g_mu|^2 of the atom coupled to
// the detector-dressed photon continuum:
//
//   |g_mu|^2 = (gamma / 2 pi) * Int dk eta_k / |mu - k - i pi eta_k|^2
//
// The integrand is a Lorentzian in k of width pi*eta_mu centred on mu, which
// can be many orders of magnitude narrower than the band. All quadrature is
// done in the offset x = k - mu so the peak keeps full relative precision.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "qze/errors.hpp"
#include "qze/interpolation.hpp"
#include "qze/model.hpp"
#include "qze/quadrature.hpp"

namespace qze {

inline double free_form_factor(double gamma) { return gamma / two_pi; }

namespace detail {

/// Partition of the offset axis x = k - mu: band features, a geometric
/// cluster of breakpoints around the peak at x = 0, and infinite tails when
/// the profile has unbounded support.
inline std::vector<double> offset_breakpoints(const DetectorBand& band, double center, double mu,
                                              double peak_width) {
    const double lo_edge = center - band.delta - mu;
    const double hi_edge = center + band.delta - mu;
    std::vector<double> bp;
    double lo, hi;
    if (band.is_flat()) {
        lo = lo_edge;
        hi = hi_edge;
    } else {
        const double reach = std::max({std::abs(lo_edge), std::abs(hi_edge), peak_width}) + 2.0 * band.delta;
        lo = -reach;
        hi = reach;
        bp.push_back(-std::numeric_limits<double>::infinity());
        bp.push_back(std::numeric_limits<double>::infinity());
    }
    bp.push_back(lo);
    bp.push_back(hi);
    for (double f : {lo_edge, center - mu, hi_edge, 0.0})
        if (f > lo && f < hi) bp.push_back(f);
    if (peak_width > 0.0) {
        for (double s = peak_width; s < hi - lo; s *= 4.0) {
            if (s < hi) bp.push_back(s);
            if (-s > lo) bp.push_back(-s);
        }
    }
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    return bp;
}

/// Int dk eta_k / |mu - k - i pi eta_k|^2 over the region where eta_k > 0,
/// without the weight-one delta contributed by modes with eta_k = 0.
inline double lorentzian_overlap(const DetectorBand& band, double center, double mu, double tol) {
    const double eta_mu = detector_response(band, center, mu);
    const double width = pi * eta_mu;
    auto integrand = [&](double x) {
        const double e = detector_response(band, center, mu + x);
        if (e == 0.0) return 0.0;
        const double pe = pi * e;
        return e / (x * x + pe * pe);
    };
    const auto bp = offset_breakpoints(band, center, mu, width);
    quad::Options opt;
    opt.rel_tol = tol;
    opt.abs_tol = 1e-15 * tol;
    opt.max_intervals = 50000;
    const auto r = quad::integrate(integrand, std::span<const double>(bp), opt);
    if (!r.converged)
        throw Error(ErrorCode::QuadratureFailure,
                    "form factor at mu = " + std::to_string(mu) + " reached error " +
                        std::to_string(r.error) + " for value " + std::to_string(r.value));
    return r.value;
}

} // namespace detail

/// |g_mu|^2 by adaptive quadrature to relative accuracy tol.
inline double renormalized_form_factor(const DetectorBand& band, double center, double gamma, double mu,
                                       double tol = 1e-10) {
    if (!(tol > 0.0)) throw Error(ErrorCode::BadParameter, "quadrature tolerance must be positive");
    const double g_free = free_form_factor(gamma);
    if (band.eta == 0.0) return g_free;

    const double overlap = detail::lorentzian_overlap(band, center, mu, tol);
    if (band.is_flat()) {
        const double off = std::abs(mu - center);
        if (off == band.delta) throw BandEdgeError(g_free * overlap, g_free * (overlap + 1.0));
        // Modes outside a flat band are undamped: the Lorentzian collapses to
        // a unit-weight delta at k = mu.
        return g_free * (overlap + (off > band.delta ? 1.0 : 0.0));
    }
    // An underflowed eta_mu is the same delta limit for the power-law profile.
    const double delta_weight = detector_response(band, center, mu) == 0.0 ? 1.0 : 0.0;
    return g_free * (overlap + delta_weight);
}

inline double renormalized_form_factor(const ValidatedModel& m, double mu) {
    return renormalized_form_factor(m.band(), m.center(), m.gamma(), mu, m.numerics().quad_tol);
}

/// Closed form of |g_mu|^2 for the flat (n -> infinity) band.
inline double analytic_flat_band(double gamma, double eta, double delta, double mu, double center) {
    const double off = mu - center;
    const double half = 0.5 * eta;
    const double g_free = free_form_factor(gamma);
    if (std::abs(off) == delta) {
        // One arctan is exactly zero at the edge; the other spans the band.
        const double inside = gamma / (2.0 * pi * pi) * std::atan(2.0 * delta / half);
        throw BandEdgeError(inside, inside + g_free);
    }
    const double arc = std::atan((off + delta) / half) - std::atan((off - delta) / half);
    return gamma / (2.0 * pi * pi) * arc + (std::abs(off) > delta ? g_free : 0.0);
}

/// Suppression factor 2 pi |g_center|^2 / gamma of the flat band at its centre.
inline double flat_band_suppression(double eta, double delta) {
    return 2.0 / pi * std::atan(2.0 * delta / eta);
}

struct Window {
    double lo{};
    double hi{};
    double width() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

struct FormFactorGrid {
    std::vector<double> mu;
    std::vector<double> g2;
    Window window;
    double quad_tol{};
    double gamma{};
    double center{};
    double delta{};

    std::size_t size() const { return mu.size(); }
    double free_value() const { return free_form_factor(gamma); }
};

/// Grid node placement: uniform core over centre +- 3 Delta, geometric
/// clustering (ratio 1.2) into both band edges, and geometric coarsening
/// (ratio 1.05) outside the core up to Delta/2.
inline std::vector<double> form_factor_nodes(const DetectorBand& band, double center, Window window,
                                             int core_points, std::span<const double> extra_focus = {}) {
    const double d = band.delta;
    const double h_core = 6.0 * d / std::max(core_points, 8);
    double h_edge = h_core / 20.0;
    if (band.eta > 0.0) h_edge = std::min(h_edge, band.eta / 40.0);
    const double h_far = 0.5 * d;
    const double edges[2] = {center - d, center + d};

    auto spacing = [&](double x) {
        double h = h_core;
        for (double e : edges) h = std::min(h, h_edge + 0.2 * std::abs(x - e));
        const double out = std::abs(x - center) - 3.0 * d;
        if (out > 0.0) h = std::min(std::max(h, h_core + 0.05 * out), h_far);
        for (double f : extra_focus) h = std::min(h, h_core + 0.05 * std::abs(x - f));
        return h;
    };

    std::vector<double> nodes;
    double x = window.lo;
    while (x < window.hi) {
        nodes.push_back(x);
        x += spacing(x);
    }
    nodes.push_back(window.hi);
    // Flat band: nudge nodes off the (two-valued) edges.
    if (band.is_flat()) {
        for (auto& v : nodes)
            for (double e : edges)
                if (v == e) v += 0.5 * h_edge;
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

/// Smallest window half-width accepted around the band centre.
inline double min_form_factor_halfwidth(const DetectorBand& band) {
    return std::max(5.0 * band.delta, 5.0 * band.eta);
}

inline FormFactorGrid form_factor_grid(const DetectorBand& band, double center, double gamma, Window window,
                                       int core_points = 600, double tol = 1e-10,
                                       std::span<const double> extra_focus = {}) {
    const double need = min_form_factor_halfwidth(band);
    if (window.lo > center - need || window.hi < center + need)
        throw Error(ErrorCode::WindowTooNarrow, "form-factor window must cover center +- max(5 delta, 5 eta)");
    FormFactorGrid g;
    g.window = window;
    g.quad_tol = tol;
    g.gamma = gamma;
    g.center = center;
    g.delta = band.delta;
    g.mu = form_factor_nodes(band, center, window, core_points, extra_focus);
    g.g2.resize(g.mu.size());
    for (std::size_t i = 0; i < g.mu.size(); ++i)
        g.g2[i] = renormalized_form_factor(band, center, gamma, g.mu[i], tol);
    return g;
}

inline FormFactorGrid form_factor_grid(const ValidatedModel& m, Window window, int core_points = 600) {
    const double focus[1] = {m.omega()};
    return form_factor_grid(m.band(), m.center(), m.gamma(), window, core_points, m.numerics().quad_tol,
                            std::span<const double>(focus));
}

/// Cubic interpolant of |g_mu|^2 - gamma/2pi over the grid.
inline CubicSpline deviation_spline(const FormFactorGrid& grid) {
    std::vector<double> dev(grid.size());
    const double free = grid.free_value();
    for (std::size_t i = 0; i < grid.size(); ++i) dev[i] = grid.g2[i] - free;
    return CubicSpline(grid.mu, dev);
}

/// Int over the grid window of (|g_mu|^2 - gamma/2pi) dmu, integrating the
/// cubic interpolant segment by segment from left to right. Over the whole
/// line this deviation integrates to zero; what remains here is the part of
/// the out-of-band surplus lying beyond the window.
inline double sum_rule_defect(const FormFactorGrid& grid) {
    const double free = grid.free_value();
    const double tol = 1e-3 * free;
    if (std::abs(grid.g2.front() - free) >= tol || std::abs(grid.g2.back() - free) >= tol)
        throw Error(ErrorCode::WindowTooNarrow, "form factor has not relaxed to gamma/2pi at the window edges");
    const auto s = deviation_spline(grid);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) sum += s.segment_integral(i);
    return sum;
}

/// Far-tail estimate of the deviation integral beyond the window, from the
/// asymptotic form deviation ~ C / (mu - center)^2 fitted at each edge.
inline double sum_rule_tail_estimate(const FormFactorGrid& grid) {
    const double free = grid.free_value();
    const double lo = grid.mu.front() - grid.center, hi = grid.mu.back() - grid.center;
    return (grid.g2.front() - free) * std::abs(lo) + (grid.g2.back() - free) * std::abs(hi);
}

} // namespace qze
