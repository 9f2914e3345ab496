// spectral.hpp: resolvent route to the survival amplitude, built only from
// the renormalized form factor, plus the lowest-order perturbative decay law
// and the free/suppressed stage rates.
//
// The flat background gamma/2pi of |g_mu|^2 extends over the whole real
// line; its principal value vanishes and its line shape is the free
// Lorentzian L(E) of width gamma. Everything below therefore works with the
// deviation |g_mu|^2 - gamma/2pi on the grid window and adds the free
// contributions in closed form.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "qze/errors.hpp"
#include "qze/formfactor.hpp"
#include "qze/interpolation.hpp"
#include "qze/model.hpp"

namespace qze {

using cplx = std::complex<double>;

/// Self-energy evaluator over a form-factor grid. Quadrature nodes (8-point
/// Gauss–Legendre per grid segment) and interpolated deviations are tabulated
/// once; each evaluation is then a fixed-order sum.
class SelfEnergy {
public:
    explicit SelfEnergy(const FormFactorGrid& grid)
        : dev_(deviation_spline(grid)), free_(grid.free_value()),
          lo_(grid.mu.front()), hi_(grid.mu.back()) {
        static constexpr std::array<double, 4> x = {0.183434642495649804939476142360184,
                                                    0.525532409916328985817739049189254,
                                                    0.796666477413626739591553936475830,
                                                    0.960289856497536231683560868569473};
        static constexpr std::array<double, 4> w = {0.362683783378361982965150449277196,
                                                    0.313706645877887287337962201986601,
                                                    0.222381034453374470544355994426241,
                                                    0.101228536290376259152531354309962};
        const auto& mu = grid.mu;
        edge_lo_ = lo_ + 5.0 * (mu[1] - mu[0]);
        edge_hi_ = hi_ - 5.0 * (mu[mu.size() - 1] - mu[mu.size() - 2]);
        for (std::size_t i = 0; i + 1 < mu.size(); ++i) {
            const double c = 0.5 * (mu[i] + mu[i + 1]), h = 0.5 * (mu[i + 1] - mu[i]);
            for (int s = -1; s <= 1; s += 2)
                for (std::size_t q = 0; q < x.size(); ++q) {
                    const double node = c + s * h * x[q];
                    nodes_.push_back(node);
                    weights_.push_back(h * w[q]);
                    values_.push_back(dev_.eval_in(i, node));
                }
        }
    }

    /// |g_E|^2 from the grid interpolant.
    double form_factor(double E) const { return free_ + dev_(E); }

    double real_part(double E) const {
        const double dE = dev_(E);
        double sum = 0.0;
        for (std::size_t q = 0; q < nodes_.size(); ++q) {
            const double gap = E - nodes_[q];
            if (gap != 0.0) sum += weights_[q] * (values_[q] - dE) / gap;
        }
        return sum + dE * std::log(std::abs((E - lo_) / (hi_ - E)));
    }

    /// Sigma(E + i0) = P Int |g_mu|^2 / (E - mu) dmu - i pi |g_E|^2.
    cplx operator()(double E) const {
        if (E < edge_lo_ || E > edge_hi_)
            throw Error(ErrorCode::EdgeProximity,
                        "E = " + std::to_string(E) + " lies within five grid spacings of the window edge");
        return {real_part(E), -pi * form_factor(E)};
    }

    double usable_lo() const { return edge_lo_; }
    double usable_hi() const { return edge_hi_; }

private:
    CubicSpline dev_;
    double free_;
    double lo_, hi_;
    double edge_lo_{}, edge_hi_{};
    std::vector<double> nodes_, weights_, values_;
};

inline cplx self_energy(const FormFactorGrid& grid, double E) { return SelfEnergy(grid)(E); }

struct SpectralFunction {
    std::vector<double> E;
    std::vector<double> A;
    double normalization_defect{};
    double gamma{};
    double omega{};
    double max_spacing{};

    /// Free Lorentzian with the same centre; subtracted before every transform.
    double reference(double e) const {
        const double x = e - omega, hw = 0.5 * gamma;
        return gamma / two_pi / (x * x + hw * hw);
    }
    /// Longest time the energy grid resolves.
    double horizon() const { return two_pi / max_spacing / 4.0; }
};

struct SpectralOptions {
    Window window{};                    // energy window; must sit inside the usable grid range
    int points_per_linewidth{160};
    double horizon{5.0};                // longest time the transform must resolve
};

namespace detail {

/// Energy nodes: fine spacing across the emission line around omega,
/// refined near the band edges, never coarser than the horizon allows.
inline std::vector<double> spectral_nodes(const FormFactorGrid& grid, double omega, double linewidth,
                                          const SpectralOptions& opt) {
    const double d = grid.delta;
    const double h_line = linewidth / std::max(opt.points_per_linewidth, 4);
    const double h_max = std::min(pi / (2.0 * opt.horizon), d / 50.0);
    const double edges[2] = {grid.center - d, grid.center + d};
    auto spacing = [&](double e) {
        double h = std::min(h_max, h_line + 0.02 * std::abs(e - omega));
        for (double b : edges) h = std::min(h, d / 200.0 + 0.05 * std::abs(e - b));
        return h;
    };
    std::vector<double> out;
    for (double e = opt.window.lo; e < opt.window.hi; e += spacing(e)) out.push_back(e);
    out.push_back(opt.window.hi);
    return out;
}

/// Int_0^1 ((1-u) y0 + u y1) exp(-i theta u) du, exact for the linear interpolant.
inline cplx filon_linear(double theta, double y0, double y1) {
    cplx m0, m1;  // Int e^{-i theta u} du and Int u e^{-i theta u} du
    if (std::abs(theta) < 1.0) {
        // Power series; the closed form cancels like 1/theta^2 here.
        // m0 = sum (-i theta)^k / (k+1)!, m1 = sum (-i theta)^k / ((k+2) k!)
        cplx term = 1.0;  // (-i theta)^k / k!
        for (int k = 0; k < 24; ++k) {
            m0 += term / static_cast<double>(k + 1);
            m1 += term / static_cast<double>(k + 2);
            term *= cplx(0.0, -theta) / static_cast<double>(k + 1);
        }
    } else {
        const cplx e = std::polar(1.0, -theta);
        const cplx i(0.0, 1.0);
        m0 = (1.0 - e) / (i * theta);
        m1 = (e - 1.0) / (theta * theta) + e * i / theta;
    }
    return y0 * (m0 - m1) + y1 * m1;
}

} // namespace detail

/// Tabulates A(E) = |g_E|^2 / [(E - omega - Re Sigma)^2 + (pi |g_E|^2)^2].
inline SpectralFunction spectral_function(const FormFactorGrid& grid, double omega, SpectralOptions opt = {}) {
    const SelfEnergy sigma(grid);
    if (opt.window.width() <= 0.0) opt.window = {sigma.usable_lo(), sigma.usable_hi()};
    if (opt.window.lo < sigma.usable_lo() || opt.window.hi > sigma.usable_hi())
        throw Error(ErrorCode::EdgeProximity, "spectral window reaches the form-factor window edge");

    const double linewidth = std::min(grid.gamma, two_pi * sigma.form_factor(omega));
    SpectralFunction sf;
    sf.gamma = grid.gamma;
    sf.omega = omega;
    sf.E = detail::spectral_nodes(grid, omega, linewidth, opt);
    sf.A.resize(sf.E.size());
    for (std::size_t i = 0; i < sf.E.size(); ++i) {
        const double e = sf.E[i];
        const double g2 = sigma.form_factor(e);
        const double shift = e - omega - sigma.real_part(e);
        const double width = pi * g2;
        sf.A[i] = g2 / (shift * shift + width * width);
    }
    const double peak = *std::max_element(sf.A.begin(), sf.A.end());
    if (sf.A.front() >= 1e-6 * peak || sf.A.back() >= 1e-6 * peak)
        throw Error(ErrorCode::WindowTooNarrow, "spectral function has not decayed at the window edges");

    sf.max_spacing = 0.0;
    double excess = 0.0;
    for (std::size_t i = 0; i + 1 < sf.E.size(); ++i) {
        const double h = sf.E[i + 1] - sf.E[i];
        sf.max_spacing = std::max(sf.max_spacing, h);
        excess += 0.5 * h * ((sf.A[i] - sf.reference(sf.E[i])) + (sf.A[i + 1] - sf.reference(sf.E[i + 1])));
    }
    // The reference Lorentzian integrates to one over the real line.
    sf.normalization_defect = std::abs(excess);
    return sf;
}

/// f(t) = Int A(E) exp(-i (E - omega) t) dE, i.e. the survival amplitude in
/// the frame rotating at omega. The free Lorentzian is transformed exactly;
/// the remainder A - L by piecewise-linear Filon quadrature.
inline cplx survival_amplitude_spectral(const SpectralFunction& sf, double t) {
    if (t < 0.0 || t > sf.horizon() * (1.0 + 1e-12))
        throw Error(ErrorCode::HorizonExceeded,
                    "t = " + std::to_string(t) + " beyond the resolved horizon " + std::to_string(sf.horizon()));
    cplx acc = 0.0;
    for (std::size_t i = 0; i + 1 < sf.E.size(); ++i) {
        const double e0 = sf.E[i], e1 = sf.E[i + 1], h = e1 - e0;
        const double y0 = sf.A[i] - sf.reference(e0), y1 = sf.A[i + 1] - sf.reference(e1);
        acc += h * std::polar(1.0, -(e0 - sf.omega) * t) * detail::filon_linear(h * t, y0, y1);
    }
    return std::exp(-0.5 * sf.gamma * t) + acc;
}

inline std::vector<double> survival_spectral(const SpectralFunction& sf, std::span<const double> times) {
    std::vector<double> s(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) s[i] = std::norm(survival_amplitude_spectral(sf, times[i]));
    return s;
}

/// Lowest-order decay probability
///   1 - s(t) = Int dmu |g_mu|^2 sin^2[(mu - omega) t/2] / [(mu - omega)/2]^2.
/// The flat part integrates to gamma t exactly; the deviation is integrated
/// with composite Simpson on a sub-grid of the interpolant with at least
/// eight points per oscillation period.
inline double perturbative_decay(const FormFactorGrid& grid, double omega, double t,
                                 std::size_t max_points = 20'000'000) {
    if (t < 0.0) throw Error(ErrorCode::BadParameter, "t must be non-negative");
    if (t == 0.0) return 0.0;
    const auto dev = deviation_spline(grid);
    const double period = two_pi / t;
    const double h_target = period / 8.0;
    auto kernel = [&](double mu) {
        const double x = 0.5 * (mu - omega) * t;
        const double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
        return t * t * sinc * sinc;
    };
    std::size_t total = 0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        total += 2 * static_cast<std::size_t>(std::ceil((grid.mu[i + 1] - grid.mu[i]) / (2.0 * h_target)));
    if (total > max_points)
        throw Error(ErrorCode::UnderResolvedOscillation,
                    "needs " + std::to_string(total) + " points to resolve the sinc^2 kernel");
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double a = grid.mu[i], b = grid.mu[i + 1];
        const auto m = 2 * static_cast<long>(std::ceil((b - a) / (2.0 * h_target)));
        const double h = (b - a) / static_cast<double>(m);
        double seg = 0.0;
        for (long j = 0; j <= m; ++j) {
            const double mu = a + h * static_cast<double>(j);
            const double wgt = (j == 0 || j == m) ? 1.0 : (j % 2 ? 4.0 : 2.0);
            seg += wgt * dev.eval_in(i, mu) * kernel(mu);
        }
        acc += seg * h / 3.0;
    }
    return grid.gamma * t + acc;
}

struct StageRates {
    double free_rate{};
    double suppressed_rate{};
    double ratio() const { return suppressed_rate / free_rate; }
};

/// (gamma, 2 pi |g_omega|^2): decay rates before and after t ~ 1/Delta.
inline StageRates stage_rates(const ValidatedModel& m) {
    return {m.gamma(), two_pi * renormalized_form_factor(m, m.omega())};
}

} // namespace qze
