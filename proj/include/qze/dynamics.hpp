// dynamics.hpp: single-excitation propagation of atom + photon continuum with
// the detector continuum eliminated into per-mode damping pi*eta_k.
//
// Amplitudes live in a frame rotating at omega. The flat atom-photon coupling
// over the unbounded photon line is split into its exact Markovian part (the
// free decay -gamma/2 of the atom) and the difference between damped photon
// modes f_j and undamped "reference" copies h_j on the grid:
//
//   da/dt   = -gamma/2 a - i c sum_j (f_j - h_j)
//   df_j/dt = -i (w_j - i pi eta_j) f_j - i c a
//   dh_j/dt = -i w_j h_j - i c a,            c = sqrt(gamma/2pi) sqrt(dk)
//
// Only modes with eta_j > 0 differ from their references, so the photon grid
// needs to cover the detection band, not the whole emission spectrum. The
// photons outside the grid carry gamma Int|a|^2 - sum|h_j|^2, which enters
// eps; absorption r is the separately integrated flux sum 2 pi eta_j |f_j|^2.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <span>
#include <vector>

#include "qze/errors.hpp"
#include "qze/interpolation.hpp"
#include "qze/model.hpp"

namespace qze {

using cplx = std::complex<double>;

struct DiscretizedModel {
    std::vector<double> k_grid;           // photon energies, symmetric about omega
    std::vector<cplx> mode_energy;        // k_j - i pi eta_{k_j}
    double coupling{};                    // sqrt(gamma / 2pi) * sqrt(dk)
    double dk{};
    double cutoff{};
    double horizon{};
    double gamma{};
    double omega{};
    double dt_max{};                      // largest integrator step
    double norm_tolerance{};

    std::size_t size() const { return k_grid.size(); }
};

/// Fastest rate the in-band dynamics must resolve.
inline double fastest_band_rate(const ValidatedModel& m) {
    return std::max({m.gamma(), m.band().delta, 0.5 * m.band().eta});
}

inline DiscretizedModel discretize_continuum(const ValidatedModel& m) {
    const double T = m.horizon();
    const double dk = m.dk();
    const double K = m.cutoff();
    if (2.0 * pi / dk <= 4.0 * T * (1.0 - 1e-12))
        throw Error(ErrorCode::RevivalGuardViolated,
                    "dk = " + std::to_string(dk) + " puts the recurrence 2pi/dk inside four horizons");
    if (K < default_cutoff(m.params()) * (1.0 - 1e-12) && !m.numerics().cutoff_override)
        throw Error(ErrorCode::WindowTooNarrow,
                    "cutoff K = " + std::to_string(K) + " is below the default rule " +
                        std::to_string(default_cutoff(m.params())));

    DiscretizedModel d;
    d.dk = dk;
    d.cutoff = K;
    d.horizon = T;
    d.gamma = m.gamma();
    d.omega = m.omega();
    d.coupling = std::sqrt(m.gamma() / two_pi * dk);
    d.dt_max = m.numerics().dt.value_or(m.numerics().step_factor / fastest_band_rate(m));
    d.norm_tolerance = m.numerics().norm_tolerance;

    const auto half = static_cast<long>(std::ceil(K / dk - 1e-9));
    d.k_grid.reserve(static_cast<std::size_t>(2 * half + 1));
    d.mode_energy.reserve(d.k_grid.capacity());
    for (long j = -half; j <= half; ++j) {
        const double k = m.omega() + static_cast<double>(j) * dk;
        d.k_grid.push_back(k);
        d.mode_energy.emplace_back(k, -pi * detector_response(m, k));
    }
    return d;
}

struct ProbabilityTrace {
    std::vector<double> t;
    std::vector<double> s;
    std::vector<double> eps;
    std::vector<double> r;
    std::vector<double> norm_defect;

    std::size_t size() const { return t.size(); }
    double max_norm_defect() const {
        return norm_defect.empty() ? 0.0 : *std::max_element(norm_defect.begin(), norm_defect.end());
    }
};

namespace detail {

// Lawson (integrating-factor) RK4 over the linear part diag(-gamma/2, -i z_j,
// -i w_j). Mode arrays hold only modes with eta_j > 0; the others never
// differ from their references and drop out of every observable.
class LawsonPropagator {
public:
    explicit LawsonPropagator(const DiscretizedModel& m) : gamma_(m.gamma), c_(m.coupling) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            const double damp = -m.mode_energy[j].imag();
            if (damp > 0.0) {
                w_.push_back(m.mode_energy[j].real() - m.omega);
                damp_.push_back(damp);
            }
        }
        const std::size_t n = w_.size();
        fr_.assign(n, 0.0);
        fi_.assign(n, 0.0);
        hr_.assign(n, 0.0);
        hi_.assign(n, 0.0);
    }

    std::size_t active_modes() const { return w_.size(); }

    /// Advances by nsteps of length h.
    void advance(double h, long nsteps) {
        if (nsteps <= 0) return;
        if (h != h_) set_step(h);
        for (long n = 0; n < nsteps; ++n) step();
    }

    double survival() const { return std::norm(a_); }
    double absorbed() const { return r_; }

    /// Unabsorbed photon probability: grid photons plus the emission that
    /// went to modes outside the grid.
    double unabsorbed() const {
        double sf = 0.0, sh = 0.0;
        for (std::size_t j = 0; j < w_.size(); ++j) {
            sf += fr_[j] * fr_[j] + fi_[j] * fi_[j];
            sh += hr_[j] * hr_[j] + hi_[j] * hi_[j];
        }
        return sf - sh + m_;
    }

private:
    void set_step(double h) {
        h_ = h;
        const std::size_t n = w_.size();
        pr_.resize(n); pi_.resize(n); p2r_.resize(n); p2i_.resize(n);
        qr_.resize(n); qi_.resize(n); q2r_.resize(n); q2i_.resize(n);
        wt_.resize(n); wp2_.resize(n); wp4_.resize(n);
        d1_ = 0.0;
        sw0_ = 0.0;
        sw1_ = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double ph = -0.5 * h * w_[j];
            const double decay = std::exp(-0.5 * h * damp_[j]);
            const cplx q = std::polar(1.0, ph);
            const cplx p = decay * q;
            const cplx p2 = p * p, q2 = q * q;
            pr_[j] = p.real(); pi_[j] = p.imag();
            p2r_[j] = p2.real(); p2i_[j] = p2.imag();
            qr_[j] = q.real(); qi_[j] = q.imag();
            q2r_[j] = q2.real(); q2i_[j] = q2.imag();
            const double w = 2.0 * damp_[j];       // absorption rate 2 pi eta_j
            wt_[j] = w;
            wp2_[j] = w * decay * decay;
            wp4_[j] = wp2_[j] * decay * decay;
            d1_ += p - q;
            sw0_ += w;
            sw1_ += wp2_[j];
        }
        atom_half_ = std::exp(-0.25 * gamma_ * h);
        gather();
    }

    // Mode sums needed by the stage algebra, for the current state.
    void gather() {
        Sums s;
        for (std::size_t j = 0; j < w_.size(); ++j) accumulate(s, j);
        sums_ = s;
    }

    struct Sums {
        cplx s1{}, u1{}, u2{}, v1{}, v2{}, v3{};
        double w0{}, w1{}, w2{};
    };

    void accumulate(Sums& s, std::size_t j) const {
        const double fr = fr_[j], fi = fi_[j], hr = hr_[j], hi = hi_[j];
        const double pfr = pr_[j] * fr - pi_[j] * fi, pfi = pr_[j] * fi + pi_[j] * fr;
        const double qhr = qr_[j] * hr - qi_[j] * hi, qhi = qr_[j] * hi + qi_[j] * hr;
        const double p2fr = p2r_[j] * fr - p2i_[j] * fi, p2fi = p2r_[j] * fi + p2i_[j] * fr;
        const double q2hr = q2r_[j] * hr - q2i_[j] * hi, q2hi = q2r_[j] * hi + q2i_[j] * hr;
        const double f2 = fr * fr + fi * fi;
        s.s1 += cplx(fr - hr, fi - hi);
        s.u1 += cplx(pfr - qhr, pfi - qhi);
        s.u2 += cplx(p2fr - q2hr, p2fi - q2hi);
        s.w0 += wt_[j] * f2;
        s.w1 += wp2_[j] * f2;
        s.w2 += wp4_[j] * f2;
        s.v1 += cplx(wp2_[j] * fr, wp2_[j] * fi);
        s.v2 += cplx(wt_[j] * pfr, wt_[j] * pfi);
        s.v3 += cplx(wp2_[j] * pfr, wp2_[j] * pfi);
    }

    void step() {
        const double h = h_;
        const cplx mic(0.0, -c_);  // -i c
        const double A = atom_half_, A2 = A * A;
        const Sums& s = sums_;
        const cplx a = a_;

        const cplx k1 = mic * s.s1, b1 = mic * a;
        const cplx a2 = A * (a + 0.5 * h * k1);
        const cplx k2 = mic * (s.u1 + 0.5 * h * b1 * d1_), b2 = mic * a2;
        const cplx a3 = A * a + 0.5 * h * k2;
        const cplx k3 = mic * s.u1, b3 = mic * a3;
        const cplx a4 = A2 * a + h * A * k3;
        const cplx k4 = mic * (s.u2 + h * b3 * d1_), b4 = mic * a4;

        a_ = A2 * a + h / 6.0 * (A2 * k1 + 2.0 * A * (k2 + k3) + k4);

        const cplx be2 = 0.5 * h * b1, be3 = 0.5 * h * b2, be4 = h * b3;
        const double F1 = s.w0;
        const double F2 = s.w1 + 2.0 * (std::conj(be2) * s.v1).real() + std::norm(be2) * sw1_;
        const double F3 = s.w1 + 2.0 * (std::conj(be3) * s.v2).real() + std::norm(be3) * sw0_;
        const double F4 = s.w2 + 2.0 * (std::conj(be4) * s.v3).real() + std::norm(be4) * sw1_;
        r_ += h / 6.0 * (F1 + 2.0 * F2 + 2.0 * F3 + F4);
        m_ += gamma_ * h / 6.0 *
              (std::norm(a) + 2.0 * std::norm(a2) + 2.0 * std::norm(a3) + std::norm(a4));

        // f <- P^2 (f + c1) + P c23 + c4, same for h with Q.
        const cplx c1 = h / 6.0 * b1, c23 = h / 3.0 * (b2 + b3), c4 = h / 6.0 * b4;
        Sums next;
        for (std::size_t j = 0; j < w_.size(); ++j) {
            const double xr = fr_[j] + c1.real(), xi = fi_[j] + c1.imag();
            fr_[j] = p2r_[j] * xr - p2i_[j] * xi + pr_[j] * c23.real() - pi_[j] * c23.imag() + c4.real();
            fi_[j] = p2r_[j] * xi + p2i_[j] * xr + pr_[j] * c23.imag() + pi_[j] * c23.real() + c4.imag();
            const double yr = hr_[j] + c1.real(), yi = hi_[j] + c1.imag();
            hr_[j] = q2r_[j] * yr - q2i_[j] * yi + qr_[j] * c23.real() - qi_[j] * c23.imag() + c4.real();
            hi_[j] = q2r_[j] * yi + q2i_[j] * yr + qr_[j] * c23.imag() + qi_[j] * c23.real() + c4.imag();
            accumulate(next, j);
        }
        sums_ = next;
    }

    double gamma_, c_;
    std::vector<double> w_, damp_;
    std::vector<double> fr_, fi_, hr_, hi_;
    std::vector<double> pr_, pi_, p2r_, p2i_, qr_, qi_, q2r_, q2i_, wt_, wp2_, wp4_;
    cplx d1_{};
    double sw0_{}, sw1_{};
    double atom_half_{1.0};
    double h_{-1.0};
    Sums sums_{};
    cplx a_{1.0, 0.0};
    double r_{0.0};
    double m_{0.0};
};

} // namespace detail

/// Evolves |x,0,0> and samples (s, eps, r) at the requested times, which must
/// be sorted and lie in [0, horizon]. Between samples the step is the largest
/// h <= dt_max that divides the interval evenly.
inline ProbabilityTrace propagate(const DiscretizedModel& m, std::span<const double> sample_times) {
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        const double t = sample_times[i];
        if (!(t >= 0.0) || t > m.horizon * (1.0 + 1e-12))
            throw Error(ErrorCode::BadParameter, "sample time " + std::to_string(t) + " outside [0, T]");
        if (i > 0 && t < sample_times[i - 1])
            throw Error(ErrorCode::BadParameter, "sample times must be sorted");
    }

    detail::LawsonPropagator prop(m);
    ProbabilityTrace tr;
    double now = 0.0;
    double last_h = -1.0;
    for (double ts : sample_times) {
        const double span = ts - now;
        if (span > 0.0) {
            const long n = static_cast<long>(std::ceil(span / m.dt_max * (1.0 - 1e-12)));
            double h = span / static_cast<double>(n);
            // Reuse the previous step when it differs only by rounding.
            if (last_h > 0.0 && std::abs(h - last_h) <= 1e-12 * last_h) h = last_h;
            prop.advance(h, n);
            last_h = h;
            now = ts;
        }
        const double s = prop.survival(), eps = prop.unabsorbed(), r = prop.absorbed();
        tr.t.push_back(ts);
        tr.s.push_back(s);
        tr.eps.push_back(eps);
        tr.r.push_back(r);
        tr.norm_defect.push_back(std::abs(1.0 - (s + eps + r)));
    }
    if (tr.max_norm_defect() > m.norm_tolerance)
        throw Error(ErrorCode::ToleranceNotMet,
                    "norm defect " + std::to_string(tr.max_norm_defect()) + " exceeds tolerance " +
                        std::to_string(m.norm_tolerance));
    return tr;
}

/// n + 1 equally spaced times covering [0, T].
inline std::vector<double> uniform_times(double T, int n) {
    std::vector<double> t(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) t[static_cast<std::size_t>(i)] = T * i / n;
    return t;
}

/// Union of a uniform grid and n_log logarithmically spaced times in [t_min, T].
inline std::vector<double> mixed_times(double T, int n_uniform, double t_min, int n_log) {
    auto t = uniform_times(T, n_uniform);
    for (int i = 0; i < n_log; ++i)
        t.push_back(t_min * std::pow(T / t_min, static_cast<double>(i) / std::max(n_log - 1, 1)));
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12 * b; }),
            t.end());
    for (auto& v : t) v = std::min(v, T);
    return t;
}

/// Shift d minimizing the mean-square gap between r(t) and 1 - s(t - d) over
/// samples with t >= d, by golden-section search on [0, T/2].
inline double response_delay(const ProbabilityTrace& tr) {
    if (tr.size() < 4 || *std::max_element(tr.r.begin(), tr.r.end()) < 0.5)
        throw Error(ErrorCode::NoResponse, "absorbed probability never reaches 0.5");
    const CubicSpline s_of_t(tr.t, tr.s);
    const double t0 = tr.t.front(), T = tr.t.back();
    auto cost = [&](double d) {
        double acc = 0.0;
        int n = 0;
        for (std::size_t i = 0; i < tr.size(); ++i) {
            if (tr.t[i] < t0 + d) continue;
            const double lagged = 1.0 - s_of_t(tr.t[i] - d);
            const double diff = tr.r[i] - lagged;
            acc += diff * diff;
            ++n;
        }
        return n ? acc / n : 0.0;
    };
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 0.0, hi = 0.5 * (T - t0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = cost(x1), f2 = cost(x2);
    while (hi - lo > 1e-9 * (T - t0)) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = cost(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = cost(x2);
        }
    }
    return 0.5 * (lo + hi);
}

struct RatePoint {
    double t;
    double rate;  // ln s / (gamma t)
};

/// ln s(t) / (gamma t) at every sample with t > 0.
inline std::vector<RatePoint> decay_rate_trace(const ProbabilityTrace& tr, double gamma) {
    std::vector<RatePoint> out;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        if (tr.t[i] <= 0.0) continue;
        if (!(tr.s[i] > 0.0))
            throw Error(ErrorCode::BadParameter, "survival probability must stay positive for the rate trace");
        out.push_back({tr.t[i], std::log(tr.s[i]) / (gamma * tr.t[i])});
    }
    return out;
}

} // namespace qze
