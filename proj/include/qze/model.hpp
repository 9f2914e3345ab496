// model.hpp: scenario definition: atom, detector band, numerical controls.
//
// Energies share the unit of gamma and times its inverse; every formula
// carries gamma explicitly, so a scenario written with gamma = 1 reads
// directly in the natural units of the atom.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qze/errors.hpp"

namespace qze {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

enum class ProfileKind { PowerLaw, FlatInfiniteN };

/// Detector coupling density eta_k around a band centre.
struct DetectorBand {
    double eta{0.0};                   // coupling strength; response time tau = 1/eta
    double delta{1.0};                 // half-bandwidth
    ProfileKind profile{ProfileKind::PowerLaw};
    int exponent{6};                   // only used by PowerLaw
    std::optional<double> center;      // defaults to the atomic transition energy

    static DetectorBand power_law(double eta, double delta, int n = 6) {
        return DetectorBand{eta, delta, ProfileKind::PowerLaw, n, std::nullopt};
    }
    static DetectorBand flat(double eta, double delta) {
        return DetectorBand{eta, delta, ProfileKind::FlatInfiniteN, 0, std::nullopt};
    }
    DetectorBand centered_at(double c) const {
        DetectorBand b = *this;
        b.center = c;
        return b;
    }
    double center_or(double omega) const { return center.value_or(omega); }
    bool is_flat() const { return profile == ProfileKind::FlatInfiniteN; }
};

/// Everything the discretization and integrators need. Unset values are
/// filled from gamma, delta and the horizon by validate_params.
struct NumericalControls {
    std::optional<double> cutoff;      // K: half-width of the photon grid around omega
    std::optional<double> dk;          // photon grid spacing
    double horizon{5.0};               // T, in units of 1/gamma
    std::optional<double> dt;          // integrator step; auto when unset
    double step_factor{0.05};          // auto dt = step_factor / fastest in-band rate
    double quad_tol{1e-10};            // relative tolerance for form-factor quadrature
    double norm_tolerance{1e-6};       // propagate() fails above this norm defect
    bool cutoff_override{false};       // accept K below the default rule
};

struct ModelParams {
    double gamma{1.0};
    double omega{0.0};
    DetectorBand band{};
    NumericalControls numerics{};
};

/// Smallest cutoff accepted without override: the band (wherever it sits
/// relative to omega) plus ten band or linewidth scales on either side.
inline double default_cutoff(const ModelParams& p) {
    const double c = p.band.center_or(p.omega);
    return std::abs(c - p.omega) + 10.0 * std::max(p.band.delta, p.gamma);
}

/// Largest photon spacing that keeps the discrete-continuum recurrence
/// 2*pi/dk at or beyond four horizons.
inline double revival_limited_dk(double horizon) { return pi / (2.0 * horizon); }

class ValidatedModel {
public:
    const ModelParams& params() const noexcept { return p_; }
    double gamma() const noexcept { return p_.gamma; }
    double omega() const noexcept { return p_.omega; }
    const DetectorBand& band() const noexcept { return p_.band; }
    double center() const noexcept { return *p_.band.center; }
    const NumericalControls& numerics() const noexcept { return p_.numerics; }
    double cutoff() const noexcept { return *p_.numerics.cutoff; }
    double dk() const noexcept { return *p_.numerics.dk; }
    double horizon() const noexcept { return p_.numerics.horizon; }

private:
    explicit ValidatedModel(ModelParams p) : p_(std::move(p)) {}
    friend ValidatedModel validate_params(ModelParams p);

    ModelParams p_;
};

/// Checks every invariant, collects all violations, and fills defaults.
inline ValidatedModel validate_params(ModelParams p) {
    std::vector<Violation> errs;
    auto finite = [](double x) { return std::isfinite(x); };

    if (!(p.gamma > 0.0) || !finite(p.gamma))
        errs.push_back({ErrorCode::NonPositiveRate, "gamma must be positive"});
    if (!finite(p.omega))
        errs.push_back({ErrorCode::BadParameter, "omega must be finite"});
    if (!(p.band.eta >= 0.0) || !finite(p.band.eta))
        errs.push_back({ErrorCode::BadParameter, "eta must be non-negative"});
    if (!(p.band.delta > 0.0) || !finite(p.band.delta))
        errs.push_back({ErrorCode::BadParameter, "delta must be positive"});
    if (p.band.profile == ProfileKind::PowerLaw) {
        if (p.band.exponent % 2 != 0)
            errs.push_back({ErrorCode::OddExponent,
                            "band exponent n = " + std::to_string(p.band.exponent) + " is odd"});
        else if (p.band.exponent < 2)
            errs.push_back({ErrorCode::BadParameter, "band exponent must be at least 2"});
    }
    if (p.band.center && !finite(*p.band.center))
        errs.push_back({ErrorCode::BadParameter, "band center must be finite"});

    auto& num = p.numerics;
    if (!(num.horizon > 0.0) || !finite(num.horizon))
        errs.push_back({ErrorCode::BadParameter, "time horizon must be positive"});
    if (!(num.quad_tol > 0.0))
        errs.push_back({ErrorCode::BadParameter, "quadrature tolerance must be positive"});
    if (!(num.step_factor > 0.0))
        errs.push_back({ErrorCode::BadParameter, "step factor must be positive"});
    if (num.dt && !(*num.dt > 0.0))
        errs.push_back({ErrorCode::BadParameter, "integrator step must be positive"});
    if (num.dk && !(*num.dk > 0.0))
        errs.push_back({ErrorCode::BadParameter, "photon grid spacing must be positive"});
    if (num.cutoff && num.cutoff < p.band.delta)
        errs.push_back({ErrorCode::BadWindow, "cutoff K is narrower than the half-bandwidth"});

    if (!errs.empty()) throw ValidationError(std::move(errs));

    if (!p.band.center) p.band.center = p.omega;
    if (!num.cutoff) num.cutoff = default_cutoff(p);
    if (!num.dk) num.dk = revival_limited_dk(num.horizon);
    return ValidatedModel(std::move(p));
}

/// eta_k: coupling density of photon energy k to the detector continuum.
inline double detector_response(const DetectorBand& band, double center, double k) {
    const double x = (k - center) / band.delta;
    const double peak = band.eta / two_pi;
    if (band.is_flat()) return std::abs(x) < 1.0 ? peak : 0.0;
    const double ratio = std::pow(x, band.exponent);
    return peak / (1.0 + ratio);
}

inline double detector_response(const ValidatedModel& m, double k) {
    return detector_response(m.band(), m.center(), k);
}

enum class Verdict { QzeRegime, WeakSuppression, NoDetectionOverlap };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::QzeRegime: return "QZE-regime";
    case Verdict::WeakSuppression: return "weak-suppression";
    case Verdict::NoDetectionOverlap: return "no-detection-overlap";
    }
    return "unknown";
}

// The inequalities "gamma/Delta << 1" and "tau*Delta <~ 1" carry no numbers
// of their own; these defaults are choices of this library.
struct VerdictThresholds {
    double max_linewidth_ratio{0.1};
    double max_response_ratio{1.0};
};

struct ConditionReport {
    double ratio_linewidth{};       // gamma / Delta
    double ratio_response{};        // tau * Delta = Delta / eta
    double suppression_estimate{};  // 2 pi |g_Omega|^2 / gamma for the flat band
    Verdict verdict{};
};

inline ConditionReport qze_condition_report(const ValidatedModel& m,
                                            const VerdictThresholds& th = {}) {
    const auto& b = m.band();
    if (!(b.eta > 0.0)) throw Error(ErrorCode::NoDetector, "eta = 0: no measurement, tau undefined");
    ConditionReport r;
    r.ratio_linewidth = m.gamma() / b.delta;
    r.ratio_response = b.delta / b.eta;
    r.suppression_estimate = 2.0 / pi * std::atan(2.0 * b.delta / b.eta);
    if (std::abs(m.center() - m.omega()) > b.delta)
        r.verdict = Verdict::NoDetectionOverlap;
    else if (r.ratio_linewidth <= th.max_linewidth_ratio && r.ratio_response <= th.max_response_ratio)
        r.verdict = Verdict::QzeRegime;
    else
        r.verdict = Verdict::WeakSuppression;
    return r;
}

} // namespace qze
