#include <gtest/gtest.h>

#include <cmath>

#include "qze/dynamics.hpp"
#include "qze/scenario.hpp"
#include "qze/spectral.hpp"

using namespace qze;

namespace {

ValidatedModel power_law(double two_pi_delta, double eta) {
    ModelParams p;
    p.band = DetectorBand::power_law(eta, two_pi_delta / two_pi, 6);
    return validate_params(p);
}

// Form factor whose deviation is a Lorentzian of half-width b, so the
// principal-value integral is known in closed form.
FormFactorGrid lorentzian_deviation(double c, double b, double W, double h) {
    FormFactorGrid g;
    g.gamma = 1.0;
    g.center = 0.0;
    g.delta = 1.0;
    g.window = {-W, W};
    const long n = static_cast<long>(std::round(W / h));
    for (long j = -n; j <= n; ++j) {
        const double mu = h * static_cast<double>(j);
        g.mu.push_back(mu);
        g.g2.push_back(1.0 / two_pi + c * b / (mu * mu + b * b));
    }
    return g;
}

} // namespace

TEST(Filon, MatchesDirectQuadrature) {
    for (double theta : {0.0, 1e-5, 1e-3, 0.5, 0.999, 1.001, 20.0, -3.0}) {
        const double y0 = 0.7, y1 = -1.3;
        const auto re = quad::integrate([&](double u) { return ((1 - u) * y0 + u * y1) * std::cos(theta * u); }, 0.0, 1.0);
        const auto im = quad::integrate([&](double u) { return -((1 - u) * y0 + u * y1) * std::sin(theta * u); }, 0.0, 1.0);
        const auto f = detail::filon_linear(theta, y0, y1);
        EXPECT_NEAR(f.real(), re.value, 1e-13) << theta;
        EXPECT_NEAR(f.imag(), im.value, 1e-13) << theta;
    }
}

TEST(SelfEnergy, HilbertTransformOfLorentzian) {
    const double c = 0.05, b = 1.0;
    const SelfEnergy sigma(lorentzian_deviation(c, b, 1000.0, 0.02));
    for (double E : {-7.0, -1.0, 0.0, 0.3, 2.5, 40.0}) {
        const double exact = c * pi * E / (E * E + b * b);
        EXPECT_NEAR(sigma.real_part(E), exact, 2e-6) << "E = " << E;
        EXPECT_NEAR(sigma(E).imag(), -pi * (1.0 / two_pi + c * b / (E * E + b * b)), 1e-8);
    }
}

TEST(SelfEnergy, AntisymmetricAboutBandCentre) {
    const auto m = power_law(100.0, 100.0);
    const auto g = form_factor_grid(m, spectral_grid_window(m));
    const SelfEnergy sigma(g);
    EXPECT_NEAR(sigma.real_part(0.0), 0.0, 1e-9);
    for (double E : {3.0, 15.0, 40.0}) EXPECT_NEAR(sigma.real_part(E), -sigma.real_part(-E), 1e-9);
}

TEST(SelfEnergy, EdgeProximity) {
    const SelfEnergy sigma(lorentzian_deviation(0.05, 1.0, 100.0, 0.1));
    try {
        sigma(99.9);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EdgeProximity);
    }
}

TEST(Spectral, FreeAtomIsExponential) {
    const auto m = power_law(100.0, 0.0);
    const auto route = spectral_route(m);
    EXPECT_LT(route.sf.normalization_defect, 1e-12);
    for (double t : {0.0, 0.5, 1.0, 5.0}) EXPECT_NEAR(std::norm(survival_amplitude_spectral(route.sf, t)), std::exp(-t), 1e-12);
}

TEST(Spectral, AgreesWithDynamics) {
    const auto m = power_law(100.0, 10.0);
    const auto route = spectral_route(m);
    EXPECT_LT(route.sf.normalization_defect, 1e-4);
    for (double a : route.sf.A) EXPECT_GE(a, 0.0);
    const auto times = uniform_times(5.0, 25);
    const auto dyn = propagate(discretize_continuum(m), times);
    const auto spec = survival_spectral(route.sf, times);
    for (std::size_t i = 0; i < times.size(); ++i) EXPECT_NEAR(spec[i], dyn.s[i], 1e-3) << times[i];
}

TEST(Spectral, HorizonExceeded) {
    const auto route = spectral_route(power_law(100.0, 10.0));
    EXPECT_THROW(survival_amplitude_spectral(route.sf, 10.0 * route.sf.horizon()), Error);
    EXPECT_GE(route.sf.horizon(), 5.0 * (1.0 - 1e-12));
}

TEST(Perturbative, FreeIsLinear) {
    const auto m = power_law(100.0, 0.0);
    const auto g = form_factor_grid(m, spectral_grid_window(m));
    for (double t : {0.01, 0.1, 1.0}) EXPECT_NEAR(perturbative_decay(g, 0.0, t), t, 1e-14);
}

TEST(Perturbative, MatchesFullDecayEarly) {
    const auto m = power_law(100.0, 100.0);
    const auto g = form_factor_grid(m, spectral_grid_window(m));
    const std::vector<double> times = {0.002, 0.01, 0.03};
    const auto dyn = propagate(discretize_continuum(m), times);
    for (std::size_t i = 0; i < times.size(); ++i)
        EXPECT_NEAR(perturbative_decay(g, 0.0, times[i]) / (1.0 - dyn.s[i]), 1.0, 0.05);
}

TEST(Perturbative, RefusesUnderResolvedKernel) {
    const auto m = power_law(100.0, 100.0);
    const auto g = form_factor_grid(m, spectral_grid_window(m));
    try {
        perturbative_decay(g, 0.0, 5.0, 1000);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnderResolvedOscillation);
    }
}

TEST(StageRates, FlatHalf) {
    ModelParams p;
    p.band = DetectorBand::flat(2.0, 1.0);
    const auto r = stage_rates(validate_params(p));
    EXPECT_DOUBLE_EQ(r.free_rate, 1.0);
    EXPECT_NEAR(r.ratio(), 0.5, 1e-12);
}

TEST(StageRates, Fig3SetsShareScaleFreePlateau) {
    // {100,100} and {1000,1000} have the same eta / 2 pi Delta, hence the
    // same plateau; {100,10} is suppressed less.
    const double a = stage_rates(power_law(100.0, 100.0)).ratio();
    const double b = stage_rates(power_law(100.0, 10.0)).ratio();
    const double c = stage_rates(power_law(1000.0, 1000.0)).ratio();
    EXPECT_NEAR(a, c, 1e-12);
    EXPECT_GT(b, a);
}
