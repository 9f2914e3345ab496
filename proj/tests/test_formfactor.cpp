#include <gtest/gtest.h>

#include <cmath>

#include "qze/formfactor.hpp"

using namespace qze;

namespace {

// Plain trapezoid over a long uniform grid; the integrand is analytic, so
// this converges far below the tolerances used here.
double trapezoid_oracle(double eta, double delta, int n, double mu) {
    const auto b = DetectorBand::power_law(eta, delta, n);
    const double h = 1e-3 * delta;
    const long half = 300000;  // +- 300 Delta
    double sum = 0.0;
    for (long j = -half; j <= half; ++j) {
        const double k = h * static_cast<double>(j);
        const double e = detector_response(b, 0.0, k);
        sum += e / ((mu - k) * (mu - k) + pi * pi * e * e);
    }
    return sum * h / two_pi;
}

} // namespace

TEST(FormFactor, NoDetectorIsFree) {
    EXPECT_EQ(renormalized_form_factor(DetectorBand::power_law(0.0, 1.0), 0.0, 2.0, 0.3), 2.0 / two_pi);
}

TEST(FormFactor, FrozenRegressionValue) {
    // n = 6, eta = 2 pi Delta, at the band centre; independent of Delta.
    const double frozen = 0.052819008194261955977;
    for (double delta : {1.0, 100.0 / two_pi, 1000.0 / two_pi}) {
        const double g2 = renormalized_form_factor(DetectorBand::power_law(two_pi * delta, delta, 6), 0.0, 1.0, 0.0);
        EXPECT_NEAR(g2, frozen, 1e-14);
    }
    EXPECT_NEAR(trapezoid_oracle(two_pi, 1.0, 6, 0.0), frozen, 1e-12);
}

TEST(FormFactor, AgreesWithTrapezoidOffCentre) {
    for (double mu : {0.4, 0.95, 1.3, 3.0}) {
        const double q = renormalized_form_factor(DetectorBand::power_law(2.0, 1.0, 4), 0.0, 1.0, mu);
        EXPECT_NEAR(q, trapezoid_oracle(2.0, 1.0, 4, mu), 1e-11) << "mu = " << mu;
    }
}

TEST(FormFactor, Fig2CentreValues) {
    const double delta = 100.0 / two_pi;
    const double expect[3] = {0.979075351674438, 0.805863386708307, 0.331871616225985};
    int i = 0;
    for (double rho : {0.01, 0.1, 1.0}) {
        const auto b = DetectorBand::power_law(rho * two_pi * delta, delta, 6);
        EXPECT_NEAR(two_pi * renormalized_form_factor(b, 0.0, 1.0, 0.0), expect[i++], 1e-9);
    }
}

TEST(FormFactor, NarrowPeakStaysAccurate) {
    // eta = 1e-6 Delta: Lorentzian width ~ 1e-6, near the free value.
    const auto b = DetectorBand::power_law(1e-6, 1.0, 6);
    const double g2 = renormalized_form_factor(b, 0.0, 1.0, 0.2);
    EXPECT_NEAR(g2 * two_pi, 1.0, 1e-5);
    EXPECT_LT(g2 * two_pi, 1.0);
}

TEST(FormFactor, Symmetric) {
    const auto b = DetectorBand::power_law(3.0, 2.0, 6);
    for (double x : {0.1, 1.0, 1.9, 2.1, 7.0})
        EXPECT_NEAR(renormalized_form_factor(b, 5.0, 1.0, 5.0 + x), renormalized_form_factor(b, 5.0, 1.0, 5.0 - x),
                    1e-13);
}

TEST(FormFactor, RisesFromCentreToEdge) {
    const auto b = DetectorBand::power_law(two_pi, 1.0, 6);
    double prev = 0.0;
    for (double mu = 0.0; mu <= 1.0; mu += 0.05) {
        const double g2 = renormalized_form_factor(b, 0.0, 1.0, mu);
        EXPECT_GT(g2, prev);
        prev = g2;
    }
}

TEST(FormFactor, ScaleInvariantAndLinearInGamma) {
    const auto b1 = DetectorBand::power_law(1.5, 2.0, 6);
    const auto b2 = DetectorBand::power_law(15.0, 20.0, 6);
    for (double x : {0.0, 0.6, 2.5}) {
        const double a = renormalized_form_factor(b1, 0.0, 1.0, 2.0 * x);
        const double b = renormalized_form_factor(b2, 0.0, 1.0, 20.0 * x);
        EXPECT_NEAR(a, b, 1e-13);
        EXPECT_NEAR(renormalized_form_factor(b1, 0.0, 3.0, 2.0 * x), 3.0 * a, 1e-13);
    }
}

TEST(FormFactor, PositiveAndRelaxesFarAway) {
    const auto b = DetectorBand::power_law(50.0, 1.0, 6);
    for (double mu : {0.0, 0.5, 1.0, 2.0, 10.0}) EXPECT_GT(renormalized_form_factor(b, 0.0, 1.0, mu), 0.0);
    EXPECT_NEAR(renormalized_form_factor(b, 0.0, 1.0, 1e4) * two_pi, 1.0, 1e-6);
}

TEST(FlatBand, ArctanAtCentre) {
    for (double x : {0.1, 1.0, 10.0}) {
        const double q = renormalized_form_factor(DetectorBand::flat(2.0 / x, 1.0), 0.0, 1.0, 0.0);
        EXPECT_NEAR(q / (std::atan(x) / (pi * pi)), 1.0, 1e-10);
    }
}

TEST(FlatBand, MatchesClosedFormEverywhere) {
    const auto b = DetectorBand::flat(0.7, 1.0);
    for (double mu : {-3.0, -1.2, -0.999, -0.3, 0.0, 0.5, 0.99, 1.01, 4.0})
        EXPECT_NEAR(renormalized_form_factor(b, 0.0, 1.0, mu), analytic_flat_band(1.0, 0.7, 1.0, mu, 0.0), 1e-12)
            << "mu = " << mu;
}

TEST(FlatBand, HalfAtEtaTwoDelta) {
    EXPECT_NEAR(two_pi * renormalized_form_factor(DetectorBand::flat(2.0, 1.0), 0.0, 1.0, 0.0), 0.5, 1e-12);
    EXPECT_DOUBLE_EQ(flat_band_suppression(2.0, 1.0), 0.5);
}

TEST(FlatBand, ThousandThousand) {
    EXPECT_NEAR(flat_band_suppression(1000.0, 1000.0 / two_pi), 0.196, 5e-4);
}

TEST(FlatBand, EdgeIsTwoValued) {
    const auto b = DetectorBand::flat(1.0, 1.0);
    try {
        renormalized_form_factor(b, 0.0, 1.0, 1.0);
        FAIL();
    } catch (const BandEdgeError& e) {
        EXPECT_EQ(e.code(), ErrorCode::BandEdge);
        EXPECT_NEAR(e.outside_value() - e.inside_value(), 1.0 / two_pi, 1e-12);
        EXPECT_NEAR(e.inside_value(), 1.0 / (2.0 * pi * pi) * std::atan(4.0), 1e-12);
    }
    EXPECT_THROW(analytic_flat_band(1.0, 1.0, 1.0, -1.0, 0.0), BandEdgeError);
}

TEST(Grid, RejectsNarrowWindow) {
    const auto b = DetectorBand::power_law(1.0, 1.0, 6);
    EXPECT_THROW(form_factor_grid(b, 0.0, 1.0, {-3.0, 3.0}), Error);
}

TEST(Grid, NodesSortedAndCoverWindow) {
    const auto b = DetectorBand::power_law(1.0, 1.0, 6);
    const auto g = form_factor_grid(b, 0.0, 1.0, {-10.0, 10.0});
    EXPECT_DOUBLE_EQ(g.mu.front(), -10.0);
    EXPECT_DOUBLE_EQ(g.mu.back(), 10.0);
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_LT(g.mu[i - 1], g.mu[i]);
}

TEST(SumRule, DeficitIsTheTailBeyondTheWindow) {
    const double delta = 100.0 / two_pi;
    for (double rho : {0.01, 0.1, 1.0}) {
        const auto b = DetectorBand::power_law(rho * two_pi * delta, delta, 6);
        const auto g = form_factor_grid(b, 0.0, 1.0, {-50.0 * delta, 50.0 * delta});
        const double d = sum_rule_defect(g);
        EXPECT_LT(d, 0.0);
        EXPECT_LT(std::abs(d + sum_rule_tail_estimate(g)), 1e-3) << "rho = " << rho;
    }
}

TEST(SumRule, ShrinksWithWindow) {
    const auto b = DetectorBand::power_law(2.0, 1.0, 6);
    const double d1 = sum_rule_defect(form_factor_grid(b, 0.0, 1.0, {-50.0, 50.0}));
    const double d2 = sum_rule_defect(form_factor_grid(b, 0.0, 1.0, {-200.0, 200.0}));
    EXPECT_NEAR(d1 / d2, 4.0, 0.1);
}

TEST(SumRule, RejectsUnrelaxedWindow) {
    const auto b = DetectorBand::power_law(two_pi * 10.0, 1.0, 6);
    EXPECT_THROW(sum_rule_defect(form_factor_grid(b, 0.0, 1.0, {-50.0, 50.0})), Error);
}
