#include <gtest/gtest.h>

#include <cmath>

#include "roughint/gaussian.hpp"

using namespace roughint;

namespace {

// E|Z|^q = 2∫_0^∞ z^q φ(z) dz by z = u^{2/(1+q)} and composite Simpson on [0, 12].
double abs_moment_quadrature(double q) {
    const double k = 2.0 / (1.0 + q);
    auto f = [&](double u) {
        if (u == 0.0) return 0.0;
        const double z = std::pow(u, k);
        return 2.0 * k * std::pow(u, k - 1.0) * std::pow(z, q) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    };
    const int n = 200000;
    const double h = 12.0 / n;
    double acc = f(0.0) + f(12.0);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(i * h);
    return acc * h / 3.0;
}

}  // namespace

TEST(Sampler, FbmUnitVariance) {
    const auto model = GaussianModel::fbm(0.4, uniform_grid(0, 1, 15), 1, 7);
    const std::size_t N = 10000;
    double s2 = 0.0;
    for (std::size_t r = 0; r < N; ++r) {
        const double x = sample_path(model, r).value(15);
        s2 += x * x;
    }
    EXPECT_NEAR(s2 / N, 1.0, 3.0 * std::sqrt(2.0 / N));
}

TEST(Sampler, BrownianCovariance) {
    const auto bm = GaussianModel::fbm(0.5, uniform_grid(0, 2, 4));
    EXPECT_NEAR(bm.covariance(1.0, 2.0), 1.0, 1e-15);
    EXPECT_EQ(GaussianModel::bm(uniform_grid(0, 2, 4)).covariance(1.0, 2.0), 1.0);
}

TEST(Sampler, ZeroVarianceNodes) {
    const auto model = GaussianModel::fbm(0.3, uniform_grid(0, 1, 8), 2, 3);
    for (std::size_t r = 0; r < 5; ++r) {
        const auto p = sample_path(model, r);
        EXPECT_EQ(p.value(0, 0), 0.0);
        EXPECT_EQ(p.value(0, 1), 0.0);
    }
    const auto flat = GaussianModel::stationary([](double) { return 0.0; }, "zero", uniform_grid(0, 1, 4));
    const auto p = sample_path(flat);
    for (double v : p.values()) EXPECT_EQ(v, 0.0);
}

TEST(Sampler, EmpiricalCovariance) {
    const auto model = GaussianModel::fbm(0.4, uniform_grid(1.0 / 16, 1, 15), 1, 11);
    const auto c = empirical_covariance_check(model, 10000);
    EXPECT_TRUE(c.pass) << c.max_excess;
}

TEST(Sampler, Reproducible) {
    const auto model = GaussianModel::fbm(0.4, uniform_grid(0, 1, 64), 2, 99);
    const auto a = sample_path(model, 3), b = sample_path(model, 3), c = sample_path(model, 4);
    EXPECT_EQ(a.values(), b.values());
    EXPECT_NE(a.values(), c.values());
}

TEST(Sampler, IncrementLaw) {
    const auto model = GaussianModel::fbm(0.4, uniform_grid(0, 1, 32), 1, 5);
    const std::size_t N = 4000;
    double d2 = 0.0;
    for (std::size_t r = 0; r < N; ++r) {
        const auto p = sample_path(model, r);
        d2 += std::pow(p.value(20) - p.value(12), 2);
    }
    const double ex = std::pow(8.0 / 32.0, 0.8);
    EXPECT_NEAR(d2 / N, ex, 4.0 * ex * std::sqrt(2.0 / N));
}

TEST(Cmu, Examples) {
    const auto bm = GaussianModel::bm(uniform_grid(0, 1, 4));
    const auto r = cmu_constant(bm, RadonMeasure::dirac({1.0}), 0.5, 0.0, 1.0);
    EXPECT_NEAR(r.value, 1.0, 1e-6);
    EXPECT_EQ(cmu_constant(bm, RadonMeasure(1), 0.5, 0.0, 1.0).value, 0.0);
    // fBm at the origin: ∫_0^1 θ^{-Hs} dθ = 1/(1 - Hs).
    const auto f = GaussianModel::fbm(0.4, uniform_grid(0, 1, 4));
    EXPECT_NEAR(cmu_constant(f, RadonMeasure::dirac({0.0}), 0.8, 0.0, 1.0).value, 1.0 / (1.0 - 0.32), 1e-5);
    // m = 3, H = 0.4, s = 0.8: (m - 1 + s)H = 1.12 ≥ 1 is flagged.
    const auto f3 = GaussianModel::fbm(0.4, uniform_grid(0, 1, 4), 3);
    const auto r3 = cmu_constant(f3, RadonMeasure::dirac({1.0, 0.0, 0.0}), 0.8, 0.0, 1.0);
    EXPECT_FALSE(r3.exponent_criterion);
    EXPECT_NEAR(r3.variance_exponent, 0.4, 1e-9);
    EXPECT_TRUE(r3.finite);
    EXPECT_FALSE(cmu_constant(f3, RadonMeasure::dirac({0.0, 0.0, 0.0}), 0.8, 0.0, 1.0).finite);
}

TEST(Cmu, Box) {
    // BM, Lebesgue on [-1, 1], s = 0.5: ∫_0^1 ∫_{-1}^{1} min(θ^{-1/4}, |z|^{-1/2}) dz dθ.
    const auto bm = GaussianModel::bm(uniform_grid(0, 1, 4));
    const double v = cmu_constant(bm, RadonMeasure::lebesgue(-1, 1), 0.5, 0.0, 1.0).value;
    // inner(σ) = 2[σ^{1/2} + 2(1 - σ^{1/2})] with σ = θ^{1/2}: ∫_0^1 (4 - 2θ^{1/4}) dθ = 4 - 8/5.
    EXPECT_NEAR(v, 4.0 - 1.6, 1e-6);
}

TEST(MonteCarlo, VariabilityBrownian) {
    const auto bm = GaussianModel::bm(uniform_grid(0, 1, 256), 1, 2024);
    const auto e = mc_expected_variability(bm, RadonMeasure::dirac({0.0}), 0.5, 2000);
    const double target = (4.0 / 3.0) * abs_moment_quadrature(-0.5);
    EXPECT_NEAR(gaussian_abs_moment(-0.5), abs_moment_quadrature(-0.5), 1e-8);
    EXPECT_EQ(e.infinite_fraction, 0.0);
    EXPECT_NEAR(e.mean, target, 3.0 * e.stderr_);
    EXPECT_EQ(mc_expected_variability(bm, RadonMeasure(1), 0.5, 10).mean, 0.0);
}

TEST(MonteCarlo, SegmentFarField) {
    // Nearly constant path at 0 and an atom at z = 5: inner ≈ 5^{-s}/(1+s), outer weight in closed form.
    const auto model = GaussianModel::stationary([](double d) { return 1e-8 * std::exp(-d); }, "tiny", uniform_grid(0, 1, 16));
    const double s = 0.5, eps = 0.3;
    const auto e = mc_expected_segment(model, RadonMeasure::dirac({5.0}), s, eps, 5);
    const double ex = std::pow(5.0, -s) / (1.0 + s) * 2.0 / (eps * (eps + 1.0));
    EXPECT_NEAR(e.mean, ex, 1e-3 * ex);
    EXPECT_EQ(mc_expected_segment(model, RadonMeasure(1), s, eps, 3).mean, 0.0);
}

TEST(MonteCarlo, SegmentBelowOccupationBound) {
    const auto f = GaussianModel::fbm(0.4, uniform_grid(0, 1, 24), 1, 8);
    const double s = 0.7, eps = 0.1;
    const auto mu = RadonMeasure::dirac({0.0});
    const auto e = mc_expected_segment(f, mu, s, eps, 12);
    EXPECT_EQ(e.infinite_fraction, 0.0);
    const double bound = 2.0 * segment_weight_constant(0, 1, eps) * cmu_constant(f, mu, s, 0, 1).value;
    EXPECT_LE(e.mean, bound * (1.0 + 3.0 * e.stderr_ / e.mean));
}

TEST(Moments, ScalingAndFarField) {
    const auto r = moment_bound_check({0.25, 1.0, 4.0}, {0.0, 1.0, 10.0}, 0.5, 1, 100000, 3);
    ASSERT_EQ(r.entries.size(), 9u);
    EXPECT_LE(r.spread(), 3.0);
    for (const auto& en : r.entries) {
        if (en.z == 0.0) EXPECT_NEAR(en.ratio, gaussian_abs_moment(-0.5), 0.05);
        if (en.z == 10.0 * en.sigma) EXPECT_NEAR(en.ratio, 1.0, 0.1);
    }
    EXPECT_NEAR(gaussian_abs_moment(-0.5), abs_moment_quadrature(-0.5), 1e-8);
    EXPECT_NEAR(gaussian_abs_moment(1.0), std::sqrt(2.0 / M_PI), 1e-15);
}

TEST(Moments, Planar) {
    const auto r = moment_bound_check({1.0}, {0.0, 10.0}, 0.5, 2, 50000, 4);
    // E|Z|^{-1.5} in R^2 = 2^{-3/4} Γ(1/4)/Γ(1); the estimator has infinite variance here.
    const double ex = std::pow(2.0, -0.75) * std::tgamma(0.25);
    EXPECT_NEAR(r.entries[0].estimate, ex, 0.1 * ex);
    EXPECT_NEAR(r.entries[1].ratio, 1.0, 0.1);
}
