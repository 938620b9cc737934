#include <gtest/gtest.h>

#include <cmath>

#include "roughint/gaussian.hpp"
#include "roughint/rough.hpp"

using namespace roughint;

namespace {

SampledPath fbm_path(double H, std::size_t n, std::uint64_t seed) {
    return sample_path(GaussianModel::fbm(H, uniform_grid(0, 1, n), 1, seed));
}

MultiplicativeFunctional geometric(const SampledPath& x, double beta) {
    auto mf = lift_geometric_1d(x);
    mf.beta = beta;
    return mf;
}

// Left-point compensated sum Σ φ(x_k)Δ + φ'(x_k)Δ²/2 for the 1D geometric lift.
double compensated_sum(const SampledPath& x, double (*phi)(double), double (*dphi)(double)) {
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        const double d = x.value(k + 1) - x.value(k);
        acc += phi(x.value(k)) * d + 0.5 * dphi(x.value(k)) * d * d;
    }
    return acc;
}

}  // namespace

TEST(Admissible, SmoothWindows) {
    auto w = check_rough_admissible_smooth(0.4, 0.8);
    EXPECT_FALSE(w.empty);
    EXPECT_NEAR(w.lo, 0.6, 1e-15);
    EXPECT_NEAR(w.hi, 0.66, 1e-15);
    EXPECT_TRUE(check_rough_admissible_smooth(0.4, 0.4).empty);
    w = check_rough_admissible_smooth(0.45, 0.5);
    EXPECT_NEAR(w.lo, 0.55, 1e-15);
    EXPECT_NEAR(w.hi, 0.6125, 1e-15);
    EXPECT_THROW(check_rough_admissible_smooth(0.3, 0.9), std::invalid_argument);
    EXPECT_NEAR(default_alpha_smooth(0.4, 0.8), 0.63, 1e-15);
    EXPECT_THROW(default_alpha_smooth(0.4, 0.4), AdmissibilityError);
}

TEST(Admissible, BVWindows) {
    auto r = check_rough_admissible_bv(0.4, 0.8, 0.09);
    EXPECT_TRUE(r.ok);
    EXPECT_NEAR(r.eps_lo, 0.06, 1e-15);
    EXPECT_NEAR(r.eps_hi, 0.12, 1e-15);
    EXPECT_NEAR(r.alpha, 0.63, 1e-15);
    EXPECT_FALSE(check_rough_admissible_bv(0.4, 0.5).ok);
    r = check_rough_admissible_bv(0.45, 0.6);
    EXPECT_TRUE(r.ok);
    EXPECT_NEAR(r.eps_lo, 0.085, 1e-15);
    EXPECT_NEAR(r.eps_hi, 0.17, 1e-15);
    EXPECT_FALSE(check_rough_admissible_bv(0.4, 0.8, 0.05).ok);
}

TEST(RoughIntegral, LinearSmoothIsHalf) {
    auto x = SampledPath::from_function(uniform_grid(0, 1, 64), [](double t) { return t; });
    auto mf = lift_smooth(x, x);
    mf.beta = 0.45;
    const auto r = rough_integrate(mf, coefficient_library("identity"), 0.55);
    EXPECT_NEAR(r.value, 0.5, 1e-5);
    EXPECT_NEAR(r.value, zahle_integral(x, x, 0.55).value, 1e-5);
    EXPECT_EQ(r.value, r.term_first + r.term_second);
}

TEST(RoughIntegral, YoungReductionSmoothLift) {
    auto x = SampledPath::from_function(uniform_grid(0, 1, 128), [](double t) { return std::sin(2 * t); });
    auto y = SampledPath::from_function(uniform_grid(0, 1, 128), [](double t) { return std::cos(3 * t) + t; });
    auto mf = lift_smooth(x, y);
    mf.beta = 0.45;
    const auto phi = coefficient_library("sin");
    const double ref = composition_integral(x, phi, y, 0.5).value;
    for (double a : {0.56, 0.6}) EXPECT_NEAR(rough_integrate(mf, phi, a).value, ref, 1e-4) << a;
}

TEST(RoughIntegral, PlanarComponentwise) {
    const std::size_t n = 96;
    std::vector<double> v;
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = double(k) / n;
        v.push_back(std::sin(3 * t));
        v.push_back(t * t - 0.3);
    }
    SampledPath xy(uniform_grid(0, 1, n), v, 2);
    auto mf = lift_smooth(xy, xy);
    mf.beta = 0.45;
    const auto phi = componentwise(coefficient_library("square"), 2);
    // ∫ x_i^2 dx_i = x_i^3/3 increments.
    const double ex = (std::pow(std::sin(3.0), 3) + std::pow(0.7, 3) - std::pow(-0.3, 3)) / 3.0;
    EXPECT_NEAR(rough_integrate(mf, phi, 0.58).value, ex, 1e-4);
}

TEST(RoughIntegral, ChainRuleSquareFbm) {
    const auto x = fbm_path(0.4, 1024, 21);
    const auto mf = geometric(x, 0.38);
    const double xb = x.value(1024), ex = xb * xb * xb / 3.0;
    const double a = default_alpha_smooth(0.38, 0.99);
    const auto r = rough_integrate(mf, coefficient_library("square"), a);
    EXPECT_NEAR(r.value, ex, 2e-2 * std::max(1.0, std::abs(ex)));
    const double cs = compensated_sum(x, [](double u) { return u * u; }, [](double u) { return 2 * u; });
    EXPECT_NEAR(r.value, cs, 2e-2 * std::max(1.0, std::abs(cs)));
}

TEST(RoughIntegral, ChainRuleAbsFbm) {
    const auto x = fbm_path(0.4, 1024, 22);
    const auto mf = geometric(x, 0.38);
    const double xb = x.value(1024), ex = 0.5 * xb * std::abs(xb);
    const auto r = rough_integrate_bv(mf, coefficient_library("abs"), 0.38, 0.8);
    EXPECT_NEAR(r.value, ex, 5e-2 * std::max(std::abs(ex), 0.05));
}

TEST(RoughIntegral, AlphaIndependence) {
    const auto x = fbm_path(0.4, 512, 23);
    const auto mf = geometric(x, 0.38);
    const auto w = check_rough_admissible_smooth(0.38, 0.99);
    std::vector<double> alphas;
    for (int k = 1; k <= 3; ++k) alphas.push_back(w.lo + (w.hi - w.lo) * k / 4.0);
    const auto t = rough_alpha_sweep(mf, coefficient_library("square"), alphas);
    for (const auto& e : t.entries) EXPECT_TRUE(e.ok);
    EXPECT_LE(t.max_rel_deviation, 1e-2);
}

TEST(RoughIntegral, Rejections) {
    const auto x = fbm_path(0.4, 64, 1);
    const auto mf = geometric(x, 0.38);
    EXPECT_THROW(rough_integrate(mf, coefficient_library("square"), 0.45), AdmissibilityError);
    EXPECT_THROW(rough_integrate(mf, coefficient_library("square"), 0.2 + 1.0), AdmissibilityError);
    EXPECT_THROW(rough_integrate_bv(mf, coefficient_library("abs"), 0.38, 0.5), AdmissibilityError);
    EXPECT_THROW(rough_integrate(mf, componentwise(coefficient_library("abs"), 2), 0.6), std::invalid_argument);
}

TEST(Bounds, SmoothConstantCoefficient) {
    const auto x = fbm_path(0.4, 128, 4);
    const auto mf = geometric(x, 0.38);
    const auto rep = bound_smooth(mf, coefficient_library("const", {2.0}), 0.9);
    EXPECT_NEAR(rep.rhs, 2.0 * 1.0 * holder_seminorm(x, 0.38).value, 1e-9);
    EXPECT_TRUE(rep.finite);
    for (const auto& [k, v] : rep.ingredients) EXPECT_GE(v, 0.0) << k;
}

TEST(Bounds, SmoothZeroPath) {
    auto x = SampledPath::from_function(uniform_grid(0, 1, 32), [](double) { return 0.0; });
    auto y = SampledPath::from_function(uniform_grid(0, 1, 32), [](double t) { return t; });
    auto mf = lift_smooth(x, y);
    mf.beta = 0.4;
    const auto rep = bound_smooth(mf, coefficient_library("sin"), 0.9);
    EXPECT_NEAR(rep.rhs, 0.0, 1e-15);
    const auto rep2 = bound_smooth(mf, coefficient_library("const", {1.5}), 0.9);
    EXPECT_NEAR(rep2.rhs, 1.5 * 1.0 * holder_seminorm(y, 0.4).value, 1e-12);
}

TEST(Bounds, SmoothRatioBounded) {
    double worst = 0.0;
    for (int k = 1; k <= 4; ++k) {
        auto x = SampledPath::from_function(uniform_grid(0, 1, 64), [k](double t) { return std::sin(k * t) + 0.3 * t; });
        auto mf = lift_smooth(x, x);
        mf.beta = 0.45;
        const auto phi = coefficient_library("square");
        const double v = rough_integrate(mf, phi, 0.6).value;
        const auto rep = bound_smooth(mf, phi, 0.99);
        ASSERT_TRUE(rep.finite);
        worst = std::max(worst, std::abs(v) / rep.rhs);
    }
    EXPECT_LT(worst, 10.0);
}

TEST(Bounds, BVIngredients) {
    auto x = SampledPath::from_function(uniform_grid(0, 1, 64), [](double t) { return t; });
    auto mf = lift_smooth(x, x);
    mf.beta = 0.45;
    const auto rep = bound_bv(mf, coefficient_library("abs"), 0.5, 0.25);
    EXPECT_TRUE(rep.finite);
    double U = -1.0, seg = -1.0;
    for (const auto& [k, v] : rep.ingredients) {
        if (k == "potential_L1_0_0") U = v;
        if (k == "segment_0_0") seg = v;
    }
    EXPECT_NEAR(U, 4.0, 1e-10);
    EXPECT_GT(seg, 0.0);
    EXPECT_LE(seg, occupation_segment_bound(x, 0.5, 0.25) * 2.0);

    const auto lin = bound_bv(mf, coefficient_library("identity"), 0.5, 0.25);
    const auto sm = bound_smooth(mf, coefficient_library("identity"), 0.99);
    EXPECT_NEAR(lin.rhs, sm.rhs, 1e-12);

    auto z = SampledPath::from_function(uniform_grid(0, 1, 16), [](double) { return 0.0; });
    auto mz = lift_smooth(z, x.resample(z.times()));
    mz.beta = 0.45;
    const auto inf = bound_bv(mz, coefficient_library("abs"), 0.5, 0.25);
    EXPECT_FALSE(inf.finite);
    EXPECT_TRUE(std::isinf(inf.rhs));
}
