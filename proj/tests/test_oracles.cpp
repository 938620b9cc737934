#include <gtest/gtest.h>

#include <cmath>

#include "roughint/gaussian.hpp"
#include "roughint/oracles.hpp"

using namespace roughint;

TEST(RiemannStieltjes, IdentityLine) {
    auto x = SampledPath::from_function(uniform_grid(0, 1, 4096), [](double t) { return t; });
    const auto r = riemann_stieltjes_oracle(x, x, coefficient_library("identity"), dyadic_ladder(10, 12));
    ASSERT_EQ(r.values.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(r.values[k], 0.5 - 0.5 / double(r.ladder[k]), 1e-12);
    EXPECT_NEAR(r.extrapolated, 0.5, 1e-10);
    EXPECT_NEAR(r.observed_order, 1.0, 1e-6);
}

TEST(RiemannStieltjes, ConstantExact) {
    auto x = SampledPath::from_function(uniform_grid(0, 1, 64), [](double t) { return t * t; });
    auto y = SampledPath::from_function(uniform_grid(0, 1, 64), [](double t) { return std::exp(t); });
    const auto r = riemann_stieltjes_oracle(x, y, coefficient_library("const", {3.0}), {16, 32, 64});
    for (double v : r.values) EXPECT_NEAR(v, 3.0 * (std::exp(1.0) - 1.0), 1e-13);
}

TEST(RiemannStieltjes, YoungChainRule) {
    const auto x = sample_path(GaussianModel::fbm(0.75, uniform_grid(0, 1, 4096), 1, 42));
    auto twice = coefficient_library("piecewise_linear", {0.0, 2.0, 2.0, 0.0});
    const auto r = riemann_stieltjes_oracle(x, x, twice, dyadic_ladder(10, 12));
    const double xb = x.value(4096);
    EXPECT_NEAR(r.extrapolated, xb * xb, 1e-2 * std::max(1.0, xb * xb));
    EXPECT_GE(r.observed_order, 0.5);
}

TEST(Compensated, LinearSmoothMatchesStieltjes) {
    auto x = SampledPath::from_function(uniform_grid(0, 1, 1024), [](double t) { return std::sin(2 * t); });
    auto y = SampledPath::from_function(uniform_grid(0, 1, 1024), [](double t) { return t * t; });
    const auto mf = lift_smooth(x, y);
    const auto phi = coefficient_library("identity");
    const auto a = midpoint_compensated_oracle(mf, phi, dyadic_ladder(8, 10));
    const auto b = riemann_stieltjes_oracle(x, y, phi, dyadic_ladder(8, 10));
    EXPECT_NEAR(a.extrapolated, b.extrapolated, 1e-5);
    EXPECT_GE(b.observed_order, 1.0 - 1e-3);
}

TEST(Compensated, GeometricChainRules) {
    const auto x = sample_path(GaussianModel::fbm(0.4, uniform_grid(0, 1, 4096), 1, 7));
    const auto mf = lift_geometric_1d(x);
    const double xb = x.value(4096);
    const auto sq = midpoint_compensated_oracle(mf, coefficient_library("square"), dyadic_ladder(10, 12));
    EXPECT_NEAR(sq.values.back(), xb * xb * xb / 3.0, 2e-2 * std::max(1.0, std::abs(xb * xb * xb / 3.0)));
    const auto ab = midpoint_compensated_oracle(mf, coefficient_library("abs"), dyadic_ladder(10, 12));
    EXPECT_NEAR(ab.values.back(), 0.5 * xb * std::abs(xb), 5e-2 * std::max(0.05, 0.5 * xb * xb));
}

TEST(Ladder, Validation) {
    auto x = SampledPath::from_function(uniform_grid(0, 1, 12), [](double t) { return t; });
    const auto phi = coefficient_library("identity");
    EXPECT_THROW(riemann_stieltjes_oracle(x, x, phi, {}), std::invalid_argument);
    EXPECT_THROW(riemann_stieltjes_oracle(x, x, phi, {6, 3}), std::invalid_argument);
    EXPECT_THROW(riemann_stieltjes_oracle(x, x, phi, {5}), std::invalid_argument);
    const auto r = riemann_stieltjes_oracle(x, x, phi, {3, 6});
    EXPECT_EQ(r.extrapolated, r.values.back());
}
