#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "roughint/young.hpp"

using namespace roughint;

namespace {

SampledPath fn(std::size_t n, double (*f)(double)) { return SampledPath::from_function(uniform_grid(0, 1, n), f); }

double stieltjes(const SampledPath& x, const SampledPath& y) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k)
        for (std::size_t i = 0; i < x.dim(); ++i)
            s += 0.5 * (x.value(k, i) + x.value(k + 1, i)) * (y.value(k + 1, i) - y.value(k, i));
    return s;
}

SampledPath random_walk(std::size_t n, std::uint64_t seed, std::size_t dim = 1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<double> v(n * dim + dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = nd(rng);
    for (std::size_t k = 1; k <= n; ++k)
        for (std::size_t i = 0; i < dim; ++i) v[k * dim + i] = v[(k - 1) * dim + i] + nd(rng) / std::sqrt(double(n));
    return SampledPath(uniform_grid(0, 1, n), std::move(v), dim);
}

}  // namespace

TEST(Zahle, IdentityPairIsHalf) {
    auto x = fn(64, [](double t) { return t; });
    for (double a : {0.3, 0.4, 0.5, 0.6, 0.7}) EXPECT_NEAR(zahle_integral(x, x, a).value, 0.5, 1e-9) << a;
}

TEST(Zahle, ConstantIntegrandIsBoundaryOnly) {
    auto x = fn(50, [](double) { return 2.5; });
    auto y = fn(50, [](double t) { return std::sin(3 * t); });
    const auto r = zahle_integral(x, y, 0.4);
    EXPECT_EQ(r.value, 2.5 * std::sin(3.0));
    EXPECT_EQ(r.boundary_term, r.value);
}

TEST(Zahle, TimesSquare) {
    auto x = fn(128, [](double t) { return t; });
    auto y = fn(128, [](double t) { return t * t; });
    EXPECT_NEAR(zahle_integral(x, y, 0.5).value, 2.0 / 3.0, 1e-4);
}

TEST(Zahle, MatchesStieltjesOnRandomPaths) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto x = random_walk(200, seed, 2), y = random_walk(200, seed + 10, 2);
        const double ex = stieltjes(x, y);
        EXPECT_NEAR(zahle_integral(x, y, 0.45).value, ex, 1e-5 * (1 + std::abs(ex))) << seed;
    }
}

TEST(Zahle, OwnIntegralTelescopes) {
    auto x = random_walk(300, 7);
    const double ex = 0.5 * (x.value(300) * x.value(300) - x.value(0) * x.value(0));
    EXPECT_NEAR(zahle_integral(x, x, 0.6).value, ex, 1e-5);
}

TEST(Zahle, NoBaseCorrectionAgrees) {
    auto x = random_walk(100, 4), y = random_walk(100, 5);
    YoungOptions opt;
    opt.no_base_correction = true;
    const auto plain = zahle_integral(x, y, 0.3, opt);
    EXPECT_EQ(plain.boundary_term, 0.0);
    EXPECT_NEAR(plain.value, zahle_integral(x, y, 0.3).value, 1e-5);
}

TEST(Zahle, MixedGridsUseUnion) {
    auto x = fn(30, [](double t) { return std::cos(2 * t); });
    auto y = SampledPath::from_function(uniform_grid(0, 1, 17), [](double t) { return t * t * t; });
    const auto xm = x.resample(detail::merged_grid(x, y));
    const auto ym = y.resample(detail::merged_grid(x, y));
    EXPECT_NEAR(zahle_integral(x, y, 0.5).value, stieltjes(xm, ym), 1e-8);
}

TEST(Zahle, Bilinear) {
    auto x1 = random_walk(80, 11), x2 = random_walk(80, 12), y = random_walk(80, 13);
    std::vector<double> v(81);
    for (std::size_t k = 0; k <= 80; ++k) v[k] = 2.0 * x1.value(k) - 3.0 * x2.value(k);
    SampledPath comb(x1.times(), v, 1);
    const double lhs = zahle_integral(comb, y, 0.5).value;
    const double rhs = 2.0 * zahle_integral(x1, y, 0.5).value - 3.0 * zahle_integral(x2, y, 0.5).value;
    EXPECT_NEAR(lhs, rhs, 1e-8);
}

TEST(Zahle, SeminormEstimateRatioBounded) {
    // |∫ - boundary| / (|X - X(a)|_{W^{γ,2}} |Y - Y(b)|_{W^{δ,2}}) over a smooth random family.
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-2, 2);
    double worst = 0.0;
    for (int trial = 0; trial < 12; ++trial) {
        const double a1 = u(rng), a2 = u(rng), b1 = u(rng), b2 = u(rng);
        auto x = SampledPath::from_function(uniform_grid(0, 1, 128), [&](double t) { return a1 * std::sin(3 * t) + a2 * t * t; });
        auto y = SampledPath::from_function(uniform_grid(0, 1, 128), [&](double t) { return b1 * std::cos(2 * t) + b2 * t; });
        const auto r = zahle_integral(x, y, 0.5);
        const double den = gagliardo_seminorm(x, 0.6, 2).value * gagliardo_seminorm(y, 0.6, 2).value;
        worst = std::max(worst, std::abs(r.value - r.boundary_term) / den);
    }
    EXPECT_LT(worst, 20.0);
    EXPECT_GT(worst, 0.0);
}

TEST(Composition, IdentityEqualsZahle) {
    auto x = random_walk(60, 21), y = random_walk(60, 22);
    EXPECT_EQ(composition_integral(x, coefficient_library("identity"), y, 0.5).value, zahle_integral(x, y, 0.5).value);
}

TEST(Composition, ChainRuleSmooth) {
    auto x = fn(512, [](double t) { return std::sin(4 * t); });
    const double xb = std::sin(4.0);
    EXPECT_NEAR(composition_integral(x, coefficient_library("square"), x, 0.5).value, xb * xb * xb / 3.0, 1e-5);
}

TEST(Composition, DimensionMismatchThrows) {
    auto x = random_walk(10, 1), y = random_walk(10, 2, 2);
    EXPECT_THROW(composition_integral(x, coefficient_library("identity"), y, 0.5), std::invalid_argument);
}

TEST(Sweep, IdentityPairFlat) {
    auto x = fn(64, [](double t) { return t; });
    const auto s = alpha_sweep([&](double a) { return zahle_integral(x, x, a).value; }, {0.7, 0.3, 0.5, 0.4, 0.6});
    ASSERT_EQ(s.entries.size(), 5u);
    EXPECT_EQ(s.entries.front().alpha, 0.3);
    EXPECT_LT(s.max_deviation, 1e-3);
}

TEST(Sweep, ConstantExactlyFlat) {
    auto x = fn(40, [](double) { return -1.25; });
    auto y = fn(40, [](double t) { return std::exp(t); });
    const auto s = alpha_sweep([&](double a) { return zahle_integral(x, y, a).value; }, {0.2, 0.5, 0.8});
    EXPECT_EQ(s.max_deviation, 0.0);
}

TEST(Sweep, RecordsFailures) {
    auto x = fn(8, [](double t) { return t; });
    const auto s = alpha_sweep([&](double a) { return zahle_integral(x, x, a).value; }, {0.5, 1.5});
    EXPECT_TRUE(s.entries[0].ok);
    EXPECT_FALSE(s.entries[1].ok);
}

TEST(Admissible, Examples) {
    const double inf = std::numeric_limits<double>::infinity();
    auto r = check_young_admissible(0.6, 0.6, inf, inf);
    EXPECT_TRUE(r.ok);
    EXPECT_NEAR(r.margin, 0.2, 1e-15);
    EXPECT_FALSE(check_young_admissible(0.4, 0.5, 1, 1).ok);
    r = check_young_admissible(0.6, 0.6, 2, 2);
    EXPECT_TRUE(r.ok);
    EXPECT_NEAR(r.margin, 0.2, 1e-15);
    EXPECT_THROW(check_young_admissible(1.2, 0.5, 2, 2), std::invalid_argument);
    EXPECT_THROW(check_young_admissible(0.5, 0.5, 0.5, 2), std::invalid_argument);
}
