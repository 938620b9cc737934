#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "roughint/lift.hpp"

using namespace roughint;

namespace {

SampledPath walk(std::size_t n, std::uint64_t seed, std::size_t dim = 1, double hurst_like = 0.5) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<double> v((n + 1) * dim, 0.0);
    const double sd = std::pow(1.0 / double(n), hurst_like);
    for (std::size_t k = 1; k <= n; ++k)
        for (std::size_t i = 0; i < dim; ++i) v[k * dim + i] = v[(k - 1) * dim + i] + sd * nd(rng);
    return SampledPath(uniform_grid(0, 1, n), std::move(v), dim);
}

}  // namespace

TEST(LiftSmooth, IdentitySquareHalf) {
    auto x = SampledPath::from_function(uniform_grid(0, 1, 20), [](double t) { return t; });
    const auto mf = lift_smooth(x, x);
    for (std::size_t s = 0; s < 21; s += 3)
        for (std::size_t t = s; t < 21; t += 4) {
            const double d = x.time(t) - x.time(s);
            EXPECT_NEAR(mf.tensor(s, t, 0, 0), 0.5 * d * d, 1e-14);
        }
    EXPECT_NEAR(mf.tensor_at(0.123, 0.777, 0, 0), 0.5 * 0.654 * 0.654, 1e-14);
}

TEST(LiftSmooth, ConstantXVanishes) {
    auto x = SampledPath::from_function(uniform_grid(0, 1, 16), [](double) { return 3.0; });
    auto y = walk(16, 3);
    const auto mf = lift_smooth(x, y);
    for (std::size_t s = 0; s < 17; ++s)
        for (std::size_t t = s; t < 17; ++t) EXPECT_EQ(mf.tensor(s, t, 0, 0), 0.0);
}

TEST(LiftSmooth, TimesSquare) {
    auto x = SampledPath::from_function(uniform_grid(0, 1, 512), [](double t) { return t; });
    auto y = SampledPath::from_function(uniform_grid(0, 1, 512), [](double t) { return t * t; });
    EXPECT_NEAR(lift_smooth(x, y).tensor(0, 512, 0, 0), 2.0 / 3.0, 1e-5);
}

TEST(LiftSmooth, MismatchedGridsThrow) {
    EXPECT_THROW(lift_smooth(walk(8, 1), walk(16, 1)), std::invalid_argument);
}

TEST(Validate, ChenForAllConstructions) {
    auto xy = walk(512, 5, 2, 0.4);
    auto x = SampledPath(xy.times(), [&] {
        std::vector<double> v;
        for (std::size_t k = 0; k < xy.size(); ++k) v.push_back(xy.value(k, 0));
        return v;
    }(), 1);
    for (const auto& mf : {lift_smooth(xy, xy), lift_geometric_1d(x), lift_dyadic(xy, xy, 7)}) {
        const auto r = validate_mf(mf, 0.38, 1000, 17);
        EXPECT_LE(r.chen_defect, 1e-10) << to_string(mf.construction);
        EXPECT_EQ(r.diagonal_max, 0.0);
        EXPECT_GT(r.c_beta, 0.0);
        EXPECT_TRUE(std::isfinite(r.c_beta));
    }
}

TEST(Validate, PathIncrementPerturbationKeepsChen) {
    auto x = walk(40, 8);
    const auto base = lift_smooth(x, x);
    const std::size_t N = 41;
    std::vector<double> dense(N * N);
    for (std::size_t s = 0; s < N; ++s)
        for (std::size_t t = s; t < N; ++t) dense[s * N + t] = base.tensor(s, t, 0, 0) + (x.time(t) - x.time(s));
    const auto mf = lift_external(x, x, dense);
    EXPECT_LE(validate_mf(mf, 0.4).chen_defect, 1e-12);
    for (std::size_t s = 0; s < N; s += 7)
        for (std::size_t t = s; t < N; t += 5) EXPECT_NEAR(mf.tensor(s, t, 0, 0), dense[s * N + t], 1e-13);
}

TEST(Validate, BrokenTensorIsDetected) {
    auto x = walk(30, 9);
    const std::size_t N = 31;
    std::vector<double> dense(N * N);
    for (std::size_t s = 0; s < N; ++s)
        for (std::size_t t = s; t < N; ++t) dense[s * N + t] = std::pow(x.time(t) - x.time(s), 2);
    EXPECT_GT(validate_mf(lift_external(x, x, dense), 0.4).chen_defect, 1e-3);
}

TEST(Dyadic, FullLevelEqualsSmooth) {
    auto x = walk(256, 11, 2);
    auto y = walk(256, 12, 2);
    const auto a = lift_dyadic(x, y, 8), b = lift_smooth(x, y);
    for (std::size_t s = 0; s < 257; s += 13)
        for (std::size_t t = s; t < 257; t += 11)
            for (std::size_t i = 0; i < 2; ++i)
                for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(a.tensor(s, t, i, j), b.tensor(s, t, i, j), 1e-13);
    EXPECT_THROW(lift_dyadic(x, y, 9), std::invalid_argument);
}

TEST(Dyadic, MatchesGeometricInOneDimension) {
    auto x = walk(1024, 13, 1, 0.4);
    const auto g = lift_geometric_1d(x);
    const auto dy = lift_dyadic(x, x, 10);
    double sup = 0.0;
    for (std::size_t s = 0; s < 1025; s += 8)
        for (std::size_t t = s; t < 1025; t += 8) sup = std::max(sup, std::abs(g.tensor(s, t, 0, 0) - dy.tensor(s, t, 0, 0)));
    EXPECT_LE(sup, 1e-3);
}

TEST(Dyadic, LevyAreaCauchyDecreases) {
    auto xy = walk(1024, 21, 2);
    const auto c = dyadic_cauchy(xy, xy, 6, 10);
    ASSERT_EQ(c.size(), 4u);
    EXPECT_LT(c.back(), c.front());
}

TEST(TensorDerivative, SmoothIdentityClosedForm) {
    auto x = SampledPath::from_function(uniform_grid(0, 1, 64), [](double t) { return t; });
    auto mf = lift_smooth(x, x);
    mf.beta = 0.5;
    const auto D = frac_derivative_tensor(mf, 0.5, {0.0, 0.25, 0.5, 0.9, 1.0});
    EXPECT_NEAR(D.value(0), (2.0 / 3.0) / std::sqrt(M_PI), 1e-8);
    EXPECT_NEAR(0.37612, (2.0 / 3.0) / std::sqrt(M_PI), 1e-5);
    for (std::size_t s = 1; s < 4; ++s) {
        const double r = D.time(s);
        EXPECT_NEAR(D.value(s), std::pow(1 - r, 1.5) * (2.0 / 3.0) / std::sqrt(M_PI), 1e-8) << r;
    }
    EXPECT_EQ(D.value(4), 0.0);
}

TEST(TensorDerivative, ZeroTensor) {
    auto x = SampledPath::from_function(uniform_grid(0, 1, 16), [](double) { return 1.0; });
    auto mf = lift_smooth(x, x);
    mf.beta = 0.4;
    const auto D = frac_derivative_tensor(mf, 0.5);
    for (std::size_t k = 0; k < D.size(); ++k) EXPECT_EQ(D.value(k), 0.0);
}

TEST(TensorDerivative, RejectsOrder) {
    auto x = walk(16, 2);
    auto mf = lift_geometric_1d(x);
    mf.beta = 0.3;
    EXPECT_THROW(frac_derivative_tensor(mf, 0.6), std::invalid_argument);
}

TEST(TensorDerivative, SupBoundedBySeminorm) {
    // sup_r |D^γ_{b-}(X⊗Y)_{·,b}(r)| / sup_r |(X⊗Y)_{r,b}|/(b-r)^{2β} stays bounded for 2β > γ.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    double worst = 0.0;
    for (int trial = 0; trial < 6; ++trial) {
        const double c1 = u(rng), c2 = u(rng);
        auto x = SampledPath::from_function(uniform_grid(0, 1, 64), [&](double t) { return std::sin(5 * c1 * t) + c2 * t; });
        auto mf = lift_geometric_1d(x);
        mf.beta = 0.45;
        const auto D = frac_derivative_tensor(mf, 0.6);
        double sup = 0.0, semi = 0.0;
        for (std::size_t k = 0; k < 64; ++k) {
            sup = std::max(sup, std::abs(D.value(k)));
            semi = std::max(semi, std::abs(mf.tensor(k, 64, 0, 0)) / std::pow(1 - x.time(k), 0.9));
        }
        worst = std::max(worst, sup / semi);
    }
    EXPECT_LT(worst, 10.0);
}

TEST(TensorCsv, RoundTrip) {
    auto xy = walk(12, 4, 2);
    const auto mf = lift_smooth(xy, xy);
    std::stringstream ss;
    write_tensor_csv(ss, mf);
    const auto ext = lift_external(xy, xy, read_tensor_csv(ss, 13, 2, 2));
    for (std::size_t s = 0; s < 13; ++s)
        for (std::size_t t = s; t < 13; ++t)
            for (std::size_t i = 0; i < 2; ++i)
                for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(ext.tensor(s, t, i, j), mf.tensor(s, t, i, j));
}

TEST(TensorCsv, MissingEntriesRejected) {
    std::stringstream ss("i,j,s_index,t_index,value\n0,0,0,0,0\n");
    EXPECT_THROW(read_tensor_csv(ss, 2, 1, 1), std::runtime_error);
}
