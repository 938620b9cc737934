#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "roughint/frac_calc.hpp"

using namespace roughint;

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);

// Power-function closed form D^α (t-a)^μ = Γ(μ+1)/Γ(μ+1-α) (t-a)^{μ-α}.
double power_rule(double mu, double alpha, double t) {
    return std::tgamma(mu + 1.0) / std::tgamma(mu + 1.0 - alpha) * std::pow(t, mu - alpha);
}

// Brute-force ∫_lo^hi f by composite Gauss with the τ = (hi-θ)^{1-γ} substitution on each
// panel; used as an independent oracle for weakly singular integrals.
template <class F>
double singular_oracle(F&& f, double lo, double hi, double gamma, int panels) {
    double acc = 0.0;
    const double e = 1.0 - gamma;
    const double top = std::pow(hi - lo, e);
    for (int p = 0; p < panels; ++p) {
        const double t0 = top * p / panels, t1 = top * (p + 1) / panels;
        acc += detail::integrate_gl(
            [&](double tau) {
                const double d = std::pow(tau, 1.0 / e);
                return f(hi - d) / d;
            },
            t0, t1, 16);
    }
    return acc / e;
}

}  // namespace

TEST(FracDerivative, LinearLeftAtOne) {
    auto p = SampledPath::from_function(uniform_grid(0, 1, 16), [](double t) { return t; });
    const auto r = frac_derivative(p, {Side::left_aplus, 0.5, BaseCorrection::subtract_f_a});
    EXPECT_NEAR(r.derivative.value(16), 2.0 / kSqrtPi, 1e-12);
    EXPECT_FALSE(r.endpoint_singular);
}

TEST(FracDerivative, ConstantVanishes) {
    auto p = SampledPath::from_function(uniform_grid(0, 1, 16), [](double) { return 2.0; });
    const auto r = frac_derivative(p, {Side::left_aplus, 0.3, BaseCorrection::subtract_f_a});
    for (std::size_t k = 0; k < p.size(); ++k) EXPECT_EQ(r.derivative.value(k), 0.0);
}

TEST(FracDerivative, LinearRightIsNegative) {
    auto p = SampledPath::from_function(uniform_grid(0, 1, 16), [](double t) { return t; });
    const auto r = frac_derivative(p, {Side::right_bminus, 0.5, BaseCorrection::subtract_f_b});
    EXPECT_NEAR(r.derivative.value(0), -2.0 / kSqrtPi, 1e-12);
    for (std::size_t k = 0; k < p.size(); ++k)
        EXPECT_NEAR(r.derivative.value(k), -2.0 * std::sqrt(1.0 - p.time(k)) / kSqrtPi, 1e-12);
}

TEST(FracDerivative, OffGridMatchesOnGrid) {
    auto p = SampledPath::from_function(uniform_grid(0, 1, 64), [](double t) { return std::sin(3 * t); });
    FracDerivSpec s{Side::left_aplus, 0.4, BaseCorrection::subtract_f_a};
    const auto on = frac_derivative(p, s);
    const auto off = frac_derivative(p, s, {0.3, p.time(20)});
    EXPECT_NEAR(off.derivative.value(1), on.derivative.value(20), 1e-12);
}

TEST(FracDerivative, PowerFamilyLeft) {
    const std::size_t n = 4096;
    for (double mu : {1.0, 1.5, 2.0}) {
        auto p = SampledPath::from_function(uniform_grid(0, 1, n), [mu](double t) { return std::pow(t, mu); });
        for (double alpha : {0.3, 0.5, 0.7}) {
            const auto r = frac_derivative(p, {Side::left_aplus, alpha, BaseCorrection::subtract_f_a});
            // Relative error in L¹ and at t = 1.
            double num = 0.0, den = 0.0;
            for (std::size_t k = 1; k <= n; ++k) {
                const double ex = power_rule(mu, alpha, p.time(k));
                num += std::abs(r.derivative.value(k) - ex);
                den += std::abs(ex);
            }
            EXPECT_LT(num / den, 1e-4) << "mu=" << mu << " alpha=" << alpha;
            EXPECT_NEAR(r.derivative.value(n), power_rule(mu, alpha, 1.0), 1e-4 * power_rule(mu, alpha, 1.0));
        }
    }
}

TEST(FracDerivative, Linearity) {
    auto grid = uniform_grid(0, 2, 128);
    auto f = SampledPath::from_function(grid, [](double t) { return std::cos(t); });
    auto g = SampledPath::from_function(grid, [](double t) { return t * t * t; });
    auto fg = SampledPath::from_function(grid, [](double t) { return std::cos(t) + t * t * t; });
    FracDerivSpec s{Side::right_bminus, 0.35, BaseCorrection::subtract_f_b};
    const auto a = frac_derivative(f, s), b = frac_derivative(g, s), c = frac_derivative(fg, s);
    for (std::size_t k = 0; k < grid.size(); ++k)
        EXPECT_NEAR(c.derivative.value(k), a.derivative.value(k) + b.derivative.value(k), 1e-11);
}

TEST(FracDerivative, UncorrectedFlagsEndpoint) {
    auto p = SampledPath::from_function(uniform_grid(0, 1, 8), [](double t) { return 1.0 + t; });
    const auto r = frac_derivative(p, {Side::left_aplus, 0.5, BaseCorrection::none});
    EXPECT_TRUE(r.endpoint_singular);
    EXPECT_NEAR(r.endpoint_coefficient[0], 1.0 / kSqrtPi, 1e-14);
    // D^α of the constant 1 is t^{-α}/Γ(1-α).
    EXPECT_NEAR(r.derivative.value(8), 1.0 / kSqrtPi + 2.0 / kSqrtPi, 1e-12);
}

TEST(FracDerivative, RejectsBadSpec) {
    auto p = SampledPath::from_function(uniform_grid(0, 1, 8), [](double t) { return t; });
    EXPECT_THROW(frac_derivative(p, {Side::left_aplus, 1.0, BaseCorrection::subtract_f_a}), std::invalid_argument);
    EXPECT_THROW(frac_derivative(p, {Side::left_aplus, 0.5, BaseCorrection::subtract_f_b}), std::invalid_argument);
    EXPECT_THROW(frac_derivative(p, {Side::left_aplus, 0.5, BaseCorrection::subtract_f_a}, {1.5}), std::out_of_range);
}

TEST(FracDerivative, ConvergenceOrderAtLeastOne) {
    auto f = [](double t) { return std::exp(t) * std::sin(2 * t); };
    // Reference from a much finer grid at t = 1.
    auto ref = frac_derivative(SampledPath::from_function(uniform_grid(0, 1, 1 << 14), f),
                               {Side::left_aplus, 0.6, BaseCorrection::subtract_f_a});
    const double exact = ref.derivative.value(1 << 14);
    double prev = 0.0;
    for (std::size_t n : {64u, 128u, 256u}) {
        auto r = frac_derivative(SampledPath::from_function(uniform_grid(0, 1, n), f),
                                 {Side::left_aplus, 0.6, BaseCorrection::subtract_f_a});
        const double err = std::abs(r.derivative.value(n) - exact);
        if (prev > 0.0) EXPECT_GT(std::log2(prev / err), 1.0);
        prev = err;
    }
}

TEST(CellPairing, LinearPairIsHalf) {
    for (double alpha : {0.3, 0.5, 0.7}) {
        auto t = uniform_grid(0, 1, 8);
        std::vector<double> x(t.begin(), t.end()), y(t.size());
        for (std::size_t k = 0; k < t.size(); ++k) y[k] = t[k] - 1.0;
        const auto F = detail::pl_left_cells(t, x, alpha);
        const auto G = detail::pl_right_cells(t, y, 1.0 - alpha);
        EXPECT_NEAR(-detail::pair_integral(F, G), 0.5, 1e-10) << alpha;
    }
}

TEST(CellPairing, PiecewiseLinearMatchesStieltjes) {
    // The pairing of two piecewise-linear paths reproduces the exact Stieltjes sum.
    auto t = uniform_grid(0, 1, 37);
    std::vector<double> x(t.size()), y(t.size());
    double stieltjes = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        x[k] = std::sin(5 * t[k]) + 0.3 * ((k * 7) % 5);
        y[k] = std::cos(3 * t[k]) - 0.2 * ((k * 3) % 4);
    }
    for (std::size_t k = 0; k + 1 < t.size(); ++k) stieltjes += 0.5 * (x[k] + x[k + 1]) * (y[k + 1] - y[k]);
    std::vector<double> xc(x), yc(y);
    for (auto& v : xc) v -= x[0];
    for (auto& v : yc) v -= y.back();
    const double alpha = 0.45;
    const auto F = detail::pl_left_cells(t, xc, alpha);
    const auto G = detail::pl_right_cells(t, yc, 1.0 - alpha);
    const double value = -detail::pair_integral(F, G) + x[0] * (y.back() - y[0]);
    EXPECT_NEAR(value, stieltjes, 1e-6 * std::abs(stieltjes) + 1e-9);
}

TEST(MarchaudEngine, SmoothLeftPower) {
    auto t = uniform_grid(0, 1, 64);
    const double g = 0.4;
    auto problem = detail::plain_problem(t, [](double s) { return s * s; }, g);
    const auto F = detail::marchaud_left_cells(problem);
    for (std::size_t k = 0; k < F.cells(); k += 7)
        for (std::size_t j = 0; j < F.q; ++j) {
            const double r = F.node_time(k, j);
            EXPECT_NEAR(F.node_value(k, j), power_rule(2.0, g, r), 1e-9) << r;
        }
}

TEST(MarchaudEngine, RightMirrorPower) {
    auto t = uniform_grid(0, 1, 64);
    const double g = 0.7;
    auto problem = detail::plain_problem(t, [](double s) { return (1 - s) * (1 - s) * (1 - s); }, g);
    const auto F = detail::marchaud_right_cells(problem);
    for (std::size_t k = 0; k < F.cells(); k += 5)
        for (std::size_t j = 0; j < F.q; ++j) {
            const double r = F.node_time(k, j);
            EXPECT_NEAR(F.node_value(k, j), power_rule(3.0, g, 1 - r), 1e-8) << r;
        }
}

TEST(MarchaudEngine, JumpIsExactPowerTerm) {
    auto t = uniform_grid(0, 1, 40);
    const double g = 0.3, tc = 0.3141;
    auto problem = detail::plain_problem(t, [tc](double s) { return s > tc ? 1.0 : 0.0; }, g);
    problem.breakpoints = {tc};
    problem.jumps = {{tc, 1.0}};
    const auto F = detail::marchaud_left_cells(problem);
    for (std::size_t k = 0; k < F.cells(); ++k)
        for (std::size_t j = 0; j < F.q; ++j) {
            const double r = F.node_time(k, j);
            const double ex = r > tc ? std::pow(r - tc, -g) / std::tgamma(1 - g) : 0.0;
            EXPECT_NEAR(F.node_value(k, j), ex, 1e-9 * (1 + ex)) << r;
        }
    // ∫_0^1 D^γ H(·-tc) = (1-tc)^{1-γ}/Γ(2-γ).
    detail::CellFunction one(t, F.q);
    std::fill(one.reg.begin(), one.reg.end(), 1.0);
    one.finalize();
    EXPECT_NEAR(detail::pair_integral(F, one), std::pow(1 - tc, 1 - g) / std::tgamma(2 - g), 1e-9);
}

TEST(Compensated, LinearCoefficient) {
    auto X = SampledPath::from_function(uniform_grid(0, 1, 32), [](double t) { return 0.5 + t; });
    const auto phi = coefficient_library("identity");
    const double g = 0.5;
    const auto r = compensated_frac_derivative(X, phi, g, 0);
    for (std::size_t k = 1; k < X.size(); ++k)
        EXPECT_NEAR(r.derivative.value(k), X.value(k) / (std::tgamma(1 - g) * std::pow(X.time(k), g)), 1e-12);
    EXPECT_TRUE(r.endpoint_singular);
}

TEST(Compensated, SquareOfIdentity) {
    auto X = SampledPath::from_function(uniform_grid(0, 1, 64), [](double t) { return t; });
    const auto r = compensated_frac_derivative(X, coefficient_library("square"), 0.5, 0);
    EXPECT_NEAR(r.derivative.value(64), 4.0 / (3.0 * kSqrtPi), 1e-10);
    for (std::size_t k = 1; k <= 64; k += 9)
        EXPECT_NEAR(r.derivative.value(k), 2 * std::pow(X.time(k), 1.5) / (1.5 * kSqrtPi), 1e-10);
    EXPECT_FALSE(r.endpoint_singular);
}

TEST(Compensated, AbsAgainstBruteForce) {
    auto X = SampledPath::from_function(uniform_grid(0, 1, 50), [](double t) { return t - 0.5; });
    const double g = 0.4;
    const auto r = compensated_frac_derivative(X, coefficient_library("abs"), g, 0, {0.3, 0.55, 0.77, 1.0});
    for (std::size_t s = 0; s < 4; ++s) {
        const double rr = r.derivative.time(s);
        auto N = [rr](double th) {
            const double xr = rr - 0.5, xt = th - 0.5;
            const double sg = xt > 0 ? 1.0 : (xt < 0 ? -1.0 : 0.0);
            return (std::abs(xr) - std::abs(xt) - sg * (xr - xt)) / (rr - th);
        };
        double integral = 0.0;
        if (rr > 0.5) {
            integral += singular_oracle(N, 0.5, rr, g, 200);
            integral += detail::integrate_gl([&](double th) { return N(th) * std::pow(rr - th, -g); }, 0.0, 0.5, 16);
        } else {
            integral += singular_oracle(N, 0.0, rr, g, 200);
        }
        const double ex = (std::abs(rr - 0.5) * std::pow(rr, -g) + g * integral) / std::tgamma(1 - g);
        EXPECT_NEAR(r.derivative.value(s), ex, 1e-6 * std::abs(ex)) << rr;
    }
}

TEST(Compensated, HolderNumeratorBound) {
    // |N(θ,r)| <= 1/(1+λ) |X_{θ,r}|^{1+λ} [[φ']]_λ with λ = 1, [[2x]]_1 = 2.
    auto X = SampledPath::from_function(uniform_grid(0, 1, 40), [](double t) { return std::sin(6 * t); });
    const auto phi = coefficient_library("square");
    auto problem = detail::compensated_problem(X, phi, 0.5, 0);
    for (double th = 0.0; th < 1.0; th += 0.037)
        for (double r = th; r <= 1.0; r += 0.041) {
            const double inc = X.eval(r)[0] - X.eval(th)[0];
            EXPECT_LE(std::abs(problem.N(th, r)), 0.5 * inc * inc * 2.0 + 1e-14);
        }
}
