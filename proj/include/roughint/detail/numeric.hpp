#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <utility>
#include <stdexcept>
#include <vector>

namespace roughint::detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Gauss–Legendre rule on [-1, 1], nodes computed by Newton iteration on P_q.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussRule make_gauss_rule(std::size_t q) {
    if (q == 0) throw std::invalid_argument("gauss rule needs at least one node");
    if (q == 1) return GaussRule{{0.0}, {2.0}};
    GaussRule rule{std::vector<double>(q), std::vector<double>(q)};
    const auto n = static_cast<double>(q);
    // Legendre recurrence; returns (P_q(x), P_q'(x)).
    auto legendre = [q, n](double x) {
        double p0 = 1.0, p1 = x;
        for (std::size_t k = 2; k <= q; ++k) {
            const auto kd = static_cast<double>(k);
            const double pk = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
            p0 = p1;
            p1 = pk;
        }
        return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
    };
    for (std::size_t i = 0; i < (q + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = legendre(x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[q - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[q - 1 - i] = w;
    }
    return rule;
}

/// Cached rules for the sizes used across the library.
inline const GaussRule& gauss_rule(std::size_t q) {
    static const std::array<GaussRule, 17> rules = [] {
        std::array<GaussRule, 17> r{};
        for (std::size_t k = 1; k < r.size(); ++k) r[k] = make_gauss_rule(k);
        return r;
    }();
    if (q == 0 || q >= rules.size()) throw std::invalid_argument("unsupported gauss rule size");
    return rules[q];
}

template <class F>
double integrate_gl(F&& f, double lo, double hi, std::size_t q = 8) {
    const auto& rule = gauss_rule(q);
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double acc = 0.0;
    for (std::size_t k = 0; k < q; ++k) acc += rule.weights[k] * f(mid + half * rule.nodes[k]);
    return acc * half;
}

/// ∫_lo^hi (t - lo)^p g(t) dt for p > -1, g smooth; the substitution τ = (t - lo)^{p+1}
/// absorbs the endpoint singularity.
template <class G>
double integrate_lower_power(G&& g, double lo, double hi, double p, std::size_t q = 8) {
    const double e = p + 1.0;
    const double top = std::pow(hi - lo, e);
    const double inv = 1.0 / e;
    return inv * integrate_gl([&](double tau) { return g(lo + std::pow(tau, inv)); }, 0.0, top, q);
}

/// ∫_lo^hi (hi - t)^p g(t) dt for p > -1.
template <class G>
double integrate_upper_power(G&& g, double lo, double hi, double p, std::size_t q = 8) {
    const double e = p + 1.0;
    const double top = std::pow(hi - lo, e);
    const double inv = 1.0 / e;
    return inv * integrate_gl([&](double tau) { return g(hi - std::pow(tau, inv)); }, 0.0, top, q);
}

/// ∫_u0^u1 u^p du for 0 <= u0 <= u1; requires p > -1 when u0 == 0.
inline double power_moment(double u0, double u1, double p) {
    if (u1 <= u0) return 0.0;
    if (std::abs(p + 1.0) < 1e-14) return std::log(u1 / u0);
    const double e = p + 1.0;
    return (std::pow(u1, e) - (u0 > 0.0 ? std::pow(u0, e) : 0.0)) / e;
}

/// True when the grid spacing is constant to relative precision `tol`.
inline bool is_uniform(std::span<const double> times, double tol = 1e-10) {
    if (times.size() < 3) return true;
    const double h = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (std::abs((times[k] - times[k - 1]) - h) > tol * h) return false;
    }
    return true;
}

inline double trapezoid(std::span<const double> times, std::span<const double> values) {
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < times.size(); ++k)
        acc += 0.5 * (values[k] + values[k + 1]) * (times[k + 1] - times[k]);
    return acc;
}

}  // namespace roughint::detail
