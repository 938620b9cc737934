#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "roughint/detail/numeric.hpp"

namespace roughint::detail {

/// Gauss nodes and weights mapped to [0, 1].
struct UnitRule {
    std::vector<double> x;
    std::vector<double> w;
    std::vector<double> bary;  // barycentric weights of the nodes
};

inline const UnitRule& unit_rule(std::size_t q) {
    static const std::array<UnitRule, 17> rules = [] {
        std::array<UnitRule, 17> r{};
        for (std::size_t n = 1; n < r.size(); ++n) {
            const auto& g = gauss_rule(n);
            r[n].x.resize(n);
            r[n].w.resize(n);
            r[n].bary.resize(n);
            for (std::size_t j = 0; j < n; ++j) {
                r[n].x[j] = 0.5 * (1.0 + g.nodes[j]);
                r[n].w[j] = 0.5 * g.weights[j];
            }
            for (std::size_t j = 0; j < n; ++j) {
                double prod = 1.0;
                for (std::size_t i = 0; i < n; ++i)
                    if (i != j) prod *= r[n].x[j] - r[n].x[i];
                r[n].bary[j] = 1.0 / prod;
            }
        }
        return r;
    }();
    if (q == 0 || q >= rules.size()) throw std::invalid_argument("unsupported rule size");
    return rules[q];
}

/// Monomial coefficients of the Lagrange basis on the unit nodes: coef[j][n] for x^n.
inline std::vector<std::vector<double>> lagrange_monomials(std::size_t q) {
    const auto& rule = unit_rule(q);
    std::vector<std::vector<double>> out(q, std::vector<double>(q, 0.0));
    for (std::size_t j = 0; j < q; ++j) {
        std::vector<double> poly{1.0};
        for (std::size_t i = 0; i < q; ++i) {
            if (i == j) continue;
            std::vector<double> next(poly.size() + 1, 0.0);
            for (std::size_t n = 0; n < poly.size(); ++n) {
                next[n + 1] += poly[n];
                next[n] -= rule.x[i] * poly[n];
            }
            poly = std::move(next);
        }
        for (std::size_t n = 0; n < q; ++n) out[j][n] = poly[n] * rule.bary[j];
    }
    return out;
}

/// Power term coef * (t - anchor)_+^p (left) or coef * (anchor - t)_+^p (right), active on
/// cells first..last.
struct SingularTerm {
    double anchor = 0.0;
    bool left = true;
    double coef = 0.0;
    double exponent = 0.0;
    std::size_t first_cell = 0;
    std::size_t last_cell = 0;

    double operator()(double t) const {
        const double u = left ? t - anchor : anchor - t;
        if (u <= 0.0) return 0.0;
        return coef * std::pow(u, exponent);
    }
};

// ∫ over the support inside [0,1] of (x - c)^p (left) or (c - x)^p (right) times each
// Lagrange basis polynomial.
inline std::vector<double> singular_moments(std::size_t q, double c, double p, bool left) {
    static thread_local std::map<std::size_t, std::vector<std::vector<double>>> cache;
    auto it = cache.find(q);
    if (it == cache.end()) it = cache.emplace(q, lagrange_monomials(q)).first;
    const auto& mono = it->second;
    const double sigma = left ? 1.0 : -1.0;
    double ylo = 0.0, yhi = 0.0;
    if (left) {
        ylo = std::max(c, 0.0) - c;
        yhi = 1.0 - c;
    } else {
        ylo = std::max(c - 1.0, 0.0);
        yhi = c;
    }
    std::vector<double> out(q, 0.0);
    if (!(yhi > ylo)) return out;
    // x = c + sigma * y; expand x^m in powers of y.
    std::vector<double> ipow(q, 0.0);
    for (std::size_t n = 0; n < q; ++n) ipow[n] = power_moment(ylo, yhi, p + static_cast<double>(n));
    std::vector<std::vector<double>> binom(q, std::vector<double>(q, 0.0));
    for (std::size_t m = 0; m < q; ++m) {
        binom[m][0] = 1.0;
        for (std::size_t n = 1; n <= m; ++n) binom[m][n] = binom[m - 1][n - 1] + (n < m ? binom[m - 1][n] : 0.0);
    }
    for (std::size_t j = 0; j < q; ++j) {
        double acc = 0.0;
        for (std::size_t n = 0; n < q; ++n) {
            double bn = 0.0;
            double cp = 1.0;
            for (std::size_t m = n; m < q; ++m) {
                bn += mono[j][m] * binom[m][n] * cp;
                cp *= c;
            }
            acc += bn * std::pow(sigma, static_cast<double>(n)) * ipow[n];
        }
        out[j] = acc;
    }
    return out;
}

/// Function on a partition of [a, b]: a regular part sampled at q Gauss nodes per cell
/// (read as the interpolating polynomial) plus explicit power terms.
struct CellFunction {
    std::vector<double> times;
    std::size_t q = 4;
    std::vector<double> reg;
    std::vector<SingularTerm> sing;
    std::vector<std::vector<std::size_t>> by_cell;

    CellFunction() = default;
    CellFunction(std::vector<double> t, std::size_t nodes)
        : times(std::move(t)), q(nodes), reg((times.size() - 1) * nodes, 0.0) {}

    std::size_t cells() const { return times.size() - 1; }
    double node_time(std::size_t k, std::size_t j) const {
        return times[k] + (times[k + 1] - times[k]) * unit_rule(q).x[j];
    }

    void finalize() {
        by_cell.assign(cells(), {});
        for (std::size_t s = 0; s < sing.size(); ++s)
            for (std::size_t k = sing[s].first_cell; k <= sing[s].last_cell && k < cells(); ++k) by_cell[k].push_back(s);
    }

    std::size_t cell_of(double t) const {
        if (t <= times.front()) return 0;
        if (t >= times.back()) return cells() - 1;
        const auto it = std::upper_bound(times.begin(), times.end(), t);
        return static_cast<std::size_t>(it - times.begin()) - 1;
    }

    double reg_value(std::size_t k, double t) const {
        const auto& rule = unit_rule(q);
        const double x = (t - times[k]) / (times[k + 1] - times[k]);
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < q; ++j) {
            const double dx = x - rule.x[j];
            if (dx == 0.0) return reg[k * q + j];
            const double w = rule.bary[j] / dx;
            num += w * reg[k * q + j];
            den += w;
        }
        return num / den;
    }

    double eval(double t) const {
        const std::size_t k = cell_of(t);
        double v = reg_value(k, t);
        for (std::size_t s : by_cell[k]) v += sing[s](t);
        return v;
    }

    double node_value(std::size_t k, std::size_t j) const {
        const double t = node_time(k, j);
        double v = reg[k * q + j];
        for (std::size_t s : by_cell[k]) v += sing[s](t);
        return v;
    }

    /// Same function in the reflected variable t' = a + b - t.
    CellFunction mirrored() const {
        const double ab = times.front() + times.back();
        std::vector<double> t(times.size());
        for (std::size_t k = 0; k < times.size(); ++k) t[k] = ab - times[times.size() - 1 - k];
        CellFunction out(std::move(t), q);
        const std::size_t n = cells();
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < q; ++j) out.reg[(n - 1 - k) * q + (q - 1 - j)] = reg[k * q + j];
        for (const auto& s : sing)
            out.sing.push_back({ab - s.anchor, !s.left, s.coef, s.exponent, n - 1 - s.last_cell, n - 1 - s.first_cell});
        out.finalize();
        return out;
    }

    void scale(double c) {
        for (double& v : reg) v *= c;
        for (auto& s : sing) s.coef *= c;
    }

    void add(const CellFunction& other, double c = 1.0) {
        if (other.times.size() != times.size() || other.q != q) throw std::invalid_argument("cell function mismatch");
        for (std::size_t k = 0; k < reg.size(); ++k) reg[k] += c * other.reg[k];
        for (auto s : other.sing) {
            s.coef *= c;
            sing.push_back(s);
        }
        finalize();
    }
};

// ∫_0^1 S1(x) S2(x) dx for two unit-cell power terms.
inline double singular_product(double c1, double p1, bool l1, double c2, double p2, bool l2) {
    double lo = 0.0, hi = 1.0;
    if (l1) lo = std::max(lo, c1);
    else hi = std::min(hi, c1);
    if (l2) lo = std::max(lo, c2);
    else hi = std::min(hi, c2);
    if (!(hi > lo)) return 0.0;
    if (l1 != l2) {
        const double cl = l1 ? c1 : c2, cr = l1 ? c2 : c1;
        const double pl = l1 ? p1 : p2, pr = l1 ? p2 : p1;
        if (cl == lo && cr == hi)
            return std::pow(cr - cl, pl + pr + 1.0) * std::exp(std::lgamma(pl + 1.0) + std::lgamma(pr + 1.0) - std::lgamma(pl + pr + 2.0));
    } else if (c1 == c2 && (l1 ? c1 == lo : c1 == hi)) {
        return std::pow(hi - lo, p1 + p2 + 1.0) / (p1 + p2 + 1.0);
    }
    auto f1 = [&](double x) { const double u = l1 ? x - c1 : c1 - x; return u > 0 ? std::pow(u, p1) : 0.0; };
    auto f2 = [&](double x) { const double u = l2 ? x - c2 : c2 - x; return u > 0 ? std::pow(u, p2) : 0.0; };
    // Endpoint singularities only sit at anchors coinciding with lo / hi.
    double plo = 0.0, phi = 0.0;
    bool slo = false, shi = false;
    if (l1 && c1 == lo) { plo += p1; slo = true; }
    if (l2 && c2 == lo) { plo += p2; slo = true; }
    if (!l1 && c1 == hi) { phi += p1; shi = true; }
    if (!l2 && c2 == hi) { phi += p2; shi = true; }
    const double mid = 0.5 * (lo + hi);
    auto prod = [&](double x) { return f1(x) * f2(x); };
    double acc = 0.0;
    if (slo) {
        acc += integrate_lower_power([&](double x) { return prod(x) / std::pow(x - lo, plo); }, lo, mid, plo, 16);
    } else {
        acc += integrate_gl(prod, lo, mid, 16);
    }
    if (shi) {
        acc += integrate_upper_power([&](double x) { return prod(x) / std::pow(hi - x, phi); }, mid, hi, phi, 16);
    } else {
        acc += integrate_gl(prod, mid, hi, 16);
    }
    return acc;
}

/// ∫_a^b F G dt with the regular parts integrated as interpolating polynomials and every
/// power term integrated exactly against them.
inline double pair_integral(const CellFunction& F, const CellFunction& G) {
    if (F.times.size() != G.times.size() || F.q != G.q) throw std::invalid_argument("pairing needs matching cell grids");
    const std::size_t q = F.q;
    const auto& rule = unit_rule(q);
    double total = 0.0;
    for (std::size_t k = 0; k < F.cells(); ++k) {
        const double t0 = F.times[k];
        const double h = F.times[k + 1] - t0;
        double acc = 0.0;
        for (std::size_t j = 0; j < q; ++j) acc += rule.w[j] * F.reg[k * q + j] * G.reg[k * q + j];
        auto against_reg = [&](const SingularTerm& s, const CellFunction& other) {
            const double c = (s.anchor - t0) / h;
            const auto mom = singular_moments(q, c, s.exponent, s.left);
            double v = 0.0;
            for (std::size_t j = 0; j < q; ++j) v += mom[j] * other.reg[k * q + j];
            return s.coef * std::pow(h, s.exponent) * v;
        };
        for (std::size_t s : G.by_cell[k]) acc += against_reg(G.sing[s], F);
        for (std::size_t s : F.by_cell[k]) acc += against_reg(F.sing[s], G);
        for (std::size_t s1 : F.by_cell[k]) {
            const auto& a = F.sing[s1];
            for (std::size_t s2 : G.by_cell[k]) {
                const auto& b = G.sing[s2];
                acc += a.coef * b.coef * std::pow(h, a.exponent + b.exponent) *
                       singular_product((a.anchor - t0) / h, a.exponent, a.left, (b.anchor - t0) / h, b.exponent, b.left);
            }
        }
        total += h * acc;
    }
    return total;
}

}  // namespace roughint::detail
