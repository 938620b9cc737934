#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "roughint/bv.hpp"
#include "roughint/detail/cells.hpp"
#include "roughint/frac_calc.hpp"
#include "roughint/path.hpp"

namespace roughint {

struct SweepEntry {
    double alpha = 0.0;
    double value = 0.0;
    bool ok = true;
    std::string error;
};

struct SweepTable {
    std::vector<SweepEntry> entries;
    double max_deviation = 0.0;      // max pairwise |v_i - v_j| over successful entries
    double max_rel_deviation = 0.0;  // same, divided by max(1e-300, max |v|)
};

struct YoungIntegralResult {
    double value = 0.0;
    double alpha_used = 0.0;
    double boundary_term = 0.0;
    std::size_t grid = 0;
    /// Admissible window for α, when known from the caller.
    double alpha_lo = 0.0;
    double alpha_hi = 1.0;
    SweepTable sweep;
};

struct YoungOptions {
    /// Keep X(a) inside the left derivative and drop the boundary term.
    bool no_base_correction = false;
};

struct Admissibility {
    bool ok = false;
    double margin = 0.0;
};

/// γ+δ>1 and 1/p+1/q<γ+δ; p, q may be infinite.
inline Admissibility check_young_admissible(double gamma, double delta, double p, double q) {
    if (!(gamma > 0.0 && gamma < 1.0 && delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("Hölder exponents must lie in (0,1)");
    if (!(p >= 1.0 && q >= 1.0)) throw std::invalid_argument("integrability exponents must be >= 1");
    const double s = gamma + delta;
    const double margin = std::min(s - 1.0, s - 1.0 / p - 1.0 / q);
    return {margin > 0.0, margin};
}

/// Midpoint of the window (1-δ, γ).
inline double young_default_alpha(double gamma, double delta) { return 0.5 * ((1.0 - delta) + gamma); }

inline SweepTable alpha_sweep(const std::function<double(double)>& integral, const std::vector<double>& alphas) {
    SweepTable t;
    std::vector<double> alist(alphas);
    std::sort(alist.begin(), alist.end());
    double vmax = 0.0;
    for (double a : alist) {
        SweepEntry e{a};
        try {
            e.value = integral(a);
            if (!std::isfinite(e.value)) {
                e.ok = false;
                e.error = "non-finite value";
            }
        } catch (const std::exception& ex) {
            e.ok = false;
            e.error = ex.what();
        }
        if (e.ok) vmax = std::max(vmax, std::abs(e.value));
        t.entries.push_back(e);
    }
    for (std::size_t i = 0; i < t.entries.size(); ++i)
        for (std::size_t j = i + 1; j < t.entries.size(); ++j)
            if (t.entries[i].ok && t.entries[j].ok)
                t.max_deviation = std::max(t.max_deviation, std::abs(t.entries[i].value - t.entries[j].value));
    t.max_rel_deviation = vmax > 0.0 ? t.max_deviation / vmax : 0.0;
    return t;
}

namespace detail {

inline std::vector<double> merged_grid(const SampledPath& X, const SampledPath& Y) {
    if (std::abs(X.a() - Y.a()) > 1e-12 || std::abs(X.b() - Y.b()) > 1e-12)
        throw std::invalid_argument("paths must share the interval [a,b]");
    if (X.times() == Y.times()) return X.times();
    std::vector<double> t;
    std::merge(X.times().begin(), X.times().end(), Y.times().begin(), Y.times().end(), std::back_inserter(t));
    std::vector<double> out;
    for (double s : t)
        if (out.empty() || s - out.back() > 1e-14 * (1.0 + std::abs(s))) out.push_back(s);
    out.front() = X.a();
    out.back() = X.b();
    return out;
}

// -∫ D^α_{a+}g · D^{1-α}_{b-}(y - y(b)) for scalar piecewise-linear g, y on the grid t.
inline double pl_pairing(const std::vector<double>& t, std::span<const double> g, std::span<const double> y,
                         double alpha) {
    std::vector<double> yc(y.begin(), y.end());
    const double yb = yc.back();
    for (double& v : yc) v -= yb;
    const auto F = pl_left_cells(t, g, alpha);
    const auto G = pl_right_cells(t, yc, 1.0 - alpha);
    return -pair_integral(F, G);
}

}  // namespace detail

/// ∫_a^b X dY = Σ_i [ ∫ D^α_{a+}(X^i - X^i(a)) D^{1-α}_{b-}(Y^i - Y^i(b)) + X^i(a) Y^i_{a,b} ]
/// for the piecewise-linear interpolants; components are paired by index.
inline YoungIntegralResult zahle_integral(const SampledPath& X, const SampledPath& Y, double alpha,
                                          const YoungOptions& opt = {}) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
    if (X.dim() != Y.dim()) throw std::invalid_argument("paths must have the same dimension");
    const auto t = detail::merged_grid(X, Y);
    const SampledPath x = t == X.times() ? X : X.resample(t);
    const SampledPath y = t == Y.times() ? Y : Y.resample(t);
    const std::size_t n = t.size();
    YoungIntegralResult res;
    res.alpha_used = alpha;
    res.grid = n - 1;
    std::vector<double> g(n), yv(n);
    for (std::size_t i = 0; i < x.dim(); ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            g[k] = x.value(k, i);
            yv[k] = y.value(k, i);
        }
        const double xa = g[0];
        if (!opt.no_base_correction) {
            for (double& v : g) v -= xa;
            res.boundary_term += xa * (yv.back() - yv.front());
        }
        res.value += detail::pl_pairing(t, g, yv, alpha);
    }
    res.value += res.boundary_term;
    if (!std::isfinite(res.value)) throw std::runtime_error("Zähle pairing diverged");
    return res;
}

/// The path t ↦ φ(X(t)) sampled on the grid of X.
inline SampledPath compose(const Coefficient& phi, const SampledPath& X) {
    if (phi.m != X.dim()) throw std::invalid_argument("coefficient input dimension differs from path dimension");
    std::vector<double> v(X.size() * phi.d);
    for (std::size_t k = 0; k < X.size(); ++k) {
        const auto p = X.point(k);
        for (std::size_t j = 0; j < phi.d; ++j) v[k * phi.d + j] = phi(p, j);
    }
    return SampledPath(X.times(), std::move(v), phi.d);
}

/// ∫ φ(X) dY = Σ_j ∫ φ_j(X) dY^j.
inline YoungIntegralResult composition_integral(const SampledPath& X, const Coefficient& phi, const SampledPath& Y,
                                                double alpha, const YoungOptions& opt = {}) {
    if (phi.d != Y.dim()) throw std::invalid_argument("coefficient output dimension differs from integrator dimension");
    return zahle_integral(compose(phi, X), Y, alpha, opt);
}

}  // namespace roughint
