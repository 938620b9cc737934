#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "roughint/bv.hpp"
#include "roughint/detail/cells.hpp"
#include "roughint/detail/numeric.hpp"
#include "roughint/detail/parallel.hpp"
#include "roughint/path.hpp"

namespace roughint {

enum class Side { left_aplus, right_bminus };
enum class BaseCorrection { subtract_f_a, subtract_f_b, none };

struct FracDerivSpec {
    Side side = Side::left_aplus;
    double order = 0.5;
    BaseCorrection base = BaseCorrection::subtract_f_a;

    void validate() const {
        if (!(order > 0.0 && order < 1.0)) throw std::invalid_argument("fractional order must lie in (0,1)");
        if (side == Side::left_aplus && base == BaseCorrection::subtract_f_b)
            throw std::invalid_argument("left derivative takes subtract_f_a or none");
        if (side == Side::right_bminus && base == BaseCorrection::subtract_f_a)
            throw std::invalid_argument("right derivative takes subtract_f_b or none");
    }
};

/// Derivative sampled on the evaluation grid. When the boundary value is not removed the
/// derivative behaves like endpoint_coefficient * |t - endpoint|^{-order} at the endpoint;
/// that node then holds the finite remainder and endpoint_singular is set.
struct FracDerivResult {
    SampledPath derivative;
    bool endpoint_singular = false;
    std::vector<double> endpoint_coefficient;
};

namespace detail {

inline constexpr std::size_t kCellNodes = 4;
inline constexpr std::size_t kNearNodes = 8;
// Cells left of the target handled by the singular substitution instead of the far sum.
inline constexpr std::size_t kNearCells = 2;
// Kernel interpolation nodes per far cell.
inline constexpr std::size_t kFarNodes = 8;

inline std::vector<double> mirror_times(const std::vector<double>& t) {
    const double ab = t.front() + t.back();
    std::vector<double> out(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) out[k] = ab - t[t.size() - 1 - k];
    return out;
}

// Slopes of a piecewise-linear scalar function.
inline std::vector<double> slopes_of(std::span<const double> t, std::span<const double> g) {
    std::vector<double> m(t.size() - 1);
    for (std::size_t k = 0; k + 1 < t.size(); ++k) m[k] = (g[k + 1] - g[k]) / (t[k + 1] - t[k]);
    return m;
}

/// Left derivative of a piecewise-linear g at t, including the boundary term g(a)(t-a)^{-α}
/// unless skip_boundary.
/// D^α_{a+}g(t) = [g(a)(t-a)^{-α} + Σ_i Δm_i (t - t_i)_+^{1-α} / (1-α)] / Γ(1-α).
inline double pl_left_derivative_at(std::span<const double> t, std::span<const double> g,
                                    std::span<const double> dm, double alpha, double at, bool skip_boundary) {
    const double a = t.front();
    const double inv_g2 = 1.0 / std::tgamma(2.0 - alpha);
    double acc = 0.0;
    for (std::size_t i = 0; i < dm.size() && t[i] < at; ++i) acc += dm[i] * std::pow(at - t[i], 1.0 - alpha);
    acc *= inv_g2;
    if (!skip_boundary && g[0] != 0.0) acc += g[0] * std::pow(at - a, -alpha) / std::tgamma(1.0 - alpha);
    return acc;
}

// Slope jumps Δm_i = m_i - m_{i-1}, with m_{-1} = 0.
inline std::vector<double> slope_jumps(std::span<const double> t, std::span<const double> g) {
    const auto m = slopes_of(t, g);
    std::vector<double> dm(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) dm[i] = m[i] - (i == 0 ? 0.0 : m[i - 1]);
    return dm;
}

/// Left derivative of a piecewise-linear function as a cell function: each slope jump
/// contributes an exact power term on its own and the following cell, the rest is sampled.
inline CellFunction pl_left_cells(const std::vector<double>& t, std::span<const double> g, double alpha,
                                  std::size_t q = kCellNodes) {
    const std::size_t n = t.size() - 1;
    const auto dm = slope_jumps(t, g);
    const double inv_g2 = 1.0 / std::tgamma(2.0 - alpha);
    const double e = 1.0 - alpha;
    CellFunction out(t, q);
    const auto& rule = unit_rule(q);
    if (is_uniform(t)) {
        const double h = (t.back() - t.front()) / static_cast<double>(n);
        // table[j][d] = (d + x_j)^{1-α}
        std::vector<std::vector<double>> table(q, std::vector<double>(n + 1));
        for (std::size_t j = 0; j < q; ++j)
            for (std::size_t d = 0; d <= n; ++d) table[j][d] = std::pow(static_cast<double>(d) + rule.x[j], e);
        const double scale = std::pow(h, e) * inv_g2;
        parallel_for(n, [&](std::size_t k) {
            for (std::size_t j = 0; j < q; ++j) {
                double acc = 0.0;
                for (std::size_t i = 0; i + 2 <= k; ++i) acc += dm[i] * table[j][k - i];
                out.reg[k * q + j] = scale * acc;
            }
        });
    } else {
        parallel_for(n, [&](std::size_t k) {
            for (std::size_t j = 0; j < q; ++j) {
                const double r = out.node_time(k, j);
                double acc = 0.0;
                for (std::size_t i = 0; i + 2 <= k; ++i) acc += dm[i] * std::pow(r - t[i], e);
                out.reg[k * q + j] = inv_g2 * acc;
            }
        });
    }
    for (std::size_t i = 0; i < n; ++i)
        if (dm[i] != 0.0) out.sing.push_back({t[i], true, dm[i] * inv_g2, e, i, std::min(i + 1, n - 1)});
    if (g[0] != 0.0) {
        const double c = g[0] / std::tgamma(1.0 - alpha);
        for (std::size_t k = 2; k < n; ++k)
            for (std::size_t j = 0; j < q; ++j) out.reg[k * q + j] += c * std::pow(out.node_time(k, j) - t[0], -alpha);
    }
    if (g[0] != 0.0) out.sing.push_back({t[0], true, g[0] / std::tgamma(1.0 - alpha), -alpha, 0, std::min<std::size_t>(1, n - 1)});
    out.finalize();
    return out;
}

/// Right derivative D^α_{b-}g of a piecewise-linear g, by reflection of the left one.
inline CellFunction pl_right_cells(const std::vector<double>& t, std::span<const double> g, double alpha,
                                   std::size_t q = kCellNodes) {
    std::vector<double> rg(g.rbegin(), g.rend());
    return pl_left_cells(mirror_times(t), rg, alpha, q).mirrored();
}

/// Left Marchaud-type derivative
///   (1/Γ(1-γ)) [ boundary(r) (r-a)^{-γ} + γ ∫_a^r N(θ,r) (r-θ)^{-γ-1} dθ ]
/// for a numerator that separates as N(θ,r) = u(r) - Σ_c v_c(r) A_c(θ). The separated form
/// is used on cells at least kNearCells away from r; nearer, N is evaluated directly under
/// the substitution τ = (r-θ)^{1-γ}.
struct MarchaudProblem {
    double gamma = 0.5;
    std::vector<double> times;
    std::size_t ncomp = 1;
    std::function<double(double)> u;
    std::function<void(double, std::span<double>)> v;
    std::function<void(double, std::span<double>)> A;
    std::function<double(double, double)> N;
    std::function<double(double)> boundary;
    /// Sorted times where N(., r) or A is not smooth beyond the grid nodes.
    std::vector<double> breakpoints;
    /// Jumps (time, size) of the differentiated function; each adds the exact term
    /// size (r - time)_+^{-γ} / Γ(1-γ) to the output.
    std::vector<std::pair<double, double>> jumps;
    /// Known non-analytic parts of the output: (time, coefficient, exponent) adds the exact
    /// term coefficient (r - time)_+^{exponent} near its anchor.
    struct Power {
        double time;
        double coef;
        double exponent;
    };
    std::vector<Power> powers;

    MarchaudProblem mirrored() const {
        MarchaudProblem p;
        const double ab = times.front() + times.back();
        p.gamma = gamma;
        p.times = mirror_times(times);
        p.ncomp = ncomp;
        p.u = [f = u, ab](double r) { return f(ab - r); };
        p.v = [f = v, ab](double r, std::span<double> out) { f(ab - r, out); };
        p.A = [f = A, ab](double s, std::span<double> out) { f(ab - s, out); };
        p.N = [f = N, ab](double s, double r) { return f(ab - s, ab - r); };
        p.boundary = [f = boundary, ab](double r) { return f(ab - r); };
        for (auto it = breakpoints.rbegin(); it != breakpoints.rend(); ++it) p.breakpoints.push_back(ab - *it);
        for (auto it = jumps.rbegin(); it != jumps.rend(); ++it) p.jumps.push_back({ab - it->first, -it->second});
        for (auto it = powers.rbegin(); it != powers.rend(); ++it) p.powers.push_back({ab - it->time, it->coef, it->exponent});
        return p;
    }
};

// Sub-intervals of [lo, hi] cut at the breakpoints strictly inside.
inline std::vector<double> cut_points(const std::vector<double>& bps, double lo, double hi) {
    std::vector<double> pts{lo};
    auto it = std::upper_bound(bps.begin(), bps.end(), lo);
    for (; it != bps.end() && *it < hi; ++it) pts.push_back(*it);
    pts.push_back(hi);
    return pts;
}

class MarchaudEngine {
public:
    MarchaudEngine(const MarchaudProblem& p, std::size_t q) : p_(p), q_(q), n_(p.times.size() - 1) {
        if (!(p.gamma > 0.0 && p.gamma < 1.0)) throw std::invalid_argument("Marchaud order must lie in (0,1)");
        build_moments();
    }

    /// Derivative at the Gauss nodes of every cell, as a cell function.
    CellFunction on_cells() const {
        CellFunction out(p_.times, q_);
        const auto& rule = unit_rule(kFarNodes);
        const auto& orule = unit_rule(q_);
        const bool uniform = is_uniform(p_.times);
        const double h = (p_.times.back() - p_.times.front()) / static_cast<double>(n_);
        const double ke = -p_.gamma - 1.0;
        const std::size_t C = p_.ncomp + 1;
        constexpr std::size_t L = kFarNodes;
        // kappa[(d * q + j) * L + l] = (d + x_j - y_l)^{-γ-1}
        std::vector<double> kappa;
        if (uniform) {
            kappa.resize((n_ + 1) * q_ * L);
            for (std::size_t d = kNearCells + 1; d <= n_; ++d)
                for (std::size_t j = 0; j < q_; ++j)
                    for (std::size_t l = 0; l < L; ++l)
                        kappa[(d * q_ + j) * L + l] = std::pow(static_cast<double>(d) + orule.x[j] - rule.x[l], ke);
        }
        const double hk = std::pow(h, ke);
        parallel_for(n_, [&](std::size_t k) {
            std::vector<double> far(C);
            for (std::size_t j = 0; j < q_; ++j) {
                const double r = out.node_time(k, j);
                std::fill(far.begin(), far.end(), 0.0);
                const std::size_t klo = k > kNearCells ? k - kNearCells : 0;
                if (uniform) {
                    for (std::size_t i = 0; i < klo; ++i) {
                        const double* kap = &kappa[((k - i) * q_ + j) * L];
                        const double* mom = &moments_[i * L * C];
                        for (std::size_t l = 0; l < L; ++l)
                            for (std::size_t c = 0; c < C; ++c) far[c] += mom[l * C + c] * kap[l];
                    }
                    for (double& f : far) f *= hk;
                } else {
                    direct_far(r, klo, far);
                }
                out.reg[k * q_ + j] = value(r, klo, far);
            }
        });
        add_singular_terms(out);
        return out;
    }

    /// Derivative at arbitrary times in (a, b]; `cell` is the cell whose closure holds r.
    double at(double r, std::size_t cell) const {
        const std::size_t klo = cell > kNearCells ? cell - kNearCells : 0;
        std::vector<double> far(p_.ncomp + 1, 0.0);
        direct_far(r, klo, far);
        return value(r, klo, far);
    }

private:
    // moments_[(i * L + l) * C + c] = ∫_cell_i A_c ℓ_l, with A_C = 1 in the last slot.
    void build_moments() {
        const std::size_t C = p_.ncomp + 1;
        constexpr std::size_t L = kFarNodes;
        moments_.assign(n_ * L * C, 0.0);
        const auto& rule = unit_rule(L);
        parallel_for(n_, [&](std::size_t i) {
            const double t0 = p_.times[i], t1 = p_.times[i + 1], h = t1 - t0;
            std::vector<double> a(C);
            const auto pts = cut_points(p_.breakpoints, t0, t1);
            const auto& g = gauss_rule(kNearNodes);
            for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
                const double lo = pts[s], hi = pts[s + 1];
                for (std::size_t e = 0; e < kNearNodes; ++e) {
                    const double th = 0.5 * (lo + hi) + 0.5 * (hi - lo) * g.nodes[e];
                    const double w = 0.5 * (hi - lo) * g.weights[e];
                    p_.A(th, std::span<double>(a.data(), C - 1));
                    a[C - 1] = 1.0;
                    const double x = (th - t0) / h;
                    for (std::size_t l = 0; l < L; ++l) {
                        double ell = rule.bary[l];
                        for (std::size_t m = 0; m < L; ++m)
                            if (m != l) ell *= x - rule.x[m];
                        for (std::size_t c = 0; c < C; ++c) moments_[(i * L + l) * C + c] += w * ell * a[c];
                    }
                }
            }
        });
    }

    void direct_far(double r, std::size_t klo, std::vector<double>& far) const {
        constexpr std::size_t L = kFarNodes;
        const auto& rule = unit_rule(L);
        const std::size_t C = p_.ncomp + 1;
        const double ke = -p_.gamma - 1.0;
        for (std::size_t i = 0; i < klo; ++i) {
            const double t0 = p_.times[i], h = p_.times[i + 1] - t0;
            for (std::size_t l = 0; l < L; ++l) {
                const double kv = std::pow(r - (t0 + h * rule.x[l]), ke);
                for (std::size_t c = 0; c < C; ++c) far[c] += moments_[(i * L + l) * C + c] * kv;
            }
        }
    }

    // ∫_lo^r N(θ,r) (r-θ)^{-γ-1} dθ with τ = (r-θ)^{1-γ}; pieces are cut at grid nodes and
    // breakpoints and graded geometrically away from τ = 0.
    double near(double r, double lo) const {
        const double e = 1.0 - p_.gamma;
        const double inv = 1.0 / e;
        std::vector<double> cuts;
        {
            auto it = std::upper_bound(p_.times.begin(), p_.times.end(), lo);
            for (; it != p_.times.end() && *it < r; ++it) cuts.push_back(*it);
            auto jt = std::upper_bound(p_.breakpoints.begin(), p_.breakpoints.end(), lo);
            for (; jt != p_.breakpoints.end() && *jt < r; ++jt) cuts.push_back(*jt);
        }
        std::vector<double> taus{0.0};
        for (double c : cuts) taus.push_back(std::pow(r - c, e));
        taus.push_back(std::pow(r - lo, e));
        std::sort(taus.begin(), taus.end());
        const auto& g = gauss_rule(kNearNodes);
        auto piece = [&](double t0, double t1) {
            double acc = 0.0;
            for (std::size_t s = 0; s < kNearNodes; ++s) {
                const double tau = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * g.nodes[s];
                const double d = std::pow(tau, inv);
                acc += g.weights[s] * p_.N(r - d, r) / d;
            }
            return 0.5 * (t1 - t0) * acc;
        };
        double total = 0.0;
        for (std::size_t s = 0; s + 1 < taus.size(); ++s) {
            double t0 = taus[s];
            const double t1 = taus[s + 1];
            if (!(t1 > t0)) continue;
            if (t0 > 0.0) {
                while (t1 > 2.0 * t0) {
                    total += piece(t0, 2.0 * t0);
                    t0 *= 2.0;
                }
            }
            total += piece(t0, t1);
        }
        return total * inv;
    }

    double value(double r, std::size_t klo, const std::vector<double>& far) const {
        const double g = p_.gamma;
        const double a = p_.times.front();
        const double lo = p_.times[klo];
        double integral = near(r, lo);
        if (klo > 0) {
            std::vector<double> v(p_.ncomp);
            p_.v(r, v);
            double sep = p_.u(r) * far[p_.ncomp];
            for (std::size_t c = 0; c < p_.ncomp; ++c) sep -= v[c] * far[c];
            integral += sep;
        }
        const double bnd = p_.boundary(r);
        const double edge = bnd == 0.0 ? 0.0 : bnd * std::pow(r - a, -g);
        return (edge + g * integral) / std::tgamma(1.0 - g);
    }

    void add_singular_terms(CellFunction& out) const {
        const double g = p_.gamma;
        const double ig = 1.0 / std::tgamma(1.0 - g);
        const double b0 = p_.boundary(p_.times.front());
        std::vector<SingularTerm> terms;
        if (b0 != 0.0) terms.push_back({p_.times.front(), true, b0 * ig, -g, 0, std::min<std::size_t>(1, n_ - 1)});
        for (const auto& [tj, dj] : p_.jumps) {
            if (dj == 0.0) continue;
            const std::size_t k = out.cell_of(tj);
            terms.push_back({tj, true, dj * ig, -g, k, std::min(k + 1, n_ - 1)});
        }
        for (const auto& pw : p_.powers) {
            if (pw.coef == 0.0 || pw.time >= p_.times.back()) continue;
            const std::size_t k = out.cell_of(pw.time);
            terms.push_back({pw.time, true, pw.coef, pw.exponent, k, std::min(k + 1, n_ - 1)});
        }
        for (const auto& s : terms) {
            for (std::size_t k = s.first_cell; k <= s.last_cell; ++k)
                for (std::size_t j = 0; j < q_; ++j) out.reg[k * q_ + j] -= s(out.node_time(k, j));
            out.sing.push_back(s);
        }
        out.finalize();
    }

    const MarchaudProblem& p_;
    std::size_t q_;
    std::size_t n_;
    std::vector<double> moments_;
};

inline CellFunction marchaud_left_cells(const MarchaudProblem& p, std::size_t q = kCellNodes) {
    return MarchaudEngine(p, q).on_cells();
}

inline CellFunction marchaud_right_cells(const MarchaudProblem& p, std::size_t q = kCellNodes) {
    const auto m = p.mirrored();
    return MarchaudEngine(m, q).on_cells().mirrored();
}

// Times where component i of the path crosses one of the levels.
inline std::vector<double> crossing_times(const SampledPath& x, std::size_t i, const std::vector<double>& levels) {
    std::vector<double> out;
    if (levels.empty()) return out;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        const double v0 = x.value(k, i), v1 = x.value(k + 1, i);
        for (double c : levels) {
            if ((v0 - c) * (v1 - c) < 0.0) {
                const double w = (c - v0) / (v1 - v0);
                out.push_back(x.time(k) + w * (x.time(k + 1) - x.time(k)));
            } else if (v1 == c && k + 2 < x.size() && (v0 - c) * (x.value(k + 2, i) - c) < 0.0) {
                // Crossing through a grid node.
                out.push_back(x.time(k + 1));
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<double> all_crossings(const SampledPath& x, const Coefficient& phi) {
    std::vector<double> out;
    for (std::size_t i = 0; i < phi.m && i < phi.kinks.size(); ++i) {
        auto c = crossing_times(x, i, phi.kinks[i]);
        out.insert(out.end(), c.begin(), c.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Compensated derivative D̂^γ_{a+} φ_j(X) as a Marchaud problem.
/// N(θ,r) = φ_j(X(r)) - φ_j(X(θ)) - Σ_i ∂_iφ_j(X(θ)) X^i_{θ,r}.
inline MarchaudProblem compensated_problem(const SampledPath& X, const Coefficient& phi, double gamma, std::size_t j) {
    if (phi.m != X.dim()) throw std::invalid_argument("coefficient input dimension differs from path dimension");
    const std::size_t m = X.dim();
    MarchaudProblem p;
    p.gamma = gamma;
    p.times = X.times();
    p.ncomp = 1 + m;
    auto Xp = std::make_shared<const SampledPath>(X);
    auto Pp = std::make_shared<const Coefficient>(phi);
    p.u = [Xp, Pp, j](double r) { return (*Pp)(Xp->eval(r), j); };
    p.v = [Xp, m](double r, std::span<double> out) {
        out[0] = 1.0;
        for (std::size_t i = 0; i < m; ++i) out[1 + i] = Xp->eval_component(r, i);
    };
    p.A = [Xp, Pp, j, m](double s, std::span<double> out) {
        const auto x = Xp->eval(s);
        double lin = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double d = Pp->dphi(x, i, j);
            out[1 + i] = d;
            lin += d * x[i];
        }
        out[0] = (*Pp)(x, j) - lin;
    };
    p.N = [Xp, Pp, j, m](double s, double r) {
        const auto xs = Xp->eval(s);
        const auto xr = Xp->eval(r);
        double v = (*Pp)(xr, j) - (*Pp)(xs, j);
        for (std::size_t i = 0; i < m; ++i) v -= Pp->dphi(xs, i, j) * (xr[i] - xs[i]);
        return v;
    };
    p.boundary = p.u;
    p.breakpoints = all_crossings(X, phi);
    return p;
}

/// Plain Marchaud derivative of a bounded function f (no base correction).
inline MarchaudProblem plain_problem(std::vector<double> times, std::function<double(double)> f, double gamma) {
    MarchaudProblem p;
    p.gamma = gamma;
    p.times = std::move(times);
    p.ncomp = 1;
    p.u = f;
    p.v = [](double, std::span<double> out) { out[0] = 1.0; };
    p.A = [f](double s, std::span<double> out) { out[0] = f(s); };
    p.N = [f](double s, double r) { return f(r) - f(s); };
    p.boundary = f;
    return p;
}

/// Coefficient of ρ^{2-γ} in the left derivative when, near a node, N(θ,r) = A u² + B uρ + C ρ²
/// for θ = node - u < node and N = C (r-θ)² past it (ρ = r - node).
inline double quadratic_node_coefficient(double A, double B, double C, double gamma) {
    const double S = (C - A) / (2.0 - gamma) - (B - 2.0 * A) / (1.0 - gamma) + (A - B + C) / gamma;
    return gamma * S / std::tgamma(1.0 - gamma);
}

// Value of a power term on every cell outside its span, scaled, added to reg.
inline void add_power_outside_span(CellFunction& F, const SingularTerm& s, double scale) {
    const std::size_t n = F.cells();
    for (std::size_t k = 0; k < n; ++k) {
        if (k >= s.first_cell && k <= s.last_cell) continue;
        if (s.left ? F.times[k + 1] <= s.anchor : F.times[k] >= s.anchor) continue;
        for (std::size_t j = 0; j < F.q; ++j) F.reg[k * F.q + j] += scale * s(F.node_time(k, j));
    }
}

/// Right derivative D^γ_{b-} of a cell function whose singular terms are right-anchored powers:
/// the terms are differentiated exactly in full, the rest through the engine.
/// `kinks` lists (t, Q'(t+) - Q'(t-)) at grid nodes; each gives J (t - r)_+^{1-γ} / Γ(2-γ).
inline CellFunction right_derivative_of_cells(const CellFunction& Q, double gamma,
                                              const std::vector<std::pair<double, double>>& kinks = {}) {
    CellFunction smooth(Q.times, Q.q);
    smooth.reg = Q.reg;
    std::vector<SingularTerm> exact;
    for (const auto& s : Q.sing) {
        if (s.left) throw std::invalid_argument("expected right-anchored power terms");
        add_power_outside_span(smooth, s, -1.0);
        SingularTerm d = s;
        d.coef *= std::exp(std::lgamma(s.exponent + 1.0) - std::lgamma(s.exponent + 1.0 - gamma));
        d.exponent = s.exponent - gamma;
        exact.push_back(d);
    }
    smooth.finalize();
    auto p = plain_problem(Q.times, [&smooth](double t) { return smooth.eval(t); }, gamma);
    const double ig = 1.0 / std::tgamma(2.0 - gamma);
    for (const auto& [t, J] : kinks) p.powers.push_back({t, J * ig, 1.0 - gamma});
    auto K = marchaud_right_cells(p, Q.q);
    for (const auto& d : exact) {
        add_power_outside_span(K, d, 1.0);
        K.sing.push_back(d);
    }
    K.finalize();
    return K;
}

}  // namespace detail

/// One-sided Weyl–Marchaud derivative of every component of a sampled path, evaluated on
/// t_grid (default: the path grid). Closed forms for the piecewise-linear interpolant.
inline FracDerivResult frac_derivative(const SampledPath& path, const FracDerivSpec& spec,
                                       std::vector<double> t_grid = {}) {
    spec.validate();
    if (t_grid.empty()) t_grid = path.times();
    const double a = path.a(), b = path.b();
    for (double t : t_grid)
        if (!(t >= a && t <= b)) throw std::out_of_range("evaluation time outside the path interval");
    const bool left = spec.side == Side::left_aplus;
    const double alpha = spec.order;
    const std::size_t m = path.dim();
    const std::size_t n = path.size();
    // Work in reflected time for the right side.
    std::vector<double> times = left ? path.times() : detail::mirror_times(path.times());
    const bool on_nodes = t_grid == path.times();
    const bool uniform = detail::is_uniform(path.times());
    FracDerivResult res;
    std::vector<double> out(t_grid.size() * m, 0.0);
    res.endpoint_coefficient.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> g(n);
        for (std::size_t k = 0; k < n; ++k) g[k] = path.value(left ? k : n - 1 - k, i);
        const double base = g[0];
        if (spec.base != BaseCorrection::none)
            for (double& v : g) v -= base;
        const auto dm = detail::slope_jumps(times, g);
        if (g[0] != 0.0) {
            res.endpoint_singular = true;
            res.endpoint_coefficient[i] = g[0] / std::tgamma(1.0 - alpha);
        }
        if (on_nodes && uniform) {
            // Node k: h^{1-α} Σ_{i<k} Δm_i (k-i)^{1-α} / Γ(2-α) plus the boundary term.
            const double h = (b - a) / static_cast<double>(n - 1);
            std::vector<double> table(n);
            for (std::size_t d = 0; d < n; ++d) table[d] = std::pow(static_cast<double>(d), 1.0 - alpha);
            const double scale = std::pow(h, 1.0 - alpha) / std::tgamma(2.0 - alpha);
            const double bscale = g[0] / std::tgamma(1.0 - alpha);
            detail::parallel_for(n, [&](std::size_t kk) {
                double acc = 0.0;
                for (std::size_t q = 0; q < kk; ++q) acc += dm[q] * table[kk - q];
                double v = scale * acc;
                if (kk > 0 && g[0] != 0.0) v += bscale * std::pow(static_cast<double>(kk) * h, -alpha);
                out[(left ? kk : n - 1 - kk) * m + i] = v;
            });
            continue;
        }
        // Reflection maps D_{b-} to the left derivative with the same sign.
        detail::parallel_for(t_grid.size(), [&](std::size_t s) {
            const double t = left ? t_grid[s] : a + b - t_grid[s];
            double v = 0.0;
            if (t > times.front()) v = detail::pl_left_derivative_at(times, g, dm, alpha, t, false);
            out[s * m + i] = v;
        });
    }
    res.derivative = SampledPath(std::move(t_grid), std::move(out), m);
    return res;
}

/// Compensated fractional derivative
/// D̂^γ_{a+}φ_j(X)(r) = (1/Γ(1-γ)) [ φ_j(X(r)) (r-a)^{-γ}
///                       + γ ∫_a^r (φ_j(X)_{θ,r} - Σ_i ∂_iφ_j(X(θ)) X^i_{θ,r}) (r-θ)^{-γ-1} dθ ].
inline FracDerivResult compensated_frac_derivative(const SampledPath& X, const Coefficient& phi, double gamma,
                                                   std::size_t j, std::vector<double> t_grid = {}) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("fractional order must lie in (0,1)");
    if (j >= phi.d) throw std::invalid_argument("output index out of range");
    if (t_grid.empty()) t_grid = X.times();
    const auto problem = detail::compensated_problem(X, phi, gamma, j);
    const detail::MarchaudEngine engine(problem, detail::kCellNodes);
    FracDerivResult res;
    res.endpoint_coefficient.assign(1, 0.0);
    const double fa = phi(X.point(0), j);
    std::vector<double> out(t_grid.size(), 0.0);
    for (std::size_t s = 0; s < t_grid.size(); ++s) {
        const double r = t_grid[s];
        if (!(r >= X.a() && r <= X.b())) throw std::out_of_range("evaluation time outside the path interval");
        if (r == X.a()) continue;
        const std::size_t k = X.cell_of(r);
        out[s] = engine.at(r, (r == X.time(k) && k > 0) ? k - 1 : k);
    }
    if (fa != 0.0) {
        res.endpoint_singular = true;
        res.endpoint_coefficient[0] = fa / std::tgamma(1.0 - gamma);
    }
    res.derivative = SampledPath(std::move(t_grid), std::move(out), 1);
    return res;
}

}  // namespace roughint
