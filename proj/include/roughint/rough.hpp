#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "roughint/bv.hpp"
#include "roughint/detail/cells.hpp"
#include "roughint/frac_calc.hpp"
#include "roughint/lift.hpp"
#include "roughint/path.hpp"
#include "roughint/potentials.hpp"
#include "roughint/young.hpp"

namespace roughint {

/// Raised when exponents leave the window where the integral is defined.
class AdmissibilityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct AlphaWindow {
    bool empty = true;
    double lo = 0.0;
    double hi = 0.0;
    double midpoint() const { return 0.5 * (lo + hi); }
    bool contains(double a) const { return !empty && a > lo && a < hi; }
};

/// 1/β - 2 < λ < 1  ⇒  1 - β < α < (λβ + 1)/2.
inline AlphaWindow check_rough_admissible_smooth(double beta, double lambda) {
    if (!(beta > 1.0 / 3.0 && beta < 0.5)) throw std::invalid_argument("β must lie in (1/3, 1/2)");
    AlphaWindow w;
    if (!(lambda > 1.0 / beta - 2.0 && lambda < 1.0)) return w;
    w.lo = 1.0 - beta;
    w.hi = 0.5 * (lambda * beta + 1.0);
    w.empty = !(w.hi > w.lo);
    return w;
}

struct BVAdmissibility {
    bool ok = false;
    double eps_lo = 0.0;
    double eps_hi = 0.0;
    double eps = 0.0;
    double alpha = 0.0;
    AlphaWindow alpha_window;  // (1-β, (sβ+1)/2)
    std::string reason;
};

/// 1/β - 2 < s < 1, ½(β(1+s) - (1-β)) < ε < β(1+s) - (1-β), α = β(1+s) - ε.
/// Without ε the midpoint of the ε-window is used.
inline BVAdmissibility check_rough_admissible_bv(double beta, double s, std::optional<double> eps = std::nullopt) {
    if (!(beta > 1.0 / 3.0 && beta < 0.5)) throw std::invalid_argument("β must lie in (1/3, 1/2)");
    BVAdmissibility r;
    if (!(s > 1.0 / beta - 2.0 && s < 1.0)) {
        r.reason = "s outside (1/β - 2, 1)";
        return r;
    }
    const double top = beta * (1.0 + s) - (1.0 - beta);
    r.eps_lo = 0.5 * top;
    r.eps_hi = top;
    r.eps = eps.value_or(0.5 * (r.eps_lo + r.eps_hi));
    r.alpha_window = {false, 1.0 - beta, 0.5 * (s * beta + 1.0)};
    if (!(r.eps > r.eps_lo && r.eps < r.eps_hi)) {
        r.reason = "ε outside its window";
        return r;
    }
    r.alpha = beta * (1.0 + s) - r.eps;
    if (!r.alpha_window.contains(r.alpha)) {
        r.reason = "induced α outside (1-β, (sβ+1)/2)";
        return r;
    }
    r.ok = true;
    return r;
}

struct BoundReport {
    std::string kind;  // "smooth" or "bv"
    double rhs = 0.0;
    bool finite = true;
    std::vector<std::pair<std::string, double>> ingredients;
};

struct RoughIntegralResult {
    double value = 0.0;
    double alpha_used = 0.0;
    double term_first = 0.0;
    double term_second = 0.0;
    std::string construction;
    std::optional<SweepTable> sweep;
    std::optional<BoundReport> bound_report;
};

namespace detail {

// r ↦ ∂_iφ_j(X(r)) as a plain Marchaud problem; crossings of the coefficient's kinks are
// breakpoints carrying jumps of the partial.
inline MarchaudProblem partial_problem(const SampledPath& X, const Coefficient& phi, std::size_t i, std::size_t j,
                                       double gamma) {
    auto Xp = std::make_shared<const SampledPath>(X);
    auto Pp = std::make_shared<const Coefficient>(phi);
    auto f = [Xp, Pp, i, j](double s) { return Pp->dphi(Xp->eval(s), i, j); };
    auto p = plain_problem(X.times(), f, gamma);
    p.breakpoints = all_crossings(X, phi);
    for (double tc : p.breakpoints) {
        const std::size_t k = X.cell_of(tc);
        const double h = X.time(k + 1) - X.time(k);
        const double d = 1e-9 * h;
        const double lo = std::max(X.a(), tc - d), hi = std::min(X.b(), tc + d);
        const double jump = f(hi) - f(lo);
        if (jump != 0.0) p.jumps.push_back({tc, jump});
    }
    // Slope jumps of f at the grid nodes give (r - t_k)_+^{1-γ} terms.
    const double ig = 1.0 / std::tgamma(2.0 - gamma);
    for (std::size_t k = 0; k + 1 < X.size(); ++k) {
        const double tk = X.time(k);
        const double d = 1e-4 * (k == 0 ? X.time(1) - tk : std::min(tk - X.time(k - 1), X.time(k + 1) - tk));
        auto it = std::lower_bound(p.breakpoints.begin(), p.breakpoints.end(), tk - 4 * d);
        if (it != p.breakpoints.end() && *it <= tk + 4 * d) continue;
        const double right = (-5 * f(tk + d) + 8 * f(tk + 2 * d) - 3 * f(tk + 3 * d)) / (2 * d);
        const double left = k == 0 ? 0.0 : (5 * f(tk - d) - 8 * f(tk - 2 * d) + 3 * f(tk - 3 * d)) / (2 * d);
        const double dm = right - left;
        if (dm != 0.0) p.powers.push_back({tk, dm * ig, 1.0 - gamma});
    }
    return p;
}

}  // namespace detail

/// ∫ φ(X) dY for a multiplicative functional (X, Y, X⊗Y):
///   term_first  = -Σ_j ∫ D̂^α_{a+}φ_j(X) · D^{1-α}_{b-}(Y^j - Y^j(b))
///   term_second =  Σ_{i,j} ∫ D^{2α-1}_{a+}(∂_iφ_j(X)) · D^{1-α}_{b-}[ r ↦ D^{1-α}_{b-}(X⊗Y)^{i,j}(r) ]
/// with the real sign convention of frac_calc.
inline RoughIntegralResult rough_integrate(const MultiplicativeFunctional& mf, const Coefficient& phi, double alpha) {
    if (phi.m != mf.m() || phi.d != mf.d()) throw std::invalid_argument("coefficient shape differs from (m, d)");
    if (!(alpha > 0.5 && alpha < 1.0)) throw AdmissibilityError("α must lie in (1/2, 1)");
    if (mf.beta > 0.0 && !(1.0 - alpha < 2.0 * mf.beta)) throw AdmissibilityError("1 - α must be below 2β");
    const auto& X = mf.X;
    const auto& Y = mf.Y;
    const auto& t = X.times();
    const std::size_t n = X.size();
    RoughIntegralResult res;
    res.alpha_used = alpha;
    res.construction = to_string(mf.construction);
    std::vector<double> yc(n);
    for (std::size_t j = 0; j < mf.d(); ++j) {
        for (std::size_t k = 0; k < n; ++k) yc[k] = Y.value(k, j) - Y.value(n - 1, j);
        const auto G = detail::pl_right_cells(t, yc, 1.0 - alpha);
        const auto problem = detail::compensated_problem(X, phi, alpha, j);
        const auto F = detail::marchaud_left_cells(problem);
        res.term_first -= detail::pair_integral(F, G);
    }
    for (std::size_t i = 0; i < mf.m(); ++i)
        for (std::size_t j = 0; j < mf.d(); ++j) {
            const auto pp = detail::partial_problem(X, phi, i, j, 2.0 * alpha - 1.0);
            const auto F = detail::marchaud_left_cells(pp);
            bool zero = true;
            for (double v : F.reg) zero = zero && v == 0.0;
            if (zero && F.sing.empty()) continue;
            const auto tp = detail::tensor_right_problem(mf, 1.0 - alpha, i, j);
            const auto Q = detail::marchaud_right_cells(tp);
            const auto K = detail::right_derivative_of_cells(Q, 1.0 - alpha, detail::tensor_derivative_kinks(mf, 1.0 - alpha, i, j));
            res.term_second += detail::pair_integral(F, K);
        }
    res.value = res.term_first + res.term_second;
    if (!std::isfinite(res.term_first)) throw std::runtime_error("first (compensated) term is not finite");
    if (!std::isfinite(res.term_second)) throw std::runtime_error("second (tensor) term is not finite");
    return res;
}

/// Midpoint of (1 - β, (λβ + 1)/2); throws when the window is empty.
inline double default_alpha_smooth(double beta, double lambda) {
    const auto w = check_rough_admissible_smooth(beta, lambda);
    if (w.empty) throw AdmissibilityError("empty α window for β = " + std::to_string(beta) + ", λ = " + std::to_string(lambda));
    return w.midpoint();
}

/// α = β(1+s) - ε after the BV checks, including 2α - 1 < sβ.
inline RoughIntegralResult rough_integrate_bv(const MultiplicativeFunctional& mf, const Coefficient& phi, double beta,
                                              double s, std::optional<double> eps = std::nullopt) {
    const auto adm = check_rough_admissible_bv(beta, s, eps);
    if (!adm.ok) throw AdmissibilityError(adm.reason);
    if (!(2.0 * adm.alpha - 1.0 < s * beta)) throw AdmissibilityError("2α - 1 must be below sβ");
    return rough_integrate(mf, phi, adm.alpha);
}

inline SweepTable rough_alpha_sweep(const MultiplicativeFunctional& mf, const Coefficient& phi,
                                    const std::vector<double>& alphas) {
    return alpha_sweep([&](double a) { return rough_integrate(mf, phi, a).value; }, alphas);
}

namespace detail {

// ∫_a^b |g(X(t))| dt with 4 Gauss points per cell.
template <class G>
double path_l1(const SampledPath& X, G&& g) {
    static constexpr double x4[4] = {0.06943184420297371, 0.33000947820757187, 0.6699905217924281, 0.9305681557970262};
    static constexpr double w4[4] = {0.17392742256872692, 0.3260725774312731, 0.3260725774312731, 0.17392742256872692};
    const std::size_t m = X.dim();
    std::vector<double> pt(m);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < X.size(); ++k) {
        const double h = X.time(k + 1) - X.time(k);
        for (int q = 0; q < 4; ++q) {
            for (std::size_t i = 0; i < m; ++i) pt[i] = X.value(k, i) + x4[q] * (X.value(k + 1, i) - X.value(k, i));
            acc += h * w4[q] * std::abs(g(std::span<const double>(pt)));
        }
    }
    return acc;
}

// Up to ~n evenly spread path nodes plus cell midpoints.
inline std::vector<std::vector<double>> path_sample_points(const SampledPath& X, std::size_t n = 400) {
    const std::size_t stride = std::max<std::size_t>(1, X.size() / n);
    std::vector<std::vector<double>> pts;
    for (std::size_t k = 0; k < X.size(); k += stride) {
        pts.emplace_back(X.point(k).begin(), X.point(k).end());
        if (k + 1 < X.size()) {
            std::vector<double> mid(X.dim());
            for (std::size_t i = 0; i < X.dim(); ++i) mid[i] = 0.5 * (X.value(k, i) + X.value(k + 1, i));
            pts.push_back(std::move(mid));
        }
    }
    if (X.dim() == 1) {
        const auto [lo, hi] = std::minmax_element(X.values().begin(), X.values().end());
        for (std::size_t q = 0; q <= n; ++q) pts.push_back({*lo + (*hi - *lo) * double(q) / double(n)});
    }
    return pts;
}

// Lipschitz constant of φ_j on the path range: the coefficient's own constant when finite,
// otherwise the largest gradient norm at sample points.
inline double local_lip(const SampledPath& X, const Coefficient& phi, std::size_t j) {
    if (j < phi.lip.size() && std::isfinite(phi.lip[j])) return phi.lip[j];
    double best = 0.0;
    for (const auto& p : path_sample_points(X)) {
        double g = 0.0;
        for (std::size_t i = 0; i < phi.m; ++i) g += std::pow(phi.dphi(p, i, j), 2);
        best = std::max(best, std::sqrt(g));
    }
    return best;
}

// λ-Hölder seminorm of ∂_iφ_j over pairs of sample points on the path range.
inline double partial_holder(const SampledPath& X, const Coefficient& phi, std::size_t i, std::size_t j,
                             double lambda) {
    const auto pts = path_sample_points(X, 300);
    std::vector<double> v(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) v[k] = phi.dphi(pts[k], i, j);
    double best = 0.0;
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b) {
            const double d = euclid_distance(pts[a], pts[b]);
            if (d > 0.0) best = std::max(best, std::abs(v[a] - v[b]) / std::pow(d, lambda));
        }
    return best;
}

// sup_{s<t} |(X⊗Y)^{i,j}_{s,t}| / (t - s)^{2β} over node pairs.
inline double tensor_holder(const MultiplicativeFunctional& mf, std::size_t i, std::size_t j, double beta) {
    const std::size_t n = mf.X.size();
    double best = 0.0;
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t t = s + 1; t < n; ++t)
            best = std::max(best, std::abs(mf.tensor(s, t, i, j)) / std::pow(mf.X.time(t) - mf.X.time(s), 2.0 * beta));
    return best;
}

inline double component_holder(const SampledPath& Y, std::size_t j, double beta) {
    return holder_seminorm(Y.dim() == 1 ? Y : Y.component(j), beta).value;
}

}  // namespace detail

/// Right-hand side of the smooth-coefficient estimate with c = 1.
inline BoundReport bound_smooth(const MultiplicativeFunctional& mf, const Coefficient& phi, double lambda,
                                std::optional<double> beta_opt = std::nullopt) {
    const double beta = beta_opt.value_or(mf.beta);
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("β must lie in (0,1)");
    if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("λ must lie in (0,1]");
    BoundReport rep;
    rep.kind = "smooth";
    const double hx = holder_seminorm(mf.X, beta).value;
    rep.ingredients.push_back({"holder_X", hx});
    for (std::size_t j = 0; j < phi.d; ++j) {
        const std::string J = std::to_string(j);
        const double l1 = detail::path_l1(mf.X, [&](std::span<const double> x) { return phi(x, j); });
        const double lip = detail::local_lip(mf.X, phi, j);
        const double hy = detail::component_holder(mf.Y, j, beta);
        double first = l1 + lip * hx;
        rep.ingredients.push_back({"L1_phi_" + J, l1});
        rep.ingredients.push_back({"lip_phi_" + J, lip});
        rep.ingredients.push_back({"holder_Y_" + J, hy});
        for (std::size_t i = 0; i < phi.m; ++i) {
            const std::string IJ = std::to_string(i) + "_" + J;
            const double hp = detail::partial_holder(mf.X, phi, i, j, lambda);
            const double l1d = detail::path_l1(mf.X, [&](std::span<const double> x) { return phi.dphi(x, i, j); });
            const double ht = detail::tensor_holder(mf, i, j, beta);
            first += hp * std::pow(hx, 1.0 + lambda);
            rep.rhs += (l1d + hp * hx) * ht;
            rep.ingredients.push_back({"holder_dphi_" + IJ, hp});
            rep.ingredients.push_back({"L1_dphi_" + IJ, l1d});
            rep.ingredients.push_back({"holder_tensor_" + IJ, ht});
        }
        rep.rhs += first * hy;
    }
    rep.finite = std::isfinite(rep.rhs);
    return rep;
}

/// Right-hand side of the BV-coefficient estimate with c = 1. The segment functional is
/// evaluated on the path coarsened to at most `segment_cells` cells.
inline BoundReport bound_bv(const MultiplicativeFunctional& mf, const Coefficient& phi, double s, double eps,
                            std::optional<double> beta_opt = std::nullopt, std::size_t segment_cells = 256) {
    const double beta = beta_opt.value_or(mf.beta);
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("β must lie in (0,1)");
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("s must lie in (0,1)");
    if (!(eps > 0.0)) throw std::invalid_argument("ε must be positive");
    BoundReport rep;
    rep.kind = "bv";
    const double hx = holder_seminorm(mf.X, beta).value;
    rep.ingredients.push_back({"holder_X", hx});
    const std::size_t stride = std::max<std::size_t>(1, (mf.X.intervals() + segment_cells - 1) / segment_cells);
    const SampledPath coarse = mf.X.subsample(stride);
    for (std::size_t j = 0; j < phi.d; ++j) {
        const std::string J = std::to_string(j);
        const double l1 = detail::path_l1(mf.X, [&](std::span<const double> x) { return phi(x, j); });
        const double lip = detail::local_lip(mf.X, phi, j);
        const double hy = detail::component_holder(mf.Y, j, beta);
        double first = l1 + lip * hx;
        rep.ingredients.push_back({"L1_phi_" + J, l1});
        rep.ingredients.push_back({"lip_phi_" + J, lip});
        rep.ingredients.push_back({"holder_Y_" + J, hy});
        for (std::size_t i = 0; i < phi.m; ++i) {
            const std::string IJ = std::to_string(i) + "_" + J;
            const auto& nu = phi.gradient_of(i, j);
            const double U = nu.empty() ? 0.0 : variability_norm(mf.X, nu, s, 1.0).norm;
            const double seg = nu.empty() ? 0.0 : segment_functional(coarse, nu, s, eps).value;
            const double l1d = detail::path_l1(mf.X, [&](std::span<const double> x) { return phi.dphi(x, i, j); });
            const double ht = detail::tensor_holder(mf, i, j, beta);
            const double xs = std::pow(hx, 1.0 + s);
            // 0·inf stays inf: an infinite ingredient is a hypothesis failure.
            first += (seg == 0.0 ? 0.0 : seg * xs) + (U == 0.0 ? 0.0 : U * xs);
            rep.rhs += (l1d + (U == 0.0 ? 0.0 : U * std::pow(hx, s))) * ht;
            rep.ingredients.push_back({"segment_" + IJ, seg});
            rep.ingredients.push_back({"potential_L1_" + IJ, U});
            rep.ingredients.push_back({"L1_dphi_" + IJ, l1d});
            rep.ingredients.push_back({"holder_tensor_" + IJ, ht});
        }
        rep.rhs += first * hy;
    }
    rep.finite = std::isfinite(rep.rhs);
    if (!rep.finite) rep.rhs = std::numeric_limits<double>::infinity();
    return rep;
}

}  // namespace roughint
