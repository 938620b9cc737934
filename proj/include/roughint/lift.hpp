#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "roughint/detail/parallel.hpp"
#include "roughint/frac_calc.hpp"
#include "roughint/path.hpp"

namespace roughint {

enum class LiftKind { smooth_iterated, geometric_1d, dyadic_level, external };

inline const char* to_string(LiftKind k) {
    switch (k) {
        case LiftKind::smooth_iterated: return "smooth_iterated";
        case LiftKind::geometric_1d: return "geometric_1d";
        case LiftKind::dyadic_level: return "dyadic_level";
        case LiftKind::external: return "external";
    }
    return "?";
}

/// (X, Y, X⊗Y) on a common grid. The tensor is kept as the prefix P(t) = (X⊗Y)_{a,t};
/// Chen's relation gives (X⊗Y)_{s,t} = P(t) - P(s) - X_{a,s} ⊗ Y_{s,t}.
/// Inside cell k, P(t_k + τh) = P_k + X_{a,t_k} ⊗ ΔY_k τ + ½ ΔX_k ⊗ ΔY_k τ² + E_k τ.
struct MultiplicativeFunctional {
    SampledPath X;
    SampledPath Y;
    std::vector<double> prefix;  // [(k * m + i) * d + j]
    std::vector<double> defect;  // E_k, same layout over cells
    double beta = 0.0;
    LiftKind construction = LiftKind::smooth_iterated;
    int level = -1;
    /// Full simplex data for external tensors, [((s * N + t) * m + i) * d + j]; empty otherwise.
    std::vector<double> dense;

    std::size_t m() const { return X.dim(); }
    std::size_t d() const { return Y.dim(); }
    std::size_t size() const { return X.size(); }
    double a() const { return X.a(); }
    double b() const { return X.b(); }

    double prefix_node(std::size_t k, std::size_t i, std::size_t j) const { return prefix[(k * m() + i) * d() + j]; }

    double tensor(std::size_t s, std::size_t t, std::size_t i, std::size_t j) const {
        return prefix_node(t, i, j) - prefix_node(s, i, j) - (X.value(s, i) - X.value(0, i)) * (Y.value(t, j) - Y.value(s, j));
    }

    double prefix_at(double t, std::size_t i, std::size_t j) const {
        const std::size_t k = X.cell_of(t);
        const double h = X.time(k + 1) - X.time(k);
        const double tau = (t - X.time(k)) / h;
        const double dx = X.value(k + 1, i) - X.value(k, i), dy = Y.value(k + 1, j) - Y.value(k, j);
        const double xa = X.value(k, i) - X.value(0, i);
        const std::size_t c = (k * m() + i) * d() + j;
        return prefix[c] + xa * dy * tau + 0.5 * dx * dy * tau * tau + defect[c] * tau;
    }

    double tensor_at(double s, double t, std::size_t i, std::size_t j) const {
        return prefix_at(t, i, j) - prefix_at(s, i, j) -
               (X.eval_component(s, i) - X.value(0, i)) * (Y.eval_component(t, j) - Y.eval_component(s, j));
    }
};

namespace detail {

inline void check_common_grid(const SampledPath& X, const SampledPath& Y) {
    if (X.times() != Y.times()) throw std::invalid_argument("X and Y must share the same grid");
}

inline void fill_defect(MultiplicativeFunctional& mf) {
    const std::size_t m = mf.m(), d = mf.d(), n = mf.size() - 1;
    mf.defect.assign(n * m * d, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                const double dx = mf.X.value(k + 1, i) - mf.X.value(k, i), dy = mf.Y.value(k + 1, j) - mf.Y.value(k, j);
                const double xa = mf.X.value(k, i) - mf.X.value(0, i);
                const double e = mf.prefix_node(k + 1, i, j) - mf.prefix_node(k, i, j) - xa * dy - 0.5 * dx * dy;
                mf.defect[(k * m + i) * d + j] = e;
            }
}

}  // namespace detail

/// Iterated integrals ∬_{s<ξ<η<t} dX^i(ξ) dY^j(η) of the piecewise-linear interpolants.
inline MultiplicativeFunctional lift_smooth(const SampledPath& X, const SampledPath& Y) {
    detail::check_common_grid(X, Y);
    MultiplicativeFunctional mf{X, Y};
    const std::size_t m = X.dim(), d = Y.dim(), N = X.size();
    mf.prefix.assign(N * m * d, 0.0);
    for (std::size_t k = 0; k + 1 < N; ++k)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                const double dx = X.value(k + 1, i) - X.value(k, i), dy = Y.value(k + 1, j) - Y.value(k, j);
                const double xa = X.value(k, i) - X.value(0, i);
                mf.prefix[((k + 1) * m + i) * d + j] = mf.prefix[(k * m + i) * d + j] + xa * dy + 0.5 * dx * dy;
            }
    detail::fill_defect(mf);
    mf.construction = LiftKind::smooth_iterated;
    return mf;
}

/// (X⊗X)_{s,t} = X_{s,t}² / 2.
inline MultiplicativeFunctional lift_geometric_1d(const SampledPath& X) {
    if (X.dim() != 1) throw std::invalid_argument("geometric 1d lift needs a scalar path");
    MultiplicativeFunctional mf{X, X};
    mf.prefix.resize(X.size());
    for (std::size_t k = 0; k < X.size(); ++k) {
        const double inc = X.value(k) - X.value(0);
        mf.prefix[k] = 0.5 * inc * inc;
    }
    detail::fill_defect(mf);
    mf.construction = LiftKind::geometric_1d;
    return mf;
}

/// Smooth lift of the interpolants on the uniform grid with 2^level intervals.
inline MultiplicativeFunctional lift_dyadic(const SampledPath& X, const SampledPath& Y, int level) {
    detail::check_common_grid(X, Y);
    if (level < 0 || level > 40) throw std::invalid_argument("dyadic level out of range");
    const std::size_t n = std::size_t{1} << level;
    if (n > X.intervals()) throw std::invalid_argument("dyadic level exceeds the sample resolution");
    const auto grid = uniform_grid(X.a(), X.b(), n);
    auto mf = lift_smooth(X.resample(grid), Y.resample(grid));
    mf.construction = LiftKind::dyadic_level;
    mf.level = level;
    return mf;
}

/// Tensor given on the whole simplex, [((s * N + t) * m + i) * d + j] for s <= t.
/// The prefix P_k = T(a, t_k) is kept; under Chen it determines the rest.
inline MultiplicativeFunctional lift_external(const SampledPath& X, const SampledPath& Y, std::vector<double> dense) {
    detail::check_common_grid(X, Y);
    const std::size_t m = X.dim(), d = Y.dim(), N = X.size();
    if (dense.size() != N * N * m * d) throw std::invalid_argument("external tensor has the wrong size");
    MultiplicativeFunctional mf{X, Y};
    mf.prefix.resize(N * m * d);
    for (std::size_t k = 0; k < N; ++k)
        for (std::size_t c = 0; c < m * d; ++c) mf.prefix[k * m * d + c] = dense[k * m * d + c];
    mf.dense = std::move(dense);
    detail::fill_defect(mf);
    mf.construction = LiftKind::external;
    return mf;
}

namespace detail {

// The tensor computed without Chen assembly: iterated sums for the smooth family, the
// closed form for the geometric lift, the stored data for external input.
inline double direct_tensor(const MultiplicativeFunctional& mf, std::size_t s, std::size_t t, std::size_t i,
                            std::size_t j) {
    const auto& X = mf.X;
    const auto& Y = mf.Y;
    switch (mf.construction) {
        case LiftKind::geometric_1d: {
            const double inc = X.value(t) - X.value(s);
            return 0.5 * inc * inc;
        }
        case LiftKind::external: {
            const std::size_t N = mf.size();
            return mf.dense[((s * N + t) * mf.m() + i) * mf.d() + j];
        }
        default: {
            double acc = 0.0;
            for (std::size_t k = s; k < t; ++k) {
                const double dx = X.value(k + 1, i) - X.value(k, i), dy = Y.value(k + 1, j) - Y.value(k, j);
                acc += (X.value(k, i) - X.value(s, i)) * dy + 0.5 * dx * dy;
            }
            return acc;
        }
    }
}

}  // namespace detail

struct MFValidation {
    double chen_defect = 0.0;
    double c_beta = 0.0;
    double diagonal_max = 0.0;
    double holder_x = 0.0;
    double holder_y = 0.0;
    std::size_t triples = 0;
};

/// Chen defect over random grid triples, sup |(X⊗Y)_{s,t}| / |t-s|^{2β} over all grid pairs.
inline MFValidation validate_mf(const MultiplicativeFunctional& mf, double beta, std::size_t triples = 1000,
                                std::uint64_t seed = 1) {
    MFValidation v;
    const std::size_t N = mf.size(), m = mf.m(), d = mf.d();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, N - 1);
    for (std::size_t r = 0; r < triples; ++r) {
        std::size_t idx[3] = {pick(rng), pick(rng), pick(rng)};
        std::sort(idx, idx + 3);
        const auto [s, u, t] = idx;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                const double lhs = detail::direct_tensor(mf, s, u, i, j) + detail::direct_tensor(mf, u, t, i, j) +
                                   (mf.X.value(u, i) - mf.X.value(s, i)) * (mf.Y.value(t, j) - mf.Y.value(u, j));
                v.chen_defect = std::max(v.chen_defect, std::abs(lhs - detail::direct_tensor(mf, s, t, i, j)));
            }
    }
    v.triples = triples;
    for (std::size_t k = 0; k < N; ++k)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < d; ++j)
                v.diagonal_max = std::max(v.diagonal_max, std::abs(detail::direct_tensor(mf, k, k, i, j)));
    std::vector<double> best(N, 0.0);
    detail::parallel_for(N, [&](std::size_t s) {
        double b = 0.0;
        for (std::size_t t = s + 1; t < N; ++t) {
            const double w = std::pow(mf.X.time(t) - mf.X.time(s), -2.0 * beta);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < d; ++j) b = std::max(b, std::abs(mf.tensor(s, t, i, j)) * w);
        }
        best[s] = b;
    });
    v.c_beta = *std::max_element(best.begin(), best.end());
    v.holder_x = holder_seminorm(mf.X, beta).value;
    v.holder_y = holder_seminorm(mf.Y, beta).value;
    return v;
}

/// sup over the level-k simplex of |lift_dyadic(k+1) - lift_dyadic(k)|, for consecutive levels.
inline std::vector<double> dyadic_cauchy(const SampledPath& X, const SampledPath& Y, int lo, int hi) {
    std::vector<double> out;
    for (int k = lo; k < hi; ++k) {
        const auto A = lift_dyadic(X, Y, k), B = lift_dyadic(X, Y, k + 1);
        double diff = 0.0;
        for (std::size_t s = 0; s < A.size(); ++s)
            for (std::size_t t = s; t < A.size(); ++t)
                for (std::size_t i = 0; i < A.m(); ++i)
                    for (std::size_t j = 0; j < A.d(); ++j)
                        diff = std::max(diff, std::abs(A.tensor(s, t, i, j) - B.tensor(2 * s, 2 * t, i, j)));
        out.push_back(diff);
    }
    return out;
}

namespace detail {

/// Right-sided problem r ↦ (1/Γ(1-γ)) [ T(r,b) (b-r)^{-γ} + γ ∫_r^b T(r,s) (s-r)^{-γ-1} ds ] for
/// component (i,j), written in original time; run it through mirrored().
/// T(r,s) = P(s) - P(r) - X_{a,r} (Y(s) - Y(r)) = u(r) - Σ v_c(r) A_c(s).
inline MarchaudProblem tensor_right_problem(const MultiplicativeFunctional& mf, double gamma, std::size_t i,
                                            std::size_t j) {
    MarchaudProblem p;
    p.gamma = gamma;
    p.times = mf.X.times();
    p.ncomp = 2;
    const double x0 = mf.X.value(0, i);
    const double b = mf.b();
    p.u = [&mf, i, j, x0](double r) {
        return -mf.prefix_at(r, i, j) + (mf.X.eval_component(r, i) - x0) * mf.Y.eval_component(r, j);
    };
    p.v = [&mf, i, x0](double r, std::span<double> out) {
        out[0] = -1.0;
        out[1] = mf.X.eval_component(r, i) - x0;
    };
    p.A = [&mf, i, j](double s, std::span<double> out) {
        out[0] = mf.prefix_at(s, i, j);
        out[1] = mf.Y.eval_component(s, j);
    };
    p.N = [&mf, i, j](double s, double r) { return mf.tensor_at(r, s, i, j); };
    p.boundary = [&mf, i, j, b](double r) { return r >= b ? 0.0 : mf.tensor_at(r, b, i, j); };
    // Node terms (t_k - r)_+^{2-γ}: for r < t_k < s the tensor is locally
    // ½ m⁻_X m⁻_Y u² + m⁻_X m⁺_Y u v + ½ m⁺_X m⁺_Y v² (u = t_k - r, v = s - t_k), plus the
    // defect slopes, which act like a path increment.
    const auto& X = mf.X;
    const auto& Y = mf.Y;
    const std::size_t m = mf.m(), d = mf.d();
    const double lin = 1.0 / std::tgamma(2.0 - gamma);
    for (std::size_t k = 1; k + 1 < X.size(); ++k) {
        const double h0 = X.time(k) - X.time(k - 1), h1 = X.time(k + 1) - X.time(k);
        const double xm = (X.value(k, i) - X.value(k - 1, i)) / h0, xp = (X.value(k + 1, i) - X.value(k, i)) / h1;
        const double ym = (Y.value(k, j) - Y.value(k - 1, j)) / h0, yp = (Y.value(k + 1, j) - Y.value(k, j)) / h1;
        double c = quadratic_node_coefficient(0.5 * xp * yp, xm * yp, 0.5 * xm * ym, gamma);
        const double em = mf.defect[((k - 1) * m + i) * d + j] / h0, ep = mf.defect[(k * m + i) * d + j] / h1;
        if (em != ep) p.powers.push_back({X.time(k), (em - ep) * lin, 1.0 - gamma});
        if (c != 0.0) p.powers.push_back({X.time(k), c, 2.0 - gamma});
    }
    {
        // At b only s in (r, b) contributes, through the integral and the boundary term.
        const std::size_t k = X.size() - 1;
        const double h = X.time(k) - X.time(k - 1);
        const double C = 0.5 * (X.value(k, i) - X.value(k - 1, i)) * (Y.value(k, j) - Y.value(k - 1, j)) / (h * h);
        const double c = 2.0 * C / ((2.0 - gamma) * std::tgamma(1.0 - gamma));
        if (c != 0.0) p.powers.push_back({X.time(k), c, 2.0 - gamma});
    }
    return p;
}

/// Slope jumps of r ↦ D^γ_{b-}(X⊗Y)^{i,j}(r) at interior nodes:
/// ∂_r (X⊗Y)_{r,s} = -X'(r) Y_{r,s}, so the jump is -ΔX'(t_k) · D^γ_{b-}[Y^j(b) - Y^j](t_k).
inline std::vector<std::pair<double, double>> tensor_derivative_kinks(const MultiplicativeFunctional& mf, double gamma,
                                                                     std::size_t i, std::size_t j) {
    const auto& X = mf.X;
    const std::size_t n = X.size();
    std::vector<double> t(X.times()), yr(n);
    // Reflected Y(b) - Y: the right derivative is the left one in reflected time.
    for (std::size_t k = 0; k < n; ++k) yr[k] = mf.Y.value(n - 1, j) - mf.Y.value(n - 1 - k, j);
    const auto tm = mirror_times(t);
    const auto dm = slope_jumps(tm, yr);
    std::vector<std::pair<double, double>> out;
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double dx = (X.value(k + 1, i) - X.value(k, i)) / (X.time(k + 1) - X.time(k)) -
                          (X.value(k, i) - X.value(k - 1, i)) / (X.time(k) - X.time(k - 1));
        if (dx == 0.0) continue;
        const double R = pl_left_derivative_at(tm, yr, dm, gamma, tm[n - 1 - k], true);
        out.push_back({X.time(k), -dx * R});
    }
    return out;
}

inline void check_tensor_order(const MultiplicativeFunctional& mf, double gamma) {
    if (!(gamma > 0.0 && gamma < std::min(1.0, 2.0 * mf.beta)))
        throw std::invalid_argument("tensor derivative order must lie in (0, min(1, 2β))");
}

}  // namespace detail

/// r ↦ D^γ_{b-}(X⊗Y)^{i,j}(r) on r_grid (default: the grid), components (i,j) in dim m·d.
inline SampledPath frac_derivative_tensor(const MultiplicativeFunctional& mf, double gamma,
                                          std::vector<double> r_grid = {}) {
    detail::check_tensor_order(mf, gamma);
    if (r_grid.empty()) r_grid = mf.X.times();
    const std::size_t m = mf.m(), d = mf.d();
    const double ab = mf.a() + mf.b();
    std::vector<double> out(r_grid.size() * m * d, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const auto p = detail::tensor_right_problem(mf, gamma, i, j).mirrored();
            const detail::MarchaudEngine engine(p, detail::kCellNodes);
            const SampledPath mirror_grid(p.times, std::vector<double>(p.times.size(), 0.0), 1);
            for (std::size_t s = 0; s < r_grid.size(); ++s) {
                const double r = r_grid[s];
                if (!(r >= mf.a() && r <= mf.b())) throw std::out_of_range("evaluation time outside the interval");
                const double rm = ab - r;
                if (rm <= p.times.front()) continue;
                std::size_t k = mirror_grid.cell_of(rm);
                if (rm == p.times[k] && k > 0) --k;
                out[s * m * d + i * d + j] = engine.at(rm, k);
            }
        }
    return SampledPath(std::move(r_grid), std::move(out), m * d);
}

inline void write_tensor_csv(std::ostream& os, const MultiplicativeFunctional& mf) {
    os << "i,j,s_index,t_index,value\n";
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < mf.m(); ++i)
        for (std::size_t j = 0; j < mf.d(); ++j)
            for (std::size_t s = 0; s < mf.size(); ++s)
                for (std::size_t t = s; t < mf.size(); ++t)
                    os << i << ',' << j << ',' << s << ',' << t << ',' << mf.tensor(s, t, i, j) << '\n';
}

/// Reads rows i,j,s_index,t_index,value; missing simplex entries are an error.
inline std::vector<double> read_tensor_csv(std::istream& is, std::size_t N, std::size_t m, std::size_t d) {
    std::vector<double> dense(N * N * m * d, std::numeric_limits<double>::quiet_NaN());
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty tensor file");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f[5];
        for (auto& x : f)
            if (!std::getline(ss, x, ',')) throw std::runtime_error("tensor row needs 5 fields: " + line);
        const std::size_t i = std::stoul(f[0]), j = std::stoul(f[1]), s = std::stoul(f[2]), t = std::stoul(f[3]);
        if (i >= m || j >= d || s >= N || t >= N || s > t) throw std::runtime_error("tensor index out of range: " + line);
        dense[((s * N + t) * m + i) * d + j] = std::stod(f[4]);
    }
    for (std::size_t s = 0; s < N; ++s)
        for (std::size_t t = s; t < N; ++t)
            for (std::size_t c = 0; c < m * d; ++c)
                if (std::isnan(dense[(s * N + t) * m * d + c])) throw std::runtime_error("tensor file misses simplex entries");
    return dense;
}

}  // namespace roughint
