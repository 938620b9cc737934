#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "roughint/bv.hpp"
#include "roughint/lift.hpp"
#include "roughint/path.hpp"

namespace roughint {

enum class OracleKind { riemann_stieltjes, midpoint_compensated };

inline std::string to_string(OracleKind k) {
    return k == OracleKind::riemann_stieltjes ? "riemann_stieltjes" : "midpoint_compensated";
}

struct OracleResult {
    OracleKind kind = OracleKind::riemann_stieltjes;
    std::vector<std::size_t> ladder;  // intervals per rung
    std::vector<double> values;
    double extrapolated = 0.0;
    double observed_order = 0.0;  // 0 when the last three rungs do not contract
    double fit_residual = 0.0;    // spread of the Richardson estimate over consecutive triples
};

namespace detail {

inline std::size_t rung_stride(const SampledPath& X, std::size_t n) {
    const std::size_t N = X.intervals();
    if (n == 0 || n > N || N % n != 0)
        throw std::invalid_argument("ladder rung " + std::to_string(n) + " does not divide the grid of " +
                                    std::to_string(N) + " intervals");
    return N / n;
}

// Richardson on three rungs n, 2n, 4n (or any geometric ratio q).
inline std::pair<double, double> richardson3(double v1, double v2, double v3, double q) {
    const double d1 = v2 - v1, d2 = v3 - v2;
    if (d2 == 0.0) return {v3, std::numeric_limits<double>::infinity()};
    const double ratio = std::abs(d1 / d2);
    if (!(ratio > 1.0) || !std::isfinite(ratio)) return {v3, 0.0};
    const double p = std::log(ratio) / std::log(q);
    return {v3 + d2 / (std::pow(q, p) - 1.0), p};
}

inline void finish(OracleResult& r) {
    const std::size_t L = r.values.size();
    if (L < 3) {
        r.extrapolated = r.values.empty() ? 0.0 : r.values.back();
        return;
    }
    const double q = double(r.ladder[L - 1]) / double(r.ladder[L - 2]);
    const auto [ex, p] = richardson3(r.values[L - 3], r.values[L - 2], r.values[L - 1], q);
    r.extrapolated = ex;
    r.observed_order = std::isfinite(p) ? p : 0.0;
    double lo = ex, hi = ex;
    for (std::size_t k = 0; k + 3 < L; ++k) {
        const double qk = double(r.ladder[k + 1]) / double(r.ladder[k]);
        const double e = richardson3(r.values[k], r.values[k + 1], r.values[k + 2], qk).first;
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    r.fit_residual = hi - lo;
}

inline void check_ladder(const std::vector<std::size_t>& ladder) {
    if (ladder.empty()) throw std::invalid_argument("empty grid ladder");
    for (std::size_t k = 1; k < ladder.size(); ++k)
        if (!(ladder[k] > ladder[k - 1])) throw std::invalid_argument("grid ladder must be strictly refining");
}

}  // namespace detail

/// Left-point sums Σ φ(X(t_k))·Y_{t_k,t_{k+1}} on sub-grids of the common grid.
inline OracleResult riemann_stieltjes_oracle(const SampledPath& X, const SampledPath& Y, const Coefficient& phi,
                                             const std::vector<std::size_t>& ladder) {
    if (X.times() != Y.times()) throw std::invalid_argument("paths must share the grid");
    if (phi.m != X.dim() || phi.d != Y.dim()) throw std::invalid_argument("coefficient shape differs from the paths");
    detail::check_ladder(ladder);
    OracleResult r;
    r.kind = OracleKind::riemann_stieltjes;
    r.ladder = ladder;
    for (std::size_t n : ladder) {
        const std::size_t st = detail::rung_stride(X, n);
        double acc = 0.0;
        for (std::size_t k = 0; k + st < X.size(); k += st)
            for (std::size_t j = 0; j < phi.d; ++j) acc += phi(X.point(k), j) * (Y.value(k + st, j) - Y.value(k, j));
        r.values.push_back(acc);
    }
    detail::finish(r);
    return r;
}

/// Σ [φ(X(t_k))·Y_{t_k,t_{k+1}} + Σ_{i,j} ∂_iφ_j(X(t_k)) (X⊗Y)^{i,j}_{t_k,t_{k+1}}] on sub-grids.
inline OracleResult midpoint_compensated_oracle(const MultiplicativeFunctional& mf, const Coefficient& phi,
                                                const std::vector<std::size_t>& ladder) {
    const auto& X = mf.X;
    const auto& Y = mf.Y;
    if (phi.m != mf.m() || phi.d != mf.d()) throw std::invalid_argument("coefficient shape differs from (m, d)");
    detail::check_ladder(ladder);
    OracleResult r;
    r.kind = OracleKind::midpoint_compensated;
    r.ladder = ladder;
    for (std::size_t n : ladder) {
        const std::size_t st = detail::rung_stride(X, n);
        double acc = 0.0;
        for (std::size_t k = 0; k + st < X.size(); k += st) {
            const auto x = X.point(k);
            for (std::size_t j = 0; j < phi.d; ++j) {
                acc += phi(x, j) * (Y.value(k + st, j) - Y.value(k, j));
                for (std::size_t i = 0; i < phi.m; ++i) acc += phi.dphi(x, i, j) * mf.tensor(k, k + st, i, j);
            }
        }
        r.values.push_back(acc);
    }
    detail::finish(r);
    return r;
}

/// 2^lo, ..., 2^hi intervals.
inline std::vector<std::size_t> dyadic_ladder(int lo, int hi) {
    std::vector<std::size_t> out;
    for (int k = lo; k <= hi; ++k) out.push_back(std::size_t(1) << k);
    return out;
}

}  // namespace roughint
