#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "roughint/bv.hpp"
#include "roughint/path.hpp"
#include "roughint/potentials.hpp"

namespace roughint {

enum class CovarianceFamily { fbm, bm, stationary };

/// Centered Gaussian model with m independent components sharing the covariance R.
struct GaussianModel {
    CovarianceFamily family = CovarianceFamily::fbm;
    double hurst = 0.5;
    /// Stationary family: R(r, θ) = kernel(|r - θ|).
    std::function<double(double)> kernel;
    std::string kernel_name;
    std::size_t m = 1;
    std::vector<double> grid;
    std::uint64_t seed = 42;

    static GaussianModel fbm(double H, std::vector<double> grid, std::size_t m = 1, std::uint64_t seed = 42) {
        if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("Hurst index must lie in (0,1)");
        GaussianModel g;
        g.family = CovarianceFamily::fbm;
        g.hurst = H;
        g.m = m;
        g.grid = std::move(grid);
        g.seed = seed;
        return g;
    }
    static GaussianModel bm(std::vector<double> grid, std::size_t m = 1, std::uint64_t seed = 42) {
        GaussianModel g = fbm(0.5, std::move(grid), m, seed);
        g.family = CovarianceFamily::bm;
        return g;
    }
    static GaussianModel stationary(std::function<double(double)> k, std::string name, std::vector<double> grid,
                                    std::size_t m = 1, std::uint64_t seed = 42) {
        GaussianModel g;
        g.family = CovarianceFamily::stationary;
        g.kernel = std::move(k);
        g.kernel_name = std::move(name);
        g.m = m;
        g.grid = std::move(grid);
        g.seed = seed;
        return g;
    }

    double covariance(double r, double th) const {
        switch (family) {
            case CovarianceFamily::bm:
                return std::min(r, th);
            case CovarianceFamily::fbm: {
                const double h2 = 2.0 * hurst;
                return 0.5 * (std::pow(std::abs(r), h2) + std::pow(std::abs(th), h2) - std::pow(std::abs(r - th), h2));
            }
            case CovarianceFamily::stationary:
                return kernel(std::abs(r - th));
        }
        return 0.0;
    }
    double variance(double t) const { return covariance(t, t); }

    std::string describe() const {
        switch (family) {
            case CovarianceFamily::bm: return "bm";
            case CovarianceFamily::fbm: return "fbm:" + std::to_string(hurst);
            case CovarianceFamily::stationary: return "stationary:" + kernel_name;
        }
        return {};
    }
};

/// splitmix64 step; per-replica seeds are splitmix64(seed + counter·golden).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t replica_seed(std::uint64_t master, std::uint64_t counter) {
    return splitmix64(master ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
}

struct CholeskyFactor {
    Eigen::MatrixXd L;              // over the active nodes
    std::vector<std::size_t> active;  // nodes with positive variance
    double jitter = 0.0;
};

/// Lower Cholesky factor of the Gram matrix on the nodes with positive variance; nodes with
/// zero variance are deterministic zeros. A diagonal jitter of 1e-12·max R(t,t) is added
/// only if the plain factorization fails.
inline std::shared_ptr<const CholeskyFactor> gram_factor(const GaussianModel& model) {
    static std::mutex mu;
    static std::map<std::string, std::shared_ptr<const CholeskyFactor>> cache;
    std::string key;
    if (model.family != CovarianceFamily::stationary) {
        key = model.describe() + "|";
        for (double t : model.grid) key += std::to_string(t) + ",";
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto f = std::make_shared<CholeskyFactor>();
    double vmax = 0.0;
    for (std::size_t k = 0; k < model.grid.size(); ++k) {
        const double v = model.variance(model.grid[k]);
        if (v < 0.0) throw std::runtime_error("negative variance in the Gram matrix");
        if (v > 0.0) f->active.push_back(k);
        vmax = std::max(vmax, v);
    }
    const std::size_t n = f->active.size();
    Eigen::MatrixXd G(n, n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b <= a; ++b)
            G(a, b) = G(b, a) = model.covariance(model.grid[f->active[a]], model.grid[f->active[b]]);
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success) {
        f->jitter = 1e-12 * vmax;
        G.diagonal().array() += f->jitter;
        llt.compute(G);
        if (llt.info() != Eigen::Success) throw std::runtime_error("Gram matrix is not positive semidefinite within jitter");
    }
    f->L = llt.matrixL();
    if (!key.empty()) {
        std::lock_guard<std::mutex> lock(mu);
        cache.emplace(key, f);
    }
    return f;
}

/// Exact sample on the model grid; `replica` selects the counter-derived stream.
inline SampledPath sample_path(const GaussianModel& model, std::uint64_t replica = 0) {
    if (model.grid.size() < 2) throw std::invalid_argument("grid needs at least two points");
    if (model.m == 0) throw std::invalid_argument("m must be positive");
    const auto f = gram_factor(model);
    std::mt19937_64 rng(replica_seed(model.seed, replica));
    std::normal_distribution<double> nd;
    const std::size_t N = model.grid.size(), n = f->active.size();
    std::vector<double> v(N * model.m, 0.0);
    Eigen::VectorXd z(n);
    for (std::size_t i = 0; i < model.m; ++i) {
        for (std::size_t a = 0; a < n; ++a) z(a) = nd(rng);
        const Eigen::VectorXd x = f->L.triangularView<Eigen::Lower>() * z;
        for (std::size_t a = 0; a < n; ++a) v[f->active[a] * model.m + i] = x(a);
    }
    return SampledPath(model.grid, std::move(v), model.m);
}

struct MCEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    double infinite_fraction = 0.0;
    std::size_t replicas = 0;
};

namespace detail {

template <class F>
MCEstimate monte_carlo(std::size_t replicas, F&& per_replica) {
    if (replicas < 2) throw std::invalid_argument("at least two replicas are needed");
    MCEstimate e;
    e.replicas = replicas;
    double sum = 0.0, sum2 = 0.0;
    std::size_t finite = 0, inf = 0;
    for (std::size_t r = 0; r < replicas; ++r) {
        const double v = per_replica(r);
        if (!std::isfinite(v)) {
            ++inf;
            continue;
        }
        ++finite;
        sum += v;
        sum2 += v * v;
    }
    e.infinite_fraction = double(inf) / double(replicas);
    if (inf > 0) {
        e.mean = std::numeric_limits<double>::infinity();
        e.stderr_ = std::numeric_limits<double>::infinity();
        return e;
    }
    e.mean = sum / double(finite);
    const double var = std::max(0.0, (sum2 - double(finite) * e.mean * e.mean) / double(finite - 1));
    e.stderr_ = std::sqrt(var / double(finite));
    return e;
}

}  // namespace detail

/// E ∫ U^{1-s}μ(X(θ)) dθ by Monte Carlo over exact samples.
inline MCEstimate mc_expected_variability(const GaussianModel& model, const RadonMeasure& mu, double s,
                                          std::size_t replicas, double p = 1.0) {
    if (mu.dim != model.m) throw std::invalid_argument("measure dimension differs from m");
    if (mu.empty()) {
        MCEstimate e;
        e.replicas = replicas;
        return e;
    }
    return detail::monte_carlo(replicas, [&](std::size_t r) { return variability_norm(sample_path(model, r), mu, s, p).norm; });
}

/// E of the segment functional by Monte Carlo over exact samples.
inline MCEstimate mc_expected_segment(const GaussianModel& model, const RadonMeasure& mu, double s, double eps,
                                      std::size_t replicas) {
    if (mu.dim != model.m) throw std::invalid_argument("measure dimension differs from m");
    if (mu.empty()) {
        MCEstimate e;
        e.replicas = replicas;
        return e;
    }
    return detail::monte_carlo(replicas,
                               [&](std::size_t r) { return segment_functional(sample_path(model, r), mu, s, eps).value; });
}

struct CmuReport {
    double value = 0.0;
    bool finite = true;
    /// Local exponent κ of R(θ,θ) ≈ c(θ - a)^{2κ} at a when R(a,a) = 0, else 0.
    double variance_exponent = 0.0;
    /// (m - 1 + s)κ < 1: the criterion under which the origin is harmless at a.
    bool exponent_criterion = true;
};

/// C_μ = ∫_a^b ∫ ( R(θ,θ)^{(1-m-s)/2} ∧ |z|^{1-m-s} ) μ(dz) dθ.
inline CmuReport cmu_constant(const GaussianModel& model, const RadonMeasure& mu, double s, double a, double b) {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("s must lie in (0,1)");
    if (!(b > a)) throw std::invalid_argument("need a < b");
    if (mu.dim != model.m) throw std::invalid_argument("measure dimension differs from m");
    const double q = double(model.m) - 1.0 + s;
    CmuReport rep;
    const double v0 = model.variance(a);
    if (v0 == 0.0) {
        const double d = 1e-6 * (b - a);
        rep.variance_exponent = std::log(model.variance(a + 2 * d) / model.variance(a + d)) / (2.0 * std::log(2.0));
        rep.exponent_criterion = q * rep.variance_exponent < 1.0;
    }
    if (mu.empty()) return rep;
    // z-integral of min(σ^{-q}, |z|^{-q}) against μ for fixed σ.
    auto inner = [&](double sigma) {
        double acc = 0.0;
        const double cap = sigma > 0.0 ? std::pow(sigma, -q) : std::numeric_limits<double>::infinity();
        for (const auto& at : mu.atoms) {
            double r2 = 0.0;
            for (double c : at.point) r2 += c * c;
            const double r = std::sqrt(r2);
            acc += at.weight * std::min(cap, r > 0.0 ? std::pow(r, -q) : std::numeric_limits<double>::infinity());
        }
        for (const auto& bx : mu.boxes) {
            if (model.m == 1) {
                // ∫_lo^hi min(σ^{-s}, |z|^{-s}) dz in closed form.
                auto F = [&](double z) {
                    const double az = std::abs(z);
                    const double part = az <= sigma ? cap * az : cap * sigma + (std::pow(az, 1.0 - q) - std::pow(sigma, 1.0 - q)) / (1.0 - q);
                    return std::copysign(part, z);
                };
                acc += bx.density * (F(bx.hi[0]) - F(bx.lo[0]));
            } else {
                const std::size_t M = model.m;
                std::size_t pts = 1;
                for (std::size_t i = 0; i < M; ++i) pts *= 16;
                double vol = bx.density;
                for (std::size_t i = 0; i < M; ++i) vol *= (bx.hi[i] - bx.lo[i]) / 16.0;
                for (std::size_t idx = 0; idx < pts; ++idx) {
                    std::size_t r = idx;
                    double r2 = 0.0;
                    for (std::size_t i = 0; i < M; ++i) {
                        const double z = bx.lo[i] + (bx.hi[i] - bx.lo[i]) * ((r % 16) + 0.5) / 16.0;
                        r /= 16;
                        r2 += z * z;
                    }
                    acc += vol * std::min(cap, std::pow(std::sqrt(r2), -q));
                }
            }
        }
        return acc;
    };
    bool origin_atom = false;
    for (const auto& at : mu.atoms) {
        double r2 = 0.0;
        for (double c : at.point) r2 += c * c;
        origin_atom = origin_atom || r2 == 0.0;
    }
    if (origin_atom && v0 == 0.0 && !rep.exponent_criterion) {
        rep.value = std::numeric_limits<double>::infinity();
        rep.finite = false;
        return rep;
    }
    const double e = origin_atom && v0 == 0.0 ? std::min(q * rep.variance_exponent, 0.99) : 0.0;
    rep.value = detail::graded([&](double th) { return inner(std::sqrt(std::max(0.0, model.variance(th)))); }, a, b,
                               0, e, 30);
    rep.finite = std::isfinite(rep.value);
    return rep;
}

struct MomentEntry {
    double sigma = 0.0;
    double z = 0.0;  // |z|, placed along the first axis
    double estimate = 0.0;
    double stderr_ = 0.0;
    double ratio = 0.0;  // estimate / (σ^{1-s-m} ∧ |z|^{1-s-m})
};

struct MomentReport {
    std::vector<MomentEntry> entries;
    double c_max = 0.0;
    double c_min = 0.0;
    double spread() const { return c_min > 0.0 ? c_max / c_min : std::numeric_limits<double>::infinity(); }
};

/// Monte Carlo E|Z - z|^{1-m-s} for Z ~ N(0, σ²I_m) over the (σ, |z|/σ) grid.
inline MomentReport moment_bound_check(const std::vector<double>& sigmas, const std::vector<double>& z_over_sigma,
                                       double s, std::size_t m, std::size_t replicas, std::uint64_t seed = 42) {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("s must lie in (0,1)");
    const double e = double(m) - 1.0 + s;
    MomentReport rep;
    std::uint64_t counter = 0;
    for (double sigma : sigmas) {
        if (!(sigma > 0.0)) throw std::invalid_argument("σ must be positive");
        for (double zr : z_over_sigma) {
            const double z = zr * sigma;
            std::mt19937_64 rng(replica_seed(seed, counter++));
            std::normal_distribution<double> nd;
            double sum = 0.0, sum2 = 0.0;
            for (std::size_t r = 0; r < replicas; ++r) {
                double d2 = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double x = sigma * nd(rng) - (i == 0 ? z : 0.0);
                    d2 += x * x;
                }
                const double v = std::pow(d2, -0.5 * e);
                sum += v;
                sum2 += v * v;
            }
            MomentEntry en{sigma, z};
            en.estimate = sum / double(replicas);
            en.stderr_ = std::sqrt(std::max(0.0, sum2 / double(replicas) - en.estimate * en.estimate) / double(replicas));
            const double scale = std::min(std::pow(sigma, -e), z > 0.0 ? std::pow(z, -e) : std::numeric_limits<double>::infinity());
            en.ratio = en.estimate / scale;
            rep.entries.push_back(en);
        }
    }
    rep.c_max = 0.0;
    rep.c_min = std::numeric_limits<double>::infinity();
    for (const auto& en : rep.entries) {
        rep.c_max = std::max(rep.c_max, en.ratio);
        rep.c_min = std::min(rep.c_min, en.ratio);
    }
    return rep;
}

/// E|Z|^q for a standard normal, q > -1.
inline double gaussian_abs_moment(double q) {
    return std::pow(2.0, 0.5 * q) * std::tgamma(0.5 * (q + 1.0)) / std::sqrt(M_PI);
}

struct CovarianceCheck {
    double max_excess = 0.0;  // max_ij |Ĉ_ij - R_ij| / (4 sqrt((R_ii R_jj + R_ij²)/N)); passes when <= 1
    bool pass = false;
};

/// Empirical covariance over `replicas` samples against R on the model grid (component 0).
inline CovarianceCheck empirical_covariance_check(const GaussianModel& model, std::size_t replicas) {
    const std::size_t n = model.grid.size();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t r = 0; r < replicas; ++r) {
        const auto p = sample_path(model, r);
        Eigen::VectorXd x(n);
        for (std::size_t k = 0; k < n; ++k) x(k) = p.value(k, 0);
        S.noalias() += x * x.transpose();
    }
    S /= double(replicas);
    CovarianceCheck c;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double Rij = model.covariance(model.grid[i], model.grid[j]);
            const double Rii = model.variance(model.grid[i]), Rjj = model.variance(model.grid[j]);
            const double tol = 4.0 * std::sqrt((Rii * Rjj + Rij * Rij) / double(replicas));
            const double diff = std::abs(S(i, j) - Rij);
            c.max_excess = std::max(c.max_excess, tol > 0.0 ? diff / tol : (diff > 0.0 ? 1e300 : 0.0));
        }
    c.pass = c.max_excess <= 1.0;
    return c;
}

}  // namespace roughint
