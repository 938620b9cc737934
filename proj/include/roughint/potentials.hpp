#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "roughint/bv.hpp"
#include "roughint/path.hpp"

namespace roughint {

namespace detail {

inline constexpr double kPotInf = std::numeric_limits<double>::infinity();

// 8-point Gauss–Legendre on [0, 1].
inline constexpr std::array<double, 8> kGL8x{0.019855071751231856, 0.10166676129318664, 0.2372337950418355,
                                              0.4082826787521751,  0.5917173212478249,  0.7627662049581645,
                                              0.8983332387068134,  0.9801449282487681};
inline constexpr std::array<double, 8> kGL8w{0.05061426814518813, 0.11119051722668724, 0.15685332293894363,
                                              0.18134189168918100, 0.18134189168918100, 0.15685332293894363,
                                              0.11119051722668724, 0.05061426814518813};

inline double distance(std::span<const double> x, std::span<const double> z) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - z[i]) * (x[i] - z[i]);
    return std::sqrt(s);
}

// ∫_lo^hi |x - z|^{-e} dz, e < 1.
inline double power_box_1d(double x, double lo, double hi, double e) {
    auto P = [&](double z) {
        const double d = z - x;
        return std::copysign(std::pow(std::abs(d), 1.0 - e), d) / (1.0 - e);
    };
    return P(hi) - P(lo);
}

// ∫ f over [lo, hi] graded toward `end` (0: lo, 1: hi), where f may blow up like dist^{-e}.
template <class F>
double graded(F&& f, double lo, double hi, int end, double e, int levels = 12) {
    const double L = hi - lo;
    if (!(L > 0.0)) return 0.0;
    const double kappa = 2.0 / std::max(1.0 - e, 0.05);
    double acc = 0.0;
    double u1 = 1.0;
    for (int lev = 0; lev <= levels; ++lev) {
        const double u0 = lev == levels ? 0.0 : 0.5 * u1;
        for (std::size_t q = 0; q < 8; ++q) {
            const double u = u0 + (u1 - u0) * kGL8x[q];
            const double x = L * std::pow(u, kappa);
            const double jac = L * kappa * std::pow(u, kappa - 1.0) * (u1 - u0) * kGL8w[q];
            const double y = end == 0 ? lo + x : hi - x;
            if (y == (end == 0 ? lo : hi)) continue;
            acc += jac * f(y);
        }
        u1 = u0;
    }
    return acc;
}

// ∫_lo^hi f with an integrable singularity (order e) at p, which may lie inside or outside.
template <class F>
double around(F&& f, double lo, double hi, double p, double e) {
    if (!(hi > lo)) return 0.0;
    if (p <= lo) return graded(f, lo, hi, 0, e);
    if (p >= hi) return graded(f, lo, hi, 1, e);
    return graded(f, lo, p, 1, e) + graded(f, p, hi, 0, e);
}

// Box mass inside the open ball B(x, r), m = 1.
inline double box_ball_mass_1d(const RadonMeasure::Box& b, double x, double r) {
    const double lo = std::max(b.lo[0], x - r), hi = std::min(b.hi[0], x + r);
    return hi > lo ? b.density * (hi - lo) : 0.0;
}

// ∫_box |x - z|^{γ-m} dz for m >= 2: split at x so the singular point is a corner, then
// refine geometrically toward it.
inline double box_potential_nd(const RadonMeasure::Box& b, std::span<const double> x, double gamma) {
    const std::size_t m = x.size();
    const double e = double(m) - gamma;
    double total = 0.0;
    std::vector<std::pair<double, double>> sides(m);
    // Enumerate 2^m orthants around x clipped to the box.
    for (std::size_t mask = 0; mask < (std::size_t(1) << m); ++mask) {
        bool ok = true;
        for (std::size_t i = 0; i < m; ++i) {
            const double c = std::clamp(x[i], b.lo[i], b.hi[i]);
            sides[i] = (mask >> i) & 1 ? std::pair{c, b.hi[i]} : std::pair{b.lo[i], c};
            ok = ok && sides[i].second > sides[i].first;
        }
        if (!ok) continue;
        // Corner nearest to x; cells shrink toward it by halves.
        std::vector<double> corner(m), far(m);
        for (std::size_t i = 0; i < m; ++i) {
            const bool low = std::abs(sides[i].first - x[i]) <= std::abs(sides[i].second - x[i]);
            corner[i] = low ? sides[i].first : sides[i].second;
            far[i] = low ? sides[i].second : sides[i].first;
        }
        std::vector<double> pt(m);
        double scale = 1.0;
        for (int lev = 0; lev < 40; ++lev) {
            // Shell between scale/2 and scale: 2^m - 1 sub-boxes.
            for (std::size_t sub = 1; sub < (std::size_t(1) << m); ++sub) {
                std::size_t npts = 1;
                for (std::size_t i = 0; i < m; ++i) npts *= 8;
                double vol = 1.0;
                std::vector<double> lo(m), len(m);
                for (std::size_t i = 0; i < m; ++i) {
                    const double full = far[i] - corner[i];
                    const double a0 = (sub >> i) & 1 ? 0.5 * scale : 0.0;
                    const double a1 = (sub >> i) & 1 ? scale : 0.5 * scale;
                    lo[i] = corner[i] + a0 * full;
                    len[i] = (a1 - a0) * full;
                    vol *= std::abs(len[i]);
                }
                double acc = 0.0;
                for (std::size_t idx = 0; idx < npts; ++idx) {
                    double w = 1.0;
                    std::size_t r = idx;
                    for (std::size_t i = 0; i < m; ++i) {
                        const std::size_t q = r % 8;
                        r /= 8;
                        pt[i] = lo[i] + len[i] * kGL8x[q];
                        w *= kGL8w[q];
                    }
                    const double d = distance(pt, x);
                    acc += w * std::pow(d, -e);
                }
                total += b.density * vol * acc;
            }
            scale *= 0.5;
        }
    }
    return total;
}

}  // namespace detail

/// U^γν(x) = ∫ |x - z|^{γ-m} ν(dz), 0 < γ < m; +inf at an atom.
inline double riesz_potential(const RadonMeasure& nu, double gamma, std::span<const double> x) {
    const std::size_t m = nu.dim;
    if (x.size() != m) throw std::invalid_argument("point dimension differs from measure dimension");
    if (!(gamma > 0.0 && gamma < double(m))) throw std::invalid_argument("Riesz order must lie in (0, m)");
    const double e = double(m) - gamma;
    double u = 0.0;
    for (const auto& a : nu.atoms) {
        const double d = detail::distance(x, a.point);
        if (d == 0.0) return detail::kPotInf;
        u += a.weight * std::pow(d, -e);
    }
    for (const auto& b : nu.boxes)
        u += m == 1 ? b.density * detail::power_box_1d(x[0], b.lo[0], b.hi[0], e) : detail::box_potential_nd(b, x, gamma);
    return u;
}

inline double riesz_potential(const RadonMeasure& nu, double gamma, double x) {
    return riesz_potential(nu, gamma, std::span<const double>(&x, 1));
}

/// sup_{0<r<R} r^{γ-m} ν(B(x, r)) over open balls.
inline double truncated_maximal(const RadonMeasure& nu, double gamma, double R, std::span<const double> x) {
    const std::size_t m = nu.dim;
    if (x.size() != m) throw std::invalid_argument("point dimension differs from measure dimension");
    if (!(gamma > 0.0 && gamma < double(m))) throw std::invalid_argument("order must lie in (0, m)");
    if (!(R > 0.0)) throw std::invalid_argument("truncation radius must be positive");
    const double e = double(m) - gamma;
    for (const auto& a : nu.atoms)
        if (detail::distance(x, a.point) == 0.0) return detail::kPotInf;
    // Radii where the mass function changes form.
    std::vector<double> radii{R};
    for (const auto& a : nu.atoms) radii.push_back(detail::distance(x, a.point));
    if (m == 1)
        for (const auto& b : nu.boxes) {
            radii.push_back(std::abs(b.lo[0] - x[0]));
            radii.push_back(std::abs(b.hi[0] - x[0]));
        }
    std::sort(radii.begin(), radii.end());
    radii.erase(std::remove_if(radii.begin(), radii.end(), [&](double r) { return !(r > 0.0 && r <= R); }),
                radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    auto mass = [&](double r, bool closed) {
        double mu = 0.0;
        for (const auto& a : nu.atoms) {
            const double d = detail::distance(x, a.point);
            if (d < r || (closed && d == r)) mu += a.weight;
        }
        if (m == 1) {
            for (const auto& b : nu.boxes) mu += detail::box_ball_mass_1d(b, x[0], r);
        } else {
            // Box part by midpoint counting on a 32^m lattice per box.
            for (const auto& b : nu.boxes) {
                std::size_t cells = 1;
                for (std::size_t i = 0; i < m; ++i) cells *= 32;
                double vol = b.density;
                for (std::size_t i = 0; i < m; ++i) vol *= (b.hi[i] - b.lo[i]) / 32.0;
                std::vector<double> p(m);
                for (std::size_t idx = 0; idx < cells; ++idx) {
                    std::size_t rr = idx;
                    for (std::size_t i = 0; i < m; ++i) {
                        p[i] = b.lo[i] + (b.hi[i] - b.lo[i]) * ((rr % 32) + 0.5) / 32.0;
                        rr /= 32;
                    }
                    if (detail::distance(p, x) < r) mu += vol;
                }
            }
        }
        return mu;
    };
    double best = 0.0;
    double prev = 0.0;
    for (double r : radii) {
        // Limit from the right at r (r < R), and the interior stationary point of
        // r^{-e}(A + B r) in m = 1 where box mass grows linearly.
        if (r < R) best = std::max(best, std::pow(r, -e) * mass(r, true));
        if (m == 1 && r > prev) {
            const double r1 = prev + 0.25 * (r - prev), r2 = prev + 0.75 * (r - prev);
            const double m1 = mass(r1, false), m2 = mass(r2, false);
            const double B = (m2 - m1) / (r2 - r1), A = m1 - B * r1;
            if (B > 0.0 && e > 0.0 && e < 1.0) {
                const double rs = e * A / ((1.0 - e) * B);
                if (rs > prev && rs < r) best = std::max(best, std::pow(rs, -e) * (A + B * rs));
            }
            best = std::max(best, std::pow(r, -e) * mass(r, false));
        }
        prev = r;
    }
    return best;
}

inline double truncated_maximal(const RadonMeasure& nu, double gamma, double R, double x) {
    return truncated_maximal(nu, gamma, R, std::span<const double>(&x, 1));
}

struct VariabilityReport {
    double s = 0.0;
    double p = 1.0;
    double norm = 0.0;
    bool finite = true;
};

namespace detail {

// ∫_0^h |x0 + (x1 - x0) t/h - z|^{-s} dt.
inline double segment_occupation(double x0, double x1, double h, double z, double s) {
    const double dx = x1 - x0;
    const double mid = 0.5 * (x0 + x1) - z;
    if (std::abs(dx) <= 1e-9 * std::abs(mid)) return h * std::pow(std::abs(mid), -s);
    if (dx == 0.0) return mid == 0.0 ? kPotInf : h * std::pow(std::abs(mid), -s);
    auto P = [&](double y) {
        const double d = y - z;
        return std::copysign(std::pow(std::abs(d), 1.0 - s), d) / (1.0 - s);
    };
    return (P(x1) - P(x0)) * h / dx;
}

}  // namespace detail

/// ‖t ↦ U^{1-s}ν(X(t))‖_{L^p[a,b]}.
inline VariabilityReport variability_norm(const SampledPath& X, const RadonMeasure& nu, double s, double p = 1.0) {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("s must lie in (0,1)");
    if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must lie in [1, inf)");
    if (nu.dim != X.dim()) throw std::invalid_argument("measure dimension differs from path dimension");
    VariabilityReport r{s, p, 0.0, true};
    if (nu.empty()) return r;
    const std::size_t m = X.dim();
    const double gamma = 1.0 - s;
    const double e = double(m) - gamma;
    double acc = 0.0;
    std::vector<double> pt(m);
    for (std::size_t k = 0; k + 1 < X.size(); ++k) {
        const double h = X.time(k + 1) - X.time(k);
        if (m == 1 && p == 1.0) {
            for (const auto& a : nu.atoms)
                acc += a.weight * detail::segment_occupation(X.value(k), X.value(k + 1), h, a.point[0], s);
            if (!nu.boxes.empty()) {
                RadonMeasure boxes(1);
                boxes.boxes = nu.boxes;
                for (std::size_t q = 0; q < 8; ++q) {
                    const double x = X.value(k) + detail::kGL8x[q] * (X.value(k + 1) - X.value(k));
                    acc += h * detail::kGL8w[q] * riesz_potential(boxes, gamma, x);
                }
            }
            continue;
        }
        // Atom distances in offset form: d^2 = |v|^2 (u - u*)^2 + d_perp^2.
        struct Near {
            double ustar, vv, perp2, w;
        };
        std::vector<Near> near;
        double vv = 0.0;
        for (std::size_t i = 0; i < m; ++i) vv += std::pow(X.value(k + 1, i) - X.value(k, i), 2);
        std::vector<double> cuts{0.0, 1.0};
        double sing = 0.0;
        for (const auto& a : nu.atoms) {
            double num = 0.0, cc = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                const double c0 = X.value(k, i) - a.point[i];
                num -= c0 * (X.value(k + 1, i) - X.value(k, i));
                cc += c0 * c0;
            }
            const double us = vv > 0.0 ? num / vv : 0.0;
            const double perp2 = std::max(0.0, vv > 0.0 ? cc - num * num / vv : cc);
            const double closest = std::sqrt(vv * std::pow(std::clamp(us, 0.0, 1.0) - us, 2) + perp2);
            if (closest == 0.0) {
                if (e * p >= 1.0 || vv == 0.0) {
                    r.norm = detail::kPotInf;
                    r.finite = false;
                    return r;
                }
            }
            if (closest <= std::sqrt(vv)) sing = std::max(sing, std::min(e * p, 0.99));
            if (us > 0.0 && us < 1.0) cuts.push_back(us);
            near.push_back({us, vv, perp2, a.weight});
        }
        RadonMeasure boxes(m);
        boxes.boxes = nu.boxes;
        auto f = [&](double u) {
            double U = 0.0;
            for (const auto& a : near) U += a.w * std::pow(a.vv * (u - a.ustar) * (u - a.ustar) + a.perp2, -0.5 * e);
            if (!boxes.empty()) {
                for (std::size_t i = 0; i < m; ++i) pt[i] = X.value(k, i) + u * (X.value(k + 1, i) - X.value(k, i));
                U += riesz_potential(boxes, gamma, pt);
            }
            return std::pow(U, p);
        };
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            const double lo = cuts[c], hi = cuts[c + 1];
            const double mid = 0.5 * (lo + hi);
            acc += h * (detail::graded(f, lo, mid, 0, sing) + detail::graded(f, mid, hi, 1, sing));
        }
    }
    r.norm = std::pow(acc, 1.0 / p);
    r.finite = std::isfinite(r.norm);
    return r;
}

struct OccupationReport {
    double value = 0.0;
    double argmax = 0.0;
    std::size_t grid = 0;
    double coarse_value = 0.0;  // same sup on the grid with half the refinement
    bool finite = true;
};

/// ∫_a^b |X(r) - z|^{-s} dr at one level z (m = 1).
inline double occupation_integral(const SampledPath& X, double z, double s) {
    if (X.dim() != 1) throw std::invalid_argument("occupation integral needs a scalar path");
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < X.size(); ++k)
        acc += detail::segment_occupation(X.value(k), X.value(k + 1), X.time(k + 1) - X.time(k), z, s);
    return acc;
}

/// sup_z ∫|X(r) - z|^{-s} dr over node values plus `refine` points between adjacent sorted values.
inline OccupationReport sup_occupation_functional(const SampledPath& X, double s, std::size_t refine = 32) {
    if (X.dim() != 1) throw std::invalid_argument("occupation functional needs m = 1");
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("s must lie in (0,1)");
    std::vector<double> levels(X.values());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    OccupationReport r;
    double coarse = 0.0;
    auto visit = [&](double z, bool on_coarse) {
        const double v = occupation_integral(X, z, s);
        ++r.grid;
        if (v > r.value || (std::isinf(v) && !std::isinf(r.value))) {
            r.value = v;
            r.argmax = z;
        }
        if (on_coarse) coarse = std::max(coarse, v);
    };
    for (std::size_t k = 0; k < levels.size(); ++k) {
        visit(levels[k], true);
        if (k + 1 == levels.size()) break;
        for (std::size_t q = 1; q <= refine; ++q)
            visit(levels[k] + (levels[k + 1] - levels[k]) * double(q) / double(refine + 1), q % 2 == 0);
    }
    r.coarse_value = coarse;
    r.finite = std::isfinite(r.value);
    return r;
}

namespace detail {

// ∫_0^1 U^{1-s}ν(c + tΔ) t^s dt with c = X(θ), Δ = X_{θ,r}.
inline double chord_inner(const RadonMeasure& nu, std::span<const double> c, std::span<const double> D, double s) {
    const std::size_t m = c.size();
    const double gamma = 1.0 - s;
    const double e = double(m) - gamma;
    double total = 0.0;
    double dd = 0.0;
    for (double v : D) dd += v * v;
    std::vector<double> pt(m);
    for (const auto& a : nu.atoms) {
        if (dd == 0.0) {
            const double d = distance(c, a.point);
            if (d == 0.0) return kPotInf;
            total += a.weight * std::pow(d, -e) / (1.0 + s);
            continue;
        }
        double num = 0.0;
        for (std::size_t i = 0; i < m; ++i) num += (a.point[i] - c[i]) * D[i];
        const double tz = num / dd;
        double cc = 0.0;
        for (std::size_t i = 0; i < m; ++i) cc += (c[i] - a.point[i]) * (c[i] - a.point[i]);
        const double perp2 = m == 1 ? 0.0 : std::max(0.0, cc - num * num / dd);
        auto f = [&](double t) { return std::pow(t, s) * std::pow(dd * (t - tz) * (t - tz) + perp2, -0.5 * e); };
        if (perp2 == 0.0 && tz >= 0.0 && tz <= 1.0 && e >= 1.0) return kPotInf;
        total += a.weight * around(f, 0.0, 1.0, tz, std::min(e, 0.99));
    }
    if (!nu.boxes.empty()) {
        RadonMeasure boxes(m);
        boxes.boxes = nu.boxes;
        for (std::size_t q = 0; q < 8; ++q)
            for (int half = 0; half < 2; ++half) {
                const double t = 0.5 * (half + kGL8x[q]);
                for (std::size_t i = 0; i < m; ++i) pt[i] = c[i] + t * D[i];
                total += 0.5 * kGL8w[q] * std::pow(t, s) * riesz_potential(boxes, gamma, pt);
            }
    }
    return total;
}

// ∫_I ∫_J |r - θ|^{ε-1} dθ dr for cells I = [a1, b1], J = [a2, b2].
inline double weight_cell_integral(double a1, double b1, double a2, double b2, double eps) {
    if (a1 == a2 && b1 == b2) return 2.0 * std::pow(b1 - a1, eps + 1.0) / (eps * (eps + 1.0));
    if (a2 < a1) {
        std::swap(a1, a2);
        std::swap(b1, b2);
    }
    auto F = [eps](double x) { return x > 0.0 ? std::pow(x, eps + 1.0) / (eps * (eps + 1.0)) : 0.0; };
    return F(b2 - a1) - F(b2 - b1) - F(a2 - a1) + F(a2 - b1);
}

}  // namespace detail

struct SegmentReport {
    double value = 0.0;
    bool finite = true;
    double error_estimate = 0.0;  // |value - value with one inner point per cell|
};

/// ∬ |r - θ|^{ε-1} ∫_0^1 U^{1-s}ν(tX(r) + (1-t)X(θ)) t^s dt dθ dr with exact cell weights
/// and 2×2 Gauss cell averages of the inner integral.
inline SegmentReport segment_functional(const SampledPath& X, const RadonMeasure& nu, double s, double eps) {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("s must lie in (0,1)");
    if (!(eps > 0.0)) throw std::invalid_argument("ε must be positive");
    if (nu.dim != X.dim()) throw std::invalid_argument("measure dimension differs from path dimension");
    SegmentReport rep;
    if (nu.empty()) return rep;
    const std::size_t m = X.dim();
    const std::size_t cells = X.intervals();
    constexpr double g0 = 0.21132486540518713, g1 = 0.7886751345948129;
    std::vector<double> c(m), D(m);
    double fine = 0.0, coarse = 0.0;
    for (std::size_t k = 0; k < cells; ++k)
        for (std::size_t l = 0; l < cells; ++l) {
            const double W = detail::weight_cell_integral(X.time(k), X.time(k + 1), X.time(l), X.time(l + 1), eps);
            auto inner = [&](double ur, double ut) {
                const double r = X.time(k) + ur * (X.time(k + 1) - X.time(k));
                const double th = X.time(l) + ut * (X.time(l + 1) - X.time(l));
                for (std::size_t i = 0; i < m; ++i) {
                    c[i] = X.eval_component(th, i);
                    D[i] = X.eval_component(r, i) - c[i];
                }
                return detail::chord_inner(nu, c, D, s);
            };
            const double avg = 0.25 * (inner(g0, g0) + inner(g0, g1) + inner(g1, g0) + inner(g1, g1));
            fine += W * avg;
            coarse += W * inner(0.5, 0.5);
            if (!std::isfinite(fine)) {
                rep.value = detail::kPotInf;
                rep.finite = false;
                return rep;
            }
        }
    rep.value = fine;
    rep.error_estimate = std::abs(fine - coarse);
    return rep;
}

/// (2/ε)(b - a)^ε.
inline double segment_weight_constant(double a, double b, double eps) { return (2.0 / eps) * std::pow(b - a, eps); }

/// (c + 2c + 2c/(1-s))·sup_z ∫|X(r) - z|^{-s} dr with c = (2/ε)(b-a)^ε: dominates the
/// segment functional of any unit atom.
inline double occupation_segment_bound(const SampledPath& X, double s, double eps) {
    const double c = segment_weight_constant(X.a(), X.b(), eps);
    const double occ = sup_occupation_functional(X, s).value;
    return (3.0 + 2.0 / (1.0 - s)) * c * occ;
}

/// Same constant against the occupation integral at a single level z.
inline double occupation_segment_bound_at(const SampledPath& X, double s, double eps, double z) {
    const double c = segment_weight_constant(X.a(), X.b(), eps);
    return (3.0 + 2.0 / (1.0 - s)) * c * occupation_integral(X, z, s);
}

}  // namespace roughint
