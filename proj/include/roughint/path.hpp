#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "roughint/detail/numeric.hpp"

namespace roughint {

/// Vector-valued path on [a, b] known at grid nodes and read piecewise-linearly between
/// them. Values are stored node-major: values[k * dim + i] is component i at times[k].
class SampledPath {
public:
    SampledPath() = default;

    SampledPath(std::vector<double> times, std::vector<double> values, std::size_t dim)
        : times_(std::move(times)), values_(std::move(values)), dim_(dim) {
        if (dim_ == 0) throw std::invalid_argument("path dimension must be positive");
        if (times_.size() < 2) throw std::invalid_argument("path needs at least two grid points");
        if (values_.size() != times_.size() * dim_)
            throw std::invalid_argument("path values do not match grid size times dimension");
        for (std::size_t k = 1; k < times_.size(); ++k) {
            if (!(times_[k] > times_[k - 1]))
                throw std::invalid_argument("path grid must be strictly increasing");
        }
        for (double v : values_) {
            if (!std::isfinite(v)) throw std::invalid_argument("path values must be finite");
        }
    }

    /// Scalar path sampled from f on the given grid.
    static SampledPath from_function(std::vector<double> times, const std::function<double(double)>& f) {
        std::vector<double> v(times.size());
        std::transform(times.begin(), times.end(), v.begin(), f);
        return SampledPath(std::move(times), std::move(v), 1);
    }

    std::size_t size() const { return times_.size(); }
    std::size_t intervals() const { return times_.size() - 1; }
    std::size_t dim() const { return dim_; }
    double a() const { return times_.front(); }
    double b() const { return times_.back(); }
    double time(std::size_t k) const { return times_[k]; }
    double value(std::size_t k, std::size_t i = 0) const { return values_[k * dim_ + i]; }
    std::span<const double> point(std::size_t k) const { return {values_.data() + k * dim_, dim_}; }
    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }

    /// Index k of the cell [t_k, t_{k+1}] containing t (last cell for t = b).
    std::size_t cell_of(double t) const {
        check_domain(t);
        if (t >= times_.back()) return times_.size() - 2;
        const auto it = std::upper_bound(times_.begin(), times_.end(), t);
        const auto k = static_cast<std::size_t>(it - times_.begin());
        return k == 0 ? 0 : k - 1;
    }

    double eval_component(double t, std::size_t i) const {
        const std::size_t k = cell_of(t);
        const double t0 = times_[k], t1 = times_[k + 1];
        const double w = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
        if (w == 0.0) return value(k, i);
        if (w == 1.0) return value(k + 1, i);
        return value(k, i) + w * (value(k + 1, i) - value(k, i));
    }

    std::vector<double> eval(double t) const {
        std::vector<double> out(dim_);
        for (std::size_t i = 0; i < dim_; ++i) out[i] = eval_component(t, i);
        return out;
    }

    /// Scalar path of component i.
    SampledPath component(std::size_t i) const {
        std::vector<double> v(size());
        for (std::size_t k = 0; k < size(); ++k) v[k] = value(k, i);
        return SampledPath(times_, std::move(v), 1);
    }

    /// Same function read on another grid inside [a, b].
    SampledPath resample(std::vector<double> grid) const {
        std::vector<double> v(grid.size() * dim_);
        for (std::size_t k = 0; k < grid.size(); ++k)
            for (std::size_t i = 0; i < dim_; ++i) v[k * dim_ + i] = eval_component(grid[k], i);
        return SampledPath(std::move(grid), std::move(v), dim_);
    }

    /// Every stride-th node plus the right endpoint.
    SampledPath subsample(std::size_t stride) const {
        if (stride == 0) throw std::invalid_argument("stride must be positive");
        std::vector<double> t;
        std::vector<double> v;
        for (std::size_t k = 0; k < size(); k += stride) {
            t.push_back(times_[k]);
            for (std::size_t i = 0; i < dim_; ++i) v.push_back(value(k, i));
        }
        if (t.back() != times_.back()) {
            t.push_back(times_.back());
            for (std::size_t i = 0; i < dim_; ++i) v.push_back(value(size() - 1, i));
        }
        return SampledPath(std::move(t), std::move(v), dim_);
    }

private:
    void check_domain(double t) const {
        const double slack = 1e-12 * (times_.back() - times_.front());
        if (!(t >= times_.front() - slack && t <= times_.back() + slack))
            throw std::out_of_range("evaluation time " + std::to_string(t) + " outside [" +
                                    std::to_string(times_.front()) + ", " + std::to_string(times_.back()) + "]");
    }

    std::vector<double> times_;
    std::vector<double> values_;
    std::size_t dim_ = 1;
};

/// n_intervals + 1 equispaced nodes on [a, b].
inline std::vector<double> uniform_grid(double a, double b, std::size_t n_intervals) {
    if (n_intervals == 0 || !(b > a)) throw std::invalid_argument("uniform grid needs b > a and n >= 1");
    std::vector<double> t(n_intervals + 1);
    for (std::size_t k = 0; k <= n_intervals; ++k)
        t[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(n_intervals);
    t.back() = b;
    return t;
}

inline double euclid_distance(std::span<const double> x, std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(acc);
}

enum class SeminormKind { holder, gagliardo };

struct SeminormReport {
    double value = 0.0;
    SeminormKind kind = SeminormKind::holder;
    double beta = 0.5;
    double p = detail::kInf;
    std::size_t grid_resolution = 0;
    /// Set for Gagliardo estimates with beta * p >= 1, where the continuum value may diverge.
    bool divergence_warning = false;
};

enum class HolderMode { all_pairs, dyadic_scales };

/// Largest node-pair quotient |f(t_i) - f(t_j)| / |t_i - t_j|^beta. A lower bound for the
/// seminorm of the sampled function; exact for the piecewise-linear interpolant when beta < 1.
inline SeminormReport holder_seminorm(const SampledPath& path, double beta,
                                      HolderMode mode = HolderMode::all_pairs) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("Hölder exponent must lie in (0,1)");
    const std::size_t n = path.size();
    double best = 0.0;
    auto visit = [&](std::size_t i, std::size_t j) {
        const double num = euclid_distance(path.point(i), path.point(j));
        if (num == 0.0) return;
        best = std::max(best, num / std::pow(path.time(j) - path.time(i), beta));
    };
    if (mode == HolderMode::all_pairs) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) visit(i, j);
    } else {
        for (std::size_t gap = 1; gap < n; gap *= 2)
            for (std::size_t i = 0; i + gap < n; ++i) visit(i, i + gap);
        visit(0, n - 1);
    }
    return {best, SeminormKind::holder, beta, detail::kInf, n - 1, false};
}

namespace detail {

// ∬_{[0,h]^2} |x - y|^q dx dy for q > -1.
inline double same_cell_power_integral(double h, double q) {
    return 2.0 * std::pow(h, q + 2.0) / ((q + 1.0) * (q + 2.0));
}

}  // namespace detail

/// (beta, p)-Gagliardo seminorm of the piecewise-linear interpolant over [a, b]^2.
/// Diagonal cells use the closed form of |slope|^p |x-y|^{p-1-beta p}; adjacent cells are
/// graded toward the shared corner; the rest use tensor Gauss–Legendre.
inline SeminormReport gagliardo_seminorm(const SampledPath& path, double beta, double p) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("Gagliardo exponent must lie in (0,1)");
    if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("integrability p must lie in [1, inf)");
    const std::size_t cells = path.intervals();
    const std::size_t m = path.dim();
    const double q = p - 1.0 - beta * p;
    std::vector<double> slope(cells * m);
    for (std::size_t k = 0; k < cells; ++k) {
        const double h = path.time(k + 1) - path.time(k);
        if (!(h > 0.0)) throw std::invalid_argument("degenerate grid");
        for (std::size_t i = 0; i < m; ++i) slope[k * m + i] = (path.value(k + 1, i) - path.value(k, i)) / h;
    }
    auto diff_norm = [&](std::size_t kx, double x, std::size_t ky, double y) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double fx = path.value(kx, i) + slope[kx * m + i] * (x - path.time(kx));
            const double fy = path.value(ky, i) + slope[ky * m + i] * (y - path.time(ky));
            acc += (fx - fy) * (fx - fy);
        }
        return std::sqrt(acc);
    };
    auto integrand = [&](std::size_t kx, double x, std::size_t ky, double y) {
        const double d = std::abs(x - y);
        if (d == 0.0) return 0.0;
        return std::pow(diff_norm(kx, x, ky, y), p) / std::pow(d, 1.0 + beta * p);
    };
    const auto& rule = detail::gauss_rule(4);
    auto box = [&](std::size_t kx, double x0, double x1, std::size_t ky, double y0, double y1) {
        double acc = 0.0;
        for (std::size_t u = 0; u < 4; ++u) {
            const double x = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * rule.nodes[u];
            for (std::size_t v = 0; v < 4; ++v) {
                const double y = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * rule.nodes[v];
                acc += rule.weights[u] * rule.weights[v] * integrand(kx, x, ky, y);
            }
        }
        return acc * 0.25 * (x1 - x0) * (y1 - y0);
    };
    double total = 0.0;
    for (std::size_t k = 0; k < cells; ++k) {
        double sn = 0.0;
        for (std::size_t i = 0; i < m; ++i) sn += slope[k * m + i] * slope[k * m + i];
        const double h = path.time(k + 1) - path.time(k);
        total += std::pow(std::sqrt(sn), p) * detail::same_cell_power_integral(h, q);
    }
    for (std::size_t kx = 0; kx < cells; ++kx) {
        for (std::size_t ky = kx + 1; ky < cells; ++ky) {
            const double x0 = path.time(kx), x1 = path.time(kx + 1);
            const double y0 = path.time(ky), y1 = path.time(ky + 1);
            double part = 0.0;
            if (ky == kx + 1) {
                // Corner (x1, y0) is on the diagonal: shrink geometrically toward it.
                double lx = x1 - x0, ly = y1 - y0;
                for (int level = 0; level < 40; ++level) {
                    const double hx = 0.5 * lx, hy = 0.5 * ly;
                    part += box(kx, x1 - lx, x1 - hx, ky, y0, y0 + hy);
                    part += box(kx, x1 - lx, x1 - hx, ky, y0 + hy, y0 + ly);
                    part += box(kx, x1 - hx, x1, ky, y0 + hy, y0 + ly);
                    lx = hx;
                    ly = hy;
                }
            } else {
                part = box(kx, x0, x1, ky, y0, y1);
            }
            total += 2.0 * part;
        }
    }
    return {std::pow(total, 1.0 / p), SeminormKind::gagliardo, beta, p, cells, beta * p >= 1.0};
}

// CSV with header `t,x1,...,xm`, one row per node.

inline SampledPath read_path_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("path csv: missing header");
    std::size_t cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (cols < 2 || line.rfind("t", 0) != 0) throw std::runtime_error("path csv: header must be t,x1,...,xm");
    std::vector<double> t;
    std::vector<double> v;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            double x = 0.0;
            try {
                std::size_t used = 0;
                x = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw std::runtime_error("path csv: bad number on row " + std::to_string(row));
            }
            (c == 0 ? t : v).push_back(x);
            ++c;
        }
        if (c != cols) throw std::runtime_error("path csv: wrong column count on row " + std::to_string(row));
    }
    return SampledPath(std::move(t), std::move(v), cols - 1);
}

inline SampledPath read_path_csv(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open path file " + file);
    return read_path_csv(in);
}

inline void write_path_csv(std::ostream& out, const SampledPath& path) {
    out << 't';
    for (std::size_t i = 0; i < path.dim(); ++i) out << ",x" << (i + 1);
    out << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t k = 0; k < path.size(); ++k) {
        out << path.time(k);
        for (std::size_t i = 0; i < path.dim(); ++i) out << ',' << path.value(k, i);
        out << '\n';
    }
}

inline void write_path_csv(const std::string& file, const SampledPath& path) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write path file " + file);
    write_path_csv(out, path);
}

}  // namespace roughint
