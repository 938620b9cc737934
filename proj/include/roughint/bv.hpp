#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace roughint {

/// Nonnegative measure on R^m: point masses plus piecewise-constant densities on boxes.
struct RadonMeasure {
    struct Atom {
        std::vector<double> point;
        double weight = 0.0;
    };
    struct Box {
        std::vector<double> lo;
        std::vector<double> hi;
        double density = 0.0;
    };

    std::size_t dim = 1;
    std::vector<Atom> atoms;
    std::vector<Box> boxes;

    RadonMeasure() = default;
    explicit RadonMeasure(std::size_t m) : dim(m) {
        if (m == 0) throw std::invalid_argument("measure dimension must be positive");
    }

    static RadonMeasure dirac(std::vector<double> point, double weight = 1.0) {
        RadonMeasure mu(point.size());
        mu.add_atom(std::move(point), weight);
        return mu;
    }

    static RadonMeasure lebesgue(double lo, double hi, double density = 1.0) {
        RadonMeasure mu(1);
        mu.add_box({lo}, {hi}, density);
        return mu;
    }

    RadonMeasure& add_atom(std::vector<double> point, double weight) {
        if (point.size() != dim) throw std::invalid_argument("atom dimension mismatch");
        if (!(weight >= 0.0) || !std::isfinite(weight)) throw std::invalid_argument("atom weight must be finite and >= 0");
        if (weight > 0.0) atoms.push_back({std::move(point), weight});
        return *this;
    }

    RadonMeasure& add_box(std::vector<double> lo, std::vector<double> hi, double density) {
        if (lo.size() != dim || hi.size() != dim) throw std::invalid_argument("box dimension mismatch");
        if (!(density >= 0.0) || !std::isfinite(density)) throw std::invalid_argument("box density must be finite and >= 0");
        for (std::size_t i = 0; i < dim; ++i)
            if (!(hi[i] > lo[i])) throw std::invalid_argument("box must have positive extent");
        if (density > 0.0) boxes.push_back({std::move(lo), std::move(hi), density});
        return *this;
    }

    double total_mass() const {
        double mass = 0.0;
        for (const auto& a : atoms) mass += a.weight;
        for (const auto& b : boxes) {
            double vol = b.density;
            for (std::size_t i = 0; i < dim; ++i) vol *= b.hi[i] - b.lo[i];
            mass += vol;
        }
        return mass;
    }

    bool empty() const { return atoms.empty() && boxes.empty(); }

    RadonMeasure scaled(double c) const {
        if (!(c >= 0.0)) throw std::invalid_argument("measure scale must be >= 0");
        RadonMeasure out(dim);
        for (const auto& a : atoms) out.add_atom(a.point, c * a.weight);
        for (const auto& b : boxes) out.add_box(b.lo, b.hi, c * b.density);
        return out;
    }

    RadonMeasure operator+(const RadonMeasure& other) const {
        if (other.dim != dim) throw std::invalid_argument("measure dimension mismatch");
        RadonMeasure out = *this;
        out.atoms.insert(out.atoms.end(), other.atoms.begin(), other.atoms.end());
        out.boxes.insert(out.boxes.end(), other.boxes.begin(), other.boxes.end());
        return out;
    }
};

enum class JumpConvention { left_limit, right_limit, midpoint };

/// Function of bounded variation on R: base value at -inf plus the cumulative signed
/// derivative (atoms and a piecewise-constant density).
struct BV1D {
    struct Jump {
        double x = 0.0;
        double w = 0.0;
    };
    struct Piece {
        double lo = 0.0;
        double hi = 0.0;
        double value = 0.0;
    };

    double base_value = 0.0;
    std::vector<Jump> atoms;
    std::vector<Piece> density;

    double eval(double x, JumpConvention conv = JumpConvention::midpoint) const {
        double v = base_value;
        for (const auto& a : atoms) {
            if (a.x < x) {
                v += a.w;
            } else if (a.x == x) {
                if (conv == JumpConvention::right_limit) v += a.w;
                else if (conv == JumpConvention::midpoint) v += 0.5 * a.w;
            }
        }
        for (const auto& p : density) v += p.value * std::clamp(x - p.lo, 0.0, p.hi - p.lo);
        return v;
    }

    double total_variation() const {
        double tv = 0.0;
        for (const auto& a : atoms) tv += std::abs(a.w);
        for (const auto& p : density) tv += std::abs(p.value) * (p.hi - p.lo);
        return tv;
    }

    static BV1D sign() { return BV1D{-1.0, {{0.0, 2.0}}, {}}; }
    static BV1D indicator(double lo, double hi) { return BV1D{0.0, {{lo, 1.0}, {hi, -1.0}}, {}}; }
};

/// ||Df|| as a measure on R; atoms at the same location are merged before taking |w|.
inline RadonMeasure gradient_measure(const BV1D& f) {
    std::map<double, double> merged;
    for (const auto& a : f.atoms) merged[a.x] += a.w;
    RadonMeasure mu(1);
    for (const auto& [x, w] : merged) mu.add_atom({x}, std::abs(w));
    for (const auto& p : f.density) {
        if (!(p.hi > p.lo)) throw std::invalid_argument("density piece must have positive length");
        mu.add_box({p.lo}, {p.hi}, std::abs(p.value));
    }
    return mu;
}

/// Lipschitz map R^m -> R^d with BV first partials.
///
/// `kinks[i]` lists levels c with a jump of some partial across the hyperplane x_i = c;
/// quadratures split time cells where a path component crosses one. `gradient[i * d + j]`
/// is ||D d_i phi_j||.
struct Coefficient {
    using ValueFn = std::function<double(std::span<const double>, std::size_t)>;
    using PartialFn = std::function<double(std::span<const double>, std::size_t, std::size_t, JumpConvention)>;

    std::string name;
    std::size_t m = 1;
    std::size_t d = 1;
    ValueFn value;
    PartialFn partial;
    std::vector<double> lip;
    std::vector<RadonMeasure> gradient;
    std::vector<std::vector<double>> kinks;
    JumpConvention jump_convention = JumpConvention::midpoint;
    /// Set for coefficients whose partials are globally Lipschitz (smooth family).
    bool smooth = false;

    double operator()(std::span<const double> x, std::size_t j) const { return value(x, j); }
    double dphi(std::span<const double> x, std::size_t i, std::size_t j) const {
        return partial(x, i, j, jump_convention);
    }
    const RadonMeasure& gradient_of(std::size_t i, std::size_t j) const { return gradient.at(i * d + j); }

    bool has_jumps() const {
        for (const auto& k : kinks)
            if (!k.empty()) return true;
        return false;
    }
};

namespace detail {

// Scalar coefficient from phi, phi' and the BV data of phi'.
inline Coefficient scalar_coefficient(std::string name, std::function<double(double)> f,
                                      std::function<double(double, JumpConvention)> df, double lip,
                                      BV1D derivative, bool smooth = false) {
    Coefficient c;
    c.name = std::move(name);
    c.value = [f = std::move(f)](std::span<const double> x, std::size_t) { return f(x[0]); };
    c.partial = [df = std::move(df)](std::span<const double> x, std::size_t, std::size_t, JumpConvention conv) {
        return df(x[0], conv);
    };
    c.lip = {lip};
    c.gradient = {gradient_measure(derivative)};
    std::vector<double> k;
    for (const auto& a : derivative.atoms)
        if (a.w != 0.0) k.push_back(a.x);
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    c.kinks = {k};
    c.smooth = smooth;
    return c;
}

inline Coefficient from_derivative(std::string name, double value_at_minus, const BV1D& derivative,
                                   double anchor) {
    // phi(x) = value_at_minus + ∫_anchor^x phi'.
    std::vector<double> breaks;
    for (const auto& a : derivative.atoms) breaks.push_back(a.x);
    for (const auto& p : derivative.density) {
        breaks.push_back(p.lo);
        breaks.push_back(p.hi);
    }
    auto prim = [derivative, anchor, value_at_minus](double x) {
        double lo = std::min(anchor, x), hi = std::max(anchor, x);
        std::vector<double> pts{lo, hi};
        for (const auto& a : derivative.atoms)
            if (a.x > lo && a.x < hi) pts.push_back(a.x);
        for (const auto& p : derivative.density) {
            if (p.lo > lo && p.lo < hi) pts.push_back(p.lo);
            if (p.hi > lo && p.hi < hi) pts.push_back(p.hi);
        }
        std::sort(pts.begin(), pts.end());
        double acc = 0.0;
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
            const double mid = 0.5 * (pts[k] + pts[k + 1]);
            acc += derivative.eval(mid) * (pts[k + 1] - pts[k]);
        }
        return value_at_minus + (x >= anchor ? acc : -acc);
    };
    double lip = std::abs(derivative.base_value);
    {
        double v = derivative.base_value;
        std::vector<std::pair<double, double>> events;
        for (const auto& a : derivative.atoms) events.push_back({a.x, a.w});
        std::sort(events.begin(), events.end());
        for (const auto& e : events) {
            v += e.second;
            lip = std::max(lip, std::abs(v));
        }
        if (!derivative.density.empty()) {
            // Densities: check values at all breakpoints.
            for (double x : breaks) {
                lip = std::max(lip, std::abs(derivative.eval(x, JumpConvention::left_limit)));
                lip = std::max(lip, std::abs(derivative.eval(x, JumpConvention::right_limit)));
            }
        }
    }
    return scalar_coefficient(
        std::move(name), prim, [derivative](double x, JumpConvention conv) { return derivative.eval(x, conv); }, lip,
        derivative);
}

}  // namespace detail

/// phi_j(x) = base(x_j) for j < m.
inline Coefficient componentwise(const Coefficient& base, std::size_t m) {
    if (base.m != 1 || base.d != 1) throw std::invalid_argument("componentwise needs a scalar base coefficient");
    Coefficient c;
    c.name = base.name + "^" + std::to_string(m);
    c.m = m;
    c.d = m;
    c.value = [f = base.value](std::span<const double> x, std::size_t j) { return f(x.subspan(j, 1), 0); };
    c.partial = [g = base.partial](std::span<const double> x, std::size_t i, std::size_t j, JumpConvention conv) {
        return i == j ? g(x.subspan(i, 1), 0, 0, conv) : 0.0;
    };
    c.lip.assign(m, base.lip[0]);
    c.gradient.clear();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (i != j) {
                c.gradient.emplace_back(m);
                continue;
            }
            // Jump across the hyperplane x_i = c: lift the 1D measure as a surface density is
            // beyond the atom/box model, so record the 1D marginal along coordinate i.
            RadonMeasure mu(m);
            for (const auto& a : base.gradient[0].atoms) {
                std::vector<double> p(m, 0.0);
                p[i] = a.point[0];
                mu.add_atom(std::move(p), a.weight);
            }
            c.gradient.push_back(std::move(mu));
        }
    }
    c.kinks.assign(m, base.kinks[0]);
    c.jump_convention = base.jump_convention;
    c.smooth = base.smooth;
    return c;
}

/// Named coefficients: abs, ramp, clip(lo,hi), piecewise_linear(knots; slopes[; value0]),
/// square, identity, sin, zero, const(c).
///
/// The smooth family (square, identity, sin, const) carries no gradient measure: its
/// partials are not BV on all of R, and bounds for it go through the Hölder route.
///
/// piecewise_linear takes knots k_1 < ... < k_r and r+1 slopes; value0 is phi(k_1).
inline Coefficient coefficient_library(const std::string& name, const std::vector<double>& params = {}) {
    using detail::scalar_coefficient;
    if (name == "abs") {
        return scalar_coefficient(
            "abs", [](double x) { return std::abs(x); },
            [](double x, JumpConvention conv) {
                if (x > 0) return 1.0;
                if (x < 0) return -1.0;
                return conv == JumpConvention::left_limit ? -1.0 : conv == JumpConvention::right_limit ? 1.0 : 0.0;
            },
            1.0, BV1D::sign());
    }
    if (name == "ramp") {
        return scalar_coefficient(
            "ramp", [](double x) { return std::max(0.0, x); },
            [](double x, JumpConvention conv) {
                if (x > 0) return 1.0;
                if (x < 0) return 0.0;
                return conv == JumpConvention::left_limit ? 0.0 : conv == JumpConvention::right_limit ? 1.0 : 0.5;
            },
            1.0, BV1D{0.0, {{0.0, 1.0}}, {}});
    }
    if (name == "clip") {
        const double lo = params.size() > 0 ? params[0] : -1.0;
        const double hi = params.size() > 1 ? params[1] : 1.0;
        if (!(hi > lo)) throw std::invalid_argument("clip needs lo < hi");
        return scalar_coefficient(
            "clip", [lo, hi](double x) { return std::clamp(x, lo, hi); },
            [lo, hi](double x, JumpConvention conv) { return BV1D::indicator(lo, hi).eval(x, conv); }, 1.0,
            BV1D::indicator(lo, hi));
    }
    if (name == "piecewise_linear") {
        if (params.size() < 3)
            throw std::invalid_argument("piecewise_linear params: r knots, r+1 slopes, optional value0");
        // Layout: knots..., slopes..., [value0]. Solve r from 2r+1 or 2r+2 entries.
        const std::size_t total = params.size();
        std::size_t r = (total - 1) / 2;
        double value0 = 0.0;
        if (total == 2 * r + 2) value0 = params.back();
        std::vector<double> knots(params.begin(), params.begin() + static_cast<long>(r));
        std::vector<double> slopes(params.begin() + static_cast<long>(r), params.begin() + static_cast<long>(2 * r + 1));
        for (std::size_t k = 1; k < r; ++k)
            if (!(knots[k] > knots[k - 1])) throw std::invalid_argument("piecewise_linear knots must be sorted");
        BV1D der{slopes[0], {}, {}};
        for (std::size_t k = 0; k < r; ++k) der.atoms.push_back({knots[k], slopes[k + 1] - slopes[k]});
        Coefficient c = detail::from_derivative("piecewise_linear", value0, der, knots[0]);
        return c;
    }
    if (name == "square") {
        Coefficient c = scalar_coefficient(
            "square", [](double x) { return x * x; }, [](double x, JumpConvention) { return 2.0 * x; },
            std::numeric_limits<double>::infinity(), BV1D{}, true);
        return c;
    }
    if (name == "identity") {
        return scalar_coefficient(
            "identity", [](double x) { return x; }, [](double, JumpConvention) { return 1.0; }, 1.0, BV1D{1.0, {}, {}},
            true);
    }
    if (name == "sin") {
        return scalar_coefficient(
            "sin", [](double x) { return std::sin(x); }, [](double x, JumpConvention) { return std::cos(x); }, 1.0,
            BV1D{}, true);
    }
    if (name == "zero" || name == "const") {
        const double v = params.empty() ? 0.0 : params[0];
        return scalar_coefficient(
            name, [v](double) { return v; }, [](double, JumpConvention) { return 0.0; }, 0.0, BV1D{}, true);
    }
    throw std::invalid_argument("unknown coefficient '" + name + "'");
}

struct DominationResult {
    bool dominated = true;
    std::optional<double> witness;
};

/// ||D psi|| <= mu for one-dimensional atom+density measures: atoms compared at equal
/// locations, densities compared piecewise on the common refinement.
inline DominationResult check_domination(const RadonMeasure& grad, const RadonMeasure& mu) {
    if (grad.dim != 1 || mu.dim != 1) throw std::invalid_argument("domination check is implemented for m = 1");
    auto mu_atom = [&](double x) {
        double w = 0.0;
        for (const auto& a : mu.atoms)
            if (a.point[0] == x) w += a.weight;
        return w;
    };
    auto density_at = [](const RadonMeasure& nu, double x) {
        double v = 0.0;
        for (const auto& b : nu.boxes)
            if (x > b.lo[0] && x < b.hi[0]) v += b.density;
        return v;
    };
    std::map<double, double> atoms;
    for (const auto& a : grad.atoms) atoms[a.point[0]] += a.weight;
    for (const auto& [x, w] : atoms)
        if (w > mu_atom(x) * (1.0 + 1e-12)) return {false, x};
    std::vector<double> cuts;
    for (const auto* nu : {&grad, &mu})
        for (const auto& b : nu->boxes) {
            cuts.push_back(b.lo[0]);
            cuts.push_back(b.hi[0]);
        }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
        if (density_at(grad, mid) > density_at(mu, mid) * (1.0 + 1e-12)) return {false, mid};
    }
    return {};
}

// Plain-text spec:
//   name=abs
//   params=-1,1
//   dim=1
//   atoms=0:2;1.5:0.5          (point coordinates comma-separated before ':')
//   density=0,1:2;2,3:0.5      (lo1,hi1[,lo2,hi2,...]:value)

struct CoefficientSpec {
    std::string name;
    std::vector<double> params;
    RadonMeasure measure{1};
};

namespace detail {

inline std::vector<double> parse_numbers(const std::string& text, char sep = ',') {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw std::invalid_argument("not a number: '" + item + "'");
        }
    }
    return out;
}

inline std::string trim(const std::string& s) {
    const auto lo = s.find_first_not_of(" \t\r");
    if (lo == std::string::npos) return {};
    const auto hi = s.find_last_not_of(" \t\r");
    return s.substr(lo, hi - lo + 1);
}

}  // namespace detail

inline CoefficientSpec parse_coefficient_spec(std::istream& in) {
    CoefficientSpec spec;
    std::size_t dim = 1;
    std::string atoms_text, density_text;
    std::string line;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("spec line without '=': " + line);
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key == "name") spec.name = val;
        else if (key == "params") spec.params = detail::parse_numbers(val);
        else if (key == "dim") dim = static_cast<std::size_t>(std::stoul(val));
        else if (key == "atoms") atoms_text = val;
        else if (key == "density") density_text = val;
        else throw std::invalid_argument("unknown spec key '" + key + "'");
    }
    spec.measure = RadonMeasure(dim);
    std::stringstream as(atoms_text);
    std::string item;
    while (std::getline(as, item, ';')) {
        item = detail::trim(item);
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("atom needs point:weight");
        auto p = detail::parse_numbers(item.substr(0, colon));
        const double w = std::stod(item.substr(colon + 1));
        spec.measure.add_atom(std::move(p), w);
    }
    std::stringstream ds(density_text);
    while (std::getline(ds, item, ';')) {
        item = detail::trim(item);
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("density needs box:value");
        auto b = detail::parse_numbers(item.substr(0, colon));
        if (b.size() != 2 * dim) throw std::invalid_argument("density box needs lo,hi per dimension");
        std::vector<double> lo(dim), hi(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            lo[i] = b[2 * i];
            hi[i] = b[2 * i + 1];
        }
        spec.measure.add_box(std::move(lo), std::move(hi), std::stod(item.substr(colon + 1)));
    }
    return spec;
}

inline CoefficientSpec parse_coefficient_spec(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open spec file " + file);
    return parse_coefficient_spec(in);
}

}  // namespace roughint
