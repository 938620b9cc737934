#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "roughint/frac_calc.hpp"
#include "roughint/gaussian.hpp"
#include "roughint/lift.hpp"
#include "roughint/oracles.hpp"
#include "roughint/potentials.hpp"
#include "roughint/rough.hpp"
#include "roughint/young.hpp"

namespace roughint {

struct CheckResult {
    std::string id;
    std::string title;
    bool pass = false;
    std::vector<std::pair<std::string, double>> metrics;
    std::string note;
    double seconds = 0.0;  // not part of the deterministic artifact
};

struct VerifyOptions {
    std::uint64_t seed = 42;
    std::size_t mc_replicas = 10000;
    std::size_t moment_replicas = 100000;
    double variability_target = (4.0 / 3.0) * gaussian_abs_moment(-0.5);
};

namespace detail {

inline double rel_err(double v, double ex, double floor = 0.0) {
    return std::abs(v - ex) / std::max(std::abs(ex), floor);
}

inline SampledPath stride_path(const SampledPath& X, std::size_t st) {
    std::vector<double> t;
    for (std::size_t k = 0; k < X.size(); k += st) t.push_back(X.time(k));
    return X.resample(std::move(t));
}

inline CheckResult check_frac_closed_forms(const VerifyOptions&) {
    CheckResult r{"AC1", "fractional derivative closed forms"};
    const std::size_t n = 4096;
    const auto grid = uniform_grid(0, 1, n);
    double worst = 0.0, worst_pt = 0.0;
    for (double mu : {1.0, 1.5, 2.0})
        for (double al : {0.3, 0.5, 0.7})
            for (bool left : {true, false}) {
                auto f = SampledPath::from_function(grid, [&](double t) { return std::pow(left ? t : 1.0 - t, mu); });
                FracDerivSpec spec;
                spec.order = al;
                spec.side = left ? Side::left_aplus : Side::right_bminus;
                spec.base = left ? BaseCorrection::subtract_f_a : BaseCorrection::subtract_f_b;
                const auto d = frac_derivative(f, spec).derivative;
                const double c = std::exp(std::lgamma(mu + 1.0) - std::lgamma(mu + 1.0 - al));
                double num = 0.0, den = 0.0;
                for (std::size_t k = 1; k < n; ++k) {
                    const std::size_t q = left ? k : n - k;
                    const double ex = c * std::pow(double(k) / n, mu - al);
                    const double e = std::abs(d.value(q) - ex);
                    num += e;
                    den += std::abs(ex);
                    if (k >= n / 16) worst_pt = std::max(worst_pt, e / std::abs(ex));
                }
                worst = std::max(worst, num / den);
            }
    r.metrics = {{"max_rel_l1_error", worst}, {"max_pointwise_rel_error_t_ge_1_16", worst_pt}, {"nodes", double(n)}};
    r.pass = worst <= 1e-4;
    return r;
}

inline CheckResult check_smooth_zahle(const VerifyOptions&) {
    CheckResult r{"AC2", "smooth Zahle integral"};
    const auto grid = uniform_grid(0, 1, 256);
    auto x = SampledPath::from_function(grid, [](double t) { return t; });
    auto y = SampledPath::from_function(grid, [](double t) { return t * t; });
    const double e1 = std::abs(zahle_integral(x, x, 0.5).value - 0.5);
    const double e2 = std::abs(zahle_integral(x, y, 0.5).value - 2.0 / 3.0);
    const std::vector<double> alphas{0.2, 0.35, 0.5, 0.65, 0.8};
    const auto s1 = alpha_sweep([&](double a) { return zahle_integral(x, x, a).value; }, alphas);
    const auto s2 = alpha_sweep([&](double a) { return zahle_integral(x, y, a).value; }, alphas);
    const double dev = std::max(s1.max_deviation, s2.max_deviation);
    r.metrics = {{"err_t_dt", e1}, {"err_t_dt2", e2}, {"sweep_max_deviation", dev}};
    r.pass = e1 <= 1e-4 && e2 <= 1e-4 && dev <= 1e-3;
    return r;
}

inline CheckResult check_young_chain_rule(const VerifyOptions& o) {
    CheckResult r{"AC3", "Young chain rule, H=0.75"};
    const std::size_t n = 4096;
    const auto x = sample_path(GaussianModel::fbm(0.75, uniform_grid(0, 1, n), 1, o.seed));
    const auto phi = coefficient_library("square");
    const double alpha = young_default_alpha(0.7, 0.7);
    const double xb = x.value(n), ex = xb * xb * xb / 3.0;
    const double v12 = composition_integral(x, phi, x, alpha).value;
    const double v11 = composition_integral(stride_path(x, 2), phi, stride_path(x, 2), alpha).value;
    const double d12 = std::abs(v12 - ex), d11 = std::abs(v11 - ex);
    const double ratio = d11 / std::max(d12, 1e-300);
    const double tol = 1e-2 * std::max(1.0, std::abs(ex));
    r.metrics = {{"B1", xb}, {"value", v12}, {"target", ex}, {"deviation_2^12", d12},
                 {"deviation_2^11", d11}, {"halving_ratio", ratio}};
    r.pass = d12 <= tol && ratio >= 1.5 && ratio <= 2.5;
    if (d12 <= tol && !r.pass) r.note = "value within tolerance; halving ratio outside [1.5, 2.5], observed order near 2H";
    return r;
}

inline CheckResult check_lifts(const VerifyOptions& o) {
    CheckResult r{"AC4", "multiplicative functional validity"};
    const std::size_t n = 1024;
    const auto xy = sample_path(GaussianModel::fbm(0.4, uniform_grid(0, 1, n), 2, o.seed));
    const auto x = sample_path(GaussianModel::fbm(0.4, uniform_grid(0, 1, n), 1, o.seed + 1));
    double chen = 0.0;
    for (const auto& mf : {lift_smooth(xy, xy), lift_geometric_1d(x), lift_dyadic(xy, xy, 10)})
        chen = std::max(chen, validate_mf(mf, 0.38, 1000, o.seed).chen_defect);
    r.metrics.push_back({"max_chen_defect", chen});
    double lo = 1e300, hi = 0.0, prev = 0.0;
    bool ok = chen <= 1e-10;
    for (int L = 7; L <= 10; ++L) {
        const double c = validate_mf(lift_dyadic(xy, xy, L), 0.38, 10, o.seed).c_beta;
        r.metrics.push_back({"c_beta_level_" + std::to_string(L), c});
        if (L > 7) {
            const double q = c / prev;
            lo = std::min(lo, q);
            hi = std::max(hi, q);
        }
        prev = c;
    }
    r.metrics.push_back({"min_level_ratio", lo});
    r.metrics.push_back({"max_level_ratio", hi});
    r.pass = ok && lo >= 0.5 && hi <= 2.0;
    return r;
}

inline CheckResult check_rough_smooth(const VerifyOptions& o) {
    CheckResult r{"AC5", "rough chain rule, smooth coefficient"};
    const std::size_t n = 4096;
    const auto x = sample_path(GaussianModel::fbm(0.4, uniform_grid(0, 1, n), 1, o.seed));
    auto mf = lift_geometric_1d(x);
    mf.beta = 0.38;
    const auto phi = coefficient_library("square");
    const double alpha = default_alpha_smooth(0.38, 0.99);
    const double v = rough_integrate(mf, phi, alpha).value;
    const double xb = x.value(n), ex = xb * xb * xb / 3.0;
    const auto orc = midpoint_compensated_oracle(mf, phi, dyadic_ladder(10, 12));
    const double e1 = std::abs(v - ex) / std::max(1.0, std::abs(ex));
    const double e2 = std::abs(v - orc.extrapolated) / std::max(1.0, std::abs(orc.extrapolated));
    r.metrics = {{"alpha", alpha},  {"value", v},       {"target", ex},
                 {"oracle", orc.extrapolated}, {"rel_err_target", e1}, {"rel_err_oracle", e2}};
    r.pass = e1 <= 2e-2 && e2 <= 2e-2;
    return r;
}

inline CheckResult check_rough_bv(const VerifyOptions& o) {
    CheckResult r{"AC6", "rough integral, BV coefficient"};
    const std::size_t n = 4096;
    const double beta = 0.38, s = 0.8;
    const auto x = sample_path(GaussianModel::fbm(0.4, uniform_grid(0, 1, n), 1, o.seed));
    auto mf = lift_geometric_1d(x);
    mf.beta = beta;
    const auto phi = coefficient_library("abs");
    const auto adm = check_rough_admissible_bv(beta, s);
    const auto orc = midpoint_compensated_oracle(mf, phi, dyadic_ladder(10, 12));
    const double ref = orc.extrapolated, floor = 0.05;
    std::vector<double> vals;
    double worst = 0.0;
    for (int q = 1; q <= 3; ++q) {
        const double eps = adm.eps_lo + (adm.eps_hi - adm.eps_lo) * q / 4.0;
        const double v = rough_integrate_bv(mf, phi, beta, s, eps).value;
        vals.push_back(v);
        worst = std::max(worst, rel_err(v, ref, floor));
        r.metrics.push_back({"value_eps_" + std::to_string(q), v});
    }
    double vmax = 0.0, dev = 0.0;
    for (double v : vals) vmax = std::max(vmax, std::abs(v));
    for (double a : vals)
        for (double b : vals) dev = std::max(dev, std::abs(a - b));
    dev /= std::max(vmax, floor);
    const double eps_mid = 0.5 * (adm.eps_lo + adm.eps_hi);
    const auto bound = bound_bv(mf, phi, s, eps_mid, beta);
    r.metrics.push_back({"oracle", ref});
    r.metrics.push_back({"max_rel_err_oracle", worst});
    r.metrics.push_back({"mutual_rel_deviation", dev});
    r.metrics.push_back({"bound_rhs", bound.rhs});
    r.pass = worst <= 5e-2 && dev <= 3e-2 && bound.finite && bound.rhs >= std::abs(vals[1]);
    return r;
}

inline CheckResult check_potentials(const VerifyOptions&) {
    CheckResult r{"AC7", "potential closed forms"};
    auto line = SampledPath::from_function(uniform_grid(0, 1, 64), [](double t) { return t; });
    auto flat = SampledPath::from_function(uniform_grid(0, 1, 16), [](double) { return 0.0; });
    const double e1 = std::abs(riesz_potential(RadonMeasure::dirac({0.0}), 0.5, 2.0) - std::sqrt(0.5));
    const double e2 = std::abs(riesz_potential(RadonMeasure::lebesgue(0, 1), 0.5, 0.0) - 2.0);
    const double e3 = std::abs(variability_norm(line, RadonMeasure::dirac({0.0}, 2.0), 0.5).norm - 4.0);
    const double e4 = std::abs(variability_norm(line, RadonMeasure::dirac({0.5}), 0.5).norm - 2.0 * std::sqrt(2.0));
    const double e5 = std::abs(segment_functional(flat, RadonMeasure::dirac({1.0}), 0.5, 0.5).value - 16.0 / 9.0);
    r.metrics = {{"riesz_dirac", e1}, {"riesz_lebesgue", e2}, {"variability_dirac_0", e3},
                 {"variability_dirac_half", e4}, {"segment_constant_path", e5}};
    r.pass = e1 <= 1e-6 && e2 <= 1e-6 && e3 <= 1e-3 && e4 <= 1e-3 && e5 <= 1e-3;
    return r;
}

inline CheckResult check_occupation_chain(const VerifyOptions& o) {
    CheckResult r{"AC8", "occupation, segment and variability along fBm"};
    const double s = 0.8, eps = 0.1;
    const auto sign_measure = RadonMeasure::dirac({0.0}, 2.0);
    bool ok = true;
    double max_ratio = 0.0, max_drift = 0.0;
    for (std::uint64_t q = 0; q < 5; ++q) {
        const auto x = sample_path(GaussianModel::fbm(0.4, uniform_grid(0, 1, 256), 1, o.seed + q));
        const auto occ = sup_occupation_functional(x, s);
        const double drift = std::abs(occ.value - occ.coarse_value) / occ.value;
        const auto seg = segment_functional(x, sign_measure, s, eps);
        const double bound = 2.0 * occupation_segment_bound(x, s, eps);
        const auto var = variability_norm(x, sign_measure, s);
        max_drift = std::max(max_drift, drift);
        max_ratio = std::max(max_ratio, seg.value / bound);
        ok = ok && occ.finite && drift <= 2e-2 && seg.finite && seg.value <= bound && var.finite;
    }
    r.metrics = {{"max_occupation_refine_drift", max_drift}, {"max_segment_over_bound", max_ratio}};
    r.pass = ok;
    return r;
}

inline CheckResult check_gaussian(const VerifyOptions& o) {
    CheckResult r{"AC9", "Gaussian conditions"};
    const auto bm = GaussianModel::bm(uniform_grid(0, 1, 256), 1, o.seed);
    const double c = cmu_constant(bm, RadonMeasure::dirac({1.0}), 0.5, 0.0, 1.0).value;
    const auto mc = mc_expected_variability(bm, RadonMeasure::dirac({0.0}), 0.5, o.mc_replicas);
    const double z = (mc.mean - o.variability_target) / mc.stderr_;
    // Same expectation for the interpolated path: Var = t_k + u²h on cell k.
    const double h = 1.0 / 256.0;
    double grid_int = 2.0 * std::pow(h, 0.75);
    for (std::size_t k = 1; k < 256; ++k)
        for (std::size_t q = 0; q < 8; ++q)
            grid_int += h * kGL8w[q] * std::pow(k * h + kGL8x[q] * kGL8x[q] * h, -0.25);
    const double grid_target = gaussian_abs_moment(-0.5) * grid_int;
    const double zg = (mc.mean - grid_target) / mc.stderr_;
    const auto mom = moment_bound_check({0.25, 1.0, 4.0}, {0.0, 1.0, 10.0}, 0.5, 1, o.moment_replicas, o.seed);
    r.metrics = {{"cmu", c},         {"mc_mean", mc.mean}, {"mc_stderr", mc.stderr_}, {"target", o.variability_target},
                 {"z_score", z},     {"grid_target", grid_target}, {"z_score_grid", zg},
                 {"moment_spread", mom.spread()}};
    r.pass = std::abs(c - 1.0) <= 1e-6 && std::abs(z) <= 3.0 && mc.infinite_fraction == 0.0 && mom.spread() <= 3.0;
    if (std::abs(z) > 3.0 && std::abs(zg) <= 3.0) r.note = "mean matches the interpolated-path expectation, not the continuum one";
    return r;
}

inline CheckResult check_sampler(const VerifyOptions& o) {
    CheckResult r{"AC10", "sampler exactness and determinism"};
    const auto model = GaussianModel::fbm(0.4, uniform_grid(1.0 / 16, 1, 15), 1, o.seed);
    const auto cov = empirical_covariance_check(model, 10000);
    const auto big = GaussianModel::fbm(0.4, uniform_grid(0, 1, 512), 2, o.seed);
    bool same = true;
    for (std::uint64_t q = 0; q < 4; ++q) {
        std::ostringstream a, b;
        write_path_csv(a, sample_path(big, q));
        write_path_csv(b, sample_path(big, q));
        same = same && a.str() == b.str();
    }
    const auto m1 = mc_expected_variability(big, RadonMeasure::dirac({0.0, 0.0}), 0.5, 20);
    const auto m2 = mc_expected_variability(big, RadonMeasure::dirac({0.0, 0.0}), 0.5, 20);
    same = same && m1.mean == m2.mean && m1.stderr_ == m2.stderr_;
    r.metrics = {{"covariance_max_excess", cov.max_excess}, {"identical_reruns", same ? 1.0 : 0.0}};
    r.pass = cov.pass && same;
    return r;
}

}  // namespace detail

using CheckFn = std::function<CheckResult(const VerifyOptions&)>;

inline std::vector<CheckFn> verify_suite(const std::string& name) {
    using namespace detail;
    if (name == "smooth")
        return {check_frac_closed_forms, check_smooth_zahle, check_rough_smooth, check_potentials};
    if (name == "all")
        return {check_frac_closed_forms, check_smooth_zahle, check_young_chain_rule, check_lifts,
                check_rough_smooth,      check_rough_bv,     check_potentials,       check_occupation_chain,
                check_gaussian,          check_sampler};
    throw std::invalid_argument("unknown suite '" + name + "' (smooth, all)");
}

inline CheckResult run_check(const CheckFn& f, const VerifyOptions& o) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    try {
        r = f(o);
    } catch (const std::exception& e) {
        r.pass = false;
        r.note = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace roughint
