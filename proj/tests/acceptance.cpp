#include <cmath>
#include <cstdio>

#include "roughint/verify.hpp"

using namespace roughint;

namespace {

// E|Z|^q = 2∫_0^∞ z^q φ(z) dz by z = u^{2/(1+q)} and composite Simpson on [0, 12].
double abs_moment_quadrature(double q) {
    const double k = 2.0 / (1.0 + q);
    auto f = [&](double u) {
        if (u == 0.0) return 0.0;
        const double z = std::pow(u, k);
        return 2.0 * k * std::pow(u, k - 1.0) * std::pow(z, q) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    };
    const int n = 200000;
    const double h = 12.0 / n;
    double acc = f(0.0) + f(12.0);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(i * h);
    return acc * h / 3.0;
}

}  // namespace

int main() {
    VerifyOptions opt;
    // E∫_0^1 |B_t|^{-1/2} dt = E|Z|^{-1/2} ∫_0^1 t^{-1/4} dt.
    opt.variability_target = (4.0 / 3.0) * abs_moment_quadrature(-0.5);
    int failed = 0;
    for (const auto& f : verify_suite("all")) {
        const auto r = run_check(f, opt);
        std::printf("%s %s  %s (%.1f s)\n", r.id.c_str(), r.pass ? "PASS" : "FAIL", r.title.c_str(), r.seconds);
        for (const auto& [k, v] : r.metrics) std::printf("    %s = %.10g\n", k.c_str(), v);
        if (!r.note.empty()) std::printf("    note: %s\n", r.note.c_str());
        std::fflush(stdout);
        failed += !r.pass;
    }
    return failed == 0 ? 0 : 1;
}
