// roughint: command-line front end. Results are JSON, paths and tensors CSV.
// Exit codes: 0 success, 2 computed but hypotheses violated, 1 error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "roughint/verify.hpp"

using json = nlohmann::json;
using namespace roughint;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr const char* kSchema = "roughint.result/1";

struct HypothesisViolation : std::runtime_error {
    json payload;
    HypothesisViolation(const std::string& what, json p) : std::runtime_error(what), payload(std::move(p)) {}
};

json envelope(const std::string& command) {
    return {{"schema", kSchema}, {"version", kVersion}, {"command", command}};
}

void emit(const json& j, const std::string& out) {
    const std::string text = j.dump(2) + "\n";
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << text;
}

json grid_meta(const SampledPath& p) {
    return {{"a", p.a()}, {"b", p.b()}, {"nodes", p.size()}, {"dim", p.dim()}};
}

json sweep_json(const SweepTable& t) {
    json e = json::array();
    for (const auto& x : t.entries) {
        json r = {{"alpha", x.alpha}, {"ok", x.ok}};
        if (x.ok) r["value"] = x.value;
        else r["error"] = x.error;
        e.push_back(r);
    }
    return {{"entries", e}, {"max_deviation", t.max_deviation}, {"max_rel_deviation", t.max_rel_deviation}};
}

json bound_json(const BoundReport& b) {
    json ing = json::object();
    for (const auto& [k, v] : b.ingredients) ing[k] = std::isfinite(v) ? json(v) : json("inf");
    return {{"kind", b.kind}, {"finite", b.finite}, {"rhs", std::isfinite(b.rhs) ? json(b.rhs) : json("inf")},
            {"ingredients", ing}};
}

// Shared path / coefficient / measure inputs.
struct Inputs {
    std::string x, y, phi = "identity", phi_params, phi_spec, measure_spec, atoms, density;
    std::size_t dim = 1;

    void add_paths(CLI::App* c, bool need_y) {
        c->add_option("--x", x, "CSV path file (t, x1, ..., xm)")->required();
        if (need_y) c->add_option("--y", y, "CSV integrator path (defaults to --x)");
    }
    void add_phi(CLI::App* c) {
        c->add_option("--phi", phi, "library coefficient name");
        c->add_option("--phi-params", phi_params, "comma separated coefficient parameters");
        c->add_option("--phi-spec", phi_spec, "coefficient spec file (name, params)");
    }
    void add_measure(CLI::App* c) {
        c->add_option("--measure-spec", measure_spec, "measure spec file (dim, atoms, density)");
        c->add_option("--atoms", atoms, "atoms as 'p1,..,pm:w; ...'");
        c->add_option("--density", density, "boxes as 'lo1,hi1,..:value; ...'");
        c->add_option("--dim", dim, "measure dimension for --atoms/--density");
    }
    SampledPath X() const { return read_path_csv(x); }
    SampledPath Y() const { return y.empty() ? read_path_csv(x) : read_path_csv(y); }
    Coefficient coefficient(std::size_t m) const {
        std::string name = phi;
        std::vector<double> params = detail::parse_numbers(phi_params);
        if (!phi_spec.empty()) {
            const auto s = parse_coefficient_spec(phi_spec);
            name = s.name;
            params = s.params;
        }
        auto c = coefficient_library(name, params);
        return (m > 1 && c.m == 1) ? componentwise(c, m) : c;
    }
    RadonMeasure measure() const {
        if (!measure_spec.empty()) return parse_coefficient_spec(measure_spec).measure;
        std::istringstream in("dim=" + std::to_string(dim) + "\natoms=" + atoms + "\ndensity=" + density + "\n");
        return parse_coefficient_spec(in).measure;
    }
};

MultiplicativeFunctional make_lift(const SampledPath& X, const SampledPath& Y, const std::string& kind, int level,
                                   const std::string& tensor) {
    if (kind == "smooth") return lift_smooth(X, Y);
    if (kind == "geometric") return lift_geometric_1d(X);
    if (kind == "dyadic") return lift_dyadic(X, Y, level);
    if (kind == "external") {
        std::ifstream in(tensor);
        if (!in) throw std::runtime_error("cannot open tensor file " + tensor);
        return lift_external(X, Y, read_tensor_csv(in, X.size(), X.dim(), Y.dim()));
    }
    throw std::invalid_argument("--lift must be smooth, geometric, dyadic or external");
}

json window_json(const AlphaWindow& w) { return {{"lo", w.lo}, {"hi", w.hi}, {"empty", w.empty}}; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pathwise Young and rough integrals via fractional calculus"};
    app.set_config("--config", "", "key=value config file; command-line flags override");
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();
    std::string out;
    app.add_option("--out", out, "output file (default stdout)");

    Inputs in;
    std::function<void()> action;

    // integrate-young
    auto* cy = app.add_subcommand("integrate-young", "Zahle integral of phi(X) (or X) against Y");
    double alpha = 0.0, gamma_h = 0.5, delta_h = 0.5;
    bool use_phi = false;
    in.add_paths(cy, true);
    in.add_phi(cy);
    cy->add_flag("--compose", use_phi, "integrate phi(X) instead of X");
    cy->add_option("--alpha", alpha, "fractional order; default from --gamma/--delta");
    cy->add_option("--gamma", gamma_h, "Holder exponent of the integrand");
    cy->add_option("--delta", delta_h, "Holder exponent of the integrator");
    cy->callback([&] {
        action = [&] {
            const auto X = in.X(), Y = in.Y();
            const auto adm = check_young_admissible(gamma_h, delta_h, 1e300, 1e300);
            const double a = alpha > 0.0 ? alpha : young_default_alpha(gamma_h, delta_h);
            const auto r = use_phi ? composition_integral(X, in.coefficient(X.dim()), Y, a) : zahle_integral(X, Y, a);
            json j = envelope("integrate-young");
            j["grid"] = grid_meta(X);
            j["result"] = {{"value", r.value}, {"alpha", r.alpha_used}, {"boundary_term", r.boundary_term},
                           {"merged_nodes", r.grid}};
            j["hypotheses"] = {{"young_admissible", adm.ok}, {"margin", adm.margin}};
            if (!adm.ok) throw HypothesisViolation("γ + δ must exceed 1", j);
            emit(j, out);
        };
    });

    // lift
    auto* cl = app.add_subcommand("lift", "Build and validate a multiplicative functional");
    std::string lift_kind = "smooth", tensor_in, tensor_out;
    int level = 8;
    double beta = 0.0;
    std::uint64_t seed = 42;
    std::size_t triples = 1000;
    in.add_paths(cl, true);
    cl->add_option("--lift", lift_kind, "smooth, geometric, dyadic or external");
    cl->add_option("--level", level, "dyadic level");
    cl->add_option("--tensor", tensor_in, "tensor CSV for --lift external");
    cl->add_option("--tensor-out", tensor_out, "write the tensor simplex as CSV");
    cl->add_option("--beta", beta, "Holder exponent for the 2β constant")->required();
    cl->add_option("--triples", triples, "random Chen triples");
    cl->add_option("--seed", seed, "seed for triple selection");
    cl->callback([&] {
        action = [&] {
            const auto X = in.X(), Y = in.Y();
            const auto mf = make_lift(X, Y, lift_kind, level, tensor_in);
            const auto v = validate_mf(mf, beta, triples, seed);
            if (!tensor_out.empty()) {
                std::ofstream f(tensor_out);
                write_tensor_csv(f, mf);
            }
            json j = envelope("lift");
            j["grid"] = grid_meta(X);
            j["construction"] = to_string(mf.construction);
            j["seed"] = seed;
            j["result"] = {{"chen_defect", v.chen_defect}, {"c_beta", v.c_beta},   {"diagonal_max", v.diagonal_max},
                           {"holder_x", v.holder_x},       {"holder_y", v.holder_y}, {"triples", v.triples}};
            emit(j, out);
        };
    });

    // integrate-rough
    auto* cr = app.add_subcommand("integrate-rough", "Rough integral of phi(X) against (Y, X⊗Y)");
    double lambda = 0.99, s_bv = 0.0, eps = 0.0;
    bool auto_alpha = false, want_bound = false, bv = false;
    in.add_paths(cr, true);
    in.add_phi(cr);
    cr->add_option("--lift", lift_kind, "smooth, geometric, dyadic or external");
    cr->add_option("--level", level, "dyadic level");
    cr->add_option("--tensor", tensor_in, "tensor CSV for --lift external");
    cr->add_option("--beta", beta, "Holder exponent of the functional, in (1/3, 1/2)")->required();
    cr->add_option("--alpha", alpha, "fractional order");
    cr->add_flag("--auto", auto_alpha, "midpoint of the admissible window");
    cr->add_option("--lambda", lambda, "Holder exponent of the coefficient's derivative");
    cr->add_flag("--bv", bv, "BV coefficient: α induced by (s, ε)");
    cr->add_option("--s", s_bv, "variability exponent for --bv");
    cr->add_option("--eps", eps, "segment exponent for --bv (default window midpoint)");
    cr->add_flag("--bound", want_bound, "attach the a-priori bound report");
    cr->callback([&] {
        action = [&] {
            const auto X = in.X(), Y = in.Y();
            auto mf = make_lift(X, Y, lift_kind, level, tensor_in);
            mf.beta = beta;
            const auto phi = in.coefficient(X.dim());
            json j = envelope("integrate-rough");
            j["grid"] = grid_meta(X);
            j["construction"] = to_string(mf.construction);
            j["coefficient"] = phi.name;
            RoughIntegralResult r;
            if (bv) {
                const auto adm = check_rough_admissible_bv(beta, s_bv, eps > 0.0 ? std::optional(eps) : std::nullopt);
                j["window"] = {{"eps_lo", adm.eps_lo}, {"eps_hi", adm.eps_hi}, {"alpha", window_json(adm.alpha_window)}};
                if (!adm.ok) throw HypothesisViolation(adm.reason, j);
                r = rough_integrate_bv(mf, phi, beta, s_bv, adm.eps);
                if (want_bound) r.bound_report = bound_bv(mf, phi, s_bv, adm.eps, beta);
            } else {
                const auto w = check_rough_admissible_smooth(beta, lambda);
                j["window"] = window_json(w);
                if (w.empty) throw HypothesisViolation("empty α window", j);
                const double a = (auto_alpha || alpha == 0.0) ? w.midpoint() : alpha;
                if (!w.contains(a))
                    throw HypothesisViolation("α = " + std::to_string(a) + " outside (" + std::to_string(w.lo) + ", " +
                                                  std::to_string(w.hi) + ")",
                                              j);
                r = rough_integrate(mf, phi, a);
                if (want_bound) r.bound_report = bound_smooth(mf, phi, lambda, beta);
            }
            j["result"] = {{"value", r.value}, {"alpha", r.alpha_used}, {"term_first", r.term_first},
                           {"term_second", r.term_second}};
            if (r.bound_report) {
                j["bound"] = bound_json(*r.bound_report);
                if (!r.bound_report->finite) throw HypothesisViolation("bound ingredients are not finite", j);
            }
            emit(j, out);
        };
    });

    // variability
    auto* cv = app.add_subcommand("variability", "(s,p)-variability of a measure along a path");
    double s = 0.5, p = 1.0;
    in.add_measure(cv);
    cv->add_option("--x", in.x, "CSV path file")->required();
    cv->add_option("--s", s, "exponent in (0,1)");
    cv->add_option("--p", p, "integrability exponent");
    cv->callback([&] {
        action = [&] {
            const auto X = in.X();
            const auto r = variability_norm(X, in.measure(), s, p);
            json j = envelope("variability");
            j["grid"] = grid_meta(X);
            j["result"] = {{"s", r.s}, {"p", r.p}, {"norm", r.finite ? json(r.norm) : json("inf")}, {"finite", r.finite}};
            if (!r.finite) throw HypothesisViolation("variability is infinite", j);
            emit(j, out);
        };
    });

    // segment-check
    auto* cs = app.add_subcommand("segment-check", "Weighted segment functional and its occupation bound");
    in.add_measure(cs);
    cs->add_option("--x", in.x, "CSV path file")->required();
    cs->add_option("--s", s, "exponent in (0,1)");
    cs->add_option("--eps", eps, "weight exponent")->required();
    cs->callback([&] {
        action = [&] {
            const auto X = in.X();
            const auto nu = in.measure();
            const auto seg = segment_functional(X, nu, s, eps);
            const auto occ = sup_occupation_functional(X, s);
            json j = envelope("segment-check");
            j["grid"] = grid_meta(X);
            j["result"] = {{"segment", seg.finite ? json(seg.value) : json("inf")},
                           {"finite", seg.finite},
                           {"error_estimate", seg.error_estimate},
                           {"sup_occupation", occ.finite ? json(occ.value) : json("inf")},
                           {"occupation_argmax", occ.argmax},
                           {"unit_atom_bound", std::isfinite(occupation_segment_bound(X, s, eps)) ? json(occupation_segment_bound(X, s, eps))
                                                                                        : json("inf")}};
            if (!seg.finite) throw HypothesisViolation("segment functional is infinite", j);
            emit(j, out);
        };
    });

    // fbm-sample
    auto* cf = app.add_subcommand("fbm-sample", "Exact fBm sample on a uniform grid (CSV)");
    double hurst = 0.4, ta = 0.0, tb = 1.0;
    std::size_t n = 256, m = 1, replica = 0, replicas = 1000;
    cf->add_option("--hurst", hurst, "Hurst index");
    cf->add_option("--n", n, "grid intervals");
    cf->add_option("--m", m, "components");
    cf->add_option("--a", ta, "left endpoint");
    cf->add_option("--b", tb, "right endpoint");
    cf->add_option("--seed", seed, "master seed");
    cf->add_option("--replica", replica, "replica counter");
    cf->callback([&] {
        action = [&] {
            const auto path = sample_path(GaussianModel::fbm(hurst, uniform_grid(ta, tb, n), m, seed), replica);
            if (out.empty() || out == "-") write_path_csv(std::cout, path);
            else write_path_csv(out, path);
        };
    });

    // gauss-check
    auto* cg = app.add_subcommand("gauss-check", "Sampler covariance check and the C_mu constant");
    cg->add_option("--hurst", hurst, "Hurst index");
    cg->add_option("--n", n, "grid intervals");
    cg->add_option("--m", m, "components");
    cg->add_option("--seed", seed, "master seed");
    cg->add_option("--replicas", replicas, "covariance replicas");
    cg->add_option("--s", s, "potential exponent for C_mu");
    in.add_measure(cg);
    cg->callback([&] {
        action = [&] {
            auto grid = uniform_grid(0, 1, n);
            const auto model = GaussianModel::fbm(hurst, grid, m, seed);
            const auto cov = empirical_covariance_check(GaussianModel::fbm(hurst, {grid.begin() + 1, grid.end()}, 1, seed),
                                                        replicas);
            json j = envelope("gauss-check");
            j["model"] = model.describe();
            j["seed"] = seed;
            j["covariance"] = {{"max_excess", cov.max_excess}, {"pass", cov.pass}, {"replicas", replicas}};
            const auto nu = in.measure();
            bool ok = cov.pass;
            if (nu.dim == m && !(nu.atoms.empty() && nu.boxes.empty())) {
                const auto c = cmu_constant(model, nu, s, 0.0, 1.0);
                j["cmu"] = {{"value", c.finite ? json(c.value) : json("inf")},
                            {"finite", c.finite},
                            {"variance_exponent", c.variance_exponent},
                            {"exponent_criterion", c.exponent_criterion}};
                if (!c.finite || !c.exponent_criterion) {
                    emit(j, out);
                    throw HypothesisViolation("C_mu condition fails", j);
                }
            }
            emit(j, out);
            if (!ok) throw std::runtime_error("empirical covariance check failed");
        };
    });

    // alpha-sweep
    auto* ca = app.add_subcommand("alpha-sweep", "Rough integral over several admissible α");
    std::vector<double> alphas;
    std::size_t count = 5;
    in.add_paths(ca, true);
    in.add_phi(ca);
    ca->add_option("--lift", lift_kind, "smooth, geometric, dyadic or external");
    ca->add_option("--level", level, "dyadic level");
    ca->add_option("--tensor", tensor_in, "tensor CSV for --lift external");
    ca->add_option("--beta", beta, "Holder exponent of the functional")->required();
    ca->add_option("--lambda", lambda, "Holder exponent of the coefficient's derivative");
    ca->add_option("--alphas", alphas, "explicit α values")->delimiter(',');
    ca->add_option("--count", count, "interior points of the window when --alphas is absent");
    ca->callback([&] {
        action = [&] {
            const auto X = in.X(), Y = in.Y();
            auto mf = make_lift(X, Y, lift_kind, level, tensor_in);
            mf.beta = beta;
            const auto w = check_rough_admissible_smooth(beta, lambda);
            json j = envelope("alpha-sweep");
            j["grid"] = grid_meta(X);
            j["window"] = window_json(w);
            if (alphas.empty()) {
                if (w.empty) throw HypothesisViolation("empty α window", j);
                for (std::size_t k = 1; k <= count; ++k) alphas.push_back(w.lo + (w.hi - w.lo) * double(k) / double(count + 1));
            }
            j["result"] = sweep_json(rough_alpha_sweep(mf, in.coefficient(X.dim()), alphas));
            emit(j, out);
        };
    });

    // verify
    auto* cver = app.add_subcommand("verify", "Run the acceptance checks");
    std::string suite = "smooth";
    VerifyOptions vopt;
    cver->add_option("--suite", suite, "smooth or all");
    cver->add_option("--seed", vopt.seed, "master seed");
    cver->add_option("--replicas", vopt.mc_replicas, "Monte Carlo replicas");
    int verify_failed = 0;
    cver->callback([&] {
        action = [&] {
            json j = envelope("verify");
            j["suite"] = suite;
            j["seed"] = vopt.seed;
            json checks = json::array();
            for (const auto& f : verify_suite(suite)) {
                const auto r = run_check(f, vopt);
                std::fprintf(stderr, "%s %s  %s (%.1f s)\n", r.id.c_str(), r.pass ? "PASS" : "FAIL", r.title.c_str(),
                             r.seconds);
                json mt = json::object();
                for (const auto& [k, v] : r.metrics) mt[k] = std::isfinite(v) ? json(v) : json("inf");
                json c = {{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"metrics", mt}};
                if (!r.note.empty()) c["note"] = r.note;
                checks.push_back(c);
                verify_failed += !r.pass;
            }
            j["checks"] = checks;
            j["all_pass"] = verify_failed == 0;
            emit(j, out);
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    try {
        action();
    } catch (const HypothesisViolation& e) {
        std::cerr << "hypothesis violated: " << e.what() << "\n";
        if (e.payload.contains("window")) std::cerr << "window: " << e.payload["window"].dump() << "\n";
        json j = e.payload;
        j["hypothesis_violation"] = e.what();
        emit(j, out);
        return 2;
    } catch (const AdmissibilityError& e) {
        std::cerr << "hypothesis violated: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return verify_failed == 0 ? 0 : 1;
}
