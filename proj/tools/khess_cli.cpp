// khess command-line driver. Uses only the C interface of the library.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "khess/khess.h"

using khess_cli::Config;
using khess_cli::ConfigError;

namespace {

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using Manifold = std::unique_ptr<khess_manifold, Deleter<khess_manifold, khess_manifold_free>>;
using Field = std::unique_ptr<khess_field, Deleter<khess_field, khess_field_free>>;
using Equation = std::unique_ptr<khess_equation, Deleter<khess_equation, khess_equation_free>>;
using SolveReport = std::unique_ptr<khess_solve_report, Deleter<khess_solve_report, khess_solve_report_free>>;
using Estimate = std::unique_ptr<khess_estimate, Deleter<khess_estimate, khess_estimate_free>>;

/// A failed assertion or library error: exit status 1.
struct RunFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string take(char* s) {
    std::string out = s ? s : "";
    khess_string_free(s);
    return out;
}

// Library calls whose failure traces back to a config value report that key's
// location; expression syntax errors are config errors (exit 2).
void check(khess_status s, const Config& cfg, const std::string& key = "") {
    if (s == KHESS_OK) return;
    const std::string msg = std::string(khess_status_name(s)) + ": " + khess_last_error();
    if (s == KHESS_ERR_PARSE && !key.empty()) cfg.fail(key, msg);
    throw RunFailure(key.empty() ? msg : key + ": " + msg);
}

struct Profile {
    const char* preset;
    const char* kind;
    int n, active;
    double L;
    const char* bump;
    const char* estimate_case;
};

const Profile kProfiles[] = {
    {"schouten", "domain", 4, 2, 2.0, "-2 + 0.1*r2 + 0.01*sin(x1)*cos(x2)", "C31"},
    {"lc_schouten", "domain", 4, 2, 2.0, "-1 + 0.25*r2 + 0.05*sin(x1)", "C32b"},
    {"optics", "sphere", 2, 0, 1.0, "0.1*cos(x1 + 0.5*x2)", "T1b"},
    {"gauss_flat", "domain", 2, 0, 2.0, "0.5*r2 + 0.1*sin(x1)*cos(x2)", "T2"},
    {"gauss_sphere", "sphere", 2, 0, 1.0, "0.2*exp(-r2)", "T2"},
    {"csc", "sphere", 2, 0, 1.0, "0.1*sin(x1)*cos(x2)", "T1a"},
};

const Profile& profile(const Config& cfg) {
    for (const Profile& p : kProfiles)
        if (cfg.is("equation.preset", p.preset)) return p;
    cfg.fail("equation.preset", "unknown preset '" + cfg.str("equation.preset") + "'");
}

void resolve_profile(Config& cfg) {
    const Profile& p = profile(cfg);
    auto fill = [&](const char* key, const std::string& value) {
        if (cfg.is(key, "auto")) cfg.set(key, value, "preset " + std::string(p.preset));
    };
    fill("chart.kind", p.kind);
    fill("chart.n", std::to_string(p.n));
    fill("chart.active", std::to_string(p.active));
    std::ostringstream L;
    L << p.L;
    fill("chart.L", L.str());
    std::string tag = p.estimate_case;
    if (cfg.is("equation.preset", "lc_schouten")) tag = cfg.str("equation.sign") == "1" ? "C32a" : "C32b";
    fill("estimate.case", tag);
    if (cfg.is("manufactured.u", "bump")) cfg.set("manufactured.u", p.bump, "preset " + std::string(p.preset));
}

std::string timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::ostringstream os;
    os << std::put_time(std::gmtime(&t), "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

/// Output sink: stdout, plus a file per artifact when output.prefix is set.
class Output {
public:
    Output(const Config& cfg, std::string command) : cfg_(cfg), command_(std::move(command)) {}

    /// First line is the only run-dependent one.
    std::string header() const {
        std::ostringstream os;
        os << "# generated " << timestamp() << "\n";
        os << "# khess " << command_ << "  seed " << cfg_.str("seed") << "\n";
        return os.str();
    }

    void emit(const std::string& suffix, const std::string& body) const {
        const std::string text = header() + body;
        std::cout << text;
        if (!cfg_.str("output.prefix").empty()) write(cfg_.str("output.prefix") + suffix, text);
    }

    void write(const std::string& path, const std::string& text) const {
        std::ofstream os(path);
        if (!os || !(os << text) || !os.flush()) throw RunFailure("cannot write '" + path + "'");
    }

private:
    const Config& cfg_;
    std::string command_;
};

Manifold make_chart(const Config& cfg) {
    khess_manifold* m = nullptr;
    check(khess_manifold_create(cfg.str("chart.kind").c_str(), cfg.integer("chart.n"), cfg.integer("chart.N"),
                                cfg.real("chart.L"), cfg.real("chart.rho"), cfg.integer("chart.active"), &m),
          cfg, "chart.kind");
    return Manifold(m);
}

Equation make_equation(const Config& cfg, const khess_manifold* m) {
    khess_equation_params p = khess_equation_params_default();
    p.preset = cfg.str("equation.preset").c_str();
    p.k = cfg.integer("equation.k");
    p.l = cfg.integer("equation.l");
    p.t = cfg.real("equation.t");
    p.s = cfg.real("equation.s");
    p.c0 = cfg.real("equation.c0");
    p.sign = cfg.integer("equation.sign");
    p.f0 = cfg.str("equation.f0").c_str();
    p.nu = cfg.str("equation.nu").c_str();
    p.phi = cfg.str("equation.phi").c_str();
    p.kappa = cfg.str("equation.kappa").c_str();
    p.op = cfg.str("equation.op").c_str();
    p.a = cfg.real("equation.a");
    p.f = cfg.str("equation.f").c_str();
    p.h = cfg.str("equation.h").c_str();
    khess_equation* e = nullptr;
    check(khess_equation_create(m, &p, &e), cfg, "equation.preset");
    return Equation(e);
}

Equation manufactured(const Config& cfg, const khess_equation* base, const std::string& key) {
    const std::string& mode = cfg.str("manufactured.mode");
    if (mode != "analytic" && mode != "discrete") cfg.fail("manufactured.mode", "expected analytic or discrete");
    khess_equation* e = nullptr;
    check(khess_equation_manufacture(base, cfg.str(key).c_str(), mode == "analytic",
                                     cfg.real("manufactured.margin"), &e),
          cfg, key);
    return Equation(e);
}

Field field(const Config& cfg, const khess_manifold* m, const std::string& key) {
    khess_field* f = nullptr;
    check(khess_field_from_expression(m, cfg.str(key).c_str(), &f), cfg, key);
    return Field(f);
}

khess_solve_config solve_config(const Config& cfg) {
    khess_solve_config c = khess_solve_config_default();
    c.max_iters = cfg.integer("solver.max_iters");
    c.residual_tol = cfg.real("solver.residual_tol");
    c.backtrack = cfg.real("solver.backtrack");
    c.min_step = cfg.real("solver.min_step");
    c.cone_margin = cfg.real("solver.cone_margin");
    c.linear_solver = cfg.str("solver.linear").c_str();
    c.iterative_tol = cfg.real("solver.iterative_tol");
    c.iterative_max_iters = cfg.integer("solver.iterative_max_iters");
    c.seed = static_cast<uint64_t>(cfg.integer("seed"));
    return c;
}

khess_estimate_options estimate_options(const Config& cfg) {
    khess_estimate_options o = khess_estimate_options_default();
    o.collar = cfg.integer("estimate.collar");
    o.solved_tol = cfg.real("estimate.solved_tol");
    o.slack_tol = cfg.real("estimate.slack_tol");
    o.p_samples = cfg.integer("estimate.p_samples");
    o.max_audit_nodes = cfg.integer("estimate.max_audit_nodes");
    o.seed = static_cast<uint64_t>(cfg.integer("seed"));
    return o;
}

std::string real_text(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

int run_symcheck(const Config& cfg) {
    const int n = cfg.is("chart.n", "auto") ? 4 : cfg.integer("chart.n");
    const int k = cfg.integer("equation.k"), l = cfg.integer("equation.l");
    const double t = cfg.real("equation.t"), s = cfg.real("equation.s");
    const std::string& kind = cfg.str("symcheck.kind");
    std::vector<std::string> kinds;
    if (kind == "all")
        kinds = {"sigma_k_root", "quotient", "linear_comb_root"};
    else if (kind == "sigma_k_root" || kind == "quotient" || kind == "linear_comb_root")
        kinds = {kind};
    else
        cfg.fail("symcheck.kind", "expected sigma_k_root, quotient, linear_comb_root or all");

    std::string body;
    bool ok = true;
    for (const std::string& kd : kinds) {
        char* text = nullptr;
        int passed = 0;
        check(khess_symcheck(kd.c_str(), n, k, l, t, s, cfg.integer("symcheck.samples"),
                             static_cast<uint64_t>(cfg.integer("seed")), &text, &passed),
              cfg);
        body += take(text) + "\n";
        ok = ok && passed;
    }
    Output(cfg, "symcheck").emit(".report.txt", body);
    if (!ok) throw RunFailure("symcheck: a condition failed (see FAIL rows)");
    return 0;
}

// The manufactured problem and a discrete solution of it.
struct SolvedState {
    Manifold m;
    Equation spec;
    Field star, u;
};

SolvedState solved_state(const Config& cfg) {
    SolvedState st;
    st.m = make_chart(cfg);
    Equation base = make_equation(cfg, st.m.get());
    st.spec = manufactured(cfg, base.get(), "manufactured.u");
    st.star = field(cfg, st.m.get(), "manufactured.u");
    const khess_solve_config sc = solve_config(cfg);
    khess_solve_report* r = nullptr;
    check(khess_newton_solve(st.spec.get(), st.star.get(), &sc, &r), cfg);
    SolveReport rep(r);
    if (!khess_solve_report_converged(rep.get())) throw RunFailure("solving the manufactured problem failed");
    khess_field* u = nullptr;
    check(khess_solve_report_final_field(rep.get(), &u), cfg);
    st.u = Field(u);
    return st;
}

int run_solve(const Config& cfg) {
    Manifold m = make_chart(cfg);
    Equation base = make_equation(cfg, m.get());
    Equation spec = manufactured(cfg, base.get(), "manufactured.u");
    Field star = field(cfg, m.get(), "manufactured.u");
    const khess_solve_config sc = solve_config(cfg);

    khess_solve_report* r = nullptr;
    std::string mode;
    if (cfg.is("solve.continuation_start", "none")) {
        khess_field* u0 = nullptr;
        check(khess_field_add_noise(star.get(), cfg.real("solve.noise"), static_cast<uint64_t>(cfg.integer("seed")),
                                    &u0),
              cfg);
        Field start(u0);
        check(khess_newton_solve(spec.get(), start.get(), &sc, &r), cfg);
        mode = "newton from u* + " + cfg.str("solve.noise") + " noise";
    } else {
        Equation spec0 = manufactured(cfg, base.get(), "solve.continuation_start");
        Field start = field(cfg, m.get(), "solve.continuation_start");
        check(khess_continuation_solve(spec0.get(), spec.get(), start.get(), cfg.integer("solve.continuation_steps"),
                                       &sc, &r),
              cfg);
        mode = "continuation in " + cfg.str("solve.continuation_steps") + " stages";
    }
    SolveReport rep(r);
    khess_field* uf = nullptr;
    check(khess_solve_report_final_field(rep.get(), &uf), cfg);
    Field u(uf);
    double err = 0.0;
    check(khess_field_max_difference(u.get(), star.get(), &err), cfg);

    std::ostringstream body;
    body << "preset " << cfg.str("equation.preset") << "\n"
         << "u_star " << cfg.str("manufactured.u") << "\n"
         << "mode " << mode << "\n"
         << take([&] {
                char* t = nullptr;
                check(khess_solve_report_text(rep.get(), &t), cfg);
                return t;
            }())
         << "max_error_vs_u_star " << real_text(err) << "\n";
    const Output out(cfg, "solve");
    out.emit(".report.txt", body.str());
    if (!cfg.str("output.prefix").empty()) check(khess_field_write(u.get(), (cfg.str("output.prefix") + ".field.txt").c_str()), cfg);
    if (!khess_solve_report_converged(rep.get())) throw RunFailure("solve did not converge");
    return 0;
}

int run_estimate(const Config& cfg) {
    const SolvedState st = solved_state(cfg);
    const khess_estimate_options opts = estimate_options(cfg);
    const std::string& tag = cfg.str("estimate.case");
    std::vector<Estimate> rows;
    if (tag == "T2") {
        khess_estimate* e = nullptr;
        check(khess_max_principle(st.spec.get(), st.u.get(), 0, 0.0, &opts, &e), cfg);
        rows.emplace_back(e);
    } else {
        const bool rescale = cfg.boolean("estimate.rescale");
        for (double r : cfg.reals("estimate.radii")) {
            khess_estimate* e = nullptr;
            if (rescale) {
                khess_equation* es = nullptr;
                khess_field* us = nullptr;
                check(khess_rescale(st.spec.get(), st.u.get(), r, &es, &us), cfg);
                Equation spec(es);
                Field u(us);
                check(khess_local_estimate(spec.get(), u.get(), 1.0, tag.c_str(), &opts, &e), cfg);
            } else {
                check(khess_local_estimate(st.spec.get(), st.u.get(), r, tag.c_str(), &opts, &e), cfg);
            }
            rows.emplace_back(e);
        }
    }
    std::vector<const khess_estimate*> ptrs;
    double lo = INFINITY, hi = 0.0;
    for (const Estimate& e : rows) {
        ptrs.push_back(e.get());
        lo = std::min(lo, khess_estimate_ratio(e.get()));
        hi = std::max(hi, khess_estimate_ratio(e.get()));
    }
    char* table = nullptr;
    check(khess_estimate_table(ptrs.data(), ptrs.size(), &table), cfg);
    std::string body = take(table);
    const double spread = lo > 0 ? hi / lo : (hi > 0 ? INFINITY : 1.0);
    std::ostringstream tail;
    tail << "# ratio spread " << real_text(spread) << "\n";
    body += tail.str();
    Output(cfg, "estimate").emit(".table.csv", body);

    for (const Estimate& e : rows)
        if (!khess_estimate_bound_holds(e.get())) throw RunFailure("estimate: flagged bound does not hold");
    if (!(spread < cfg.real("estimate.max_spread")))
        throw RunFailure("estimate: ratio spread " + real_text(spread) + " is not below estimate.max_spread");
    return 0;
}

int run_audit(const Config& cfg) {
    const SolvedState st = solved_state(cfg);
    const khess_estimate_options opts = estimate_options(cfg);
    char* text = nullptr;
    int passed = 0;
    check(khess_hypothesis_audit(st.spec.get(), st.u.get(), cfg.str("estimate.case").c_str(), cfg.real("audit.r"),
                                 &opts, &text, &passed),
          cfg, "estimate.case");
    Output(cfg, "audit").emit(".report.txt", take(text));
    if (!passed) throw RunFailure("audit: a hypothesis failed (see FAIL rows)");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical harness for curvature-type Hessian equations"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "khess 1.0");

    std::string config_path;
    std::vector<std::string> sets;
    bool dump = false;
    struct Flag {
        const char* name;
        const char* key;
        const char* help;
        std::string value;
    };
    std::vector<Flag> flags = {
        {"--preset", "equation.preset", "equation preset", {}},
        {"--n", "chart.n", "dimension", {}},
        {"--k", "equation.k", "operator degree", {}},
        {"--l", "equation.l", "quotient lower degree", {}},
        {"--N", "chart.N", "grid intervals per axis", {}},
        {"--L", "chart.L", "chart side length", {}},
        {"--samples", "symcheck.samples", "samples per battery", {}},
        {"--seed", "seed", "seed", {}},
        {"--radii", "estimate.radii", "comma-separated ball radii", {}},
        {"--case", "estimate.case", "estimate case tag", {}},
        {"--manufactured", "manufactured.u", "u* expression or bump", {}},
        {"--out", "output.prefix", "output file prefix", {}},
    };

    const std::vector<std::pair<const char*, const char*>> commands = {
        {"symcheck", "symmetric-function property batteries"},
        {"solve", "manufactured-solution Newton solve"},
        {"estimate", "local estimate ratios over a family of radii"},
        {"audit", "hypothesis audit of an estimate case"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "flat key = value config file");
        sub->add_option("--set", sets, "override one key (key=value), repeatable");
        sub->add_flag("--dump-defaults", dump, "print the resolved configuration and exit");
        for (Flag& f : flags) sub->add_option(f.name, f.value, std::string(f.help) + " (" + f.key + ")");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        Config cfg;
        if (!config_path.empty()) cfg.load_file(config_path);
        for (const std::string& s : sets) cfg.assign(s, "--set " + s);
        for (const Flag& f : flags)
            if (!f.value.empty()) cfg.set(f.key, f.value, f.name);
        resolve_profile(cfg);
        if (dump) {
            std::cout << cfg.dump(true);
            return 0;
        }
        if (command == "symcheck") return run_symcheck(cfg);
        if (command == "solve") return run_solve(cfg);
        if (command == "estimate") return run_estimate(cfg);
        return run_audit(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "khess: config error: " << e.what() << "\n";
        return 2;
    } catch (const RunFailure& e) {
        std::cerr << "khess: " << e.what() << "\n";
        return 1;
    }
}
