#include "khess/khess.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include "khess/errors.hpp"
#include "khess/estimates.hpp"
#include "khess/solver.hpp"

using namespace khess;

struct khess_manifold {
    ManifoldPtr m;
};
struct khess_field {
    ScalarField u;
};
struct khess_equation {
    EquationSpec spec;
};
struct khess_solve_report {
    SolveReport rep;
};
struct khess_estimate {
    EstimateReport rep;
};

namespace {

thread_local std::string g_last_error;

khess_status fail(khess_status s, const std::string& msg) {
    g_last_error = msg;
    return s;
}

class NullArgument : public std::exception {};

template <class T>
const T& need(const T* p) {
    if (!p) throw NullArgument();
    return *p;
}

template <class F>
khess_status guard(F&& body) {
    try {
        body();
        g_last_error.clear();
        return KHESS_OK;
    } catch (const NullArgument&) {
        return fail(KHESS_ERR_NULL, "null handle or output pointer");
    } catch (const ConeViolation& e) {
        return fail(KHESS_ERR_CONE, e.what());
    } catch (const ParseError& e) {
        return fail(KHESS_ERR_PARSE, e.what());
    } catch (const HypothesisError& e) {
        return fail(KHESS_ERR_HYPOTHESIS, e.what());
    } catch (const UnsupportedError& e) {
        return fail(KHESS_ERR_UNSUPPORTED, e.what());
    } catch (const DomainError& e) {
        return fail(KHESS_ERR_DOMAIN, e.what());
    } catch (const std::exception& e) {
        return fail(KHESS_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(KHESS_ERR_INTERNAL, "unknown error");
    }
}

char* dup(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

void out_ptr(const void* out) {
    if (!out) throw NullArgument();
}

std::string str(const char* s, const char* fallback = "") { return s ? s : fallback; }

OperatorSpec make_operator(const std::string& kind, int n, int k, int l, double t, double s) {
    if (kind == "sigma_k_root") return OperatorSpec::sigma_k_root(n, k);
    if (kind == "quotient") return OperatorSpec::quotient(n, k, l);
    if (kind == "linear_comb_root") return OperatorSpec::linear_comb_root(n, k, t, s);
    throw DomainError("unknown operator '" + kind + "' (sigma_k_root, quotient, linear_comb_root)");
}

SolveConfig to_config(const khess_solve_config* c) {
    SolveConfig cfg;
    if (!c) return cfg;
    cfg.max_iters = c->max_iters;
    cfg.residual_tol = c->residual_tol;
    cfg.backtrack = c->backtrack;
    cfg.min_step = c->min_step;
    cfg.cone_margin = c->cone_margin;
    cfg.linear_solver = linear_solver_from_string(str(c->linear_solver, "direct"));
    cfg.iterative_tol = c->iterative_tol;
    cfg.iterative_max_iters = c->iterative_max_iters;
    cfg.seed = c->seed;
    return cfg;
}

EstimateOptions to_options(const khess_estimate_options* o) {
    EstimateOptions opts;
    if (!o) return opts;
    opts.collar = o->collar;
    opts.solved_tol = o->solved_tol;
    opts.slack_tol = o->slack_tol;
    opts.p_samples = o->p_samples;
    opts.max_audit_nodes = o->max_audit_nodes;
    opts.seed = o->seed;
    return opts;
}

}  // namespace

extern "C" {

const char* khess_last_error(void) { return g_last_error.c_str(); }

const char* khess_status_name(khess_status status) {
    switch (status) {
        case KHESS_OK: return "ok";
        case KHESS_ERR_DOMAIN: return "domain error";
        case KHESS_ERR_UNSUPPORTED: return "unsupported";
        case KHESS_ERR_CONE: return "cone violation";
        case KHESS_ERR_PARSE: return "parse error";
        case KHESS_ERR_HYPOTHESIS: return "hypothesis violated";
        case KHESS_ERR_IO: return "i/o error";
        case KHESS_ERR_NULL: return "null argument";
        case KHESS_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void khess_string_free(char* s) { std::free(s); }

khess_status khess_symcheck(const char* kind, int n, int k, int l, double t, double s, int samples, uint64_t seed,
                            char** text, int* all_passed) {
    return guard([&] {
        out_ptr(text);
        const ConditionReport rep = symcheck_battery(make_operator(str(kind), n, k, l, t, s), samples, seed);
        *text = dup(rep.to_text());
        if (all_passed) *all_passed = rep.all_passed() ? 1 : 0;
    });
}

khess_status khess_manifold_create(const char* kind, int n, int N, double L, double rho, int active,
                                   khess_manifold** out) {
    return guard([&] {
        out_ptr(out);
        ChartParams p;
        p.kind = chart_kind_from_string(str(kind));
        p.n = n;
        p.N = N;
        p.L = L;
        p.rho = rho;
        p.active = active;
        *out = new khess_manifold{make_manifold(p)};
    });
}

void khess_manifold_free(khess_manifold* m) { delete m; }

long khess_manifold_node_count(const khess_manifold* m) { return m ? m->m->node_count() : 0; }

khess_status khess_field_from_expression(const khess_manifold* m, const char* expr, khess_field** out) {
    return guard([&] {
        out_ptr(out);
        const ManifoldPtr& mp = need(m).m;
        const Expression e = Expression::parse(str(expr), SymbolSet{mp->n()});
        Eigen::VectorXd v(mp->node_count());
        for (long node = 0; node < mp->node_count(); ++node) {
            const Eigen::VectorXd x = mp->coords(node);
            Bindings<double> b;
            b.x = std::span<const double>(x.data(), x.size());
            v[node] = e.eval(b);
        }
        *out = new khess_field{ScalarField(mp, std::move(v))};
    });
}

khess_status khess_field_read(const char* path, khess_field** out) {
    std::ifstream is(str(path));
    if (!is) return fail(KHESS_ERR_IO, "cannot open '" + str(path) + "'");
    return guard([&] {
        out_ptr(out);
        *out = new khess_field{read_field(is)};
    });
}

khess_status khess_field_write(const khess_field* f, const char* path) {
    if (!f) return fail(KHESS_ERR_NULL, "null field");
    std::ofstream os(str(path));
    if (!os) return fail(KHESS_ERR_IO, "cannot write '" + str(path) + "'");
    const khess_status s = guard([&] { write_field(os, f->u); });
    if (s == KHESS_OK && !os.flush()) return fail(KHESS_ERR_IO, "write to '" + str(path) + "' failed");
    return s;
}

khess_status khess_field_add_noise(const khess_field* f, double amplitude, uint64_t seed, khess_field** out) {
    return guard([&] {
        out_ptr(out);
        const ScalarField& u = need(f).u;
        *out = new khess_field{ScalarField(u.manifold, u.values + amplitude * smooth_noise(u.manifold, seed).values)};
    });
}

khess_status khess_field_max_difference(const khess_field* a, const khess_field* b, double* out) {
    return guard([&] {
        out_ptr(out);
        const ScalarField &u = need(a).u, &v = need(b).u;
        if (!u.manifold->same_shape(*v.manifold)) throw DomainError("fields live on different grids");
        *out = (u.values - v.values).cwiseAbs().maxCoeff();
    });
}

void khess_field_free(khess_field* f) { delete f; }

khess_equation_params khess_equation_params_default(void) {
    khess_equation_params p;
    p.preset = "gauss_flat";
    p.k = 2;
    p.l = 0;
    p.t = 1.0;
    p.s = 0.0;
    p.c0 = 10.0;
    p.sign = 1;
    p.f0 = "1";
    p.nu = "1";
    p.phi = "1";
    p.kappa = "1";
    p.op = "sigma_k_root";
    p.a = 0.0;
    p.f = "1";
    p.h = "1";
    return p;
}

khess_status khess_equation_create(const khess_manifold* m, const khess_equation_params* p, khess_equation** out) {
    return guard([&] {
        out_ptr(out);
        const ManifoldPtr& mp = need(m).m;
        const khess_equation_params& q = need(p);
        const std::string preset = str(q.preset);
        EquationSpec s;
        if (preset == "schouten") {
            s = schouten_quotient_spec(mp, q.k, q.l, str(q.f0, "1"));
        } else if (preset == "lc_schouten") {
            s = lc_schouten_spec(mp, q.k, q.t, q.s, q.sign, str(q.f0, "1"), q.c0);
        } else if (preset == "optics") {
            s = optics_spec(mp, str(q.nu, "1"), str(q.phi, "1"));
        } else if (preset == "gauss_flat") {
            s = gauss_flat_spec(mp, str(q.kappa, "1"));
        } else if (preset == "gauss_sphere") {
            s = gauss_sphere_spec(mp, str(q.kappa, "1"));
        } else if (preset == "csc") {
            s = csc_spec(mp, make_operator(str(q.op, "sigma_k_root"), mp->n(), q.k, q.l, q.t, q.s), q.a,
                         str(q.f, "1"), str(q.h, "1"));
        } else {
            throw DomainError("unknown preset '" + preset +
                              "' (schouten, lc_schouten, optics, gauss_flat, gauss_sphere, csc)");
        }
        *out = new khess_equation{std::move(s)};
    });
}

khess_status khess_equation_manufacture(const khess_equation* e, const char* u_star, int analytic, double margin,
                                        khess_equation** out) {
    return guard([&] {
        out_ptr(out);
        const EquationSpec& s = need(e).spec;
        const Expression u = Expression::parse(str(u_star), SymbolSet{s.n()});
        *out = new khess_equation{
            manufacture(s, u, analytic ? ManufactureMode::Analytic : ManufactureMode::Discrete, margin)};
    });
}

khess_status khess_equation_residual(const khess_equation* e, const khess_field* u, double* max_abs) {
    return guard([&] {
        out_ptr(max_abs);
        *max_abs = residual(need(e).spec, need(u).u).values.cwiseAbs().maxCoeff();
    });
}

void khess_equation_free(khess_equation* e) { delete e; }

khess_solve_config khess_solve_config_default(void) {
    const SolveConfig d;
    khess_solve_config c;
    c.max_iters = d.max_iters;
    c.residual_tol = d.residual_tol;
    c.backtrack = d.backtrack;
    c.min_step = d.min_step;
    c.cone_margin = d.cone_margin;
    c.linear_solver = "direct";
    c.iterative_tol = d.iterative_tol;
    c.iterative_max_iters = d.iterative_max_iters;
    c.seed = d.seed;
    return c;
}

khess_status khess_newton_solve(const khess_equation* e, const khess_field* u0, const khess_solve_config* cfg,
                                khess_solve_report** out) {
    return guard([&] {
        out_ptr(out);
        *out = new khess_solve_report{newton_solve(need(e).spec, need(u0).u, to_config(cfg))};
    });
}

khess_status khess_continuation_solve(const khess_equation* e0, const khess_equation* e1, const khess_field* u0,
                                      int steps, const khess_solve_config* cfg, khess_solve_report** out) {
    return guard([&] {
        out_ptr(out);
        const EquationSpec &s0 = need(e0).spec, &s1 = need(e1).spec;
        *out = new khess_solve_report{
            continuation_solve([&](double tau) { return blend(s0, s1, tau); }, need(u0).u, steps, to_config(cfg))};
    });
}

int khess_solve_report_converged(const khess_solve_report* r) { return r && r->rep.converged ? 1 : 0; }

int khess_solve_report_iterations(const khess_solve_report* r) { return r ? r->rep.iterations : 0; }

double khess_solve_report_final_residual(const khess_solve_report* r) {
    return r && !r->rep.residual_history.empty() ? r->rep.residual_history.back() : 0.0;
}

khess_status khess_solve_report_text(const khess_solve_report* r, char** text) {
    return guard([&] {
        out_ptr(text);
        *text = dup(need(r).rep.to_text());
    });
}

khess_status khess_solve_report_final_field(const khess_solve_report* r, khess_field** out) {
    return guard([&] {
        out_ptr(out);
        *out = new khess_field{need(r).rep.final_u};
    });
}

void khess_solve_report_free(khess_solve_report* r) { delete r; }

khess_estimate_options khess_estimate_options_default(void) {
    const EstimateOptions d;
    khess_estimate_options o;
    o.collar = d.collar;
    o.solved_tol = d.solved_tol;
    o.slack_tol = d.slack_tol;
    o.p_samples = d.p_samples;
    o.max_audit_nodes = d.max_audit_nodes;
    o.seed = d.seed;
    return o;
}

khess_status khess_hypothesis_audit(const khess_equation* e, const khess_field* u, const char* tag, double r,
                                    const khess_estimate_options* opts, char** text, int* all_passed) {
    return guard([&] {
        out_ptr(text);
        const ConditionReport rep =
            hypothesis_audit(need(e).spec, need(u).u, case_tag_from_string(str(tag)), r, to_options(opts));
        *text = dup(rep.to_text());
        if (all_passed) *all_passed = rep.all_passed() ? 1 : 0;
    });
}

khess_status khess_local_estimate(const khess_equation* e, const khess_field* u, double r, const char* tag,
                                  const khess_estimate_options* opts, khess_estimate** out) {
    return guard([&] {
        out_ptr(out);
        *out = new khess_estimate{
            local_estimate_report(need(e).spec, need(u).u, r, case_tag_from_string(str(tag)), to_options(opts))};
    });
}

khess_status khess_rescale(const khess_equation* e, const khess_field* u, double r, khess_equation** e_out,
                           khess_field** u_out) {
    return guard([&] {
        out_ptr(e_out);
        out_ptr(u_out);
        ScaledProblem sp = rescale_problem(need(e).spec, need(u).u, r);
        auto eq = std::make_unique<khess_equation>(khess_equation{std::move(sp.spec)});
        *u_out = new khess_field{std::move(sp.u)};
        *e_out = eq.release();
    });
}

khess_status khess_max_principle(const khess_equation* e, const khess_field* u, int has_c4, double c4_star,
                                 const khess_estimate_options* opts, khess_estimate** out) {
    return guard([&] {
        out_ptr(out);
        const std::optional<double> c4 = has_c4 ? std::optional<double>(c4_star) : std::nullopt;
        *out = new khess_estimate{max_principle_report(need(e).spec, need(u).u, c4, to_options(opts))};
    });
}

khess_status khess_fit_c4(const khess_estimate* const* calibration, size_t count, double* kappa) {
    return guard([&] {
        out_ptr(kappa);
        if (!calibration && count) throw NullArgument();
        std::vector<EstimateReport> reps;
        for (size_t i = 0; i < count; ++i) reps.push_back(need(calibration[i]).rep);
        *kappa = fit_c4(reps).kappa;
    });
}

khess_status khess_apply_c4(const khess_estimate* est, double kappa, khess_estimate** out) {
    return guard([&] {
        out_ptr(out);
        C4Fit fit;
        fit.kappa = kappa;
        *out = new khess_estimate{apply_c4(need(est).rep, fit)};
    });
}

double khess_estimate_ratio(const khess_estimate* est) { return est ? est->rep.ratio : 0.0; }

int khess_estimate_bound_holds(const khess_estimate* est) { return est && est->rep.bound_holds ? 1 : 0; }

khess_status khess_estimate_text(const khess_estimate* est, char** text) {
    return guard([&] {
        out_ptr(text);
        *text = dup(need(est).rep.to_text());
    });
}

khess_status khess_estimate_table(const khess_estimate* const* rows, size_t count, char** text) {
    return guard([&] {
        out_ptr(text);
        if (!rows && count) throw NullArgument();
        std::vector<EstimateReport> reps;
        for (size_t i = 0; i < count; ++i) reps.push_back(need(rows[i]).rep);
        *text = dup(estimate_table(reps));
    });
}

void khess_estimate_free(khess_estimate* est) { delete est; }

}  // extern "C"
