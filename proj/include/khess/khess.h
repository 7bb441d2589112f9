#ifndef KHESS_KHESS_H
#define KHESS_KHESS_H

/* C interface of the khess library. Every object is an opaque handle owned by
 * the caller and released with the matching *_free function. Every call
 * returns a khess_status; on failure khess_last_error() describes the error
 * for the calling thread. Strings handed out by the library are released with
 * khess_string_free. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
    KHESS_OK = 0,
    KHESS_ERR_DOMAIN = 1,      /* argument outside the domain of the operation */
    KHESS_ERR_UNSUPPORTED = 2, /* operation not defined for the operator, dimension or chart */
    KHESS_ERR_CONE = 3,        /* eigenvalues left the admissible cone */
    KHESS_ERR_PARSE = 4,       /* malformed expression or text */
    KHESS_ERR_HYPOTHESIS = 5,  /* a hypothesis of an estimate does not hold */
    KHESS_ERR_IO = 6,
    KHESS_ERR_NULL = 7,        /* null handle or output pointer */
    KHESS_ERR_INTERNAL = 8
} khess_status;

typedef struct khess_manifold khess_manifold;
typedef struct khess_field khess_field;
typedef struct khess_equation khess_equation;
typedef struct khess_solve_report khess_solve_report;
typedef struct khess_estimate khess_estimate;

const char* khess_last_error(void);
const char* khess_status_name(khess_status status);
void khess_string_free(char* s);

/* Symmetric-function batteries. kind is "sigma_k_root", "quotient" or
 * "linear_comb_root". text receives the condition table. */
khess_status khess_symcheck(const char* kind, int n, int k, int l, double t, double s, int samples,
                            uint64_t seed, char** text, int* all_passed);

/* Charts. kind is "torus", "domain" or "sphere"; active = 0 means all axes. */
khess_status khess_manifold_create(const char* kind, int n, int N, double L, double rho, int active,
                                   khess_manifold** out);
void khess_manifold_free(khess_manifold* m);
long khess_manifold_node_count(const khess_manifold* m);

/* Fields. */
khess_status khess_field_from_expression(const khess_manifold* m, const char* expr, khess_field** out);
khess_status khess_field_read(const char* path, khess_field** out);
khess_status khess_field_write(const khess_field* f, const char* path);
/* u + amplitude * smooth noise (unit C^2 size, zero on Dirichlet boundaries). */
khess_status khess_field_add_noise(const khess_field* f, double amplitude, uint64_t seed, khess_field** out);
khess_status khess_field_max_difference(const khess_field* a, const khess_field* b, double* out);
void khess_field_free(khess_field* f);

/* Equations. Parameters not used by a preset are ignored. */
typedef struct {
    const char* preset;   /* schouten, lc_schouten, optics, gauss_flat, gauss_sphere, csc */
    int k, l;             /* operator degrees (schouten, lc_schouten, csc) */
    double t, s, c0;      /* lc_schouten weights and the bound t + n s <= c0 */
    int sign;             /* lc_schouten: +1 for f0 exp(-2u), -1 for f0 exp(2u) */
    const char* f0;       /* schouten, lc_schouten */
    const char* nu;       /* optics */
    const char* phi;      /* optics, in t1..t(n+1) */
    const char* kappa;    /* gauss_flat, gauss_sphere */
    const char* op;       /* csc: sigma_k_root, quotient, linear_comb_root */
    double a;             /* csc */
    const char* f;        /* csc, in x and z */
    const char* h;        /* csc, in p and pp */
} khess_equation_params;

khess_equation_params khess_equation_params_default(void);
khess_status khess_equation_create(const khess_manifold* m, const khess_equation_params* p, khess_equation** out);
/* Replaces f so that u_star solves the equation. analytic != 0 evaluates f in
 * closed form, otherwise from the discrete derivatives of u_star. */
khess_status khess_equation_manufacture(const khess_equation* e, const char* u_star, int analytic, double margin,
                                        khess_equation** out);
khess_status khess_equation_residual(const khess_equation* e, const khess_field* u, double* max_abs);
void khess_equation_free(khess_equation* e);

/* Solver. */
typedef struct {
    int max_iters;
    double residual_tol;
    double backtrack;
    double min_step;
    double cone_margin;
    const char* linear_solver; /* "direct" or "iterative" */
    double iterative_tol;
    int iterative_max_iters;
    uint64_t seed;
} khess_solve_config;

khess_solve_config khess_solve_config_default(void);
khess_status khess_newton_solve(const khess_equation* e, const khess_field* u0, const khess_solve_config* cfg,
                                khess_solve_report** out);
/* Continuation along f_tau = (1 - tau) f(e0) + tau f(e1), u0 solving e0. */
khess_status khess_continuation_solve(const khess_equation* e0, const khess_equation* e1, const khess_field* u0,
                                      int steps, const khess_solve_config* cfg, khess_solve_report** out);
int khess_solve_report_converged(const khess_solve_report* r);
int khess_solve_report_iterations(const khess_solve_report* r);
double khess_solve_report_final_residual(const khess_solve_report* r);
khess_status khess_solve_report_text(const khess_solve_report* r, char** text);
khess_status khess_solve_report_final_field(const khess_solve_report* r, khess_field** out);
void khess_solve_report_free(khess_solve_report* r);

/* Estimates. tag is one of T1a, T1b, T1c, C31, C32a, C32b (T2 via
 * khess_max_principle). */
typedef struct {
    int collar;
    double solved_tol;
    double slack_tol;
    int p_samples;
    int max_audit_nodes;
    uint64_t seed;
} khess_estimate_options;

khess_estimate_options khess_estimate_options_default(void);
khess_status khess_hypothesis_audit(const khess_equation* e, const khess_field* u, const char* tag, double r,
                                    const khess_estimate_options* opts, char** text, int* all_passed);
khess_status khess_local_estimate(const khess_equation* e, const khess_field* u, double r, const char* tag,
                                  const khess_estimate_options* opts, khess_estimate** out);
/* The problem on the radius-r ball mapped to the unit ball (flat Dirichlet charts). */
khess_status khess_rescale(const khess_equation* e, const khess_field* u, double r, khess_equation** e_out,
                           khess_field** u_out);
/* has_c4 = 0 leaves the constant unset. */
khess_status khess_max_principle(const khess_equation* e, const khess_field* u, int has_c4, double c4_star,
                                 const khess_estimate_options* opts, khess_estimate** out);
/* kappa of C4* = 2 kappa scale over a calibration family of T2 reports. */
khess_status khess_fit_c4(const khess_estimate* const* calibration, size_t count, double* kappa);
khess_status khess_apply_c4(const khess_estimate* est, double kappa, khess_estimate** out);
double khess_estimate_ratio(const khess_estimate* est);
int khess_estimate_bound_holds(const khess_estimate* est);
khess_status khess_estimate_text(const khess_estimate* est, char** text);
khess_status khess_estimate_table(const khess_estimate* const* rows, size_t count, char** text);
void khess_estimate_free(khess_estimate* est);

#ifdef __cplusplus
}
#endif

#endif
