// Acceptance run: one PASS/FAIL line per criterion. Exit status 0 iff all pass.
// Usage: acceptance <path to the khess CLI> <scratch directory>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "khess/errors.hpp"
#include "khess/estimates.hpp"
#include "khess/solver.hpp"

using namespace khess;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

ManifoldPtr chart(ChartKind kind, int n, int N, double L, int active = 0) {
    ChartParams p;
    p.kind = kind;
    p.n = n;
    p.N = N;
    p.L = L;
    p.active = active;
    return make_manifold(p);
}

ScalarField sample(const ManifoldPtr& m, const std::string& text) {
    const Expression e = Expression::parse(text, SymbolSet{m->n()});
    Eigen::VectorXd v(m->node_count());
    for (long node = 0; node < m->node_count(); ++node) {
        const Eigen::VectorXd x = m->coords(node);
        Bindings<double> b;
        b.x = std::span<const double>(x.data(), x.size());
        v[node] = e.eval(b);
    }
    return ScalarField(m, v);
}

Expression ux(int n, const std::string& text) { return Expression::parse(text, SymbolSet{n}); }

std::vector<OperatorSpec> all_operators(int n) {
    std::vector<OperatorSpec> out;
    for (int k = 1; k <= n; ++k) out.push_back(OperatorSpec::sigma_k_root(n, k));
    for (int k = 1; k <= n; ++k)
        for (int l = 0; l < k; ++l) out.push_back(OperatorSpec::quotient(n, k, l));
    for (int k = 1; k <= n; ++k) out.push_back(OperatorSpec::linear_comb_root(n, k, 1.0, 0.5));
    return out;
}

Eigen::MatrixXd random_orthogonal(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> z;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = z(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return qr.householderQ();
}

// 1. Euler identity and gradient-sum bound, 1e-10, 10^4 samples per operator.
Outcome euler_and_gradient_sum() {
    const auto t0 = Clock::now();
    long checked = 0, failures = 0, operators = 0;
    double worst_euler = 0.0, worst_gsum = 0.0;
    for (int n = 2; n <= 6; ++n) {
        for (const OperatorSpec& op : all_operators(n)) {
            ++operators;
            ConeSampler sampler(op.cone, n, 1000 + operators);
            for (int s = 0; s < 10000; ++s) {
                const EigenVector lam = sampler.next();
                const double f = evaluate(op, lam);
                const Eigen::VectorXd g = gradient(op, lam);
                const double euler = std::abs(lam.values().dot(g) - f) / std::max(1.0, std::abs(f));
                const double gsum = 1.0 - g.sum();
                worst_euler = std::max(worst_euler, euler);
                worst_gsum = std::max(worst_gsum, gsum);
                if (euler > 1e-10 || gsum > 1e-10) ++failures;
                ++checked;
            }
        }
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = failures == 0 && secs < 10.0;
    o.detail = std::to_string(operators) + " operators, " + std::to_string(checked) + " samples, " +
               std::to_string(failures) + " failures, worst Euler " + fmt("%.2e", worst_euler) +
               ", worst 1 - sum dF " + fmt("%.2e", worst_gsum) + ", " + fmt("%.2f", secs) + " s (limit 10 s)";
    return o;
}

// 2. (S0)-(S2) for quotients and linear combinations; condition (A) for sigma_k roots.
Outcome structure_conditions() {
    long items = 0, failed = 0, operators = 0;
    std::string first;
    auto absorb = [&](const ConditionReport& rep) {
        for (const ConditionItem& it : rep.items) {
            ++items;
            if (!it.passed) {
                ++failed;
                if (first.empty()) first = rep.subject + ": " + it.name;
            }
        }
    };
    for (int n = 2; n <= 6; ++n) {
        for (int k = 1; k <= n; ++k) {
            for (int l = 0; l < k; ++l) {
                const OperatorSpec op = OperatorSpec::quotient(n, k, l);
                absorb(check_structure(op, ConeSampler(op.cone, n, 20 + 7 * n + k + 100 * l).draw(1000)));
                ++operators;
            }
            const OperatorSpec lc = OperatorSpec::linear_comb_root(n, k, 1.0, 0.5);
            absorb(check_structure(lc, ConeSampler(lc.cone, n, 40 + 7 * n + k).draw(1000)));
            ++operators;
            if (k >= 2) {
                const OperatorSpec sk = OperatorSpec::sigma_k_root(n, k);
                const bool constants = sk.condition_a && std::abs(sk.condition_a->mu0 - std::pow(n, -1.0 / (k - 1))) < 1e-15 &&
                                       std::abs(sk.condition_a->mu1 - 1.0 / (k - 1)) < 1e-15;
                ++items;
                if (!constants) {
                    ++failed;
                    if (first.empty()) first = sk.describe() + ": condition (A) constants";
                }
                absorb(check_condition_a(sk, ConeSampler(sk.cone, n, 60 + 7 * n + k).draw(1000)));
                ++operators;
            }
        }
    }
    Outcome o;
    o.pass = failed == 0;
    o.detail = std::to_string(operators) + " operators x 1000 samples, " + std::to_string(items) + " items, " +
               std::to_string(failed) + " failed" + (first.empty() ? "" : " (first: " + first + ")");
    return o;
}

// 3. Newton-MacLaurin: strict off the ray of e, equality (1e-10 relative) on it.
Outcome newton_maclaurin() {
    long checked = 0, violations = 0, equality_off_ray = 0, ray_failures = 0;
    double worst_ray = 0.0;
    for (int n = 2; n <= 6; ++n) {
        for (int k = 2; k <= n; ++k) {
            ConeSampler sampler(ConeSpec::positive(k), n, 300 + 10 * n + k);
            for (int s = 0; s < 10000; ++s) {
                const EigenVector lam = sampler.next();
                for (int m = 1; m < k; ++m) {
                    const auto [lhs, rhs] = newton_maclaurin_sides(lam, k, m);
                    ++checked;
                    const double gap = (rhs - lhs) / std::abs(rhs);
                    if (gap < -1e-10) ++violations;
                    else if (gap <= 1e-10) ++equality_off_ray;
                }
            }
            for (double theta : {1e-3, 0.5, 1.0, 7.0, 1e3}) {
                const EigenVector ray(Eigen::VectorXd::Constant(n, theta));
                for (int m = 1; m < k; ++m) {
                    const auto [lhs, rhs] = newton_maclaurin_sides(ray, k, m);
                    const double gap = std::abs(rhs - lhs) / std::abs(rhs);
                    worst_ray = std::max(worst_ray, gap);
                    if (gap > 1e-10) ++ray_failures;
                }
            }
        }
    }
    Outcome o;
    o.pass = violations == 0 && equality_off_ray == 0 && ray_failures == 0;
    o.detail = std::to_string(checked) + " sampled inequalities, " + std::to_string(violations) + " violated, " +
               std::to_string(equality_off_ray) + " at equality off the ray of e; ray relative gap max " +
               fmt("%.1e", worst_ray);
    return o;
}

// 4. -(n-2)/n sigma_1 <= lambda_i <= sigma_1 on Gamma_2.
Outcome gamma2_bound() {
    long checked = 0, failures = 0;
    for (int n = 2; n <= 6; ++n) {
        ConeSampler sampler(ConeSpec::positive(2), n, 400 + n);
        for (int s = 0; s < 10000; ++s) {
            ++checked;
            if (!gamma2_eigen_bound(sampler.next())) ++failures;
        }
    }
    return {failures == 0, std::to_string(checked) + " samples over n = 2..6, " + std::to_string(failures) + " failures"};
}

// 5. F^{ij} against central differences along each symmetric basis direction.
Outcome matrix_derivative_vs_fd() {
    const int n = 4;
    const std::vector<OperatorSpec> ops = {OperatorSpec::sigma_k_root(n, 2), OperatorSpec::quotient(n, 3, 1),
                                           OperatorSpec::linear_comb_root(n, 2, 1.0, 0.5)};
    std::mt19937_64 rng(55);
    double worst = 0.0;
    int matrices = 0;
    for (const OperatorSpec& op : ops) {
        ConeSampler sampler(op.cone, n, 500 + matrices);
        for (int s = 0; s < 100; ++s) {
            Eigen::VectorXd lam = sampler.next().values();
            if (s == 0) lam << 1.3, 1.3, 0.7, 2.1;  // repeated eigenvalue
            const Eigen::MatrixXd q = random_orthogonal(n, rng);
            const Eigen::MatrixXd w = q * lam.asDiagonal() * q.transpose();
            const MatrixDerivative md = matrix_derivative(op, w);
            const double scale = md.dF.cwiseAbs().maxCoeff();
            for (int i = 0; i < n; ++i) {
                for (int j = i; j < n; ++j) {
                    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
                    e(i, j) = e(j, i) = 1.0;
                    auto spectrum = [&](double step) {
                        return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(w + step * e).eigenvalues().eval();
                    };
                    // fourth-order central stencil, shrunk until it stays inside the cone
                    double h = 1e-5 * (1.0 + lam.cwiseAbs().maxCoeff());
                    while (!(in_cone(spectrum(2 * h), op.cone) && in_cone(spectrum(-2 * h), op.cone))) h *= 0.5;
                    const double fd = (-evaluate(op, spectrum(2 * h)) + 8 * evaluate(op, spectrum(h)) -
                                       8 * evaluate(op, spectrum(-h)) + evaluate(op, spectrum(-2 * h))) /
                                      (12 * h);
                    const double an = i == j ? md.dF(i, i) : md.dF(i, j) + md.dF(j, i);
                    worst = std::max(worst, std::abs(fd - an) / scale);
                }
            }
            ++matrices;
        }
    }
    return {worst < 1e-6, std::to_string(matrices) + " matrices (3 operator kinds, one repeated eigenvalue each), max relative error " +
                              fmt("%.2e", worst) + " (limit 1e-6)"};
}

// 6. Third-order commutation residual on the sphere chart.
Outcome commutation() {
    std::vector<double> r3;
    for (int N : {16, 32, 64}) {
        auto m = chart(ChartKind::SphereChart, 2, N, 1.0);
        r3.push_back(commutation_residual(sample(m, "0.3*exp(-2*r2)*(1 + 0.5*x1) + 0.1*sin(x2 + 0.3)")).r3);
    }
    const double f1 = r3[0] / r3[1], f2 = r3[1] / r3[2];
    return {f1 >= 8.0 && f2 >= 8.0, "r3 = " + fmt("%.3e", r3[0]) + ", " + fmt("%.3e", r3[1]) + ", " + fmt("%.3e", r3[2]) +
                                        "; reduction factors " + fmt("%.1f", f1) + ", " + fmt("%.1f", f2) + " (limit 8)"};
}

// 7. Manufactured solves from u* + 0.1 noise and their convergence order.
Outcome manufactured_solves() {
    struct Case {
        std::string name;
        std::function<EquationSpec(int)> spec;
        std::string u;
    };
    const std::vector<Case> cases = {
        {"schouten k=2 n=4",
         [](int N) { return schouten_quotient_spec(chart(ChartKind::EuclideanDomain, 4, N, 2.0, 2), 2, 0, "1"); },
         "-2 + 0.1*r2 + 0.01*sin(x1)*cos(x2)"},
        {"optics n=2", [](int N) { return optics_spec(chart(ChartKind::SphereChart, 2, N, 1.0), "1", "1"); },
         "0.1*cos(x1 + 0.5*x2)"},
        {"gauss flat n=2", [](int N) { return gauss_flat_spec(chart(ChartKind::EuclideanDomain, 2, N, 2.0), "1"); },
         "0.5*r2 + 0.1*sin(x1)*cos(x2)"},
        {"gauss sphere n=2", [](int N) { return gauss_sphere_spec(chart(ChartKind::SphereChart, 2, N, 1.0), "1"); },
         "0.2*exp(-r2)"},
    };
    const auto t0 = Clock::now();
    bool pass = true;
    std::string detail;
    for (const Case& c : cases) {
        std::vector<double> err;
        bool ok32 = false;
        int iters = 0;
        double res = 0.0;
        for (int N : {16, 32, 64}) {
            const EquationSpec s = manufacture(c.spec(N), ux(c.spec(N).n(), c.u), ManufactureMode::Analytic);
            const ScalarField star = sample(s.manifold, c.u);
            const ScalarField u0(s.manifold, star.values + 0.1 * smooth_noise(s.manifold, 1).values);
            try {
                const SolveReport rep = newton_solve(s, u0, SolveConfig{});
                err.push_back((rep.final_u.values - star.values).cwiseAbs().maxCoeff());
                if (N == 32) {
                    iters = rep.iterations;
                    res = rep.residual_history.back();
                    ok32 = rep.converged && res < 1e-8 && iters <= 25;
                }
            } catch (const Error& e) {
                err.push_back(INFINITY);
                if (N == 32) ok32 = false;
            }
        }
        const double p1 = std::log2(err[0] / err[1]), p2 = std::log2(err[1] / err[2]);
        const bool ok = ok32 && p1 >= 3.0 && p2 >= 3.0;
        pass = pass && ok;
        detail += "; " + c.name + ": N=32 " + std::to_string(iters) + " it, res " + fmt("%.1e", res) + ", order " +
                  fmt("%.2f", p1) + "/" + fmt("%.2f", p2);
    }
    const double secs = seconds_since(t0);
    pass = pass && secs < 300.0;
    return {pass, fmt("%.1f s", secs) + detail};
}

// 8. C31 ratio on the Schouten problem rescaled to the unit ball.
Outcome schouten_scaling() {
    auto m = chart(ChartKind::EuclideanDomain, 4, 64, 2.0, 2);
    const std::string u = "-2 + 0.1*r2 + 0.01*sin(x1)*cos(x2)";
    const EquationSpec s = manufacture(schouten_quotient_spec(m, 2, 0, "1"), ux(4, u), ManufactureMode::Analytic);
    const ScalarField star = sample(m, u);
    const SolveReport sol = newton_solve(s, ScalarField(m, star.values + 0.1 * smooth_noise(m, 1).values), SolveConfig{});
    if (!sol.converged) return {false, "Schouten solve did not converge"};
    double lo = INFINITY, hi = 0.0;
    std::string ratios;
    for (double r : {1.0, 0.5, 0.25}) {
        const ScaledProblem sp = rescale_problem(s, sol.final_u, r);
        const EstimateReport rep = local_estimate_report(sp.spec, sp.u, 1.0, CaseTag::C31);
        lo = std::min(lo, rep.ratio);
        hi = std::max(hi, rep.ratio);
        ratios += (ratios.empty() ? "" : ", ") + fmt("%.4e", rep.ratio);
    }
    const double spread = hi / lo;
    return {lo > 0 && spread < 2.0, "ratios " + ratios + " for r = 1, 1/2, 1/4; spread " + fmt("%.3f", spread) + " (limit 2)"};
}

// 9. C31 ratio against 1/c_inf over a family degenerating inside B_1.
Outcome cinf_regression() {
    auto m = chart(ChartKind::EuclideanDomain, 4, 64, 2.0, 2);
    const EquationSpec base = schouten_quotient_spec(m, 2, 0, "1");
    auto field = [](double t) {
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "-2 + 0.1*r2 + 0.01*sin(x1)*cos(x2) + %.17g*exp(-((x1 - 0.75)^2 + x2^2)/0.0144)", t);
        return std::string(buf);
    };
    auto report = [&](double t) -> std::optional<EstimateReport> {
        try {
            const std::string u = field(t);
            const EquationSpec s = manufacture(base, ux(4, u), ManufactureMode::Discrete, 1e-9);
            return local_estimate_report(s, sample(m, u), 1.0, CaseTag::C31);
        } catch (const ConeViolation&) {
            return std::nullopt;
        }
    };
    // largest admissible dip depth
    double in = 0.0, out = 0.01;
    for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (in + out);
        (report(mid) ? in : out) = mid;
    }
    const double c0 = report(0.0)->c_inf;
    std::vector<double> x, y;
    for (int j = 0; j < 10; ++j) {
        const double target = c0 * std::pow(0.009, j / 9.0);
        double lo = 0.0, hi = in;
        std::optional<EstimateReport> best = report(0.0);
        for (int it = 0; it < 45 && j > 0; ++it) {
            const double mid = 0.5 * (lo + hi);
            std::optional<EstimateReport> r = report(mid);
            if (!r) {
                hi = mid;
                continue;
            }
            best = r;
            (r->c_inf > target ? lo : hi) = mid;
        }
        x.push_back(1.0 / best->c_inf);
        y.push_back(best->ratio);
    }
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    const double slope = sxy / sxx;
    const double span = *std::max_element(x.begin(), x.end()) / *std::min_element(x.begin(), x.end());
    const double rel = std::abs(slope) * (*std::max_element(x.begin(), x.end()) - *std::min_element(x.begin(), x.end())) / my;
    return {span >= 100.0 && rel <= 0.05,
            "c_inf from " + fmt("%.3e", 1.0 / *std::min_element(x.begin(), x.end())) + " to " +
                fmt("%.3e", 1.0 / *std::max_element(x.begin(), x.end())) + " (span " + fmt("%.0f", span) +
                "x), slope " + fmt("%.3e", slope) + ", slope x range / mean ratio " + fmt("%.4f", rel) + " (limit 0.05)"};
}

// 10. Maximum principle: constant Hessian and a steepening family with fitted C4*.
Outcome max_principle() {
    auto m = chart(ChartKind::EuclideanDomain, 2, 32, 2.0);
    const EquationSpec flat = manufacture(gauss_flat_spec(m, "1"), ux(2, "0.5*r2"), ManufactureMode::Analytic);
    const EstimateReport c = max_principle_report(flat, sample(m, "0.5*r2"));
    const bool equal = std::abs(c.interior_sup - c.boundary_sup) <= 1e-12 * c.boundary_sup;

    auto report = [&](double t) {
        const std::string u = "0.5*r2 + " + fmt("%.17g", t) + "*exp(-4*r2)";
        const EquationSpec s = manufacture(gauss_flat_spec(m, "1"), ux(2, u), ManufactureMode::Analytic);
        const SolveReport sol = newton_solve(s, sample(m, u), SolveConfig{});
        if (!sol.converged) throw DomainError("steepening member t = " + fmt("%g", t) + " did not converge");
        return max_principle_report(s, sol.final_u);
    };
    const C4Fit fit = fit_c4({report(0.02), report(0.04)});
    int held = 0;
    std::string margins;
    for (double t : {0.01, 0.03, 0.05, 0.06, 0.07}) {
        const EstimateReport r = apply_c4(report(t), fit);
        held += r.bound_holds ? 1 : 0;
        margins += (margins.empty() ? "" : ", ") + fmt("%.3f", r.interior_sup / std::max(r.boundary_sup, *r.c4_star));
    }
    return {equal && held == 5, "constant Hessian interior " + fmt("%.15g", c.interior_sup) + " vs boundary " +
                                    fmt("%.15g", c.boundary_sup) + "; kappa " + fmt("%.4f", fit.kappa) + " from t = 0.02, 0.04; " +
                                    std::to_string(held) + "/5 members bounded, interior / bound = " + margins};
}

// 11. |T| = 1 and the constant-phi optics audit with Lambda = M = 1.
Outcome optics() {
    std::mt19937_64 rng(1111);
    std::uniform_real_distribution<double> xs(-0.5, 0.5);
    std::normal_distribution<double> ps(0.0, 3.0);
    double worst = 0.0;
    for (int n : {2, 3}) {
        auto m = chart(ChartKind::SphereChart, n, 8, 1.0);
        for (int s = 0; s < 5000; ++s) {
            Eigen::VectorXd x(n), p(n);
            for (int i = 0; i < n; ++i) {
                x[i] = xs(rng);
                p[i] = ps(rng);
            }
            worst = std::max(worst, std::abs(optics_direction(*m, x, p).norm() - 1.0));
        }
    }
    auto m = chart(ChartKind::SphereChart, 3, 12, 1.0);
    const std::string u = "0.1*cos(x1 + 0.5*x2 - 0.3*x3)";
    const EquationSpec s = manufacture(optics_spec(m, "1", "2"), ux(3, u), ManufactureMode::Discrete);
    Bindings<double> b;
    const double lambda = s.Lambda ? s.Lambda->eval(b) : NAN;
    const ConditionReport a = hypothesis_audit(s, sample(m, u), CaseTag::T1b, 0.9);
    std::string failed;
    for (const ConditionItem& it : a.items)
        if (!it.passed) failed += " " + it.name + ";";
    const bool pass = worst <= 1e-12 && lambda == 1.0 && s.M && *s.M == 1.0 && a.all_passed();
    return {pass, "10000 (x, p) samples, max | |T| - 1 | " + fmt("%.1e", worst) + "; audit (n = 3) Lambda " +
                      fmt("%g", lambda) + ", M " + fmt("%g", s.M ? *s.M : NAN) + ", " + std::to_string(a.items.size()) +
                      " items" + (failed.empty() ? " all pass" : ", failed:" + failed)};
}

std::string strip_first_line(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    const auto nl = text.find('\n');
    return nl == std::string::npos ? "" : text.substr(nl + 1);
}

// 12. Two CLI runs with the same config and seed give identical tables.
Outcome determinism(const std::string& cli, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const std::vector<std::pair<std::string, std::string>> runs = {
        {"estimate --preset schouten --radii 1,0.5,0.25 --seed 3", ".table.csv"},
        {"solve --preset gauss_flat --N 24 --seed 5", ".report.txt"},
        {"symcheck --n 4 --k 3 --samples 300 --seed 7", ".report.txt"},
    };
    int identical = 0;
    std::string bad;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        std::string text[2];
        bool ran = true;
        for (int rep = 0; rep < 2; ++rep) {
            const std::string prefix = (dir / ("run" + std::to_string(i) + "_" + std::to_string(rep))).string();
            const std::string cmd = "\"" + cli + "\" " + runs[i].first + " --out \"" + prefix + "\" > /dev/null";
            ran = ran && std::system(cmd.c_str()) == 0;
            text[rep] = strip_first_line(prefix + runs[i].second);
        }
        if (ran && !text[0].empty() && text[0] == text[1]) ++identical;
        else bad += " [" + runs[i].first + "]";
    }
    return {identical == static_cast<int>(runs.size()),
            std::to_string(identical) + "/" + std::to_string(runs.size()) +
                " commands byte-identical after the timestamp line" + (bad.empty() ? "" : "; differing:" + bad)};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: acceptance <khess cli> <scratch dir>\n";
        return 2;
    }
    const std::string cli = argv[1];
    const std::filesystem::path dir = argv[2];

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"symmetric-function identities", euler_and_gradient_sum},
        {"structure conditions", structure_conditions},
        {"Newton-MacLaurin inequality", newton_maclaurin},
        {"Gamma_2 eigenvalue bound", gamma2_bound},
        {"F^ij against finite differences", matrix_derivative_vs_fd},
        {"commutation residual on the sphere chart", commutation},
        {"manufactured-solution solves", manufactured_solves},
        {"Schouten scaling of the local estimate", schouten_scaling},
        {"independence of c_inf", cinf_regression},
        {"Hessian maximum principle", max_principle},
        {"optics direction map and audit", optics},
        {"CLI determinism", [&] { return determinism(cli, dir); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << "criterion " << (i + 1) << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ": "
                  << o.detail << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
