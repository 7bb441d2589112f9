#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "khess/errors.hpp"
#include "khess/solver.hpp"

using namespace khess;

namespace {

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

ScalarField perturb(const ScalarField& u, double eps, std::uint64_t seed) {
    return ScalarField(u.manifold, u.values + eps * smooth_noise(u.manifold, seed).values);
}

Expression ux(int n, const std::string& text) { return Expression::parse(text, SymbolSet{n}); }

struct Case {
    EquationSpec spec;
    std::string u;
};

std::vector<Case> cases(int N) {
    auto flat = chart(ChartKind::EuclideanDomain, 2, N, 2.0);
    auto sph = chart(ChartKind::SphereChart, 2, N, 1.0);
    auto flat4 = chart(ChartKind::EuclideanDomain, 4, N, 2.0, 2);
    return {
        {gauss_flat_spec(flat, "1"), "0.5*r2 + 0.1*sin(x1)*cos(x2)"},
        {gauss_sphere_spec(sph, "1"), "0.2*exp(-r2)"},
        {optics_spec(sph, "1 + 0.2*x1", "1 + 0.1*t1"), "0.1*cos(x1 + 0.5*x2)"},
        {schouten_quotient_spec(flat4, 2, 0, "1"), "-1 + 0.1*r2 + 0.01*sin(x1)*cos(x2)"},
        {lc_schouten_spec(flat4, 2, 1.0, 0.5, -1, "1"), "-1 + 0.25*r2 + 0.05*sin(x1)"},
        {csc_spec(sph, OperatorSpec::sigma_k_root(2, 2), 0.3, "exp(-z)", "1 + 0.1*pp"),
         "0.1*sin(x1)*cos(x2)"},
    };
}

}  // namespace

TEST_CASE("linear solver names") {
    CHECK(linear_solver_from_string("direct") == LinearSolverKind::DirectSparse);
    CHECK(to_string(LinearSolverKind::Iterative) == "iterative");
    CHECK_THROWS_AS(linear_solver_from_string("cg"), DomainError);
}

TEST_CASE("Jacobian matches central differences of the residual") {
    for (const Case& c : cases(8)) {
        CAPTURE(c.spec.preset);
        const EquationSpec s = manufacture(c.spec, ux(c.spec.n(), c.u), ManufactureMode::Discrete);
        const ScalarField u = perturb(sample(s.manifold, c.u), 0.1, 7);
        const Linearization lin = linearize(s, u);
        const Eigen::MatrixXd J(lin.jacobian);
        const double eps = 1e-6;
        double worst = 0.0;
        for (std::size_t k = 0; k < lin.unknowns.size(); k += 3) {
            ScalarField up = u, dn = u;
            up.values[lin.unknowns[k]] += eps;
            dn.values[lin.unknowns[k]] -= eps;
            const Eigen::VectorXd rp = residual(s, up).values, rm = residual(s, dn).values;
            for (std::size_t i = 0; i < lin.unknowns.size(); ++i) {
                const double fd = (rp[lin.unknowns[i]] - rm[lin.unknowns[i]]) / (2 * eps);
                worst = std::max(worst, std::abs(fd - J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))) /
                                            (1.0 + std::abs(fd)));
            }
        }
        CHECK(worst < 1e-5);
        CHECK(lin.min_ellipticity > 0.0);
        CHECK(lin.residual.cwiseAbs().maxCoeff() ==
              doctest::Approx(residual(s, u).values.cwiseAbs().maxCoeff()).epsilon(1e-14));
    }
}

TEST_CASE("sigma_1 principal part is the Laplacian over n") {
    auto m = chart(ChartKind::FlatTorus, 2, 8, 2.0 * M_PI);
    EquationSpec s;
    s.op = OperatorSpec::sigma_k_root(2, 1);
    s.manifold = m;
    s.B = TensorTerm{TensorTerm::Kind::Metric, 1.0};
    s.prepare();
    const Linearization lin = linearize(s, ScalarField::constant(m, 0.0));
    const Eigen::VectorXd v = sample(m, "sin(x1)*cos(2*x2) + 0.3*cos(x1 - x2)").values;
    const Eigen::VectorXd lap = 0.5 * (partial(*m, v, 0, 2) + partial(*m, v, 1, 2));
    CHECK((lin.jacobian * v - lap).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(lin.min_ellipticity == doctest::Approx(0.5));
}

TEST_CASE("Newton from the exact discrete solution stops at once") {
    for (const Case& c : cases(12)) {
        CAPTURE(c.spec.preset);
        const EquationSpec s = manufacture(c.spec, ux(c.spec.n(), c.u), ManufactureMode::Discrete);
        const SolveReport rep = newton_solve(s, sample(s.manifold, c.u), SolveConfig{});
        CHECK(rep.converged);
        CHECK(rep.iterations <= 1);
    }
}

TEST_CASE("Newton recovers the manufactured state from noise") {
    for (LinearSolverKind kind : {LinearSolverKind::DirectSparse, LinearSolverKind::Iterative}) {
        for (const Case& c : cases(12)) {
            CAPTURE(c.spec.preset);
            CAPTURE(to_string(kind));
            const EquationSpec s = manufacture(c.spec, ux(c.spec.n(), c.u), ManufactureMode::Discrete);
            const ScalarField exact = sample(s.manifold, c.u);
            SolveConfig cfg;
            cfg.linear_solver = kind;
            const SolveReport rep = newton_solve(s, perturb(exact, 0.1, 3), cfg);
            CHECK(rep.converged);
            CHECK(rep.residual_history.back() <= cfg.residual_tol);
            CHECK(rep.min_cone_margin_seen >= cfg.cone_margin);
            for (std::size_t i = 1; i < rep.residual_history.size(); ++i)
                CHECK(rep.residual_history[i] < rep.residual_history[i - 1]);
            CHECK((rep.final_u.values - exact.values).cwiseAbs().maxCoeff() < 1e-8);
        }
    }
}

TEST_CASE("initial states off the cone are rejected") {
    auto m = chart(ChartKind::EuclideanDomain, 2, 8, 2.0);
    const EquationSpec s = gauss_flat_spec(m, "1");
    CHECK_THROWS_AS(newton_solve(s, sample(m, "-0.5*r2"), SolveConfig{}), ConeViolation);
    CHECK_THROWS_AS(newton_solve(s, sample(m, "0.5*x1*x1 - 0.5*x2*x2"), SolveConfig{}), ConeViolation);
    try {
        newton_solve(s, sample(m, "-0.5*r2"), SolveConfig{});
    } catch (const ConeViolation& e) {
        CHECK(e.node >= 0);
        CHECK(e.eigenvalues.size() == 2);
    }
}

TEST_CASE("unreachable right-hand sides end unconverged, not in a throw") {
    auto m = chart(ChartKind::EuclideanDomain, 2, 8, 2.0);
    const EquationSpec s = gauss_flat_spec(m, "1");
    SolveConfig cfg;
    cfg.max_iters = 1;
    cfg.residual_tol = 1e-14;
    const SolveReport rep = newton_solve(s, sample(m, "2*r2"), cfg);
    CHECK_FALSE(rep.converged);
    CHECK(!rep.status.empty());
    CHECK(rep.to_text().find("converged false") != std::string::npos);
}

TEST_CASE("continuation through a blend") {
    auto m = chart(ChartKind::SphereChart, 2, 12, 1.0);
    const EquationSpec base = optics_spec(m, "1", "1");
    const std::string start = "0.1*cos(x1 + 0.5*x2) + 0.05*cos(pi*x1)*cos(pi*x2)";
    const EquationSpec s0 = manufacture(base, ux(2, start), ManufactureMode::Discrete);
    const EquationSpec s1 = manufacture(base, ux(2, "0.1*cos(x1 + 0.5*x2)"), ManufactureMode::Discrete);
    auto family = [&](double tau) { return blend(s0, s1, tau); };
    // both states share their Dirichlet data
    const ScalarField u0 = sample(m, start);
    const ScalarField target = sample(m, "0.1*cos(x1 + 0.5*x2)");
    for (int steps : {1, 4}) {
        CAPTURE(steps);
        const SolveReport rep = continuation_solve(family, u0, steps, SolveConfig{});
        CHECK(rep.converged);
        CHECK(!rep.failed_tau);
        CHECK((rep.final_u.values - target.values).cwiseAbs().maxCoeff() < 1e-8);
    }
    CHECK_THROWS_AS(continuation_solve(family, u0, 0, SolveConfig{}), DomainError);
}

TEST_CASE("discrete solutions converge to the analytic one at high order") {
    auto err = [](int N) {
        auto m = chart(ChartKind::SphereChart, 2, N, 1.0);
        const std::string u = "0.1*cos(x1 + 0.5*x2) + 0.05*x1*x2";
        const EquationSpec s =
            manufacture(optics_spec(m, "1 + 0.2*x1", "1 + 0.1*t1"), ux(2, u), ManufactureMode::Analytic);
        const ScalarField exact = sample(m, u);
        const SolveReport rep = newton_solve(s, perturb(exact, 0.1, 11), SolveConfig{});
        REQUIRE(rep.converged);
        return (rep.final_u.values - exact.values).cwiseAbs().maxCoeff();
    };
    const double e16 = err(16), e32 = err(32);
    CAPTURE(e16);
    CAPTURE(e32);
    CHECK(std::log2(e16 / e32) >= 3.0);
}

TEST_CASE("smooth noise is normalized, seeded and vanishes on the boundary") {
    auto m = chart(ChartKind::EuclideanDomain, 2, 10, 2.0);
    const ScalarField a = smooth_noise(m, 5), b = smooth_noise(m, 5), c = smooth_noise(m, 6);
    double c2 = a.values.cwiseAbs().maxCoeff();
    for (int i = 0; i < 2; ++i) {
        c2 = std::max(c2, partial(*m, a.values, i, 1).cwiseAbs().maxCoeff());
        c2 = std::max(c2, partial(*m, a.values, i, 2).cwiseAbs().maxCoeff());
    }
    c2 = std::max(c2, partial2(*m, a.values, 0, 1).cwiseAbs().maxCoeff());
    CHECK(c2 == doctest::Approx(1.0));
    CHECK(a.values.cwiseAbs().maxCoeff() > 0.01);
    CHECK((a.values - b.values).norm() == 0.0);
    CHECK((a.values - c.values).norm() > 0.0);
    for (long node = 0; node < m->node_count(); ++node)
        if (m->is_boundary(node)) CHECK(a.values[node] == 0.0);
}
