#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "khess/errors.hpp"
#include "khess/estimates.hpp"
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

Expression ux(int n, const std::string& text) { return Expression::parse(text, SymbolSet{n}); }

const std::string kSchoutenU = "-1 + 0.1*r2 + 0.01*sin(x1)*cos(x2)";

}  // namespace

TEST_CASE("case tag names round trip") {
    for (CaseTag t : {CaseTag::T1a, CaseTag::T1b, CaseTag::T1c, CaseTag::C31, CaseTag::C32a, CaseTag::C32b,
                      CaseTag::T2})
        CHECK(case_tag_from_string(to_string(t)) == t);
    CHECK_THROWS_AS(case_tag_from_string("T3"), DomainError);
}

TEST_CASE("constant state on the round sphere has zero quantity") {
    // on a flat chart a constant u gives W = 0, outside the cone; the round sphere has W = g / 2
    auto m = chart(ChartKind::SphereChart, 3, 12, 1.0);
    const EquationSpec s = schouten_quotient_spec(m, 2, 0, "0.5");
    const ScalarField u = ScalarField::constant(m, 0.0);
    REQUIRE(residual(s, u).values.cwiseAbs().maxCoeff() < 1e-10);
    const EstimateReport rep = local_estimate_report(s, u, 0.8, CaseTag::C31);
    CHECK(rep.quantity == 0.0);
    CHECK(rep.ratio == 0.0);
    CHECK(rep.bound_expr == doctest::Approx(1 / 0.64 + 1.0));
    CHECK(rep.sup_exp == 1.0);
    CHECK(rep.measured_nodes > 0);
}

TEST_CASE("Schouten preset passes the case (a) audit") {
    auto m = chart(ChartKind::EuclideanDomain, 4, 16, 2.0, 2);
    const EquationSpec s = manufacture(schouten_quotient_spec(m, 2, 0, "1"), ux(4, kSchoutenU), ManufactureMode::Discrete);
    const ConditionReport a = hypothesis_audit(s, sample(m, kSchoutenU), CaseTag::C31, 1.0);
    CAPTURE(a.to_text());
    CHECK(a.all_passed());
    CHECK(a.find("b < -delta1")->passed);
    CHECK(a.find("a + n b < -delta2")->passed);
    CHECK(a.find("S1 concavity (midpoint)")->passed);
    // the wrong tag is caught
    const ConditionReport b = hypothesis_audit(s, sample(m, kSchoutenU), CaseTag::C32a, 1.0);
    CHECK_FALSE(b.find("linear-combination Schouten equation")->passed);
}

TEST_CASE("b = 0 violates case (a)") {
    auto m = chart(ChartKind::EuclideanDomain, 2, 12, 2.0);
    EquationSpec s = manufacture(gauss_flat_spec(m, "1"), ux(2, "0.5*r2"), ManufactureMode::Discrete);
    s.delta1 = 0.5;
    s.delta2 = 0.5;
    const ScalarField u = sample(m, "0.5*r2");
    const ConditionReport a = hypothesis_audit(s, u, CaseTag::T1a, 1.0);
    CHECK_FALSE(a.all_passed());
    CHECK_FALSE(a.find("b < -delta1")->passed);
    try {
        local_estimate_report(s, u, 1.0, CaseTag::T1a);
        FAIL("expected a hypothesis error");
    } catch (const HypothesisError& e) {
        CHECK(std::string(e.what()).find("b < -delta1 violated") != std::string::npos);
    }
}

TEST_CASE("optics with constant phi passes case (b) with Lambda = M = 1") {
    auto m = chart(ChartKind::SphereChart, 3, 10, 1.0);
    const std::string u = "0.1*cos(x1 + 0.5*x2 - 0.3*x3)";
    const EquationSpec s = manufacture(optics_spec(m, "1", "2"), ux(3, u), ManufactureMode::Discrete);
    const ConditionReport a = hypothesis_audit(s, sample(m, u), CaseTag::T1b, 0.9);
    CAPTURE(a.to_text());
    CHECK(a.all_passed());
    CHECK(a.find("h_pp >= Lambda g^-1")->passed);
    CHECK(a.find("h_pp >= Lambda g^-1")->worst_slack == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    const EstimateReport rep = local_estimate_report(s, sample(m, u), 0.9, CaseTag::T1b);
    CHECK(rep.ratio > 0.0);
    CHECK(std::isfinite(rep.ratio));
    // non-constant phi: the case (c) hypotheses hold and case (b) does not apply
    const EquationSpec s2 = manufacture(optics_spec(m, "1", "1 + 0.1*t1"), ux(3, u), ManufactureMode::Discrete);
    CHECK_FALSE(hypothesis_audit(s2, sample(m, u), CaseTag::T1b, 0.9).find("h = h(du)")->passed);
    const ConditionReport c = hypothesis_audit(s2, sample(m, u), CaseTag::T1c, 0.9);
    CAPTURE(c.to_text());
    CHECK(c.all_passed());
    CHECK(c.find("condition (A)")->passed);
}

TEST_CASE("optics in two dimensions has delta2 = 0") {
    auto m = chart(ChartKind::SphereChart, 2, 12, 1.0);
    const std::string u = "0.1*cos(x1 + 0.5*x2)";
    const EquationSpec s = manufacture(optics_spec(m, "1", "1"), ux(2, u), ManufactureMode::Discrete);
    const ConditionReport a = hypothesis_audit(s, sample(m, u), CaseTag::T1b, 0.9);
    CHECK_FALSE(a.find("delta2 > 0")->passed);
}

TEST_CASE("unsolved states are rejected") {
    auto m = chart(ChartKind::EuclideanDomain, 4, 16, 2.0, 2);
    const EquationSpec s = manufacture(schouten_quotient_spec(m, 2, 0, "1"), ux(4, kSchoutenU), ManufactureMode::Discrete);
    CHECK_THROWS_AS(local_estimate_report(s, sample(m, "-1 + 0.11*r2"), 1.0, CaseTag::C31), DomainError);
}

TEST_CASE("rescaling the ball leaves the C31 ratio unchanged") {
    auto m = chart(ChartKind::EuclideanDomain, 4, 48, 2.0, 2);
    const EquationSpec s = manufacture(schouten_quotient_spec(m, 2, 0, "1"), ux(4, kSchoutenU), ManufactureMode::Discrete);
    const ScalarField u = sample(m, kSchoutenU);
    for (double r : {1.0, 0.5, 0.25}) {
        CAPTURE(r);
        const EstimateReport direct = local_estimate_report(s, u, r, CaseTag::C31);
        const ScaledProblem sp = rescale_problem(s, u, r);
        CHECK(sp.u.manifold->L() == 2.0);
        const EstimateReport scaled = local_estimate_report(sp.spec, sp.u, 1.0, CaseTag::C31);
        CHECK(scaled.quantity == doctest::Approx(r * r * direct.quantity).epsilon(1e-10));
        CHECK(scaled.sup_exp == doctest::Approx(r * r * direct.sup_exp).epsilon(1e-12));
        CHECK(scaled.ratio == doctest::Approx(direct.ratio).epsilon(1e-10));
        CHECK(scaled.measured_nodes == direct.measured_nodes);
    }
}

TEST_CASE("constant Hessian: interior and boundary suprema agree") {
    auto m = chart(ChartKind::EuclideanDomain, 2, 16, 2.0);
    const EquationSpec s = manufacture(gauss_flat_spec(m, "1"), ux(2, "0.5*r2"), ManufactureMode::Analytic);
    const EstimateReport rep = max_principle_report(s, sample(m, "0.5*r2"));
    CHECK(rep.interior_sup == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.boundary_sup == doctest::Approx(rep.interior_sup).epsilon(1e-12));
    CHECK(rep.epsilon == doctest::Approx(2.0).epsilon(1e-12));  // h_pp = 2 delta for n = 2
    CHECK(rep.bound_holds);
    CHECK(rep.c1_norm == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("sphere Gauss preset at u = 0 has vanishing suprema") {
    auto m = chart(ChartKind::SphereChart, 2, 12, 1.0);
    const EquationSpec s = gauss_sphere_spec(m, "1");
    const EstimateReport rep = max_principle_report(s, ScalarField::constant(m, 0.0));
    CHECK(rep.interior_sup == 0.0);
    CHECK(rep.boundary_sup == 0.0);
    CHECK(rep.ratio == 0.0);
    CHECK(rep.bound_holds);
}

TEST_CASE("maximum principle hypotheses") {
    auto m = chart(ChartKind::EuclideanDomain, 4, 12, 2.0, 2);
    const EquationSpec s = manufacture(schouten_quotient_spec(m, 2, 0, "1"), ux(4, kSchoutenU), ManufactureMode::Discrete);
    CHECK_THROWS_AS(max_principle_report(s, sample(m, kSchoutenU)), HypothesisError);
}

TEST_CASE("fitted C4* bounds a steepening family") {
    auto m = chart(ChartKind::EuclideanDomain, 2, 16, 2.0);
    auto report = [&](double t) {
        const std::string u = "0.5*r2 + " + std::to_string(t) + "*exp(-4*r2)";
        const EquationSpec s = manufacture(gauss_flat_spec(m, "1"), ux(2, u), ManufactureMode::Analytic);
        const SolveReport sol = newton_solve(s, sample(m, u), SolveConfig{});
        REQUIRE(sol.converged);
        return max_principle_report(s, sol.final_u);
    };
    const C4Fit fit = fit_c4({report(0.02), report(0.04)});
    CHECK(fit.kappa > 0);
    for (double t : {0.01, 0.03, 0.05}) {
        const EstimateReport r = apply_c4(report(t), fit);
        CAPTURE(r.to_text());
        CHECK(r.bound_holds);
        CHECK(r.c4_star.has_value());
    }
}

TEST_CASE("tables are deterministic") {
    auto m = chart(ChartKind::EuclideanDomain, 4, 16, 2.0, 2);
    const EquationSpec s = manufacture(schouten_quotient_spec(m, 2, 0, "1"), ux(4, kSchoutenU), ManufactureMode::Discrete);
    const ScalarField u = sample(m, kSchoutenU);
    std::vector<EstimateReport> a, b;
    for (double r : {1.0, 0.5}) {
        a.push_back(local_estimate_report(s, u, r, CaseTag::C31));
        b.push_back(local_estimate_report(s, u, r, CaseTag::C31));
    }
    CHECK(estimate_table(a) == estimate_table(b));
    CHECK(estimate_table(a).rfind("case,r,quantity,bound,ratio", 0) == 0);
    CHECK(a[0].to_text().find("case C31") == 0);
}
