#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "khess/equations.hpp"
#include "khess/report.hpp"

namespace khess {

/// Which estimate a report measures.
///   T1a, T1b, T1c   local Hessian estimate, cases (a), (b), (c)
///   C31             Schouten quotient,           bound r^-2 + sup e^(-2u)
///   C32a, C32b      linear-combination Schouten, bound 1 + sup e^(-2u) / 1 + sup e^(2u)
///   T2              Hessian maximum principle for the constant-curvature form
enum class CaseTag { T1a, T1b, T1c, C31, C32a, C32b, T2 };

std::string to_string(CaseTag tag);
CaseTag case_tag_from_string(const std::string& name);

struct EstimateOptions {
    /// Nodes closer than this many grid steps to a Dirichlet boundary are left
    /// out of interior suprema, residual checks and cone audits.
    int collar = 3;
    /// Largest residual accepted on the audited nodes of B_r.
    double solved_tol = 1e-8;
    /// Relative tolerance of the non-strict comparisons in audits.
    double slack_tol = 1e-12;
    /// p-samples per audited node (plus p = 0 and p = du).
    int p_samples = 32;
    /// Audited nodes are thinned to at most this many.
    int max_audit_nodes = 256;
    std::uint64_t seed = 1;
};

struct EstimateReport {
    CaseTag case_tag = CaseTag::T1a;
    double r = 0.0;
    /// sup over B_{r/2} of |du|^2 + |nabla^2 u| (|nabla^2 u| alone for T1c and T2).
    double quantity = 0.0;
    double bound_expr = 0.0;
    /// quantity / bound_expr, 0 when both vanish.
    double ratio = 0.0;
    long argmax_node = -1;
    long measured_nodes = 0;
    int collar = 0;

    std::optional<double> delta1, delta2;
    double c_inf = 0.0, c_sup = 0.0, e_sup = 0.0;
    double sup_grad = 0.0;
    /// sup over B_r of e^(-2u) (C31, C32a) or e^(2u) (C32b).
    double sup_exp = 0.0;

    // maximum principle
    double interior_sup = 0.0;
    double boundary_sup = 0.0;
    double c1_norm = 0.0;
    double epsilon = 0.0;  ///< sampled floor of h_pp against g^-1
    std::optional<double> c4_star;
    bool bound_holds = true;

    std::string to_text() const;
};

/// Checks every stated hypothesis of the tagged result on the state (restricted
/// to the geodesic ball B_r about the chart origin). Never throws on a failed
/// hypothesis; each item carries its worst slack and a witness.
ConditionReport hypothesis_audit(const EquationSpec& spec, const ScalarField& u, CaseTag tag,
                                 double r = std::numeric_limits<double>::infinity(),
                                 const EstimateOptions& opts = {});

/// Measured supremum over B_{r/2} against the bound expression of the tag:
///   T1a  r^-2 + c_sup
///   T1b  r^-2 + c_sup + 1 / c_inf
///   T1c  r^-2 + c_sup e_sup + sup |du|^2
///   C31  r^-2 + sup e^(-2u)
///   C32a 1 + sup e^(-2u),  C32b 1 + sup e^(2u)
/// Throws HypothesisError naming the first failed hypothesis and DomainError
/// when u does not solve the equation on B_r.
EstimateReport local_estimate_report(const EquationSpec& spec, const ScalarField& u, double r, CaseTag tag,
                                     const EstimateOptions& opts = {});

/// Interior (collar excluded) and boundary suprema of |nabla^2 u| over the whole
/// chart for an equation in constant-curvature form. With c4_star the report
/// flags interior <= max(boundary, c4_star).
EstimateReport max_principle_report(const EquationSpec& spec, const ScalarField& u,
                                    std::optional<double> c4_star = std::nullopt,
                                    const EstimateOptions& opts = {});

/// Scale of the fitted maximum-principle constant:
///   (c_sup / c_inf) (e_sup / epsilon) (1 + |u|_C1).
double c4_scale(const EstimateReport& report);

/// C4* = 2 kappa c4_scale, kappa the largest interior_sup / c4_scale over a
/// calibration family.
struct C4Fit {
    double kappa = 0.0;
    double c4_star(const EstimateReport& report) const { return 2.0 * kappa * c4_scale(report); }
};
C4Fit fit_c4(const std::vector<EstimateReport>& calibration);
/// Sets c4_star, the bound and the flag of a maximum-principle report.
EstimateReport apply_c4(EstimateReport report, const C4Fit& fit);

/// A flat Dirichlet problem viewed on the unit ball: u~(y) = u(r y) - ln r on a
/// chart of side 2 with the same operator and f~ sampled so that u~ solves the
/// rescaled equation wherever u solves the original one.
struct ScaledProblem {
    EquationSpec spec;
    ScalarField u;
    double r = 1.0;
};
ScaledProblem rescale_problem(const EquationSpec& spec, const ScalarField& u, double r);

/// Flat table, one row per report, fixed column order.
std::string estimate_table(const std::vector<EstimateReport>& reports);

}  // namespace khess
