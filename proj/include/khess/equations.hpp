#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "khess/expr.hpp"
#include "khess/geometry.hpp"
#include "khess/jet.hpp"
#include "khess/symfunc.hpp"

namespace khess {

/// The zero-order tensor B of W: zero, scale * g, or scale * A_g.
struct TensorTerm {
    enum class Kind { Zero, Metric, Schouten };
    Kind kind = Kind::Zero;
    double scale = 0.0;
};

class ManufacturedFactor;

/// F(g^-1 W) = f(x, u) h(x, du) with W = nabla^2 u + a du(x)du + b |du|^2 g + B and
///   f(x, z) = G(x) E(x, z),   h(x, p) = H(x, p, |p|^2) Phi(T(x, p)).
/// G is the positive input datum of the presets (f0, nu^(1/n), kappa^(1/n), or a
/// manufactured factor); Phi is present only for the optics equation with a
/// non-constant phi. T is the reflected direction on the unit sphere.
///
/// Build with a preset or fill the public fields and call prepare().
struct EquationSpec {
    std::string preset = "custom";
    OperatorSpec op;
    ManifoldPtr manifold;

    Expression a = Expression::constant(0.0);  ///< in x
    Expression b = Expression::constant(0.0);  ///< in x
    TensorTerm B;
    Expression G = Expression::constant(1.0);  ///< in x
    Expression E = Expression::constant(1.0);  ///< in x, z
    Expression H = Expression::constant(1.0);  ///< in x, p, pp
    std::optional<Expression> Phi;             ///< in t

    /// Replaces G when set (analytic manufactured factor).
    std::shared_ptr<const ManufacturedFactor> manufactured;
    /// G is known only at the nodes (discrete manufactured factor or a blend).
    bool G_sampled = false;

    /// Hypothesis constants: b < -delta1, a + n b < -delta2.
    std::optional<double> delta1, delta2;
    /// Constant-curvature form: a constant, b = 0, B = K g.
    bool csc_form = false;
    /// Case (b) data: h_pp >= Lambda(p) g^-1, h <= M Lambda (1+|p|)^2, |h_p| <= M Lambda (1+|p|).
    std::optional<Expression> Lambda;  ///< in p, pp
    std::optional<double> M;

    // Node data filled by prepare().
    Eigen::VectorXd a_nodes, b_nodes, G_nodes;
    TensorField B_field;

    /// Validates the symbol usage, samples a, b, B, G on the grid and checks G > 0.
    void prepare();
    int n() const { return op.n; }
};

// Presets. The positive inputs are expressions in x1..xn.
EquationSpec schouten_quotient_spec(ManifoldPtr m, int k, int l, const std::string& f0);
/// sign = +1 gives f0 e^(-2u), sign = -1 gives f0 e^(2u). Requires t, s >= 0,
/// t + s >= 1 and t + n s <= c0.
EquationSpec lc_schouten_spec(ManifoldPtr m, int k, double t, double s, int sign, const std::string& f0,
                              double c0 = 10.0);
/// phi is an expression in t1..t(n+1); a constant phi0 gives f = (phi0 nu)^(1/n).
EquationSpec optics_spec(ManifoldPtr m, const std::string& nu, const std::string& phi);
EquationSpec gauss_flat_spec(ManifoldPtr m, const std::string& kappa);
EquationSpec gauss_sphere_spec(ManifoldPtr m, const std::string& kappa);
/// F(g^-1(nabla^2 u + a du(x)du + K g)) = f(x, u) h(p) with f in (x, z), h in (p, pp).
EquationSpec csc_spec(ManifoldPtr m, const OperatorSpec& op, double a, const std::string& f,
                      const std::string& h);

/// Nodes carrying an equation: all nodes on the torus, interior nodes otherwise.
std::vector<long> equation_nodes(const DiscreteManifold& m);

/// Grid derivatives of u entering W.
struct GridDerivatives {
    TensorField du;
    TensorField hess;
};
GridDerivatives grid_derivatives(const ScalarField& u);

/// W at one node from precomputed derivatives.
Eigen::MatrixXd augmented_at(const EquationSpec& spec, const GridDerivatives& d, long node);

/// RHS value f h at (node, z, p) with its derivatives in z and p.
struct RhsValue {
    double value = 0.0;
    double dz = 0.0;
    Eigen::VectorXd dp;
};
RhsValue rhs_at(const EquationSpec& spec, long node, double z, const Eigen::VectorXd& p);

/// F(g^-1 W) - f h at the equation nodes (zero elsewhere). Throws ConeViolation
/// naming the first node outside the cone and its eigenvalues.
ScalarField residual(const EquationSpec& spec, const ScalarField& u);
/// Smallest cone_margin of g^-1 W over the equation nodes (may be negative).
double state_cone_margin(const EquationSpec& spec, const ScalarField& u);

enum class ManufactureMode { Analytic, Discrete };

/// Returns spec with G replaced so that u* solves the equation.
///   Analytic: G(x) = F(g^-1 W(u*)) / (E h) evaluated in closed form (jets), so
///             the discrete residual at u* is the truncation error.
///   Discrete: G sampled from the discrete W(u*), so the residual vanishes to
///             round-off.
/// Throws ConeViolation when the margin of W(u*) drops below min_margin at an
/// equation node, DomainError when G would be nonpositive.
EquationSpec manufacture(const EquationSpec& base, const Expression& u_star, ManufactureMode mode,
                         double min_margin = 1e-3);
EquationSpec manufacture(const EquationSpec& base, const ScalarField& u_star, double min_margin = 1e-3);
/// Nodewise blend (1 - tau) f0 + tau f1 of two specs differing only in G.
EquationSpec blend(const EquationSpec& s0, const EquationSpec& s1, double tau);

/// G as a local jet factor: closed form for analytic G, the FD quadratic
/// Taylor polynomial for sampled G.
class ManufacturedFactor {
public:
    ManufacturedFactor(const EquationSpec& base, Expression u_star);
    const Expression& solution() const { return u_star_; }
    /// G as a jet in the active coordinates around x0, of the given order (<= 4).
    Jet local_jet(const Eigen::VectorXd& x0, int order) const;
    double value(const Eigen::VectorXd& x0) const { return local_jet(x0, 0).value(); }

private:
    std::shared_ptr<const EquationSpec> base_;
    Expression u_star_;
};

/// F applied to a matrix of jets M (n x n, row-major) via Newton's identities.
Jet operator_jet(const OperatorSpec& op, const std::vector<Jet>& M);

/// Reflected direction T(x, p) = -(2P + (1 - |p|^2) N) / (1 + |p|^2) in R^(n+1) on a
/// sphere chart, P the tangent vector dual to p and N the unit normal.
Eigen::VectorXd optics_direction(const DiscreteManifold& m, const Eigen::VectorXd& x, const Eigen::VectorXd& p);

/// h(x, p) and its p-Hessian at an arbitrary point.
struct HValue {
    double value = 0.0;
    Eigen::VectorXd dp;
    Eigen::MatrixXd dpp;
};
HValue h_at(const EquationSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& p);

/// Data suprema of the local estimates over the geodesic ball B_r about the
/// chart origin, at (x, u(x)) for f and (x, du(x)) for h:
///   c_inf = inf f,  c_sup = sup(f + |d_x f| + |f_z| + |d_x^2 f| + |d_x f_z| + |f_zz|),
///   e_sup = sup(h + |d_x h| + |d_p h| + |d_p^2 h| + |d_x d_p h| + |d_x^2 h|).
/// Norms are metric: covectors via g^-1, vectors via g, two-tensors as the
/// spectral norm of the (1,1) form, the mixed x-p tensor in Frobenius form.
/// Second x-derivatives are covariant.
struct BoundData {
    double r = 0.0;
    double c_inf = 0.0;
    double c_sup = 0.0;
    double e_sup = 0.0;
    double sup_grad = 0.0;  ///< sup |du| over B_r
    long nodes = 0;
};
BoundData bound_data(const EquationSpec& spec, const ScalarField& u, double r);

}  // namespace khess
