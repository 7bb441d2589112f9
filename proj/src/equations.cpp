#include "khess/equations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "khess/errors.hpp"

namespace khess {

namespace {

SymbolSet symbols(int n, bool x, bool z, bool p, bool t) { return SymbolSet{n, x, z, p, t}; }

std::string fraction(int num, int den) { return "(" + std::to_string(num) + "/" + std::to_string(den) + ")"; }

double eval_at(const Expression& e, const Eigen::VectorXd& x) {
    Bindings<double> b;
    b.x = std::span<const double>(x.data(), static_cast<std::size_t>(x.size()));
    return e.eval(b);
}

std::string eigen_text(const Eigen::VectorXd& v) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << format_real(v[i]);
    os << ")";
    return os.str();
}

[[noreturn]] void throw_node_cone(const OperatorSpec& op, long node, const Eigen::VectorXd& lambda,
                                  double margin, const std::string& context) {
    Eigen::VectorXd mu = lambda;
    if (op.cone.kind == ConeSpec::Kind::LinearComb) {
        mu = op.cone.t * lambda + Eigen::VectorXd::Constant(lambda.size(), op.cone.s * lambda.sum());
    }
    const Eigen::VectorXd e = elementary_symmetric(mu);
    const int n = static_cast<int>(lambda.size());
    int idx = op.cone.k;
    for (int i = 1; i <= op.cone.k; ++i) {
        if (e[i] / binomial(n, i) <= margin) {
            idx = i;
            break;
        }
    }
    throw ConeViolation(context + ": eigenvalues of g^-1 W at node " + std::to_string(node) + " " +
                            eigen_text(lambda) + " leave " + op.cone.describe() + " (sigma_" +
                            std::to_string(idx) + " = " + format_real(e[idx]) + ")",
                        idx, e[idx], node, std::vector<double>(lambda.data(), lambda.data() + lambda.size()));
}

// Eigenvalues of g^-1 W for the conformally flat chart metric g = e^{2 omega} delta.
Eigen::VectorXd metric_eigenvalues(const DiscreteManifold& m, long node, const Eigen::MatrixXd& w) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w, Eigen::EigenvaluesOnly);
    return es.eigenvalues() * std::exp(-2.0 * m.omega(node));
}

// Reflected direction on the sphere of radius rho in stereographic coordinates y.
template <class T>
std::vector<T> reflect(std::span<const T> y, std::span<const T> p, double rho, const T& one) {
    const std::size_t n = y.size();
    T s = one * 0.0;
    for (const T& yi : y) s = s + yi * yi;
    const T den = one + s;
    const T inv = one / den;
    const T inv2 = inv * inv;
    std::vector<T> X;
    for (std::size_t a = 0; a < n; ++a) X.push_back(2.0 * y[a] * inv);
    X.push_back((one - s) * inv);
    // P = g^{ij} p_j d_i Y with Y = rho X and g^{ij} = den^2 / (4 rho^2) delta
    const T c = den * den / (4.0 * rho);
    std::vector<T> P(n + 1, one * 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < n; ++a) {
            T d = -4.0 * y[a] * y[i] * inv2;
            if (a == i) d = d + 2.0 * inv;
            P[a] = P[a] + p[i] * d;
        }
        P[n] = P[n] - 4.0 * p[i] * y[i] * inv2;
    }
    T pp = one * 0.0;
    for (std::size_t i = 0; i < n; ++i) pp = pp + p[i] * p[i];
    pp = pp * (den * den / (4.0 * rho * rho));
    std::vector<T> out;
    for (std::size_t a = 0; a <= n; ++a) out.push_back(-(2.0 * c * P[a] + (one - pp) * X[a]) / (one + pp));
    return out;
}

// h(x, p) = H(x, p, |p|^2) Phi(T(x, p)) on jets.
Jet h_jet(const EquationSpec& spec, std::span<const Jet> x, const Jet& omega, std::span<const Jet> p) {
    Jet pp = p[0] * p[0];
    for (std::size_t i = 1; i < p.size(); ++i) pp += p[i] * p[i];
    pp = pp * exp(-2.0 * omega);
    Bindings<Jet> b;
    b.x = x;
    b.p = p;
    b.pp = &pp;
    Jet h = spec.H.eval(b);
    if (spec.Phi) {
        const Jet one = Jet::constant(p[0].nvars(), p[0].order(), 1.0);
        const std::vector<Jet> t = reflect<Jet>(x, p, spec.manifold->rho(), one);
        Bindings<Jet> bt;
        bt.t = t;
        h = h * spec.Phi->eval(bt);
    }
    return h;
}

void require_only(const Expression& e, bool x, bool z, bool p, bool t, const char* what) {
    if ((e.uses_x() && !x) || (e.uses_z() && !z) || (e.uses_p() && !p) || (e.uses_t() && !t)) {
        throw DomainError(std::string(what) + " uses symbols it may not depend on: '" + e.text() + "'");
    }
}

std::vector<Jet> coordinate_jets(const DiscreteManifold& m, const Eigen::VectorXd& x0, int nvars, int order,
                                 int first_var) {
    std::vector<Jet> x;
    for (int i = 0; i < m.n(); ++i) {
        x.push_back(m.axis_active(i) ? Jet::variable(nvars, order, first_var + i, x0[i])
                                     : Jet::constant(nvars, order, x0[i]));
    }
    return x;
}

double max_abs_eigen(const Eigen::MatrixXd& a) {
    if (a.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((0.5 * (a + a.transpose())).eval(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

void EquationSpec::prepare() {
    if (!manifold) throw DomainError("equation without manifold");
    const DiscreteManifold& m = *manifold;
    if (op.n != m.n()) throw DomainError("operator dimension does not match the chart");
    require_only(a, true, false, false, false, "a");
    require_only(b, true, false, false, false, "b");
    require_only(G, true, false, false, false, "G");
    require_only(E, true, true, false, false, "E");
    require_only(H, true, false, true, false, "H");
    if (Phi) {
        require_only(*Phi, false, false, false, true, "phi");
        if (m.kind() != ChartKind::SphereChart) throw DomainError("phi(T) needs a sphere chart");
    }
    if (Lambda) require_only(*Lambda, false, false, true, false, "Lambda");

    const long count = m.node_count();
    a_nodes.resize(count);
    b_nodes.resize(count);
    for (long node = 0; node < count; ++node) {
        const Eigen::VectorXd x = m.coords(node);
        a_nodes[node] = eval_at(a, x);
        b_nodes[node] = eval_at(b, x);
    }
    B_field = TensorField(manifold, 2);
    if (B.kind == TensorTerm::Kind::Metric) {
        const TensorField g = metric_field(manifold);
        for (std::size_t c = 0; c < g.comps.size(); ++c) B_field.comps[c] = B.scale * g.comps[c];
    } else if (B.kind == TensorTerm::Kind::Schouten) {
        const TensorField s = schouten(manifold);
        for (std::size_t c = 0; c < s.comps.size(); ++c) B_field.comps[c] = B.scale * s.comps[c];
    }

    if (manufactured) {
        G_nodes.resize(count);
        for (long node = 0; node < count; ++node) G_nodes[node] = manufactured->value(m.coords(node));
    } else if (G_sampled) {
        if (G_nodes.size() != count) throw DomainError("sampled G does not match the grid");
    } else {
        G_nodes.resize(count);
        for (long node = 0; node < count; ++node) G_nodes[node] = eval_at(G, m.coords(node));
    }
    for (long node = 0; node < count; ++node) {
        if (!(G_nodes[node] > 0.0) || !std::isfinite(G_nodes[node])) {
            throw DomainError("f must be positive: factor G = " + format_real(G_nodes[node]) + " at node " +
                              std::to_string(node));
        }
    }

    if (csc_form) {
        if (!a.is_constant()) throw DomainError("constant-curvature form needs a constant a");
        if (!b.is_constant() || eval_at(b, Eigen::VectorXd::Zero(m.n())) != 0.0) {
            throw DomainError("constant-curvature form needs b = 0");
        }
        const double k = m.K();
        const bool ok = (B.kind == TensorTerm::Kind::Metric && std::abs(B.scale - k) <= 1e-14 * (1 + k)) ||
                        (B.kind == TensorTerm::Kind::Zero && k == 0.0);
        if (!ok) throw DomainError("constant-curvature form needs B = K g");
    }
}

EquationSpec schouten_quotient_spec(ManifoldPtr m, int k, int l, const std::string& f0) {
    const int n = m->n();
    if (n < 3) throw UnsupportedError("the Schouten equation needs n >= 3");
    EquationSpec s;
    s.preset = "schouten";
    s.op = OperatorSpec::quotient(n, k, l);
    s.manifold = std::move(m);
    s.a = Expression::constant(1.0);
    s.b = Expression::constant(-0.5);
    s.B = {TensorTerm::Kind::Schouten, 1.0};
    s.G = Expression::parse(f0, symbols(n, true, false, false, false));
    s.E = Expression::parse("exp(-2*z)", symbols(n, true, true, false, false));
    s.delta1 = 0.5;
    s.delta2 = (n - 2) / 2.0;
    s.prepare();
    return s;
}

EquationSpec lc_schouten_spec(ManifoldPtr m, int k, double t, double s, int sign, const std::string& f0,
                              double c0) {
    const int n = m->n();
    if (n < 3) throw UnsupportedError("the Schouten equation needs n >= 3");
    if (!(t >= 0 && s >= 0 && t + s >= 1)) throw DomainError("need t, s >= 0 and t + s >= 1");
    if (!(t + n * s <= c0)) throw DomainError("need t + n s <= c0 = " + format_real(c0));
    if (sign != 1 && sign != -1) throw DomainError("sign must be +1 or -1");
    EquationSpec e;
    e.preset = "lc_schouten";
    e.op = OperatorSpec::linear_comb_root(n, k, t, s);
    e.manifold = std::move(m);
    e.a = Expression::constant(1.0);
    e.b = Expression::constant(-0.5);
    e.B = {TensorTerm::Kind::Schouten, 1.0};
    e.G = Expression::parse(f0, symbols(n, true, false, false, false));
    e.E = Expression::parse(sign > 0 ? "exp(-2*z)" : "exp(2*z)", symbols(n, true, true, false, false));
    e.delta1 = 0.5;
    e.delta2 = (n - 2) / 2.0;
    e.prepare();
    return e;
}

EquationSpec optics_spec(ManifoldPtr m, const std::string& nu, const std::string& phi) {
    if (m->kind() != ChartKind::SphereChart) throw DomainError("the optics equation lives on a sphere chart");
    if (m->rho() != 1.0) throw DomainError("the optics equation needs the unit sphere");
    const int n = m->n();
    const std::string root = fraction(1, n);
    const Expression ph = Expression::parse(phi, symbols(n, false, false, false, true));
    EquationSpec s;
    s.preset = "optics";
    s.op = OperatorSpec::sigma_k_root(n, n);
    s.manifold = std::move(m);
    s.a = Expression::constant(1.0);
    s.b = Expression::constant(-0.5);
    s.B = {TensorTerm::Kind::Metric, 0.5};
    if (ph.is_constant()) {
        s.G = Expression::parse("pow((" + phi + ")*(" + nu + "), " + root + ")", symbols(n, true, false, false, false));
        s.Lambda = Expression::constant(1.0);
        s.M = 1.0;
    } else {
        s.G = Expression::parse("pow(" + nu + ", " + root + ")", symbols(n, true, false, false, false));
        s.Phi = Expression::parse("pow(" + phi + ", " + root + ")", symbols(n, false, false, false, true));
    }
    s.H = Expression::parse("(1+pp)/2", symbols(n, true, false, true, false));
    s.delta1 = 0.5;
    s.delta2 = (n - 2) / 2.0;
    s.prepare();
    return s;
}

namespace {

EquationSpec gauss_common(ManifoldPtr m, const std::string& kappa) {
    const int n = m->n();
    EquationSpec s;
    s.op = OperatorSpec::sigma_k_root(n, n);
    s.manifold = std::move(m);
    s.G = Expression::parse("pow(" + kappa + ", " + fraction(1, n) + ")", symbols(n, true, false, false, false));
    s.H = Expression::parse("pow(1+pp, " + fraction(n + 2, 2 * n) + ")", symbols(n, true, false, true, false));
    s.csc_form = true;
    return s;
}

}  // namespace

EquationSpec gauss_flat_spec(ManifoldPtr m, const std::string& kappa) {
    if (m->kind() != ChartKind::EuclideanDomain) throw DomainError("the flat Gauss curvature equation needs a Euclidean domain");
    EquationSpec s = gauss_common(std::move(m), kappa);
    s.preset = "gauss_flat";
    s.prepare();
    return s;
}

EquationSpec gauss_sphere_spec(ManifoldPtr m, const std::string& kappa) {
    if (m->kind() != ChartKind::SphereChart) throw DomainError("the spherical Gauss curvature equation needs a sphere chart");
    EquationSpec s = gauss_common(std::move(m), kappa);
    s.preset = "gauss_sphere";
    s.a = Expression::constant(1.0);
    s.B = {TensorTerm::Kind::Metric, s.manifold->K()};
    s.E = Expression::parse("exp(-z)", symbols(s.n(), true, true, false, false));
    s.prepare();
    return s;
}

EquationSpec csc_spec(ManifoldPtr m, const OperatorSpec& op, double a, const std::string& f, const std::string& h) {
    const int n = m->n();
    EquationSpec s;
    s.preset = "csc";
    s.op = op;
    s.manifold = std::move(m);
    s.a = Expression::constant(a);
    const double k = s.manifold->K();
    s.B = k == 0.0 ? TensorTerm{} : TensorTerm{TensorTerm::Kind::Metric, k};
    s.E = Expression::parse(f, symbols(n, true, true, false, false));
    s.H = Expression::parse(h, symbols(n, false, false, true, false));
    s.csc_form = true;
    s.prepare();
    return s;
}

std::vector<long> equation_nodes(const DiscreteManifold& m) {
    std::vector<long> out;
    out.reserve(static_cast<std::size_t>(m.node_count()));
    for (long node = 0; node < m.node_count(); ++node) {
        if (!m.is_boundary(node)) out.push_back(node);
    }
    return out;
}

GridDerivatives grid_derivatives(const ScalarField& u) {
    return {covariant_gradient(u), covariant_hessian(u)};
}

Eigen::MatrixXd augmented_at(const EquationSpec& spec, const GridDerivatives& d, long node) {
    const DiscreteManifold& m = *spec.manifold;
    const int n = m.n();
    Eigen::VectorXd du(n);
    for (int i = 0; i < n; ++i) du[i] = d.du.comps[i][node];
    const double g2 = gradient_norm2(m, node, du);
    Eigen::MatrixXd w = d.hess.matrix(node) + spec.a_nodes[node] * du * du.transpose() +
                        spec.b_nodes[node] * g2 * m.metric(node) + spec.B_field.matrix(node);
    return (0.5 * (w + w.transpose())).eval();
}

RhsValue rhs_at(const EquationSpec& spec, long node, double z, const Eigen::VectorXd& p) {
    const DiscreteManifold& m = *spec.manifold;
    const int n = m.n();
    const int nv = n + 1;
    const Eigen::VectorXd x0 = m.coords(node);
    std::vector<Jet> x;
    for (int i = 0; i < n; ++i) x.push_back(Jet::constant(nv, 1, x0[i]));
    const Jet zj = Jet::variable(nv, 1, 0, z);
    std::vector<Jet> pj;
    for (int i = 0; i < n; ++i) pj.push_back(Jet::variable(nv, 1, 1 + i, p[i]));
    Bindings<Jet> bz;
    bz.x = x;
    bz.z = &zj;
    const Jet f = spec.G_nodes[node] * spec.E.eval(bz);
    const Jet h = h_jet(spec, x, Jet::constant(nv, 1, m.omega(node)), pj);
    const Jet r = f * h;
    RhsValue out;
    out.value = r.value();
    out.dz = r.derivative(0);
    out.dp.resize(n);
    for (int i = 0; i < n; ++i) out.dp[i] = r.derivative(1 + i);
    return out;
}

HValue h_at(const EquationSpec& spec, const Eigen::VectorXd& x0, const Eigen::VectorXd& p) {
    const DiscreteManifold& m = *spec.manifold;
    const int n = m.n();
    std::vector<Jet> x;
    for (int i = 0; i < n; ++i) x.push_back(Jet::constant(n, 2, x0[i]));
    std::vector<Jet> pj;
    for (int i = 0; i < n; ++i) pj.push_back(Jet::variable(n, 2, i, p[i]));
    const Jet h = h_jet(spec, x, m.omega_jet(x), pj);
    HValue out;
    out.value = h.value();
    out.dp.resize(n);
    out.dpp.resize(n, n);
    for (int i = 0; i < n; ++i) {
        out.dp[i] = h.derivative(i);
        for (int j = 0; j < n; ++j) out.dpp(i, j) = h.derivative(i, j);
    }
    return out;
}

ScalarField residual(const EquationSpec& spec, const ScalarField& u) {
    const DiscreteManifold& m = *spec.manifold;
    if (!u.manifold->same_shape(m)) throw DomainError("field and equation live on different manifolds");
    const int n = m.n();
    const GridDerivatives d = grid_derivatives(u);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(m.node_count());
    for (long node : equation_nodes(m)) {
        const Eigen::MatrixXd w = augmented_at(spec, d, node);
        const Eigen::VectorXd lambda = metric_eigenvalues(m, node, w);
        if (!in_cone(lambda, spec.op.cone)) throw_node_cone(spec.op, node, lambda, 0.0, "residual");
        Eigen::VectorXd p(n);
        for (int i = 0; i < n; ++i) p[i] = d.du.comps[i][node];
        r[node] = evaluate(spec.op, lambda) - rhs_at(spec, node, u.values[node], p).value;
    }
    return ScalarField(spec.manifold, std::move(r));
}

double state_cone_margin(const EquationSpec& spec, const ScalarField& u) {
    const DiscreteManifold& m = *spec.manifold;
    const GridDerivatives d = grid_derivatives(u);
    double margin = std::numeric_limits<double>::infinity();
    for (long node : equation_nodes(m)) {
        margin = std::min(margin, cone_margin(metric_eigenvalues(m, node, augmented_at(spec, d, node)), spec.op.cone));
    }
    return margin;
}

Jet operator_jet(const OperatorSpec& op, const std::vector<Jet>& M) {
    const int n = op.n;
    if (static_cast<int>(M.size()) != n * n) throw DomainError("operator_jet needs an n x n matrix");
    Eigen::MatrixXd value(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) value(i, j) = M[i * n + j].value();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((0.5 * (value + value.transpose())).eval(),
                                                      Eigen::EigenvaluesOnly);
    evaluate(op, es.eigenvalues());  // cone check

    std::vector<Jet> A = M;
    if (op.kind == OperatorKind::LinearCombRoot) {
        Jet tr = M[0];
        for (int i = 1; i < n; ++i) tr += M[i * n + i];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                A[i * n + j] = op.t * M[i * n + j];
                if (i == j) A[i * n + j] += op.s * tr;
            }
    }
    const int k = op.k;
    const int l = op.kind == OperatorKind::Quotient ? op.l : 0;
    // power sums p_j = tr(A^j), then Newton's identities for e_j
    std::vector<Jet> power = A;
    std::vector<Jet> psum(k + 1);
    const Jet zero = M[0] * 0.0;
    for (int j = 1; j <= k; ++j) {
        if (j > 1) {
            std::vector<Jet> next(n * n, zero);
            for (int i = 0; i < n; ++i)
                for (int c = 0; c < n; ++c) {
                    Jet acc = zero;
                    for (int q = 0; q < n; ++q) acc += power[i * n + q] * A[q * n + c];
                    next[i * n + c] = acc;
                }
            power = std::move(next);
        }
        Jet tr = power[0];
        for (int i = 1; i < n; ++i) tr += power[i * n + i];
        psum[j] = tr;
    }
    std::vector<Jet> e(k + 1, zero);
    e[0] = zero + 1.0;
    for (int j = 1; j <= k; ++j) {
        Jet acc = zero;
        for (int i = 1; i <= j; ++i) {
            const Jet term = e[j - i] * psum[i];
            if (i % 2 == 1) acc += term;
            else acc -= term;
        }
        e[j] = acc / static_cast<double>(j);
    }
    const Jet ratio = l == 0 ? e[k] : e[k] / e[l];
    return op.normalization * pow(ratio, 1.0 / (k - l));
}

ManufacturedFactor::ManufacturedFactor(const EquationSpec& base, Expression u_star)
    : u_star_(std::move(u_star)) {
    require_only(u_star_, true, false, false, false, "u*");
    auto copy = std::make_shared<EquationSpec>(base);
    copy->manufactured = nullptr;
    copy->G_sampled = false;
    base_ = std::move(copy);
}

Jet ManufacturedFactor::local_jet(const Eigen::VectorXd& x0, int q) const {
    const EquationSpec& s = *base_;
    const DiscreteManifold& m = *s.manifold;
    const int n = m.n();
    const int A = m.active_axes();
    const int Q = q + 2;
    const std::vector<Jet> x = coordinate_jets(m, x0, A, Q, 0);
    Bindings<Jet> bx;
    bx.x = x;
    const Jet U = u_star_.eval(bx);
    const Jet omega = m.omega_jet(x);

    const Jet zero1 = Jet::constant(A, q + 1, 0.0);
    const Jet zero = Jet::constant(A, q, 0.0);
    std::vector<Jet> du(n, zero1), om(n, zero), duq(n, zero), xq;
    for (int i = 0; i < A; ++i) {
        du[i] = U.diff(i);
        duq[i] = du[i].truncated(q);
        om[i] = omega.diff(i).truncated(q);
    }
    for (const Jet& xi : x) xq.push_back(xi.truncated(q));
    const Jet omq = omega.truncated(q);
    const Jet e2w = exp(2.0 * omq);
    const Jet em2w = exp(-2.0 * omq);
    Jet grad2 = zero;
    for (int i = 0; i < n; ++i) grad2 += duq[i] * duq[i];
    grad2 = em2w * grad2;
    Bindings<Jet> bq;
    bq.x = xq;
    const Jet a = s.a.eval(bq);
    const Jet b = s.b.eval(bq);
    double bscale = 0.0;
    if (s.B.kind == TensorTerm::Kind::Metric) bscale = s.B.scale;
    if (s.B.kind == TensorTerm::Kind::Schouten) bscale = 0.5 * s.B.scale * m.K();  // space forms: A_g = K g / 2

    Jet om_du = zero;
    for (int k = 0; k < n; ++k) om_du += om[k] * duq[k];
    std::vector<Jet> M(n * n, zero);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Jet w = (i < A && j < A) ? du[i].diff(j) : zero;
            // Gamma^k_ij = delta_ik w_j + delta_jk w_i - delta_ij w_k for g = e^{2 omega} delta
            w -= om[j] * duq[i] + om[i] * duq[j];
            if (i == j) w += om_du + (b * grad2 + bscale) * e2w;
            w += a * duq[i] * duq[j];
            M[i * n + j] = em2w * w;
        }
    }
    const Jet F = operator_jet(s.op, M);
    const Jet Uq = U.truncated(q);
    Bindings<Jet> bz;
    bz.x = xq;
    bz.z = &Uq;
    const Jet E = s.E.eval(bz);
    const Jet h = h_jet(s, xq, omq, duq);
    return F / (E * h);
}

namespace {

// G at every node from the discrete W of u*; boundary nodes outside the cone
// (one-sided stencils) take the value of their inward neighbour.
Eigen::VectorXd discrete_factor(const EquationSpec& spec, const ScalarField& u, double min_margin) {
    const DiscreteManifold& m = *spec.manifold;
    const int n = m.n();
    const GridDerivatives d = grid_derivatives(u);
    Eigen::VectorXd G = Eigen::VectorXd::Constant(m.node_count(), std::numeric_limits<double>::quiet_NaN());
    std::vector<long> pending;
    for (long node = 0; node < m.node_count(); ++node) {
        const Eigen::VectorXd lambda = metric_eigenvalues(m, node, augmented_at(spec, d, node));
        const bool equation = !m.is_boundary(node);
        if (equation && cone_margin(lambda, spec.op.cone) < min_margin) {
            throw_node_cone(spec.op, node, lambda, min_margin, "manufactured solution below cone margin");
        }
        if (!in_cone(lambda, spec.op.cone)) {
            pending.push_back(node);
            continue;
        }
        Eigen::VectorXd p(n);
        for (int i = 0; i < n; ++i) p[i] = d.du.comps[i][node];
        const double rhs = [&] {
            // E h at this node, with G = 1
            Eigen::VectorXd x0 = m.coords(node);
            std::vector<Jet> x;
            for (int i = 0; i < n; ++i) x.push_back(Jet::constant(1, 1, x0[i]));
            const Jet z = Jet::constant(1, 1, u.values[node]);
            std::vector<Jet> pj;
            for (int i = 0; i < n; ++i) pj.push_back(Jet::constant(1, 1, p[i]));
            Bindings<Jet> bz;
            bz.x = x;
            bz.z = &z;
            return (spec.E.eval(bz) * h_jet(spec, x, Jet::constant(1, 1, m.omega(node)), pj)).value();
        }();
        G[node] = evaluate(spec.op, lambda) / rhs;
    }
    for (long node : pending) {
        std::vector<int> idx = m.multi_index(node);
        for (int a = 0; a < m.active_axes(); ++a) idx[a] = std::clamp(idx[a], 1, m.N() - 1);
        G[node] = G[m.node_at(idx)];
    }
    return G;
}

ScalarField sample(const ManifoldPtr& m, const Expression& e) {
    Eigen::VectorXd v(m->node_count());
    for (long node = 0; node < m->node_count(); ++node) v[node] = eval_at(e, m->coords(node));
    return ScalarField(m, std::move(v));
}

}  // namespace

EquationSpec manufacture(const EquationSpec& base, const Expression& u_star, ManufactureMode mode,
                         double min_margin) {
    EquationSpec s = base;
    s.manufactured = nullptr;
    s.G_sampled = false;
    const ScalarField u = sample(base.manifold, u_star);
    if (mode == ManufactureMode::Discrete) {
        s.G_nodes = discrete_factor(s, u, min_margin);
        s.G_sampled = true;
    } else {
        (void)discrete_factor(s, u, min_margin);  // margin check on the grid W
        s.manufactured = std::make_shared<ManufacturedFactor>(s, u_star);
    }
    s.prepare();
    return s;
}

EquationSpec manufacture(const EquationSpec& base, const ScalarField& u_star, double min_margin) {
    EquationSpec s = base;
    s.manufactured = nullptr;
    s.G_nodes = discrete_factor(s, u_star, min_margin);
    s.G_sampled = true;
    s.prepare();
    return s;
}

EquationSpec blend(const EquationSpec& s0, const EquationSpec& s1, double tau) {
    if (!s0.manifold->same_shape(*s1.manifold) || s0.preset != s1.preset || s0.E.text() != s1.E.text() ||
        s0.H.text() != s1.H.text()) {
        throw DomainError("blended equations must differ only in f");
    }
    EquationSpec s = s0;
    s.manufactured = nullptr;
    s.G_nodes = (1.0 - tau) * s0.G_nodes + tau * s1.G_nodes;
    s.G_sampled = true;
    s.prepare();
    return s;
}

Eigen::VectorXd optics_direction(const DiscreteManifold& m, const Eigen::VectorXd& x, const Eigen::VectorXd& p) {
    if (m.kind() != ChartKind::SphereChart) throw DomainError("the reflected direction needs a sphere chart");
    std::vector<double> y(x.data(), x.data() + x.size()), pv(p.data(), p.data() + p.size());
    const std::vector<double> t = reflect<double>(y, pv, m.rho(), 1.0);
    return Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
}

BoundData bound_data(const EquationSpec& spec, const ScalarField& u, double r) {
    const DiscreteManifold& m = *spec.manifold;
    const int n = m.n();
    const int A = m.active_axes();
    if (!(r > 0)) throw DomainError("ball radius must be positive");
    const GridDerivatives d = grid_derivatives(u);

    // FD Taylor data for sampled G
    std::vector<Eigen::VectorXd> dG, d2G;
    if (spec.G_sampled) {
        for (int i = 0; i < A; ++i) dG.push_back(partial(m, spec.G_nodes, i, 1));
        for (int i = 0; i < A; ++i)
            for (int j = 0; j < A; ++j) d2G.push_back(partial2(m, spec.G_nodes, std::min(i, j), std::max(i, j)));
    }

    BoundData out;
    out.r = r;
    out.c_inf = std::numeric_limits<double>::infinity();
    for (long node = 0; node < m.node_count(); ++node) {
        if (m.distance_from_origin(node) > r * (1 + 1e-12)) continue;
        ++out.nodes;
        const Eigen::VectorXd x0 = m.coords(node);
        const double e2w = std::exp(2.0 * m.omega(node));
        Eigen::VectorXd p(n);
        for (int i = 0; i < n; ++i) p[i] = d.du.comps[i][node];
        out.sup_grad = std::max(out.sup_grad, std::sqrt(gradient_norm2(m, node, p)));

        auto gamma_fix = [&](const Jet& j, int i, int k) {
            double v = j.derivative(i, k);
            for (int q = 0; q < A; ++q) v -= m.gamma(node, q, i, k) * j.derivative(q);
            return v;
        };

        // f in variables (x_active, z)
        {
            const int nv = A + 1;
            const std::vector<Jet> x = coordinate_jets(m, x0, nv, 2, 0);
            const Jet z = Jet::variable(nv, 2, A, u.values[node]);
            Jet G;
            if (spec.manufactured) {
                const std::vector<double> centre(x0.data(), x0.data() + A);
                G = substitute(spec.manufactured->local_jet(x0, 2), centre, std::span<const Jet>(x.data(), A));
            } else if (spec.G_sampled) {
                G = Jet::constant(nv, 2, spec.G_nodes[node]);
                for (int i = 0; i < A; ++i) {
                    const Jet di = x[i] - x0[i];
                    G += dG[i][node] * di;
                    for (int j = 0; j < A; ++j) G += 0.5 * d2G[i * A + j][node] * di * (x[j] - x0[j]);
                }
            } else {
                Bindings<Jet> bx;
                bx.x = x;
                G = spec.G.eval(bx);
            }
            Bindings<Jet> bz;
            bz.x = x;
            bz.z = &z;
            const Jet f = G * spec.E.eval(bz);
            Eigen::MatrixXd fxx(A, A);
            double fx2 = 0.0, fxz2 = 0.0;
            for (int i = 0; i < A; ++i) {
                fx2 += f.derivative(i) * f.derivative(i);
                fxz2 += f.derivative(i, A) * f.derivative(i, A);
                for (int k = 0; k < A; ++k) fxx(i, k) = gamma_fix(f, i, k);
            }
            const double sum = f.value() + std::sqrt(fx2 / e2w) + std::abs(f.derivative(A)) +
                               max_abs_eigen(fxx) / e2w + std::sqrt(fxz2 / e2w) + std::abs(f.derivative(A, A));
            out.c_inf = std::min(out.c_inf, f.value());
            out.c_sup = std::max(out.c_sup, sum);
        }
        // h in variables (x_active, p)
        {
            const int nv = A + n;
            const std::vector<Jet> x = coordinate_jets(m, x0, nv, 2, 0);
            std::vector<Jet> pj;
            for (int i = 0; i < n; ++i) pj.push_back(Jet::variable(nv, 2, A + i, p[i]));
            const Jet h = h_jet(spec, x, m.omega_jet(x), pj);
            double hx2 = 0.0, hp2 = 0.0, hxp2 = 0.0;
            Eigen::MatrixXd hxx(A, A), hpp(n, n);
            for (int i = 0; i < A; ++i) {
                hx2 += h.derivative(i) * h.derivative(i);
                for (int k = 0; k < A; ++k) hxx(i, k) = gamma_fix(h, i, k);
                for (int k = 0; k < n; ++k) hxp2 += h.derivative(i, A + k) * h.derivative(i, A + k);
            }
            for (int i = 0; i < n; ++i) {
                hp2 += h.derivative(A + i) * h.derivative(A + i);
                for (int k = 0; k < n; ++k) hpp(i, k) = h.derivative(A + i, A + k);
            }
            const double sum = h.value() + std::sqrt(hx2 / e2w) + std::sqrt(hp2 * e2w) + max_abs_eigen(hpp) * e2w +
                               std::sqrt(hxp2) + max_abs_eigen(hxx) / e2w;
            out.e_sup = std::max(out.e_sup, sum);
        }
    }
    if (out.nodes == 0) throw DomainError("no grid nodes inside the ball of radius " + format_real(r));
    return out;
}

}  // namespace khess
