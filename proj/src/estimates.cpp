#include "khess/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "khess/errors.hpp"

namespace khess {

std::string to_string(CaseTag tag) {
    switch (tag) {
        case CaseTag::T1a: return "T1a";
        case CaseTag::T1b: return "T1b";
        case CaseTag::T1c: return "T1c";
        case CaseTag::C31: return "C31";
        case CaseTag::C32a: return "C32a";
        case CaseTag::C32b: return "C32b";
        case CaseTag::T2: return "T2";
    }
    return "?";
}

CaseTag case_tag_from_string(const std::string& name) {
    for (CaseTag t : {CaseTag::T1a, CaseTag::T1b, CaseTag::T1c, CaseTag::C31, CaseTag::C32a, CaseTag::C32b,
                      CaseTag::T2}) {
        if (to_string(t) == name) return t;
    }
    throw DomainError("unknown case tag '" + name + "' (T1a, T1b, T1c, C31, C32a, C32b, T2)");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool in_ball(const DiscreteManifold& m, long node, double r) {
    return m.distance_from_origin(node) <= r * (1 + 1e-12);
}

std::string vec_text(const Eigen::VectorXd& v) {
    std::string s = "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_real(v[i]);
    return s + ")";
}

/// Accumulates one audit item; slack < -tol counts as a failure.
class Item {
public:
    explicit Item(std::string name) { it_.name = std::move(name); }
    void record(double slack, double tol, const std::string& witness) {
        ++it_.checked;
        if (slack < -tol) ++it_.failures;
        if (it_.checked == 1 || slack < it_.worst_slack) {
            it_.worst_slack = slack;
            it_.witness = witness;
        }
    }
    void fact(bool ok, const std::string& witness) {
        record(ok ? 0.0 : -1.0, 0.0, witness);
    }
    ConditionItem done() {
        it_.passed = it_.failures == 0;
        return it_;
    }

private:
    ConditionItem it_;
};

/// Equation nodes in B_r away from the boundary collar, with the spectrum of
/// g^-1 W and the residual there.
struct NodeState {
    long node;
    Eigen::VectorXd lambda;
    bool in_cone;
    double residual;
};

std::vector<NodeState> audited_states(const EquationSpec& spec, const ScalarField& u, double r, int collar) {
    const DiscreteManifold& m = *spec.manifold;
    const int n = m.n();
    const GridDerivatives d = grid_derivatives(u);
    std::vector<NodeState> out;
    for (long node : equation_nodes(m)) {
        if (!in_ball(m, node, r) || m.collar(node) < collar) continue;
        const Eigen::MatrixXd w = augmented_at(spec, d, node);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w, Eigen::EigenvaluesOnly);
        NodeState st{node, es.eigenvalues() * std::exp(-2.0 * m.omega(node)), false, 0.0};
        st.in_cone = in_cone(st.lambda, spec.op.cone);
        if (st.in_cone) {
            Eigen::VectorXd p(n);
            for (int i = 0; i < n; ++i) p[i] = d.du.comps[i][node];
            st.residual = evaluate(spec.op, st.lambda) - rhs_at(spec, node, u.values[node], p).value;
        }
        out.push_back(std::move(st));
    }
    return out;
}

std::vector<long> thin(const std::vector<NodeState>& states, int max_nodes) {
    std::vector<long> nodes;
    const std::size_t stride = std::max<std::size_t>(1, (states.size() + max_nodes - 1) / std::max(1, max_nodes));
    for (std::size_t i = 0; i < states.size(); i += stride) nodes.push_back(states[i].node);
    return nodes;
}

double sup_gradient(const DiscreteManifold& m, const GridDerivatives& d, double r) {
    double s = 0.0;
    Eigen::VectorXd p(m.n());
    for (long node = 0; node < m.node_count(); ++node) {
        if (!in_ball(m, node, r)) continue;
        for (int i = 0; i < m.n(); ++i) p[i] = d.du.comps[i][node];
        s = std::max(s, std::sqrt(gradient_norm2(m, node, p)));
    }
    return s;
}

/// Samples of h over p in the metric ball of radius 2 sup|du| at the audited nodes.
struct PSample {
    long node;
    Eigen::VectorXd p;
    double pnorm;
    double h;
    double hp_norm;
    double hpp_floor;  ///< smallest eigenvalue of g h_pp
};

std::vector<PSample> sample_h(const EquationSpec& spec, const ScalarField& u, const std::vector<long>& nodes,
                              double radius, const EstimateOptions& opts) {
    const DiscreteManifold& m = *spec.manifold;
    const int n = m.n();
    const GridDerivatives d = grid_derivatives(u);
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit;
    std::vector<PSample> out;
    for (long node : nodes) {
        const Eigen::VectorXd x = m.coords(node);
        const double ew = std::exp(m.omega(node));
        const Eigen::MatrixXd g = m.metric(node);
        std::vector<Eigen::VectorXd> ps{Eigen::VectorXd::Zero(n)};
        Eigen::VectorXd du(n);
        for (int i = 0; i < n; ++i) du[i] = d.du.comps[i][node];
        ps.push_back(du);
        for (int s = 0; s < opts.p_samples; ++s) {
            Eigen::VectorXd q(n);
            for (int i = 0; i < n; ++i) q[i] = normal(rng);
            const double len = q.norm();
            if (len > 0) q *= radius * std::pow(unit(rng), 1.0 / n) / len;
            ps.push_back(ew * q);  // |p|_g = |q|
        }
        for (const Eigen::VectorXd& p : ps) {
            const HValue hv = h_at(spec, x, p);
            // spectrum of g h_pp, via the similar symmetric matrix L^T h_pp L with g = L L^T
            const Eigen::MatrixXd Lg = g.llt().matrixL();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Lg.transpose() * hv.dpp * Lg, Eigen::EigenvaluesOnly);
            out.push_back({node, p, std::sqrt(gradient_norm2(m, node, p)), hv.value,
                           std::sqrt(std::max(0.0, hv.dp.dot(g * hv.dp))), es.eigenvalues().minCoeff()});
        }
    }
    return out;
}

std::string node_text(const DiscreteManifold& m, long node) {
    return "node " + std::to_string(node) + " at x = " + vec_text(m.coords(node));
}

void append(ConditionReport& into, const ConditionReport& from, const std::string& prefix) {
    for (ConditionItem it : from.items) {
        it.name = prefix + it.name;
        into.items.push_back(std::move(it));
    }
}

bool is_schouten_tag(CaseTag t) { return t == CaseTag::C31 || t == CaseTag::C32a || t == CaseTag::C32b; }
bool is_local_tag(CaseTag t) { return t != CaseTag::T2; }

}  // namespace

ConditionReport hypothesis_audit(const EquationSpec& spec, const ScalarField& u, CaseTag tag, double r,
                                 const EstimateOptions& opts) {
    const DiscreteManifold& m = *spec.manifold;
    const int n = m.n();
    const double tol = opts.slack_tol;
    ConditionReport rep;
    rep.subject = to_string(tag) + " on " + spec.preset + " (" + spec.op.describe() + ")";

    const std::vector<NodeState> states = audited_states(spec, u, r, opts.collar);
    {
        Item cone("cone membership");
        for (const NodeState& s : states) {
            cone.record(s.in_cone ? cone_margin(s.lambda, spec.op.cone) : -1.0, 0.0,
                        node_text(m, s.node) + ", eigenvalues " + vec_text(s.lambda));
        }
        if (states.empty()) cone.fact(false, "no equation nodes in the ball");
        rep.items.push_back(cone.done());
    }
    const std::vector<long> nodes = thin(states, opts.max_audit_nodes);
    std::vector<EigenVector> spectra;
    for (const NodeState& s : states)
        if (s.in_cone && std::binary_search(nodes.begin(), nodes.end(), s.node))
            spectra.emplace_back(s.lambda / s.lambda.cwiseAbs().maxCoeff());  // F is 1-homogeneous
    if (!spectra.empty()) append(rep, check_structure(spec.op, spectra), "");

    if (is_local_tag(tag)) {
        Item d1("delta1 > 0"), d2("delta2 > 0"), bcond("b < -delta1"), abcond("a + n b < -delta2");
        d1.fact(spec.delta1 && *spec.delta1 > 0,
                spec.delta1 ? "delta1 = " + format_real(*spec.delta1) : "delta1 not recorded");
        d2.fact(spec.delta2 && *spec.delta2 > 0,
                spec.delta2 ? "delta2 = " + format_real(*spec.delta2) : "delta2 not recorded");
        const double del1 = spec.delta1.value_or(0.0), del2 = spec.delta2.value_or(0.0);
        for (long node = 0; node < m.node_count(); ++node) {
            if (!in_ball(m, node, r)) continue;
            const double a = spec.a_nodes[node], b = spec.b_nodes[node];
            bcond.record(-del1 - b, tol * (1 + std::abs(b)),
                         node_text(m, node) + ": b = " + format_real(b) + ", -delta1 = " + format_real(-del1));
            abcond.record(-del2 - (a + n * b), tol * (1 + std::abs(a) + n * std::abs(b)),
                          node_text(m, node) + ": a + n b = " + format_real(a + n * b) +
                              ", -delta2 = " + format_real(-del2));
        }
        rep.items.push_back(d1.done());
        rep.items.push_back(d2.done());
        rep.items.push_back(bcond.done());
        rep.items.push_back(abcond.done());
    }

    const GridDerivatives d = grid_derivatives(u);
    const double radius = 2.0 * sup_gradient(m, d, r);

    switch (tag) {
        case CaseTag::T1a:
        case CaseTag::C31:
        case CaseTag::C32a:
        case CaseTag::C32b: {
            Item h("h constant");
            h.fact(spec.H.is_constant() && !spec.Phi, "h = " + spec.H.text() + (spec.Phi ? " * Phi(T)" : ""));
            rep.items.push_back(h.done());
            if (tag == CaseTag::C31) {
                Item p("Schouten quotient equation");
                p.fact(spec.preset == "schouten" && spec.op.kind == OperatorKind::Quotient,
                       "preset " + spec.preset);
                rep.items.push_back(p.done());
            } else if (tag != CaseTag::T1a) {
                Item p("linear-combination Schouten equation");
                p.fact(spec.preset == "lc_schouten" && spec.op.kind == OperatorKind::LinearCombRoot,
                       "preset " + spec.preset);
                const std::string want = tag == CaseTag::C32a ? "exp(-2*z)" : "exp(2*z)";
                Item ef(tag == CaseTag::C32a ? "f = f0 exp(-2u)" : "f = f0 exp(2u)");
                ef.fact(spec.E.text() == want, "f = G * " + spec.E.text());
                Item ts("t, s >= 0 and t + s >= 1");
                ts.fact(spec.op.t >= 0 && spec.op.s >= 0 && spec.op.t + spec.op.s >= 1,
                        "t = " + format_real(spec.op.t) + ", s = " + format_real(spec.op.s));
                rep.items.push_back(p.done());
                rep.items.push_back(ef.done());
                rep.items.push_back(ts.done());
            }
            break;
        }
        case CaseTag::T1b: {
            Item fz("f = f(x)"), hp("h = h(du)"), lam("Lambda supplied"), mm("M supplied");
            fz.fact(!spec.E.uses_z(), "E = " + spec.E.text());
            hp.fact(!spec.H.uses_x() && !spec.Phi, "h = " + spec.H.text() + (spec.Phi ? " * Phi(T)" : ""));
            lam.fact(spec.Lambda.has_value(), spec.Lambda ? "Lambda = " + spec.Lambda->text() : "none");
            mm.fact(spec.M && *spec.M > 0, spec.M ? "M = " + format_real(*spec.M) : "none");
            rep.items.push_back(fz.done());
            rep.items.push_back(hp.done());
            rep.items.push_back(lam.done());
            rep.items.push_back(mm.done());
            if (spec.Lambda && spec.M) {
                Item conv("h_pp >= Lambda g^-1"), grow("h <= M Lambda (1 + |p|)^2"),
                    slope("|h_p| <= M Lambda (1 + |p|)"), pos("Lambda > 0");
                const double M = *spec.M;
                for (const PSample& s : sample_h(spec, u, nodes, radius, opts)) {
                    Bindings<double> b;
                    b.p = std::span<const double>(s.p.data(), s.p.size());
                    const double pp = s.pnorm * s.pnorm;
                    b.pp = &pp;
                    const double L = spec.Lambda->eval(b);
                    const std::string w = node_text(m, s.node) + ", p = " + vec_text(s.p);
                    pos.record(L, 0.0, w + ", Lambda = " + format_real(L));
                    conv.record(s.hpp_floor - L, tol * (1 + L), w + ", min eig(g h_pp) = " + format_real(s.hpp_floor));
                    const double g2 = M * L * (1 + s.pnorm) * (1 + s.pnorm);
                    grow.record(g2 - s.h, tol * (1 + g2), w + ", h = " + format_real(s.h));
                    const double g1 = M * L * (1 + s.pnorm);
                    slope.record(g1 - s.hp_norm, tol * (1 + g1), w + ", |h_p| = " + format_real(s.hp_norm));
                }
                rep.items.push_back(pos.done());
                rep.items.push_back(conv.done());
                rep.items.push_back(grow.done());
                rep.items.push_back(slope.done());
            }
            break;
        }
        case CaseTag::T1c: {
            Item g2("cone inside Gamma_2+"), ca("condition (A) constants");
            const ConeSpec& c = spec.op.cone;
            g2.fact(c.kind == ConeSpec::Kind::PositiveK && c.k >= 2, "cone " + c.describe());
            ca.fact(spec.op.condition_a.has_value(), spec.op.describe());
            rep.items.push_back(g2.done());
            rep.items.push_back(ca.done());
            if (spec.op.condition_a && !spectra.empty()) append(rep, check_condition_a(spec.op, spectra), "");
            break;
        }
        case CaseTag::T2: {
            Item form("constant-curvature form"), k("K >= 0"), hp("h = h(du)"), conv("h_pp >= eps g^-1, eps > 0");
            form.fact(spec.csc_form, "a = " + spec.a.text() + ", b = " + spec.b.text());
            k.fact(m.K() >= 0, "K = " + format_real(m.K()));
            hp.fact(!spec.H.uses_x() && !spec.Phi, "h = " + spec.H.text());
            for (const PSample& s : sample_h(spec, u, nodes, radius, opts)) {
                conv.record(s.hpp_floor, 0.0,
                            node_text(m, s.node) + ", p = " + vec_text(s.p) + ", eps = " + format_real(s.hpp_floor));
            }
            rep.items.push_back(form.done());
            rep.items.push_back(k.done());
            rep.items.push_back(hp.done());
            ConditionItem c = conv.done();
            c.passed = c.passed && c.worst_slack > 0;
            rep.items.push_back(c);
            break;
        }
    }
    return rep;
}

namespace {

void require_hypotheses(const ConditionReport& audit) {
    for (const ConditionItem& it : audit.items) {
        if (!it.passed) throw HypothesisError(it.name + " violated: " + it.witness);
    }
}

void require_solved(const EquationSpec& spec, const ScalarField& u, double r, const EstimateOptions& opts) {
    double worst = 0.0;
    long at = -1;
    for (const NodeState& s : audited_states(spec, u, r, opts.collar)) {
        if (!s.in_cone) continue;  // reported by the audit
        if (std::abs(s.residual) > worst) {
            worst = std::abs(s.residual);
            at = s.node;
        }
    }
    if (worst > opts.solved_tol) {
        throw DomainError("state does not solve the equation on the ball: residual " + format_real(worst) +
                          " at node " + std::to_string(at));
    }
}

double finite_ratio(double q, double b) { return q == 0.0 ? 0.0 : q / b; }

}  // namespace

EstimateReport local_estimate_report(const EquationSpec& spec, const ScalarField& u, double r, CaseTag tag,
                                     const EstimateOptions& opts) {
    if (tag == CaseTag::T2) throw DomainError("T2 is reported by max_principle_report");
    if (!(r > 0)) throw DomainError("ball radius must be positive");
    const DiscreteManifold& m = *spec.manifold;
    if (!u.manifold->same_shape(m)) throw DomainError("field and equation live on different manifolds");
    require_hypotheses(hypothesis_audit(spec, u, tag, r, opts));
    require_solved(spec, u, r, opts);

    EstimateReport rep;
    rep.case_tag = tag;
    rep.r = r;
    rep.collar = opts.collar;
    rep.delta1 = spec.delta1;
    rep.delta2 = spec.delta2;
    const BoundData bd = bound_data(spec, u, r);
    rep.c_inf = bd.c_inf;
    rep.c_sup = bd.c_sup;
    rep.e_sup = bd.e_sup;
    rep.sup_grad = bd.sup_grad;

    const GridDerivatives d = grid_derivatives(u);
    const bool with_grad = tag != CaseTag::T1c;
    Eigen::VectorXd p(m.n());
    for (long node = 0; node < m.node_count(); ++node) {
        if (!in_ball(m, node, r / 2) || m.collar(node) < opts.collar) continue;
        ++rep.measured_nodes;
        for (int i = 0; i < m.n(); ++i) p[i] = d.du.comps[i][node];
        double q = spectral_norm(m, node, d.hess.matrix(node));
        if (with_grad) q += gradient_norm2(m, node, p);
        if (q > rep.quantity || rep.argmax_node < 0) {
            rep.quantity = q;
            rep.argmax_node = node;
        }
    }
    if (rep.measured_nodes == 0) throw DomainError("no interior nodes in the half ball; refine the grid");

    const double sign = tag == CaseTag::C32b ? 2.0 : -2.0;
    if (is_schouten_tag(tag)) {
        for (long node = 0; node < m.node_count(); ++node)
            if (in_ball(m, node, r)) rep.sup_exp = std::max(rep.sup_exp, std::exp(sign * u.values[node]));
    }
    const double r2 = 1.0 / (r * r);
    switch (tag) {
        case CaseTag::T1a: rep.bound_expr = r2 + rep.c_sup; break;
        case CaseTag::T1b: rep.bound_expr = r2 + rep.c_sup + 1.0 / rep.c_inf; break;
        case CaseTag::T1c: rep.bound_expr = r2 + rep.c_sup * rep.e_sup + rep.sup_grad * rep.sup_grad; break;
        case CaseTag::C31: rep.bound_expr = r2 + rep.sup_exp; break;
        case CaseTag::C32a:
        case CaseTag::C32b: rep.bound_expr = 1.0 + rep.sup_exp; break;
        case CaseTag::T2: break;
    }
    rep.ratio = finite_ratio(rep.quantity, rep.bound_expr);
    return rep;
}

EstimateReport max_principle_report(const EquationSpec& spec, const ScalarField& u, std::optional<double> c4_star,
                                    const EstimateOptions& opts) {
    const DiscreteManifold& m = *spec.manifold;
    if (!u.manifold->same_shape(m)) throw DomainError("field and equation live on different manifolds");
    if (!spec.csc_form) throw HypothesisError("constant-curvature form violated: b = 0, a constant, B = K g required");
    if (m.K() < 0) throw HypothesisError("K >= 0 violated: K = " + format_real(m.K()));
    const ConditionReport audit = hypothesis_audit(spec, u, CaseTag::T2, kInf, opts);
    require_hypotheses(audit);
    require_solved(spec, u, kInf, opts);

    EstimateReport rep;
    rep.case_tag = CaseTag::T2;
    rep.r = kInf;
    rep.collar = opts.collar;
    rep.epsilon = audit.find("h_pp >= eps g^-1, eps > 0")->worst_slack;
    const BoundData bd = bound_data(spec, u, kInf);
    rep.c_inf = bd.c_inf;
    rep.c_sup = bd.c_sup;
    rep.e_sup = bd.e_sup;
    rep.sup_grad = bd.sup_grad;

    const GridDerivatives d = grid_derivatives(u);
    double umax = 0.0;
    for (long node = 0; node < m.node_count(); ++node) {
        umax = std::max(umax, std::abs(u.values[node]));
        const double hn = spectral_norm(m, node, d.hess.matrix(node));
        if (m.is_boundary(node)) {
            rep.boundary_sup = std::max(rep.boundary_sup, hn);
        } else if (m.collar(node) >= opts.collar) {
            ++rep.measured_nodes;
            if (hn > rep.interior_sup || rep.argmax_node < 0) {
                rep.interior_sup = hn;
                rep.argmax_node = node;
            }
        }
    }
    rep.c1_norm = umax + bd.sup_grad;
    rep.quantity = rep.interior_sup;
    rep.c4_star = c4_star;
    rep.bound_expr = std::max(rep.boundary_sup, c4_star.value_or(0.0));
    rep.ratio = finite_ratio(rep.quantity, rep.bound_expr);
    rep.bound_holds = !c4_star || rep.interior_sup <= rep.bound_expr;
    return rep;
}

double c4_scale(const EstimateReport& r) {
    return (r.c_sup / r.c_inf) * (r.e_sup / r.epsilon) * (1.0 + r.c1_norm);
}

C4Fit fit_c4(const std::vector<EstimateReport>& calibration) {
    if (calibration.empty()) throw DomainError("fitting C4* needs a calibration family");
    C4Fit fit;
    for (const EstimateReport& r : calibration) {
        if (r.case_tag != CaseTag::T2) throw DomainError("C4* is fitted on maximum-principle reports");
        fit.kappa = std::max(fit.kappa, r.interior_sup / c4_scale(r));
    }
    return fit;
}

EstimateReport apply_c4(EstimateReport r, const C4Fit& fit) {
    r.c4_star = fit.c4_star(r);
    r.bound_expr = std::max(r.boundary_sup, *r.c4_star);
    r.ratio = finite_ratio(r.quantity, r.bound_expr);
    r.bound_holds = r.interior_sup <= r.bound_expr;
    return r;
}

ScaledProblem rescale_problem(const EquationSpec& spec, const ScalarField& u, double r) {
    const DiscreteManifold& m = *spec.manifold;
    if (m.kind() != ChartKind::EuclideanDomain) throw UnsupportedError("rescaling needs a flat EuclideanDomain chart");
    if (!spec.a.is_constant() || !spec.b.is_constant() || !spec.H.is_constant() || spec.Phi) {
        throw UnsupportedError("rescaling needs constant a, b and h");
    }
    const bool flat_B = spec.B.kind != TensorTerm::Kind::Metric || spec.B.scale == 0.0;
    if (!flat_B) throw UnsupportedError("rescaling needs B = 0 on the flat chart");

    ScaledProblem out;
    out.r = r;
    out.u = rescale_ball(u, r);
    const ManifoldPtr& mt = out.u.manifold;
    // E(x, u(x)) on the original grid, carried to the sub-box
    Eigen::VectorXd e_orig(m.node_count());
    for (long node = 0; node < m.node_count(); ++node) {
        const Eigen::VectorXd x = m.coords(node);
        Bindings<double> b;
        b.x = std::span<const double>(x.data(), x.size());
        b.z = &u.values[node];
        e_orig[node] = spec.E.eval(b);
    }
    const Eigen::VectorXd G_sub = restrict_to_box(ScalarField(spec.manifold, spec.G_nodes), r).values;
    const Eigen::VectorXd E_sub = restrict_to_box(ScalarField(spec.manifold, e_orig), r).values;

    EquationSpec s = spec;
    s.manifold = mt;
    s.manufactured = nullptr;
    s.G_sampled = true;
    s.G_nodes.resize(mt->node_count());
    for (long node = 0; node < mt->node_count(); ++node) {
        const Eigen::VectorXd y = mt->coords(node);
        Bindings<double> b;
        b.x = std::span<const double>(y.data(), y.size());
        b.z = &out.u.values[node];
        // F scales by r^2 under the map, so r^2 G E(x, u) = G~ E(y, u~)
        s.G_nodes[node] = r * r * G_sub[node] * E_sub[node] / spec.E.eval(b);
    }
    s.prepare();
    out.spec = std::move(s);
    return out;
}

std::string EstimateReport::to_text() const {
    std::ostringstream os;
    os << "case " << to_string(case_tag) << '\n';
    os << "r " << format_real(r) << '\n';
    os << "quantity " << format_real(quantity) << '\n';
    os << "bound_expr " << format_real(bound_expr) << '\n';
    os << "ratio " << format_real(ratio) << '\n';
    os << "argmax_node " << argmax_node << '\n';
    os << "measured_nodes " << measured_nodes << '\n';
    os << "collar " << collar << '\n';
    if (delta1) os << "delta1 " << format_real(*delta1) << '\n';
    if (delta2) os << "delta2 " << format_real(*delta2) << '\n';
    os << "c_inf " << format_real(c_inf) << '\n';
    os << "c_sup " << format_real(c_sup) << '\n';
    os << "e_sup " << format_real(e_sup) << '\n';
    os << "sup_grad " << format_real(sup_grad) << '\n';
    if (case_tag == CaseTag::T2) {
        os << "interior_sup " << format_real(interior_sup) << '\n';
        os << "boundary_sup " << format_real(boundary_sup) << '\n';
        os << "c1_norm " << format_real(c1_norm) << '\n';
        os << "epsilon " << format_real(epsilon) << '\n';
        if (c4_star) os << "c4_star " << format_real(*c4_star) << '\n';
        os << "bound_holds " << (bound_holds ? "true" : "false") << '\n';
    } else {
        os << "sup_exp " << format_real(sup_exp) << '\n';
    }
    return os.str();
}

std::string estimate_table(const std::vector<EstimateReport>& reports) {
    std::ostringstream os;
    os << "case,r,quantity,bound,ratio,c_inf,c_sup,e_sup,sup_grad,sup_exp,interior_sup,boundary_sup,c4_star,"
          "bound_holds,nodes\n";
    for (const EstimateReport& e : reports) {
        os << to_string(e.case_tag) << ',' << format_real(e.r) << ',' << format_real(e.quantity) << ','
           << format_real(e.bound_expr) << ',' << format_real(e.ratio) << ',' << format_real(e.c_inf) << ','
           << format_real(e.c_sup) << ',' << format_real(e.e_sup) << ',' << format_real(e.sup_grad) << ','
           << format_real(e.sup_exp) << ',' << format_real(e.interior_sup) << ',' << format_real(e.boundary_sup)
           << ',' << (e.c4_star ? format_real(*e.c4_star) : std::string("-")) << ','
           << (e.bound_holds ? "true" : "false") << ',' << e.measured_nodes << '\n';
    }
    return os.str();
}

}  // namespace khess
