#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "khess/errors.hpp"
#include "khess/geometry.hpp"
#include "khess/report.hpp"

namespace khess {

namespace {

int ipow(int b, int e) {
    int r = 1;
    while (e-- > 0) r *= b;
    return r;
}

int flat_index(std::initializer_list<int> idx, int n) {
    int f = 0;
    for (int i : idx) f = f * n + i;
    return f;
}

void require_same(const ManifoldPtr& a, const ManifoldPtr& b) {
    if (!a || !b || (a != b && !a->same_shape(*b))) throw DomainError("fields live on different manifolds");
}

}  // namespace

ScalarField::ScalarField(ManifoldPtr m, Eigen::VectorXd v) : manifold(std::move(m)), values(std::move(v)) {
    if (!manifold) throw DomainError("field without manifold");
    if (values.size() != manifold->node_count()) throw DomainError("field size does not match node count");
    if (!values.allFinite()) throw DomainError("field values must be finite");
}

ScalarField ScalarField::constant(ManifoldPtr m, double c) {
    const long count = m->node_count();
    return ScalarField(std::move(m), Eigen::VectorXd::Constant(count, c));
}

TensorField::TensorField(ManifoldPtr m, int r) : manifold(std::move(m)), rank(r) {
    comps.assign(ipow(manifold->n(), r), Eigen::VectorXd::Zero(manifold->node_count()));
}

Eigen::VectorXd& TensorField::at(std::initializer_list<int> idx) { return comps[flat_index(idx, n())]; }
const Eigen::VectorXd& TensorField::at(std::initializer_list<int> idx) const {
    return comps[flat_index(idx, n())];
}

Eigen::MatrixXd TensorField::matrix(long node) const {
    const int nn = n();
    Eigen::MatrixXd m(nn, nn);
    for (int i = 0; i < nn; ++i)
        for (int j = 0; j < nn; ++j) m(i, j) = comps[i * nn + j][node];
    return m;
}

void TensorField::set_matrix(long node, const Eigen::MatrixXd& m) {
    const int nn = n();
    for (int i = 0; i < nn; ++i)
        for (int j = 0; j < nn; ++j) comps[i * nn + j][node] = m(i, j);
}

Eigen::VectorXd partial(const DiscreteManifold& m, const Eigen::VectorXd& v, int axis, int order) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
    if (!m.axis_active(axis)) return out;
    const long stride = m.stride(axis);
    for (long node = 0; node < m.node_count(); ++node) {
        const int pos = m.position(node, axis);
        const long base = node - pos * stride;
        // weights sum to zero, so differences keep constants exactly in the kernel
        const double center = v[node];
        double acc = 0.0;
        for (const auto& [target, w] : m.stencil(axis, order, pos)) acc += w * (v[base + target * stride] - center);
        out[node] = acc;
    }
    return out;
}

Eigen::VectorXd partial2(const DiscreteManifold& m, const Eigen::VectorXd& v, int a, int b) {
    if (a == b) return partial(m, v, a, 2);
    return partial(m, partial(m, v, a, 1), b, 1);
}

TensorField covariant_gradient(const ScalarField& u) {
    TensorField g(u.manifold, 1);
    for (int i = 0; i < g.n(); ++i) g.comps[i] = partial(*u.manifold, u.values, i, 1);
    return g;
}

TensorField covariant_hessian(const ScalarField& u) {
    const DiscreteManifold& m = *u.manifold;
    const int n = m.n();
    TensorField du = covariant_gradient(u);
    TensorField hess(u.manifold, 2);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            Eigen::VectorXd c = partial2(m, u.values, i, j);
            if (m.kind() == ChartKind::SphereChart) {
                for (long node = 0; node < m.node_count(); ++node) {
                    double s = 0.0;
                    for (int k = 0; k < n; ++k) s += m.gamma(node, k, i, j) * du.comps[k][node];
                    c[node] -= s;
                }
            }
            hess.comps[i * n + j] = c;
            hess.comps[j * n + i] = c;
        }
    }
    return hess;
}

TensorField covariant_derivative(const TensorField& t) {
    const DiscreteManifold& m = *t.manifold;
    const int n = m.n();
    const int r = t.rank;
    TensorField out(t.manifold, r + 1);
    const int count = static_cast<int>(t.comps.size());
    std::vector<int> idx(r);
    for (int I = 0; I < count; ++I) {
        for (int p = 0; p < n; ++p) out.comps[I * n + p] = partial(m, t.comps[I], p, 1);
    }
    if (m.kind() != ChartKind::SphereChart) return out;
    std::vector<int> pw(r);
    for (int s = 0; s < r; ++s) pw[s] = ipow(n, r - 1 - s);
    for (int I = 0; I < count; ++I) {
        for (int s = 0; s < r; ++s) idx[s] = (I / pw[s]) % n;
        for (int p = 0; p < n; ++p) {
            Eigen::VectorXd& o = out.comps[I * n + p];
            for (long node = 0; node < m.node_count(); ++node) {
                double acc = 0.0;
                for (int s = 0; s < r; ++s) {
                    const int base = I - idx[s] * pw[s];
                    for (int q = 0; q < n; ++q) acc += m.gamma(node, q, p, idx[s]) * t.comps[base + q * pw[s]][node];
                }
                o[node] -= acc;
            }
        }
    }
    return out;
}

double gradient_norm2(const DiscreteManifold& m, long node, const Eigen::VectorXd& du) {
    return std::exp(-2.0 * m.omega(node)) * du.squaredNorm();
}

double spectral_norm(const DiscreteManifold& m, long node, const Eigen::MatrixXd& t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
    return std::exp(-2.0 * m.omega(node)) * es.eigenvalues().cwiseAbs().maxCoeff();
}

TensorField augmented_tensor(const ScalarField& u, const ScalarField& a, const ScalarField& b,
                             const TensorField& B) {
    require_same(u.manifold, a.manifold);
    require_same(u.manifold, b.manifold);
    require_same(u.manifold, B.manifold);
    if (B.rank != 2) throw DomainError("B must be a rank-2 tensor field");
    const DiscreteManifold& m = *u.manifold;
    const int n = m.n();
    TensorField W = covariant_hessian(u);
    TensorField du = covariant_gradient(u);
    Eigen::VectorXd p(n);
    for (long node = 0; node < m.node_count(); ++node) {
        for (int i = 0; i < n; ++i) p[i] = du.comps[i][node];
        Eigen::MatrixXd w = W.matrix(node) + a.values[node] * p * p.transpose() +
                            b.values[node] * gradient_norm2(m, node, p) * m.metric(node) + B.matrix(node);
        W.set_matrix(node, (0.5 * (w + w.transpose())).eval());
    }
    return W;
}

TensorField metric_field(const ManifoldPtr& m) {
    TensorField g(m, 2);
    for (long node = 0; node < m->node_count(); ++node) g.set_matrix(node, m->metric(node));
    return g;
}

TensorField schouten(const ManifoldPtr& m) {
    const int n = m->n();
    if (n < 3) throw UnsupportedError("the Schouten tensor needs n >= 3");
    TensorField A(m, 2);
    if (m->kind() != ChartKind::SphereChart) return A;
    for (long node = 0; node < m->node_count(); ++node) {
        const CurvatureData c = m->curvature(node);
        Eigen::MatrixXd a = (c.ricci - c.scalar / (2.0 * (n - 1)) * m->metric(node)) / (n - 2.0);
        A.set_matrix(node, (0.5 * (a + a.transpose())).eval());
    }
    return A;
}

CommutationResidual commutation_residual(const ScalarField& u, int margin) {
    const DiscreteManifold& m = *u.manifold;
    const int n = m.n();
    CommutationResidual res;
    res.margin = m.periodic() ? 0 : (margin < 0 ? 6 : margin);
    const TensorField du = covariant_gradient(u);
    const TensorField u2 = covariant_hessian(u);
    const TensorField u3 = covariant_derivative(u2);
    const TensorField u4 = covariant_derivative(u3);
    auto i3 = [n](int i, int j, int k) { return (i * n + j) * n + k; };
    auto i4 = [n](int i, int j, int k, int l) { return ((i * n + j) * n + k) * n + l; };
    const bool curved = m.kind() == ChartKind::SphereChart;
    for (long node = 0; node < m.node_count(); ++node) {
        if (m.collar(node) < res.margin) continue;
        const double gi = std::exp(-2.0 * m.omega(node));  // g^{ab} = gi delta
        CurvatureData c;
        if (curved) c = m.curvature(node);
        auto R = [&](int a, int b, int cc, int d) { return curved ? c.R(a, b, cc, d) : 0.0; };
        auto ric = [&](int a, int b) { return curved ? c.ricci(a, b) : 0.0; };
        auto dric = [&](int a, int b, int p) { return curved ? c.d_ricci[(a * n + b) * n + p] : 0.0; };
        auto driem = [&](int a, int b, int cc, int d, int p) {
            return curved ? c.d_riemann[i4(a, b, cc, d) * n + p] : 0.0;
        };
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                for (int k = 0; k < n; ++k) {
                    double v = u3.comps[i3(k, i, j)][node] - u3.comps[i3(i, j, k)][node];
                    for (int q = 0; q < n; ++q) v -= gi * R(q, i, k, j) * du.comps[q][node];
                    res.r3 = std::max(res.r3, std::abs(v));
                }
                double v = 0.0;
                for (int k = 0; k < n; ++k) {
                    v += gi * (u4.comps[i4(k, k, i, j)][node] - u4.comps[i4(i, j, k, k)][node]);
                    for (int q = 0; q < n; ++q) {
                        v -= 2.0 * gi * gi * R(q, i, k, j) * u2.comps[q * n + k][node];
                        v -= gi * gi * driem(q, i, k, j, k) * du.comps[q][node];
                    }
                }
                for (int q = 0; q < n; ++q) {
                    v += gi * (ric(q, j) * u2.comps[q * n + i][node] + ric(q, i) * u2.comps[q * n + j][node]);
                    v += gi * dric(q, i, j) * du.comps[q][node];
                }
                res.r4 = std::max(res.r4, std::abs(v));
            }
        }
    }
    return res;
}

ScalarField restrict_to_box(const ScalarField& u, double r) {
    const DiscreteManifold& m = *u.manifold;
    if (m.kind() != ChartKind::EuclideanDomain) throw DomainError("ball rescaling needs a flat EuclideanDomain chart");
    if (!(r > 0.0 && r <= 1.0)) throw DomainError("rescaling radius must lie in (0, 1]");
    if (r > m.L() / 2.0 + 1e-12) throw DomainError("rescaling radius exceeds the chart");
    const double steps = r / m.h();
    const int k = static_cast<int>(std::lround(steps));
    if (std::abs(steps - k) > 1e-9 || m.N() % 2 != 0) {
        throw DomainError("the radius-r sub-box must consist of whole grid cells around the center node");
    }
    ChartParams p = m.params();
    p.N = 2 * k;
    p.L = 2.0 * r;
    auto sub = make_manifold(p);
    Eigen::VectorXd v(sub->node_count());
    const int shift = m.N() / 2 - k;
    std::vector<int> idx(m.n());
    for (long node = 0; node < sub->node_count(); ++node) {
        for (int a = 0; a < m.n(); ++a) idx[a] = sub->position(node, a) + (m.axis_active(a) ? shift : 0);
        v[node] = u.values[m.node_at(idx)];
    }
    return ScalarField(sub, v);
}

ScalarField rescale_ball(const ScalarField& u, double r) {
    ScalarField sub = restrict_to_box(u, r);
    ChartParams p = sub.manifold->params();
    p.L = 2.0;
    return ScalarField(make_manifold(p), (sub.values.array() - std::log(r)).matrix());
}

ScalarField unscale_ball(const ScalarField& rescaled, double r) {
    if (!(r > 0.0 && r <= 1.0)) throw DomainError("rescaling radius must lie in (0, 1]");
    ChartParams p = rescaled.manifold->params();
    p.L = 2.0 * r;
    return ScalarField(make_manifold(p), (rescaled.values.array() + std::log(r)).matrix());
}

void write_field(std::ostream& os, const ScalarField& u) {
    const ChartParams& p = u.manifold->params();
    os << "khess-field 1\n"
       << "chart " << to_string(p.kind) << "\n"
       << "n " << p.n << "\n"
       << "N " << p.N << "\n"
       << "L " << format_real(p.L) << "\n"
       << "rho " << format_real(p.rho) << "\n"
       << "active " << u.manifold->active_axes() << "\n"
       << "nodes " << u.manifold->node_count() << "\n";
    for (long i = 0; i < u.values.size(); ++i) os << format_real(u.values[i]) << "\n";
}

ScalarField read_field(std::istream& is) {
    std::string line;
    int lineno = 0;
    auto next = [&](const std::string& key) {
        if (!std::getline(is, line)) throw ParseError("unexpected end of field header", "line " + std::to_string(lineno + 1));
        ++lineno;
        std::istringstream ls(line);
        std::string k, v;
        ls >> k >> v;
        if (k != key || v.empty()) {
            throw ParseError("expected '" + key + " <value>'", "line " + std::to_string(lineno));
        }
        return v;
    };
    if (next("khess-field") != "1") throw ParseError("unsupported field format version", "line 1");
    ChartParams p;
    p.kind = chart_kind_from_string(next("chart"));
    p.n = std::stoi(next("n"));
    p.N = std::stoi(next("N"));
    p.L = std::stod(next("L"));
    p.rho = std::stod(next("rho"));
    p.active = std::stoi(next("active"));
    const long count = std::stol(next("nodes"));
    auto m = make_manifold(p);
    if (count != m->node_count()) throw ParseError("node count does not match the chart", "line 8");
    Eigen::VectorXd v(count);
    for (long i = 0; i < count; ++i) {
        if (!std::getline(is, line)) throw ParseError("missing node value", "line " + std::to_string(lineno + 1));
        ++lineno;
        try {
            v[i] = std::stod(line);
        } catch (const std::exception&) {
            throw ParseError("malformed node value", "line " + std::to_string(lineno));
        }
    }
    return ScalarField(m, v);
}

}  // namespace khess
