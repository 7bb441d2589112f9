#include <algorithm>
#include <cmath>

#include "khess/errors.hpp"
#include "khess/geometry.hpp"

namespace khess {

namespace {

constexpr int kCentralHalfWidth = 2;

std::vector<std::pair<int, double>> make_stencil(int pos, int count, bool periodic, int order,
                                                 double h) {
    std::vector<int> window;
    if (periodic) {
        for (int o = -kCentralHalfWidth; o <= kCentralHalfWidth; ++o) window.push_back(o);
    } else if (pos - kCentralHalfWidth >= 0 && pos + kCentralHalfWidth < count) {
        for (int o = -kCentralHalfWidth; o <= kCentralHalfWidth; ++o) window.push_back(o);
    } else {
        // one-sided, fourth order: m + 4 points
        const int width = order + 4;
        const int start = std::clamp(pos - width / 2, 0, count - width);
        for (int q = start; q < start + width; ++q) window.push_back(q - pos);
    }
    std::vector<double> xs(window.begin(), window.end());
    std::vector<double> w = fornberg_weights(0.0, xs, order);
    const double scale = std::pow(h, -order);
    std::vector<std::pair<int, double>> out;
    for (std::size_t i = 0; i < window.size(); ++i) {
        int target = pos + window[i];
        if (periodic) target = ((target % count) + count) % count;
        out.emplace_back(target, w[i] * scale);
    }
    return out;
}

}  // namespace

std::string to_string(ChartKind kind) {
    switch (kind) {
        case ChartKind::FlatTorus: return "torus";
        case ChartKind::EuclideanDomain: return "domain";
        case ChartKind::SphereChart: return "sphere";
    }
    return "?";
}

ChartKind chart_kind_from_string(const std::string& name) {
    if (name == "torus") return ChartKind::FlatTorus;
    if (name == "domain") return ChartKind::EuclideanDomain;
    if (name == "sphere") return ChartKind::SphereChart;
    throw DomainError("unknown chart kind '" + name + "' (expected torus, domain or sphere)");
}

std::vector<double> fornberg_weights(double x0, std::span<const double> xs, int m) {
    const int np = static_cast<int>(xs.size());
    if (m < 0 || m >= np) throw DomainError("stencil too small for the derivative order");
    // c[j][k]: weight of node j for the k-th derivative
    std::vector<std::vector<double>> c(np, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < np; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = xs[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> out(np);
    for (int j = 0; j < np; ++j) out[j] = c[j][m];
    return out;
}

DiscreteManifold::DiscreteManifold(const ChartParams& params) : params_(params) {
    const int n = params.n;
    if (n < 2 || n > 6) throw DomainError("chart dimension must be in 2..6");
    if (!(params.L > 0.0) || !std::isfinite(params.L)) throw DomainError("chart side length must be positive");
    active_ = params.active == 0 ? n : params.active;
    if (active_ < 1 || active_ > n) throw DomainError("active axis count must be in 1..n");
    if (active_ < n && params.kind == ChartKind::SphereChart) {
        throw DomainError("inactive axes are only supported on flat charts");
    }
    const bool per = periodic();
    const int min_n = per ? 5 : 6;
    if (params.N < min_n) {
        throw DomainError("resolution too low: N must be >= " + std::to_string(min_n) + " for " +
                          to_string(params.kind) + " charts");
    }
    if (params.kind == ChartKind::SphereChart) {
        if (!(params.rho > 0.0)) throw DomainError("sphere radius must be positive");
        if (!(params.L * std::sqrt(static_cast<double>(n)) / 2.0 < 1.0)) {
            throw DomainError("sphere chart box must satisfy L sqrt(n) / 2 < 1");
        }
    }
    h_ = params.L / params.N;
    const int count = per ? params.N : params.N + 1;
    extent_.assign(n, 1);
    for (int a = 0; a < active_; ++a) extent_[a] = count;
    stride_.assign(n, 1);
    for (int a = n - 2; a >= 0; --a) stride_[a] = stride_[a + 1] * extent_[a + 1];
    node_count_ = stride_[0] * extent_[0];
    n3_ = static_cast<long>(n) * n * n;

    stencils_.resize(2);
    for (int order = 1; order <= 2; ++order) {
        for (int p = 0; p < count; ++p) stencils_[order - 1].push_back(make_stencil(p, count, per, order, h_));
    }

    omega_.assign(node_count_, 0.0);
    christoffel_.assign(node_count_ * n3_, 0.0);
    if (params.kind == ChartKind::SphereChart) {
        for (long node = 0; node < node_count_; ++node) {
            const Eigen::VectorXd x = coords(node);
            const double q = 1.0 + x.squaredNorm();
            omega_[node] = std::log(2.0 * params.rho) - std::log(q);
            Eigen::VectorXd dw = -2.0 * x / q;
            double* G = christoffel_.data() + node * n3_;
            for (int k = 0; k < n; ++k) {
                for (int i = 0; i < n; ++i) {
                    for (int j = 0; j < n; ++j) {
                        double v = 0.0;
                        if (i == k) v += dw[j];
                        if (j == k) v += dw[i];
                        if (i == j) v -= dw[k];
                        G[(k * n + i) * n + j] = v;
                    }
                }
            }
        }
    }
}

double DiscreteManifold::K() const {
    return params_.kind == ChartKind::SphereChart ? 1.0 / (params_.rho * params_.rho) : 0.0;
}

std::vector<int> DiscreteManifold::multi_index(long node) const {
    std::vector<int> idx(n());
    for (int a = 0; a < n(); ++a) idx[a] = position(node, a);
    return idx;
}

long DiscreteManifold::node_at(std::span<const int> index) const {
    long node = 0;
    for (int a = 0; a < n(); ++a) node += index[a] * stride_[a];
    return node;
}

Eigen::VectorXd DiscreteManifold::coords(long node) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n());
    for (int a = 0; a < active_; ++a) x[a] = -params_.L / 2.0 + position(node, a) * h_;
    return x;
}

bool DiscreteManifold::is_boundary(long node) const { return collar(node) == 0; }

int DiscreteManifold::collar(long node) const {
    if (periodic()) return 1 << 30;
    int c = 1 << 30;
    for (int a = 0; a < active_; ++a) {
        const int p = position(node, a);
        c = std::min({c, p, params_.N - p});
    }
    return c;
}

double DiscreteManifold::distance_from_origin(long node) const {
    const double r = coords(node).norm();
    if (params_.kind == ChartKind::SphereChart) return 2.0 * params_.rho * std::atan(r);
    return r;
}

double DiscreteManifold::coordinate_radius(double distance) const {
    if (params_.kind == ChartKind::SphereChart) return std::tan(distance / (2.0 * params_.rho));
    return distance;
}

Eigen::MatrixXd DiscreteManifold::metric(long node) const {
    return std::exp(2.0 * omega_[node]) * Eigen::MatrixXd::Identity(n(), n());
}

Eigen::MatrixXd DiscreteManifold::metric_inverse(long node) const {
    return std::exp(-2.0 * omega_[node]) * Eigen::MatrixXd::Identity(n(), n());
}

Jet DiscreteManifold::omega_jet(std::span<const Jet> x) const {
    const Jet& x0 = x[0];
    if (params_.kind != ChartKind::SphereChart) return Jet::constant(x0.nvars(), x0.order(), 0.0);
    Jet q = Jet::constant(x0.nvars(), x0.order(), 1.0);
    for (const Jet& xi : x) q += xi * xi;
    return std::log(2.0 * params_.rho) - log(q);
}

std::vector<Jet> DiscreteManifold::embedding_jet(std::span<const Jet> x) const {
    if (params_.kind != ChartKind::SphereChart) throw DomainError("embedding is defined on sphere charts only");
    const Jet& x0 = x[0];
    Jet r2 = Jet::constant(x0.nvars(), x0.order(), 0.0);
    for (const Jet& xi : x) r2 += xi * xi;
    Jet inv = reciprocal(1.0 + r2);
    std::vector<Jet> out;
    for (const Jet& xi : x) out.push_back(2.0 * xi * inv);
    out.push_back((1.0 - r2) * inv);
    return out;
}

CurvatureData DiscreteManifold::curvature_at(const Eigen::VectorXd& x0) const {
    const int n = this->n();
    CurvatureData c;
    c.n = n;
    c.riemann.assign(static_cast<std::size_t>(n) * n * n * n, 0.0);
    c.ricci = Eigen::MatrixXd::Zero(n, n);
    c.d_ricci.assign(static_cast<std::size_t>(n) * n * n, 0.0);
    c.d_riemann.assign(c.riemann.size() * n, 0.0);
    if (params_.kind != ChartKind::SphereChart) return c;

    constexpr int q = 3;
    std::vector<Jet> x;
    for (int i = 0; i < n; ++i) x.push_back(Jet::variable(n, q, i, x0[i]));
    const Jet w = omega_jet(x);
    std::vector<Jet> dw;
    for (int i = 0; i < n; ++i) dw.push_back(w.diff(i));
    const Jet zero = Jet::constant(n, q - 1, 0.0);
    // Gamma^k_ij jets, order 2
    std::vector<Jet> G(static_cast<std::size_t>(n) * n * n, zero);
    auto gi = [n](int k, int i, int j) { return (k * n + i) * n + j; };
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Jet v = zero;
                if (i == k) v += dw[j];
                if (j == k) v += dw[i];
                if (i == j) v -= dw[k];
                G[gi(k, i, j)] = v;
            }
    // standard R^l_ijk, order 1
    const Jet e2w = exp(2.0 * w.truncated(1));
    const Jet em2w = exp(-2.0 * w.truncated(1));
    std::vector<Jet> R(c.riemann.size(), Jet::constant(n, 1, 0.0));
    auto ri = [n](int i, int j, int k, int l) { return ((i * n + j) * n + k) * n + l; };
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    Jet v = G[gi(l, j, k)].diff(i) - G[gi(l, i, k)].diff(j);
                    for (int m = 0; m < n; ++m) {
                        v += (G[gi(l, i, m)] * G[gi(m, j, k)] - G[gi(l, j, m)] * G[gi(m, i, k)]).truncated(1);
                    }
                    // lowered with g_lm = e^{2w} delta, sign flipped to the space-form convention
                    R[ri(i, j, k, l)] = -1.0 * (e2w * v);
                }
    std::vector<Jet> Ric(static_cast<std::size_t>(n) * n, Jet::constant(n, 1, 0.0));
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
            Jet s = Jet::constant(n, 1, 0.0);
            for (int i = 0; i < n; ++i) s += R[ri(i, j, i, l)];
            Ric[j * n + l] = em2w * s;
        }
    for (std::size_t a = 0; a < R.size(); ++a) c.riemann[a] = R[a].value();
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) c.ricci(j, l) = Ric[j * n + l].value();
    c.scalar = std::exp(-2.0 * w.value()) * c.ricci.trace();

    auto gam = [&](int k, int i, int j) { return G[gi(k, i, j)].value(); };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int p = 0; p < n; ++p) {
                double v = Ric[i * n + j].derivative(p);
                for (int m = 0; m < n; ++m) {
                    v -= gam(m, p, i) * c.ricci(m, j) + gam(m, p, j) * c.ricci(i, m);
                }
                c.d_ricci[(i * n + j) * n + p] = v;
            }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    for (int p = 0; p < n; ++p) {
                        double v = R[ri(i, j, k, l)].derivative(p);
                        for (int m = 0; m < n; ++m) {
                            v -= gam(m, p, i) * c.R(m, j, k, l) + gam(m, p, j) * c.R(i, m, k, l) +
                                 gam(m, p, k) * c.R(i, j, m, l) + gam(m, p, l) * c.R(i, j, k, m);
                        }
                        c.d_riemann[ri(i, j, k, l) * n + p] = v;
                    }
    return c;
}

std::span<const std::pair<int, double>> DiscreteManifold::stencil(int axis, int order, int pos) const {
    if (!axis_active(axis)) throw DomainError("no stencil along an inactive axis");
    if (order < 1 || order > 2) throw DomainError("stencil order must be 1 or 2");
    return stencils_[order - 1][pos];
}

bool DiscreteManifold::same_shape(const DiscreteManifold& o) const {
    return params_.kind == o.params_.kind && params_.n == o.params_.n && params_.N == o.params_.N &&
           params_.L == o.params_.L && params_.rho == o.params_.rho && active_ == o.active_;
}

ManifoldPtr make_manifold(const ChartParams& params) {
    return std::make_shared<const DiscreteManifold>(params);
}

}  // namespace khess
