#include "khess/symfunc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "khess/errors.hpp"

namespace khess {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

// sigma_0..sigma_kmax of lambda with entries `skip_a`, `skip_b` removed (-1: none).
void partial_symmetric(const Eigen::VectorXd& lambda, int kmax, int skip_a, int skip_b,
                       double* out) {
    std::fill(out, out + kmax + 1, 0.0);
    out[0] = 1.0;
    for (int j = 0; j < lambda.size(); ++j) {
        if (j == skip_a || j == skip_b) continue;
        for (int k = kmax; k >= 1; --k) out[k] += lambda[j] * out[k - 1];
    }
}

// Ascending order with the permutation that produced it.
Eigen::VectorXd canonical(const Eigen::VectorXd& lambda, std::vector<int>& perm) {
    perm.resize(lambda.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) { return lambda[a] < lambda[b]; });
    Eigen::VectorXd sorted(lambda.size());
    for (int i = 0; i < lambda.size(); ++i) sorted[i] = lambda[perm[i]];
    return sorted;
}

Eigen::VectorXd to_cone_coordinates(const Eigen::VectorXd& lambda, const ConeSpec& cone) {
    if (cone.kind == ConeSpec::Kind::PositiveK) return lambda;
    const double trace = lambda.sum();
    return (cone.t * lambda.array() + cone.s * trace).matrix();
}

int first_failure(const Eigen::VectorXd& mu, int k, double& value) {
    Eigen::VectorXd e = elementary_symmetric(mu);
    for (int i = 1; i <= k; ++i) {
        if (!(e[i] > 0.0)) {
            value = e[i];
            return i;
        }
    }
    return 0;
}

[[noreturn]] void throw_cone(const OperatorSpec& spec, const Eigen::VectorXd& lambda, int i,
                             double value) {
    std::ostringstream os;
    os << "eigenvalues outside " << spec.cone.describe() << ": sigma_" << i << " = " << value
       << " at lambda = (";
    for (int j = 0; j < lambda.size(); ++j) os << (j ? ", " : "") << lambda[j];
    os << ")";
    throw ConeViolation(os.str(), i, value, -1,
                        std::vector<double>(lambda.data(), lambda.data() + lambda.size()));
}

void check_cone(const OperatorSpec& spec, const Eigen::VectorXd& lambda) {
    require(lambda.size() == spec.n, "eigenvalue count does not match operator dimension");
    double value = 0.0;
    const int i = first_failure(to_cone_coordinates(lambda, spec.cone), spec.cone.k, value);
    if (i != 0) throw_cone(spec, lambda, i, value);
}

// q(mu) = (sigma_k / sigma_l)^{1/(k-l)} with gradient and Hessian in mu.
struct CoreDerivatives {
    double value;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
};

CoreDerivatives quotient_core(const Eigen::VectorXd& mu, int k, int l, int order) {
    const int n = static_cast<int>(mu.size());
    const double p = 1.0 / (k - l);
    Eigen::VectorXd e = elementary_symmetric(mu);
    const double sk = e[k];
    const double sl = e[l];
    CoreDerivatives out;
    out.value = std::pow(sk / sl, p);
    if (order < 1) return out;

    std::vector<double> buf(n + 1);
    Eigen::VectorXd dk(n), dl(n);
    for (int i = 0; i < n; ++i) {
        partial_symmetric(mu, k, i, -1, buf.data());
        dk[i] = buf[k - 1];
        dl[i] = l >= 1 ? buf[l - 1] : 0.0;
    }
    // log q = p (log sigma_k - log sigma_l)
    Eigen::VectorXd g = p * (dk / sk - dl / sl);
    out.grad = out.value * g;
    if (order < 2) return out;

    Eigen::MatrixXd gij(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double skij = 0.0;
            double slij = 0.0;
            if (i != j) {
                partial_symmetric(mu, k, i, j, buf.data());
                skij = k >= 2 ? buf[k - 2] : 0.0;
                slij = l >= 2 ? buf[l - 2] : 0.0;
            }
            gij(i, j) = p * (skij / sk - dk[i] * dk[j] / (sk * sk) - slij / sl +
                             dl[i] * dl[j] / (sl * sl));
        }
    }
    out.hess = out.value * (g * g.transpose() + gij);
    return out;
}

CoreDerivatives operator_core(const OperatorSpec& spec, const Eigen::VectorXd& lambda, int order) {
    if (spec.kind != OperatorKind::LinearCombRoot) {
        CoreDerivatives c = quotient_core(lambda, spec.k, spec.l, order);
        c.value *= spec.normalization;
        if (order >= 1) c.grad *= spec.normalization;
        if (order >= 2) c.hess *= spec.normalization;
        return c;
    }
    const int n = spec.n;
    Eigen::VectorXd mu = to_cone_coordinates(lambda, spec.cone);
    CoreDerivatives c = quotient_core(mu, spec.k, 0, order);
    CoreDerivatives out;
    out.value = spec.normalization * c.value;
    if (order >= 1) {
        // dmu_j / dlambda_i = t delta_ij + s
        out.grad = spec.normalization * (spec.t * c.grad.array() + spec.s * c.grad.sum()).matrix();
    }
    if (order >= 2) {
        Eigen::MatrixXd jac = spec.t * Eigen::MatrixXd::Identity(n, n) +
                              spec.s * Eigen::MatrixXd::Ones(n, n);
        out.hess = spec.normalization * jac * c.hess * jac;
    }
    return out;
}

}  // namespace

EigenVector::EigenVector(Eigen::VectorXd values) : values_(std::move(values)) {
    require(values_.size() >= 2, "EigenVector needs n >= 2");
    require(values_.allFinite(), "EigenVector entries must be finite");
}

EigenVector::EigenVector(std::initializer_list<double> values)
    : EigenVector(Eigen::Map<const Eigen::VectorXd>(values.begin(),
                                                    static_cast<Eigen::Index>(values.size()))) {}

ConeSpec ConeSpec::positive(int k) {
    require(k >= 1, "cone index k must be >= 1");
    return ConeSpec{Kind::PositiveK, k, 1.0, 0.0};
}

ConeSpec ConeSpec::linear_comb(int k, double t, double s) {
    require(k >= 1, "cone index k must be >= 1");
    require(t >= 0.0 && s >= 0.0 && t + s >= 1.0, "linear-combination cone needs t, s >= 0, t + s >= 1");
    return ConeSpec{Kind::LinearComb, k, t, s};
}

std::string ConeSpec::describe() const {
    std::ostringstream os;
    if (kind == Kind::PositiveK) {
        os << "Gamma_" << k << "+";
    } else {
        os << "LinearComb(k=" << k << ", t=" << t << ", s=" << s << ")";
    }
    return os.str();
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

OperatorSpec OperatorSpec::sigma_k_root(int n, int k) {
    require(n >= 2, "operator dimension n must be >= 2");
    require(k >= 1 && k <= n, "SigmaKRoot needs 1 <= k <= n");
    OperatorSpec s;
    s.kind = OperatorKind::SigmaKRoot;
    s.n = n;
    s.k = k;
    s.l = 0;
    s.normalization = std::pow(binomial(n, k), -1.0 / k);
    s.cone = ConeSpec::positive(k);
    if (k >= 2) s.condition_a = ConditionAConstants{std::pow(n, -1.0 / (k - 1)), 1.0 / (k - 1)};
    return s;
}

OperatorSpec OperatorSpec::quotient(int n, int k, int l) {
    require(n >= 2, "operator dimension n must be >= 2");
    require(l >= 0 && l < k && k <= n, "Quotient needs 0 <= l < k <= n");
    OperatorSpec s;
    s.kind = OperatorKind::Quotient;
    s.n = n;
    s.k = k;
    s.l = l;
    const double p = 1.0 / (k - l);
    s.normalization = std::pow(binomial(n, k), -p) * std::pow(binomial(n, l), p);
    s.cone = ConeSpec::positive(k);
    return s;
}

OperatorSpec OperatorSpec::linear_comb_root(int n, int k, double t, double s_coef) {
    require(n >= 2, "operator dimension n must be >= 2");
    require(k >= 1 && k <= n, "LinearCombRoot needs 1 <= k <= n");
    OperatorSpec s;
    s.kind = OperatorKind::LinearCombRoot;
    s.n = n;
    s.k = k;
    s.l = 0;
    s.t = t;
    s.s = s_coef;
    s.cone = ConeSpec::linear_comb(k, t, s_coef);
    s.normalization = std::pow(binomial(n, k), -1.0 / k) / (t + n * s_coef);
    return s;
}

std::string OperatorSpec::describe() const {
    std::ostringstream os;
    switch (kind) {
        case OperatorKind::SigmaKRoot: os << "SigmaKRoot(n=" << n << ", k=" << k << ")"; break;
        case OperatorKind::Quotient:
            os << "Quotient(n=" << n << ", k=" << k << ", l=" << l << ")";
            break;
        case OperatorKind::LinearCombRoot:
            os << "LinearCombRoot(n=" << n << ", k=" << k << ", t=" << t << ", s=" << s << ")";
            break;
    }
    return os.str();
}

Eigen::VectorXd elementary_symmetric(const Eigen::VectorXd& lambda) {
    const int n = static_cast<int>(lambda.size());
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n + 1);
    e[0] = 1.0;
    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k >= 1; --k) e[k] += lambda[j] * e[k - 1];
    }
    return e;
}

double sigma(const Eigen::VectorXd& lambda, int k) {
    require(k >= 0 && k <= lambda.size(), "sigma_k needs 0 <= k <= n");
    if (k == 0) return 1.0;
    const int n = static_cast<int>(lambda.size());
    std::vector<double> e(k + 1, 0.0);
    e[0] = 1.0;
    for (int j = 0; j < n; ++j) {
        for (int i = std::min(j + 1, k); i >= 1; --i) e[i] += lambda[j] * e[i - 1];
    }
    return e[k];
}

double sigma(const EigenVector& lambda, int k) { return sigma(lambda.values(), k); }

bool in_cone(const Eigen::VectorXd& lambda, const ConeSpec& cone) {
    std::vector<int> perm;
    double value = 0.0;
    return first_failure(to_cone_coordinates(canonical(lambda, perm), cone), cone.k, value) == 0;
}

bool in_cone(const EigenVector& lambda, const ConeSpec& cone) { return in_cone(lambda.values(), cone); }

double cone_margin(const Eigen::VectorXd& lambda, const ConeSpec& cone) {
    std::vector<int> perm;
    Eigen::VectorXd mu = to_cone_coordinates(canonical(lambda, perm), cone);
    Eigen::VectorXd e = elementary_symmetric(mu);
    const int n = static_cast<int>(lambda.size());
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= cone.k; ++i) margin = std::min(margin, e[i] / binomial(n, i));
    return margin;
}

double evaluate(const OperatorSpec& spec, const Eigen::VectorXd& lambda) {
    std::vector<int> perm;
    Eigen::VectorXd sorted = canonical(lambda, perm);
    check_cone(spec, sorted);
    return operator_core(spec, sorted, 0).value;
}

double evaluate(const OperatorSpec& spec, const EigenVector& lambda) {
    return evaluate(spec, lambda.values());
}

Eigen::VectorXd gradient(const OperatorSpec& spec, const Eigen::VectorXd& lambda) {
    std::vector<int> perm;
    Eigen::VectorXd sorted = canonical(lambda, perm);
    check_cone(spec, sorted);
    Eigen::VectorXd g = operator_core(spec, sorted, 1).grad;
    Eigen::VectorXd out(lambda.size());
    for (int i = 0; i < lambda.size(); ++i) out[perm[i]] = g[i];
    return out;
}

Eigen::VectorXd gradient(const OperatorSpec& spec, const EigenVector& lambda) {
    return gradient(spec, lambda.values());
}

Eigen::MatrixXd hessian(const OperatorSpec& spec, const Eigen::VectorXd& lambda) {
    std::vector<int> perm;
    Eigen::VectorXd sorted = canonical(lambda, perm);
    check_cone(spec, sorted);
    Eigen::MatrixXd h = operator_core(spec, sorted, 2).hess;
    const int n = static_cast<int>(lambda.size());
    Eigen::MatrixXd out(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) out(perm[i], perm[j]) = h(i, j);
    }
    return out;
}

MatrixDerivative matrix_derivative(const OperatorSpec& spec, const Eigen::MatrixXd& w) {
    require(w.rows() == spec.n && w.cols() == spec.n, "matrix size does not match operator dimension");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w);
    require(eig.info() == Eigen::Success, "eigen-decomposition failed");
    MatrixDerivative out;
    out.eigenvalues = eig.eigenvalues();
    out.eigenvectors = eig.eigenvectors();
    out.value = evaluate(spec, out.eigenvalues);
    out.spectral_gradient = gradient(spec, out.eigenvalues);
    const Eigen::MatrixXd& q = out.eigenvectors;
    Eigen::MatrixXd d = q * out.spectral_gradient.asDiagonal() * q.transpose();
    out.dF = 0.5 * (d + d.transpose());
    return out;
}

MatrixDerivative matrix_derivative(const OperatorSpec& spec, const Eigen::MatrixXd& g,
                                   const Eigen::MatrixXd& w) {
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    require(llt.info() == Eigen::Success, "metric is not positive definite");
    const Eigen::MatrixXd lower = llt.matrixL();
    const Eigen::MatrixXd linv = lower.inverse();
    Eigen::MatrixXd s = linv * w * linv.transpose();
    s = (0.5 * (s + s.transpose())).eval();
    MatrixDerivative out = matrix_derivative(spec, s);
    Eigen::MatrixXd d = linv.transpose() * out.dF * linv;
    out.dF = 0.5 * (d + d.transpose());
    return out;
}

Eigen::MatrixXd matrix_second_derivative(const OperatorSpec& spec, const Eigen::MatrixXd& w,
                                         const Eigen::MatrixXd& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w);
    require(eig.info() == Eigen::Success, "eigen-decomposition failed");
    const Eigen::VectorXd& lam = eig.eigenvalues();
    const Eigen::MatrixXd& q = eig.eigenvectors();
    const Eigen::VectorXd f1 = gradient(spec, lam);
    const Eigen::MatrixXd f2 = hessian(spec, lam);
    const Eigen::MatrixXd ht = q.transpose() * h * q;
    const int n = static_cast<int>(lam.size());
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) {
                double acc = 0.0;
                for (int a = 0; a < n; ++a) acc += f2(i, a) * ht(a, a);
                m(i, i) = acc;
            } else if (std::abs(lam[i] - lam[j]) < 1e-9 * (1.0 + std::abs(lam[i]))) {
                m(i, j) = (f2(i, i) - f2(i, j)) * ht(i, j);
            } else {
                m(i, j) = (f1[i] - f1[j]) / (lam[i] - lam[j]) * ht(i, j);
            }
        }
    }
    Eigen::MatrixXd out = q * m * q.transpose();
    return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd numerical_hessian(const OperatorSpec& spec, const Eigen::VectorXd& lambda) {
    const int n = static_cast<int>(lambda.size());
    double step = 1e-4 * (1.0 + lambda.norm());
    auto inside = [&](double h) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                for (int si : {-1, 1}) {
                    for (int sj : {-1, 1}) {
                        Eigen::VectorXd p = lambda;
                        p[i] += si * h;
                        p[j] += sj * h;
                        if (!in_cone(p, spec.cone)) return false;
                    }
                }
            }
        }
        return true;
    };
    for (int tries = 0; tries < 30 && !inside(step); ++tries) step *= 0.5;
    auto f = [&](const Eigen::VectorXd& p) { return evaluate(spec, p); };
    const double f0 = f(lambda);
    Eigen::MatrixXd hm(n, n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd p = lambda, m = lambda;
        p[i] += step;
        m[i] -= step;
        hm(i, i) = (f(p) - 2.0 * f0 + f(m)) / (step * step);
        for (int j = 0; j < i; ++j) {
            Eigen::VectorXd pp = lambda, pm = lambda, mp = lambda, mm = lambda;
            pp[i] += step; pp[j] += step;
            pm[i] += step; pm[j] -= step;
            mp[i] -= step; mp[j] += step;
            mm[i] -= step; mm[j] -= step;
            hm(i, j) = hm(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * step * step);
        }
    }
    return hm;
}

namespace {

std::string vec_text(const Eigen::VectorXd& v) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << format_real(v[i]);
    os << ")";
    return os.str();
}

struct ItemBuilder {
    ConditionItem item;
    explicit ItemBuilder(std::string name) {
        item.name = std::move(name);
        item.worst_slack = std::numeric_limits<double>::infinity();
    }
    void record(double slack, double tolerance, const std::function<std::string()>& witness) {
        ++item.checked;
        if (slack < item.worst_slack) {
            item.worst_slack = slack;
            item.witness = witness();
        }
        if (!(slack >= -tolerance)) {
            ++item.failures;
            item.passed = false;
        }
    }
    ConditionItem done() {
        if (item.checked == 0) item.worst_slack = 0.0;
        return item;
    }
};

}  // namespace

ConditionReport check_structure(const OperatorSpec& spec, const std::vector<EigenVector>& samples) {
    require(!samples.empty(), "check_structure needs at least one sample");
    ConditionReport report;
    report.subject = spec.describe();
    ItemBuilder s0("S0 positivity"), mid("S1 concavity (midpoint)"), hess("S1 concavity (Hessian)"),
        s2("S2 monotonicity"), euler("Euler identity"), gsum("gradient-sum bound");

    std::vector<double> values;
    values.reserve(samples.size());
    for (const auto& lam : samples) {
        const Eigen::VectorXd& v = lam.values();
        const double f = evaluate(spec, v);
        values.push_back(f);
        s0.record(f, 0.0, [&] { return vec_text(v); });
        const Eigen::VectorXd g = gradient(spec, v);
        s2.record(g.minCoeff(), 0.0, [&] { return vec_text(v); });
        euler.record(-std::abs(v.dot(g) - f) / (1.0 + std::abs(f)), 1e-10, [&] { return vec_text(v); });
        gsum.record(g.sum() - 1.0, 1e-10, [&] { return vec_text(v); });
        // analytic Hessian: finite differences lose accuracy close to the cone boundary
        const Eigen::MatrixXd h = hessian(spec, v);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
        hess.record(-eig.eigenvalues().maxCoeff(), 1e-10 * (1.0 + h.norm()), [&] { return vec_text(v); });
    }
    for (std::size_t a = 0; a < samples.size(); ++a) {
        for (std::size_t b = a + 1; b < samples.size(); ++b) {
            const Eigen::VectorXd m = 0.5 * (samples[a].values() + samples[b].values());
            const double avg = 0.5 * (values[a] + values[b]);
            const double slack = evaluate(spec, m) - avg;
            mid.record(slack, 1e-12 * (1.0 + std::abs(avg)), [&] { return vec_text(m); });
        }
    }
    report.items = {s0.done(), mid.done(), hess.done(), s2.done(), euler.done(), gsum.done()};
    return report;
}

ConditionReport check_condition_a(const OperatorSpec& spec, const std::vector<EigenVector>& samples) {
    if (!spec.condition_a) {
        throw UnsupportedError("condition (A) constants are not defined for " + spec.describe());
    }
    require(!samples.empty(), "check_condition_a needs at least one sample");
    ConditionReport report;
    report.subject = spec.describe();
    ItemBuilder item("condition (A)");
    const auto [mu0, mu1] = *spec.condition_a;
    for (const auto& lam : samples) {
        const Eigen::VectorXd& v = lam.values();
        const double f = evaluate(spec, v);
        const double lhs = gradient(spec, v).sum();
        const double rhs = mu0 * std::pow(v.sum() / f, mu1);
        item.record((lhs - rhs) / rhs, 1e-12, [&] { return vec_text(v); });
    }
    report.items = {item.done()};
    return report;
}

InequalitySides newton_maclaurin_sides(const EigenVector& lambda, int k, int m) {
    const int n = lambda.size();
    require(1 <= m && m < k && k <= n, "Newton-MacLaurin needs 1 <= m < k <= n");
    if (!in_cone(lambda, ConeSpec::positive(k))) {
        double value = 0.0;
        const int i = first_failure(lambda.values(), k, value);
        throw ConeViolation("Newton-MacLaurin: lambda outside Gamma_" + std::to_string(k) + "+", i,
                            value);
    }
    const Eigen::VectorXd e = elementary_symmetric(lambda.values());
    return {static_cast<double>(k) * (n - m + 1) * e[m - 1] * e[k],
            static_cast<double>(m) * (n - k + 1) * e[m] * e[k - 1]};
}

bool check_newton_maclaurin(const EigenVector& lambda, int k, int m) {
    const auto [lhs, rhs] = newton_maclaurin_sides(lambda, k, m);
    return lhs <= rhs + 1e-12 * std::abs(rhs);
}

bool gamma2_eigen_bound(const EigenVector& lambda) {
    const int n = lambda.size();
    if (!in_cone(lambda, ConeSpec::positive(2))) {
        double value = 0.0;
        const int i = first_failure(lambda.values(), 2, value);
        throw ConeViolation("eigenvalue bound: lambda outside Gamma_2+", i, value);
    }
    const double s1 = lambda.values().sum();
    const double tol = 1e-12 * std::abs(s1);
    const double lower = -static_cast<double>(n - 2) / n * s1;
    for (int i = 0; i < n; ++i) {
        if (lambda[i] < lower - tol || lambda[i] > s1 + tol) return false;
    }
    return true;
}

ConeSampler::ConeSampler(ConeSpec cone, int n, std::uint64_t seed)
    : cone_(cone), n_(n), rng_(seed) {
    require(n >= 2, "sampler dimension must be >= 2");
    require(cone.k <= n, "cone index exceeds dimension");
}

EigenVector ConeSampler::next() {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(std::log(0.2), std::log(3.0));
    for (;;) {
        const double spread = std::exp(uniform(rng_));
        const double theta = std::exp(0.5 * normal(rng_));
        Eigen::VectorXd v(n_);
        for (int i = 0; i < n_; ++i) v[i] = theta * (1.0 + spread * normal(rng_));
        if (in_cone(v, cone_)) return EigenVector(std::move(v));
    }
}

std::vector<EigenVector> ConeSampler::draw(int count) {
    std::vector<EigenVector> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(next());
    return out;
}

ConditionReport symcheck_battery(const OperatorSpec& spec, int samples, std::uint64_t seed) {
    require(samples > 0, "symcheck needs at least one sample");
    ConeSampler sampler(spec.cone, spec.n, seed);
    const std::vector<EigenVector> draws = sampler.draw(samples);
    ConditionReport report = check_structure(spec, draws);
    if (spec.condition_a) {
        for (const ConditionItem& it : check_condition_a(spec, draws).items) report.items.push_back(it);
    }
    if (spec.kind != OperatorKind::LinearCombRoot) {
        for (int m = 1; m < spec.k; ++m) {
            ItemBuilder nm("Newton-MacLaurin m = " + std::to_string(m));
            for (const EigenVector& lam : draws) {
                const auto [lhs, rhs] = newton_maclaurin_sides(lam, spec.k, m);
                nm.record((rhs - lhs) / std::abs(rhs), 1e-12, [&] { return vec_text(lam.values()); });
            }
            report.items.push_back(nm.done());
        }
        if (spec.k >= 2) {
            ItemBuilder g2("Gamma_2 eigenvalue bound");
            const int n = spec.n;
            for (const EigenVector& lam : draws) {
                const double s1 = lam.values().sum();
                const double lower = -static_cast<double>(n - 2) / n * s1;
                const double slack = std::min(lam.values().minCoeff() - lower, s1 - lam.values().maxCoeff());
                g2.record(slack / s1, 1e-12, [&] { return vec_text(lam.values()); });
            }
            report.items.push_back(g2.done());
        }
    }
    return report;
}

}  // namespace khess
