#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "khess/errors.hpp"
#include "khess/symfunc.hpp"

using namespace khess;

namespace {

// Brute-force sigma_k over all k-subsets, independent of the recurrence.
double sigma_bruteforce(const Eigen::VectorXd& v, int k) {
    const int n = static_cast<int>(v.size());
    double total = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        double prod = 1.0;
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) prod *= v[i];
        }
        total += prod;
    }
    return total;
}

Eigen::MatrixXd random_orthogonal(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> z;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = z(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return qr.householderQ();
}

}  // namespace

TEST_CASE("sigma examples") {
    CHECK(sigma(EigenVector{1, 1, 1}, 2) == 3.0);
    CHECK(sigma(EigenVector{1, 2, 3}, 3) == 6.0);
    CHECK(sigma(EigenVector{3, 1, -1}, 2) == -1.0);
    CHECK(sigma(EigenVector{3, 1, -1}, 0) == 1.0);
    CHECK_THROWS_AS(sigma(EigenVector{1, 2}, 3), DomainError);
    CHECK_THROWS_AS(EigenVector({1.0}), DomainError);
}

TEST_CASE("sigma recurrence agrees with subset enumeration") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> z;
    for (int n = 2; n <= 6; ++n) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = z(rng);
        for (int k = 0; k <= n; ++k) CHECK(sigma(v, k) == doctest::Approx(sigma_bruteforce(v, k)));
    }
}

TEST_CASE("cone membership") {
    CHECK(in_cone(EigenVector{1, 1, 1}, ConeSpec::positive(3)));
    CHECK_FALSE(in_cone(EigenVector{2, 2, -1}, ConeSpec::positive(2)));
    CHECK(in_cone(EigenVector{3, 1, -1}, ConeSpec::positive(1)));
    // lambda = (2,2,-1): t lambda + s sigma_1 e with t = 1, s = 1 -> (5, 5, 2)
    CHECK(in_cone(EigenVector{2, 2, -1}, ConeSpec::linear_comb(3, 1, 1)));
    CHECK_THROWS_AS(ConeSpec::linear_comb(2, 0.2, 0.3), DomainError);
}

TEST_CASE("operator values") {
    CHECK(evaluate(OperatorSpec::sigma_k_root(4, 3), EigenVector{1, 1, 1, 1}) == doctest::Approx(1.0));
    CHECK(evaluate(OperatorSpec::quotient(3, 2, 1), EigenVector{1, 1, 1}) == doctest::Approx(1.0));
    CHECK(evaluate(OperatorSpec::sigma_k_root(3, 2), EigenVector{1, 2, 3}) ==
          doctest::Approx(std::sqrt(11.0 / 3.0)));
    CHECK(evaluate(OperatorSpec::linear_comb_root(3, 1, 0, 1), EigenVector{1, 1, 1}) ==
          doctest::Approx(1.0));
    CHECK(evaluate(OperatorSpec::linear_comb_root(4, 2, 0.7, 0.4), EigenVector{1, 1, 1, 1}) ==
          doctest::Approx(1.0));
}

TEST_CASE("cone violation carries the failing sigma") {
    try {
        evaluate(OperatorSpec::sigma_k_root(3, 2), EigenVector{2, 2, -1});
        FAIL("expected ConeViolation");
    } catch (const ConeViolation& e) {
        CHECK(e.failing_index == 2);
        CHECK(e.failing_value == 0.0);
    }
}

TEST_CASE("gradient examples") {
    auto g = gradient(OperatorSpec::sigma_k_root(2, 1), EigenVector{0.3, 4.0});
    CHECK(g[0] == doctest::Approx(0.5));
    CHECK(g[1] == doctest::Approx(0.5));
    const auto spec = OperatorSpec::sigma_k_root(3, 2);
    EigenVector lam{1, 2, 3};
    CHECK(lam.values().dot(gradient(spec, lam)) == doctest::Approx(evaluate(spec, lam)));
    CHECK(gradient(OperatorSpec::quotient(3, 2, 0), EigenVector{1, 1, 1}).sum() == doctest::Approx(1.0));
}

TEST_CASE("closed-form Hessian matches finite differences") {
    ConeSampler sampler(ConeSpec::positive(3), 5, 3);
    for (auto spec : {OperatorSpec::sigma_k_root(5, 3), OperatorSpec::quotient(5, 3, 1),
                      OperatorSpec::linear_comb_root(5, 3, 0.6, 0.5)}) {
        for (int rep = 0; rep < 5; ++rep) {
            Eigen::VectorXd v = sampler.next().values();
            Eigen::MatrixXd h = hessian(spec, v);
            Eigen::MatrixXd hf(5, 5);
            const double step = 1e-6;
            for (int j = 0; j < 5; ++j) {
                Eigen::VectorXd p = v, m = v;
                p[j] += step;
                m[j] -= step;
                hf.col(j) = (gradient(spec, p) - gradient(spec, m)) / (2 * step);
            }
            CHECK((h - hf).norm() <= 1e-6 * (1.0 + h.norm()));
        }
    }
}

TEST_CASE("symmetry is exact under permutation") {
    const auto spec = OperatorSpec::quotient(5, 4, 2);
    Eigen::VectorXd v(5);
    v << 0.9, 1.7, 2.3, 0.4, 1.1;
    const double f0 = evaluate(spec, v);
    Eigen::VectorXd w(5);
    w << 2.3, 0.4, 1.1, 1.7, 0.9;
    CHECK(evaluate(spec, w) == f0);
}

TEST_CASE("matrix derivative") {
    const auto spec = OperatorSpec::sigma_k_root(3, 2);
    auto md = matrix_derivative(spec, Eigen::MatrixXd::Identity(3, 3));
    CHECK(md.value == doctest::Approx(1.0));
    CHECK((md.dF - Eigen::MatrixXd::Identity(3, 3) / 3.0).norm() < 1e-14);

    auto lin = matrix_derivative(OperatorSpec::sigma_k_root(3, 1), Eigen::Vector3d(1, 2, 3).asDiagonal().toDenseMatrix());
    CHECK((lin.dF - Eigen::MatrixXd::Identity(3, 3) / 3.0).norm() < 1e-14);

    std::mt19937_64 rng(5);
    Eigen::MatrixXd q = random_orthogonal(3, rng);
    Eigen::MatrixXd w = q * Eigen::Vector3d(0.5, 1.2, 2.0).asDiagonal() * q.transpose();
    auto a = matrix_derivative(spec, w);
    Eigen::MatrixXd q2 = random_orthogonal(3, rng);
    auto b = matrix_derivative(spec, q2.transpose() * w * q2);
    CHECK(std::abs(a.value - b.value) < 1e-10);
}

TEST_CASE("metric form equals the spectrum of g^-1 W") {
    const auto spec = OperatorSpec::quotient(3, 3, 1);
    Eigen::Matrix3d g;
    g << 2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0;
    Eigen::Matrix3d w;
    w << 1.0, 0.2, 0.0, 0.2, 2.0, 0.1, 0.0, 0.1, 1.5;
    auto md = matrix_derivative(spec, g, w);
    Eigen::EigenSolver<Eigen::Matrix3d> es(g.inverse() * w);
    Eigen::VectorXd lam = es.eigenvalues().real();
    CHECK(md.value == doctest::Approx(evaluate(spec, lam)));
    const double step = 1e-6;
    for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) {
            Eigen::Matrix3d e = Eigen::Matrix3d::Zero();
            e(i, j) = e(j, i) = 1.0;
            const double fd = (matrix_derivative(spec, g, w + step * e).value -
                               matrix_derivative(spec, g, w - step * e).value) / (2 * step);
            const double an = i == j ? md.dF(i, i) : 2 * md.dF(i, j);
            CHECK(an == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("second derivative matches differences of dF, including repeated eigenvalues") {
    std::mt19937_64 rng(9);
    const auto spec = OperatorSpec::quotient(4, 3, 1);
    for (Eigen::Vector4d spectrum : {Eigen::Vector4d(0.5, 1.1, 1.9, 3.0), Eigen::Vector4d(1.0, 1.0, 2.0, 2.0)}) {
        Eigen::MatrixXd q = random_orthogonal(4, rng);
        Eigen::MatrixXd w = q * spectrum.asDiagonal() * q.transpose();
        Eigen::MatrixXd h = Eigen::MatrixXd::Random(4, 4);
        h = (0.5 * (h + h.transpose())).eval();
        const double step = 1e-6;
        Eigen::MatrixXd fd = (matrix_derivative(spec, w + step * h).dF - matrix_derivative(spec, w - step * h).dF) / (2 * step);
        Eigen::MatrixXd an = matrix_second_derivative(spec, w, h);
        CHECK((an - fd).norm() < 1e-6 * (1.0 + an.norm()));
    }
}

TEST_CASE("Newton-MacLaurin values") {
    auto s = newton_maclaurin_sides(EigenVector{1, 1, 1}, 2, 1);
    CHECK(s.lhs == 18.0);
    CHECK(s.rhs == 18.0);
    s = newton_maclaurin_sides(EigenVector{1, 2, 3}, 2, 1);
    CHECK(s.lhs == 66.0);
    CHECK(s.rhs == 72.0);
    s = newton_maclaurin_sides(EigenVector{1, 2, 3}, 3, 2);
    CHECK(s.lhs == 216.0);
    CHECK(s.rhs == 242.0);
    CHECK_THROWS_AS(newton_maclaurin_sides(EigenVector{1, 2, 3}, 2, 2), DomainError);
}

TEST_CASE("Gamma_2 eigenvalue bound") {
    CHECK(gamma2_eigen_bound(EigenVector{1, 1, 1}));
    // sigma_2 = 0 at (-(n-2)/2, 1, ..., 1); shrink slightly into the cone.
    for (int n = 3; n <= 6; ++n) {
        Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
        v[0] = -(n - 2) / 2.0 + 1e-9;
        EigenVector lam(v);
        CHECK(gamma2_eigen_bound(lam));
        const double lower = -(n - 2.0) / n * v.sum();
        CHECK(std::abs(v[0] - lower) < 1e-6);
    }
    CHECK_THROWS_AS(gamma2_eigen_bound(EigenVector{2, 2, -1}), ConeViolation);
}

TEST_CASE("structure and condition (A) reports") {
    ConeSampler sampler(ConeSpec::positive(2), 4, 7);
    auto samples = sampler.draw(60);
    auto rep = check_structure(OperatorSpec::quotient(4, 2, 1), samples);
    CHECK(rep.all_passed());
    auto ra = check_condition_a(OperatorSpec::sigma_k_root(4, 2), samples);
    CHECK(ra.all_passed());
    CHECK_THROWS_AS(check_condition_a(OperatorSpec::quotient(4, 2, 1), samples), UnsupportedError);
    CHECK_THROWS_AS(check_structure(OperatorSpec::quotient(4, 2, 1), {}), DomainError);
    auto lin = check_structure(OperatorSpec::sigma_k_root(4, 1), ConeSampler(ConeSpec::positive(1), 4, 1).draw(20));
    CHECK(lin.find("S1 concavity (midpoint)")->worst_slack == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("sampler is reproducible") {
    ConeSampler a(ConeSpec::positive(3), 4, 42), b(ConeSpec::positive(3), 4, 42);
    for (int i = 0; i < 10; ++i) CHECK(a.next().values() == b.next().values());
}
