#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "khess/report.hpp"

namespace khess {

/// Eigenvalues lambda_1..lambda_n of an operator argument, n >= 2, all finite.
class EigenVector {
public:
    explicit EigenVector(Eigen::VectorXd values);
    EigenVector(std::initializer_list<double> values);

    int size() const { return static_cast<int>(values_.size()); }
    double operator[](int i) const { return values_[i]; }
    const Eigen::VectorXd& values() const { return values_; }

private:
    Eigen::VectorXd values_;
};

/// Admissible cone. PositiveK(k) is the Garding cone {sigma_i > 0, i <= k};
/// LinearComb(k, t, s) is {lambda : t lambda + s sigma_1(lambda) e in PositiveK(k)}.
struct ConeSpec {
    enum class Kind { PositiveK, LinearComb };

    Kind kind = Kind::PositiveK;
    int k = 1;
    double t = 1.0;
    double s = 0.0;

    static ConeSpec positive(int k);
    static ConeSpec linear_comb(int k, double t, double s);
    std::string describe() const;
};

enum class OperatorKind { SigmaKRoot, Quotient, LinearCombRoot };

/// Condition (A) constants: sum_i dF/dlambda_i >= mu0 (sigma_1 / F)^mu1.
struct ConditionAConstants {
    double mu0;
    double mu1;
};

/// A normalized operator F with F(e) = 1:
///   SigmaKRoot(k)        C(n,k)^{-1/k} sigma_k^{1/k}
///   Quotient(k, l)       C(n,k)^{-1/(k-l)} C(n,l)^{1/(k-l)} (sigma_k / sigma_l)^{1/(k-l)}
///   LinearCombRoot(k,t,s) (t+ns)^{-1} C(n,k)^{-1/k} sigma_k^{1/k}(t lambda + s sigma_1 e)
struct OperatorSpec {
    OperatorKind kind = OperatorKind::SigmaKRoot;
    int n = 2;
    int k = 1;
    int l = 0;
    double t = 1.0;
    double s = 0.0;
    double normalization = 1.0;
    ConeSpec cone;
    std::optional<ConditionAConstants> condition_a;

    static OperatorSpec sigma_k_root(int n, int k);
    static OperatorSpec quotient(int n, int k, int l);
    static OperatorSpec linear_comb_root(int n, int k, double t, double s);
    std::string describe() const;
};

double binomial(int n, int k);

/// sigma_k(lambda), sigma_0 = 1, by the one-pass prefix recurrence.
double sigma(const EigenVector& lambda, int k);
double sigma(const Eigen::VectorXd& lambda, int k);
/// All of sigma_0 .. sigma_n.
Eigen::VectorXd elementary_symmetric(const Eigen::VectorXd& lambda);

bool in_cone(const EigenVector& lambda, const ConeSpec& cone);
bool in_cone(const Eigen::VectorXd& lambda, const ConeSpec& cone);
/// Smallest sigma_i(mu) / C(n, i) over 1 <= i <= k, where mu is lambda mapped
/// into the Garding cone coordinates of `cone`. Positive iff lambda is inside.
double cone_margin(const Eigen::VectorXd& lambda, const ConeSpec& cone);

/// F(lambda). Throws ConeViolation outside spec.cone.
double evaluate(const OperatorSpec& spec, const EigenVector& lambda);
double evaluate(const OperatorSpec& spec, const Eigen::VectorXd& lambda);
/// dF/dlambda_i.
Eigen::VectorXd gradient(const OperatorSpec& spec, const EigenVector& lambda);
Eigen::VectorXd gradient(const OperatorSpec& spec, const Eigen::VectorXd& lambda);
/// d^2F/dlambda_i dlambda_j, closed form.
Eigen::MatrixXd hessian(const OperatorSpec& spec, const Eigen::VectorXd& lambda);

/// F on a symmetric matrix together with F^{ij} = dF/dW_ij and the spectral data.
struct MatrixDerivative {
    double value = 0.0;
    Eigen::MatrixXd dF;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
    Eigen::VectorXd spectral_gradient;
};

MatrixDerivative matrix_derivative(const OperatorSpec& spec, const Eigen::MatrixXd& w);
/// F(g^{-1} W) and dF/dW_ij for a symmetric positive definite metric g.
MatrixDerivative matrix_derivative(const OperatorSpec& spec, const Eigen::MatrixXd& g,
                                   const Eigen::MatrixXd& w);
/// Directional derivative of F^{ij}(W) along the symmetric direction H
/// (divided differences on the eigenbasis; coincident eigenvalues use the
/// derivative limit).
Eigen::MatrixXd matrix_second_derivative(const OperatorSpec& spec, const Eigen::MatrixXd& w,
                                         const Eigen::MatrixXd& h);

/// Central-difference Hessian of F, a cross-check of the closed form:
/// step 1e-4 (1 + |lambda|), halved while the stencil leaves the cone.
Eigen::MatrixXd numerical_hessian(const OperatorSpec& spec, const Eigen::VectorXd& lambda);

/// (S0) positivity, (S1) concavity (pairwise midpoints and closed-form Hessian),
/// (S2) monotonicity, and the Euler / gradient-sum identities.
ConditionReport check_structure(const OperatorSpec& spec, const std::vector<EigenVector>& samples);
ConditionReport check_condition_a(const OperatorSpec& spec, const std::vector<EigenVector>& samples);

/// The full battery for one operator on `samples` draws from its cone:
/// structure conditions, condition (A) when defined, Newton-MacLaurin for every
/// m < k and the Gamma_2 eigenvalue bound (sigma operators with k >= 2).
ConditionReport symcheck_battery(const OperatorSpec& spec, int samples, std::uint64_t seed);

/// Both sides of k(n-m+1) sigma_{m-1} sigma_k <= m(n-k+1) sigma_m sigma_{k-1}.
struct InequalitySides {
    double lhs;
    double rhs;
};
InequalitySides newton_maclaurin_sides(const EigenVector& lambda, int k, int m);
bool check_newton_maclaurin(const EigenVector& lambda, int k, int m);
/// -(n-2)/n sigma_1 <= lambda_i <= sigma_1 for every i; lambda must lie in Gamma_2.
bool gamma2_eigen_bound(const EigenVector& lambda);

/// Rejection sampler for a cone. Candidates are theta (e + spread z) with
/// z ~ N(0, I), log(spread) ~ U(log 0.2, log 3) and log(theta) ~ N(0, 0.5^2),
/// drawn from std::mt19937_64 seeded with `seed`.
class ConeSampler {
public:
    ConeSampler(ConeSpec cone, int n, std::uint64_t seed);

    EigenVector next();
    std::vector<EigenVector> draw(int count);

private:
    ConeSpec cone_;
    int n_;
    std::mt19937_64 rng_;
};

}  // namespace khess
