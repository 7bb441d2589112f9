#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace khess {

/// Largest number of independent variables a jet may carry: x (n <= 6),
/// one solution value z and p (n <= 6).
inline constexpr int kMaxJetVars = 13;
inline constexpr int kMaxJetOrder = 8;

using MultiIndex = std::array<std::uint8_t, kMaxJetVars>;

/// Graded enumeration of the multi-indices |alpha| <= order in `nvars`
/// variables together with the tables needed for truncated products and
/// partial derivatives. Instances are immutable and shared.
class MultiIndexTable {
public:
    struct ProductTerm {
        int lhs;
        int rhs;
        int out;
    };

    MultiIndexTable(int nvars, int order);

    int nvars() const { return nvars_; }
    int order() const { return order_; }
    int size() const { return static_cast<int>(indices_.size()); }
    const MultiIndex& index(int pos) const { return indices_[pos]; }
    int degree(int pos) const { return degree_[pos]; }
    /// Position of `alpha`, or -1 when |alpha| > order.
    int find(const MultiIndex& alpha) const;
    /// Number of coefficients of total degree <= d.
    int count_up_to(int d) const { return degree_offset_[d + 1]; }

    /// Pairs (lhs, rhs) with |lhs| + |rhs| <= order and the position of the sum.
    std::span<const ProductTerm> products() const { return products_; }
    /// For variable v: pairs (source, target) with index(source) = index(target) + e_v.
    /// Only targets of degree <= order - 1 are listed.
    std::span<const std::pair<int, int>> shifts(int v) const { return shifts_[v]; }

private:
    int nvars_;
    int order_;
    std::vector<MultiIndex> indices_;
    std::vector<int> degree_;
    std::vector<int> degree_offset_;
    std::vector<ProductTerm> products_;
    std::vector<std::vector<std::pair<int, int>>> shifts_;
};

/// Shared table for (nvars, order). Thread-safe; tables are built once and
/// never modified afterwards.
const MultiIndexTable& multi_index_table(int nvars, int order);

/// Truncated multivariate Taylor polynomial
///   f(x0 + d) = sum_{|alpha| <= q} c_alpha d^alpha,  c_alpha = D^alpha f / alpha!
/// Arithmetic on jets is forward-mode differentiation to order q. Mixing jets of
/// different orders truncates to the smaller one; the variable count must agree.
class Jet {
public:
    Jet() = default;
    static Jet constant(int nvars, int order, double value);
    /// The jet of the coordinate function x_var around `value`.
    static Jet variable(int nvars, int order, int var, double value);

    int nvars() const { return table_ ? table_->nvars() : 0; }
    int order() const { return table_ ? table_->order() : 0; }
    const MultiIndexTable& table() const { return *table_; }

    double value() const { return coeffs_[0]; }
    std::span<const double> coeffs() const { return coeffs_; }
    std::span<double> coeffs() { return coeffs_; }
    double coeff(const MultiIndex& alpha) const;
    /// Partial derivative D^alpha f at the expansion point.
    double derivative(const MultiIndex& alpha) const;
    double derivative(int var) const;
    double derivative(int var_a, int var_b) const;

    /// Partial derivative as a jet of order q-1.
    Jet diff(int var) const;
    Jet truncated(int order) const;
    bool is_constant() const;

    Jet& operator+=(const Jet& rhs);
    Jet& operator-=(const Jet& rhs);
    Jet& operator*=(const Jet& rhs);
    Jet& operator/=(const Jet& rhs);
    Jet& operator+=(double rhs);
    Jet& operator-=(double rhs);
    Jet& operator*=(double rhs);
    Jet& operator/=(double rhs);

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(const Jet& a, const Jet& b);
    friend Jet operator/(const Jet& a, const Jet& b);
    friend Jet operator+(Jet a, double b) { return a += b; }
    friend Jet operator+(double a, Jet b) { return b += a; }
    friend Jet operator-(Jet a, double b) { return a -= b; }
    friend Jet operator-(double a, const Jet& b);
    friend Jet operator*(Jet a, double b) { return a *= b; }
    friend Jet operator*(double a, Jet b) { return b *= a; }
    friend Jet operator/(Jet a, double b) { return a /= b; }
    friend Jet operator/(double a, const Jet& b);
    Jet operator-() const;

    /// g(f) for a scalar g given its Taylor coefficients g^(k)(f(x0)) / k!, k = 0..order.
    Jet compose(std::span<const double> taylor) const;

private:
    Jet(const MultiIndexTable* table, std::vector<double> coeffs)
        : table_(table), coeffs_(std::move(coeffs)) {}
    const MultiIndexTable* table_ = nullptr;
    std::vector<double> coeffs_;
};

Jet exp(const Jet& x);
Jet log(const Jet& x);
Jet sqrt(const Jet& x);
Jet pow(const Jet& x, double exponent);
Jet sin(const Jet& x);
Jet cos(const Jet& x);
Jet tan(const Jet& x);
Jet atan(const Jet& x);
Jet tanh(const Jet& x);
/// |x| with derivatives of the branch selected by sign(value); |0| is treated as +0.
Jet abs(const Jet& x);
Jet reciprocal(const Jet& x);

/// Evaluates the outer Taylor polynomial `outer` (in m variables, expanded
/// around `center`) at the jets `inner` (m of them): returns outer(inner) as a
/// jet in the inner jets' variables.
Jet substitute(const Jet& outer, std::span<const double> center, std::span<const Jet> inner);

/// Re-expresses a jet over `src.nvars()` variables as a jet over `nvars`
/// variables, sending source variable i to target variable `target_var[i]`.
Jet embed(const Jet& src, int nvars, std::span<const int> target_var);

}  // namespace khess
