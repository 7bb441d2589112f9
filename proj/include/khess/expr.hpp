#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "khess/jet.hpp"

namespace khess {

/// Which symbols an expression may use.
///   x1..xn  chart coordinates       r2   x1^2 + .. + xn^2
///   z       the solution value u    p1..pn  components of du
///   pp      |du|^2 in the metric    t1..t(n+1)  a unit direction in R^(n+1)
/// plus the constants pi and e.
struct SymbolSet {
    int n = 2;
    bool x = true;
    bool z = false;
    bool p = false;
    bool t = false;
};

/// Values bound to the symbols of an expression for one evaluation.
template <class T>
struct Bindings {
    std::span<const T> x;
    const T* z = nullptr;
    std::span<const T> p;
    const T* pp = nullptr;
    std::span<const T> t;
};

/// A parsed closed-form scalar expression.
///
/// Grammar: sums and differences of products and quotients; '^' binds
/// tightest and is right associative (so -x1^2 is -(x1^2)); functions exp,
/// log, sqrt, sin, cos, tan, atan, tanh, abs, pow(a, b). Numbers use the usual
/// decimal / exponent notation.
class Expression {
public:
    Expression() = default;
    /// Throws ParseError with the column of the offending token.
    static Expression parse(const std::string& text, const SymbolSet& symbols);
    static Expression constant(double value);

    const std::string& text() const { return text_; }
    bool uses_z() const { return uses_z_; }
    bool uses_p() const { return uses_p_; }
    bool uses_t() const { return uses_t_; }
    bool uses_x() const { return uses_x_; }
    bool is_constant() const { return !uses_x_ && !uses_z_ && !uses_p_ && !uses_t_; }

    double eval(const Bindings<double>& b) const;
    Jet eval(const Bindings<Jet>& b) const;

    struct Node;

private:
    std::string text_;
    std::shared_ptr<const std::vector<Node>> nodes_;
    int root_ = -1;
    bool uses_x_ = false;
    bool uses_z_ = false;
    bool uses_p_ = false;
    bool uses_t_ = false;
};

}  // namespace khess
