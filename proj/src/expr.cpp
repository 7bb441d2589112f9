#include "khess/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "khess/errors.hpp"

namespace khess {

enum class Op { Const, X, R2, Z, P, PP, T, Neg, Add, Sub, Mul, Div, Pow, Func };
enum class Fn { Exp, Log, Sqrt, Sin, Cos, Tan, Atan, Tanh, Abs, Pow };

struct Expression::Node {
    Op op;
    double value = 0.0;
    int index = 0;
    Fn fn = Fn::Exp;
    int a = -1;
    int b = -1;
};

namespace {

using Node = Expression::Node;

class Parser {
public:
    Parser(const std::string& text, const SymbolSet& sym) : s_(text), sym_(sym) {}

    int parse_all() {
        const int root = parse_sum();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return root;
    }

    std::vector<Node> nodes;
    bool uses_x = false, uses_z = false, uses_p = false, uses_t = false;

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("expression '" + s_ + "': " + what, "column " + std::to_string(pos_ + 1));
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    int add(Node n) {
        nodes.push_back(n);
        return static_cast<int>(nodes.size()) - 1;
    }
    int binary(Op op, int a, int b) { return add(Node{op, 0.0, 0, Fn::Exp, a, b}); }

    int parse_sum() {
        int lhs = parse_product();
        for (;;) {
            if (accept('+')) lhs = binary(Op::Add, lhs, parse_product());
            else if (accept('-')) lhs = binary(Op::Sub, lhs, parse_product());
            else return lhs;
        }
    }
    int parse_product() {
        int lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = binary(Op::Mul, lhs, parse_unary());
            else if (accept('/')) lhs = binary(Op::Div, lhs, parse_unary());
            else return lhs;
        }
    }
    int parse_unary() {
        if (accept('-')) return binary(Op::Neg, parse_unary(), -1);
        if (accept('+')) return parse_unary();
        return parse_power();
    }
    int parse_power() {
        const int base = parse_primary();
        if (accept('^')) return binary(Op::Pow, base, parse_unary());
        return base;
    }
    int symbol_index(const std::string& id, std::size_t prefix, int limit, const char* what) {
        const std::string digits = id.substr(prefix);
        if (digits.empty() || digits.size() > 1 || !std::isdigit(static_cast<unsigned char>(digits[0]))) {
            fail("unknown symbol '" + id + "'");
        }
        const int i = digits[0] - '1';
        if (i < 0 || i >= limit) fail(std::string(what) + " index out of range in '" + id + "'");
        return i;
    }
    int parse_primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("malformed number");
            pos_ += static_cast<std::size_t>(end - begin);
            return add(Node{Op::Const, v});
        }
        if (accept('(')) {
            const int inner = parse_sum();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        if (!std::isalpha(static_cast<unsigned char>(c))) fail("unexpected '" + std::string(1, c) + "'");
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        const std::string id = s_.substr(start, pos_ - start);
        skip();
        if (pos_ < s_.size() && s_[pos_] == '(') return parse_call(id, start);
        if (id == "pi") return add(Node{Op::Const, std::numbers::pi});
        if (id == "e") return add(Node{Op::Const, std::numbers::e});
        if (id == "z") {
            if (!sym_.z) fail("symbol 'z' is not available here");
            uses_z = true;
            return add(Node{Op::Z});
        }
        if (id == "pp") {
            if (!sym_.p) fail("symbol 'pp' is not available here");
            uses_p = true;
            return add(Node{Op::PP});
        }
        if (id == "r2") {
            if (!sym_.x) fail("symbol 'r2' is not available here");
            uses_x = true;
            return add(Node{Op::R2});
        }
        if (id[0] == 'x') {
            if (!sym_.x) fail("coordinates are not available here");
            uses_x = true;
            return add(Node{Op::X, 0.0, symbol_index(id, 1, sym_.n, "coordinate")});
        }
        if (id[0] == 'p') {
            if (!sym_.p) fail("gradient components are not available here");
            uses_p = true;
            return add(Node{Op::P, 0.0, symbol_index(id, 1, sym_.n, "gradient")});
        }
        if (id[0] == 't') {
            if (!sym_.t) fail("direction components are not available here");
            uses_t = true;
            return add(Node{Op::T, 0.0, symbol_index(id, 1, sym_.n + 1, "direction")});
        }
        pos_ = start;
        fail("unknown symbol '" + id + "'");
    }
    int parse_call(const std::string& id, std::size_t start) {
        static const std::pair<const char*, Fn> table[] = {
            {"exp", Fn::Exp}, {"log", Fn::Log}, {"sqrt", Fn::Sqrt}, {"sin", Fn::Sin},
            {"cos", Fn::Cos}, {"tan", Fn::Tan}, {"atan", Fn::Atan}, {"tanh", Fn::Tanh},
            {"abs", Fn::Abs}, {"pow", Fn::Pow}};
        Fn fn{};
        bool found = false;
        for (const auto& [name, f] : table) {
            if (id == name) {
                fn = f;
                found = true;
            }
        }
        if (!found) {
            pos_ = start;
            fail("unknown function '" + id + "'");
        }
        accept('(');
        const int a = parse_sum();
        int b = -1;
        if (fn == Fn::Pow) {
            if (!accept(',')) fail("pow expects two arguments");
            b = parse_sum();
        }
        if (!accept(')')) fail("expected ')'");
        if (fn == Fn::Pow) return binary(Op::Pow, a, b);
        Node n{Op::Func};
        n.fn = fn;
        n.a = a;
        return add(n);
    }

    const std::string& s_;
    const SymbolSet& sym_;
    std::size_t pos_ = 0;
};

template <class T>
T make_const(const Bindings<T>& b, double v) {
    if constexpr (std::is_same_v<T, double>) {
        (void)b;
        return v;
    } else {
        const Jet* ref = nullptr;
        if (!b.x.empty()) ref = &b.x[0];
        else if (b.z) ref = b.z;
        else if (!b.p.empty()) ref = &b.p[0];
        else if (!b.t.empty()) ref = &b.t[0];
        if (!ref) throw DomainError("jet evaluation needs at least one bound symbol");
        return Jet::constant(ref->nvars(), ref->order(), v);
    }
}

bool is_integer(double v) { return std::abs(v - std::round(v)) == 0.0 && std::abs(v) < 64; }

// e >= 1
template <class T>
T ipow_value(const T& base, int e) {
    T r = base;
    for (int i = 1; i < e; ++i) r = r * base;
    return r;
}

template <class T>
T eval_node(const std::vector<Node>& nodes, int i, const Bindings<T>& b) {
    using std::abs, std::atan, std::cos, std::exp, std::log, std::pow, std::sin, std::sqrt, std::tan, std::tanh;
    const Node& n = nodes[i];
    auto need = [](bool ok, const char* what) {
        if (!ok) throw DomainError(std::string("expression needs an unbound symbol: ") + what);
    };
    switch (n.op) {
        case Op::Const: return make_const(b, n.value);
        case Op::X:
            need(static_cast<int>(b.x.size()) > n.index, "x");
            return b.x[n.index];
        case Op::R2: {
            need(!b.x.empty(), "x");
            T s = b.x[0] * b.x[0];
            for (std::size_t k = 1; k < b.x.size(); ++k) s = s + b.x[k] * b.x[k];
            return s;
        }
        case Op::Z: need(b.z != nullptr, "z"); return *b.z;
        case Op::P:
            need(static_cast<int>(b.p.size()) > n.index, "p");
            return b.p[n.index];
        case Op::PP: need(b.pp != nullptr, "pp"); return *b.pp;
        case Op::T:
            need(static_cast<int>(b.t.size()) > n.index, "t");
            return b.t[n.index];
        case Op::Neg: return -eval_node(nodes, n.a, b);
        case Op::Add: return eval_node(nodes, n.a, b) + eval_node(nodes, n.b, b);
        case Op::Sub: return eval_node(nodes, n.a, b) - eval_node(nodes, n.b, b);
        case Op::Mul: return eval_node(nodes, n.a, b) * eval_node(nodes, n.b, b);
        case Op::Div: return eval_node(nodes, n.a, b) / eval_node(nodes, n.b, b);
        case Op::Pow: {
            const Node& e = nodes[n.b];
            const T base = eval_node(nodes, n.a, b);
            if (e.op == Op::Const) {
                if (is_integer(e.value)) {
                    const int k = static_cast<int>(std::round(e.value));
                    if (k == 0) return make_const(b, 1.0);
                    if (k > 0) return ipow_value(base, k);
                    return 1.0 / ipow_value(base, -k);
                }
                return pow(base, e.value);
            }
            if constexpr (std::is_same_v<T, double>) return pow(base, eval_node(nodes, n.b, b));
            else return exp(eval_node(nodes, n.b, b) * log(base));
        }
        case Op::Func: {
            const T a = eval_node(nodes, n.a, b);
            switch (n.fn) {
                case Fn::Exp: return exp(a);
                case Fn::Log: return log(a);
                case Fn::Sqrt: return sqrt(a);
                case Fn::Sin: return sin(a);
                case Fn::Cos: return cos(a);
                case Fn::Tan: return tan(a);
                case Fn::Atan: return atan(a);
                case Fn::Tanh: return tanh(a);
                case Fn::Abs: return abs(a);
                case Fn::Pow: break;
            }
        }
    }
    throw DomainError("malformed expression tree");
}

}  // namespace

Expression Expression::parse(const std::string& text, const SymbolSet& symbols) {
    Parser parser(text, symbols);
    Expression e;
    e.root_ = parser.parse_all();
    e.text_ = text;
    e.uses_x_ = parser.uses_x;
    e.uses_z_ = parser.uses_z;
    e.uses_p_ = parser.uses_p;
    e.uses_t_ = parser.uses_t;
    e.nodes_ = std::make_shared<const std::vector<Node>>(std::move(parser.nodes));
    return e;
}

Expression Expression::constant(double value) {
    Expression e;
    e.text_ = std::to_string(value);
    e.nodes_ = std::make_shared<const std::vector<Node>>(std::vector<Node>{Node{Op::Const, value}});
    e.root_ = 0;
    return e;
}

double Expression::eval(const Bindings<double>& b) const {
    if (!nodes_) throw DomainError("empty expression");
    return eval_node(*nodes_, root_, b);
}

Jet Expression::eval(const Bindings<Jet>& b) const {
    if (!nodes_) throw DomainError("empty expression");
    return eval_node(*nodes_, root_, b);
}

}  // namespace khess
