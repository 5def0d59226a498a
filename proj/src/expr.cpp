#include "delayopt/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace delayopt::expr {

namespace {

const char* var_name(Var v) {
    switch (v) {
        case Var::x: return "x";
        case Var::t: return "t";
        case Var::y: return "y";
    }
    return "?";
}

double integer_power(double base, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= base;
    return r;
}

double apply_unary(Op op, double a) {
    switch (op) {
        case Op::neg: return -a;
        case Op::sin: return std::sin(a);
        case Op::cos: return std::cos(a);
        case Op::tanh: return std::tanh(a);
        case Op::exp: return std::exp(a);
        default: break;
    }
    throw std::logic_error("not a unary op");
}

double apply_binary(Op op, double a, double b) {
    switch (op) {
        case Op::add: return a + b;
        case Op::sub: return a - b;
        case Op::mul: return a * b;
        case Op::div: return a / b;
        default: break;
    }
    throw std::logic_error("not a binary op");
}

bool is_unary(Op op) {
    return op == Op::neg || op == Op::sin || op == Op::cos || op == Op::tanh || op == Op::exp;
}

bool is_binary(Op op) {
    return op == Op::add || op == Op::sub || op == Op::mul || op == Op::div;
}

Ast make(Op op, Ast lhs, Ast rhs = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

bool is_const_value(const Ast& a, double v) { return a->op == Op::constant && a->value == v; }

// Folding constructors. The parser uses only constant folding; the
// differentiator additionally drops additive zeros and multiplicative ones.
Ast fold_unary(Op op, Ast a) {
    if (a->op == Op::constant) return constant(apply_unary(op, a->value));
    return make(op, std::move(a));
}

Ast fold_binary(Op op, Ast a, Ast b) {
    if (a->op == Op::constant && b->op == Op::constant)
        return constant(apply_binary(op, a->value, b->value));
    return make(op, std::move(a), std::move(b));
}

Ast fold_pow(Ast base, int n) {
    if (base->op == Op::constant) return constant(integer_power(base->value, n));
    auto node = std::make_shared<Node>();
    node->op = Op::pow;
    node->exponent = n;
    node->lhs = std::move(base);
    return node;
}

Ast s_add(Ast a, Ast b) {
    if (is_const_value(a, 0.0)) return b;
    if (is_const_value(b, 0.0)) return a;
    return fold_binary(Op::add, std::move(a), std::move(b));
}

Ast s_neg(Ast a) { return fold_unary(Op::neg, std::move(a)); }

Ast s_sub(Ast a, Ast b) {
    if (is_const_value(b, 0.0)) return a;
    if (is_const_value(a, 0.0)) return s_neg(std::move(b));
    return fold_binary(Op::sub, std::move(a), std::move(b));
}

Ast s_mul(Ast a, Ast b) {
    if (is_const_value(a, 0.0) || is_const_value(b, 0.0)) return constant(0.0);
    if (is_const_value(a, 1.0)) return b;
    if (is_const_value(b, 1.0)) return a;
    return fold_binary(Op::mul, std::move(a), std::move(b));
}

Ast s_div(Ast a, Ast c) {
    if (is_const_value(a, 0.0)) return constant(0.0);
    if (is_const_value(c, 1.0)) return a;
    return fold_binary(Op::div, std::move(a), std::move(c));
}

Ast s_pow(Ast u, int n) {
    if (n == 0) return constant(1.0);
    if (n == 1) return u;
    return fold_pow(std::move(u), n);
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Ast run() {
        auto e = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected input", "operator or end of input");
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what, const std::string& expected, std::size_t at) const {
        throw ParseError(fmt::format("{} at offset {}", what, at), at, expected);
    }
    [[noreturn]] void fail(const std::string& what, const std::string& expected) const {
        fail(what, expected, pos_);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(fmt::format("expected '{}'", c), std::string(1, c));
    }

    Ast parse_expr() {
        auto lhs = parse_term();
        for (;;) {
            if (accept('+')) lhs = fold_binary(Op::add, lhs, parse_term());
            else if (accept('-')) lhs = fold_binary(Op::sub, lhs, parse_term());
            else return lhs;
        }
    }

    Ast parse_term() {
        auto lhs = parse_unary();
        for (;;) {
            if (accept('*')) {
                lhs = fold_binary(Op::mul, lhs, parse_unary());
            } else if (accept('/')) {
                skip_ws();
                const std::size_t at = pos_;
                auto den = parse_unary();
                if (den->op != Op::constant)
                    fail("division by a non-constant expression", "constant denominator", at);
                if (den->value == 0.0) fail("division by zero", "nonzero denominator", at);
                lhs = fold_binary(Op::div, lhs, den);
            } else {
                return lhs;
            }
        }
    }

    Ast parse_unary() {
        if (accept('-')) return fold_unary(Op::neg, parse_unary());
        return parse_power();
    }

    Ast parse_power() {
        auto base = parse_primary();
        if (!accept('^')) return base;
        skip_ws();
        const std::size_t at = pos_;
        auto ex = parse_unary();
        if (ex->op != Op::constant) fail("non-constant exponent", "constant exponent", at);
        const double e = ex->value;
        const bool integral = std::isfinite(e) && std::floor(e) == e && std::abs(e) < 1024;
        if (base->op == Op::constant) {
            if (integral && e >= 0) return constant(integer_power(base->value, static_cast<int>(e)));
            if (base->value == 0.0) fail("zero base with negative or non-integer exponent", "nonzero base", at);
            return constant(std::pow(base->value, e));
        }
        if (!integral || e < 0)
            fail("non-integer or negative power of a non-constant base", "non-negative integer exponent", at);
        return fold_pow(base, static_cast<int>(e));
    }

    Ast parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input", "number, identifier or '('");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            auto e = parse_expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail(fmt::format("unexpected character '{}'", c), "number, identifier or '('");
    }

    Ast parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        };
        digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) digits();
            else pos_ = save;
        }
        const std::string text(src_.substr(start, pos_ - start));
        if (text == ".") fail("malformed number", "digit", start);
        return constant(std::stod(text));
    }

    Ast parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);
        if (name == "x") return variable(Var::x);
        if (name == "t") return variable(Var::t);
        if (name == "y") return variable(Var::y);
        if (name == "pi") return constant(std::numbers::pi);
        if (name == "sqrt2") return constant(std::numbers::sqrt2);
        Op fn;
        if (name == "sin") fn = Op::sin;
        else if (name == "cos") fn = Op::cos;
        else if (name == "tanh") fn = Op::tanh;
        else if (name == "exp") fn = Op::exp;
        else fail(fmt::format("unknown identifier '{}'", name), "x, t, y, pi, sqrt2, sin, cos, tanh, exp", start);
        expect('(');
        auto arg = parse_expr();
        expect(')');
        return fold_unary(fn, arg);
    }
};

// ---------------------------------------------------------------------------
// Printing

int precedence(const Ast& a) {
    switch (a->op) {
        case Op::add:
        case Op::sub: return 1;
        case Op::mul:
        case Op::div: return 2;
        case Op::neg: return 3;
        case Op::pow: return 4;
        case Op::constant: return a->value < 0 || std::signbit(a->value) ? 3 : 5;
        default: return 5;
    }
}

std::string print_rec(const Ast& a);

std::string wrap(const Ast& a, bool parens) {
    return parens ? "(" + print_rec(a) + ")" : print_rec(a);
}

std::string print_rec(const Ast& a) {
    switch (a->op) {
        case Op::constant: return fmt::format("{:.17g}", a->value);
        case Op::variable: return var_name(a->var);
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div: {
            const int p = precedence(a);
            const char* sym = a->op == Op::add ? " + " : a->op == Op::sub ? " - " : a->op == Op::mul ? "*" : "/";
            return wrap(a->lhs, precedence(a->lhs) < p) + sym + wrap(a->rhs, precedence(a->rhs) <= p);
        }
        case Op::neg: return "-" + wrap(a->lhs, precedence(a->lhs) < 3);
        case Op::pow: return wrap(a->lhs, precedence(a->lhs) < 5) + "^" + std::to_string(a->exponent);
        case Op::sin: return "sin(" + print_rec(a->lhs) + ")";
        case Op::cos: return "cos(" + print_rec(a->lhs) + ")";
        case Op::tanh: return "tanh(" + print_rec(a->lhs) + ")";
        case Op::exp: return "exp(" + print_rec(a->lhs) + ")";
    }
    return {};
}

// ---------------------------------------------------------------------------
// Polynomial helpers

using Poly = std::vector<double>;

Poly poly_add(const Poly& a, const Poly& b, double sign) {
    Poly r(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += sign * b[i];
    return r;
}

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

std::optional<Poly> poly_rec(const Ast& a, Var v) {
    switch (a->op) {
        case Op::constant: return Poly{a->value};
        case Op::variable:
            if (a->var == v) return Poly{0.0, 1.0};
            return std::nullopt;
        case Op::add:
        case Op::sub:
        case Op::mul: {
            auto l = poly_rec(a->lhs, v);
            auto r = poly_rec(a->rhs, v);
            if (!l || !r) return std::nullopt;
            if (a->op == Op::mul) return poly_mul(*l, *r);
            return poly_add(*l, *r, a->op == Op::add ? 1.0 : -1.0);
        }
        case Op::div: {
            auto l = poly_rec(a->lhs, v);
            if (!l) return std::nullopt;
            for (auto& c : *l) c /= a->rhs->value;
            return l;
        }
        case Op::neg: {
            auto l = poly_rec(a->lhs, v);
            if (!l) return std::nullopt;
            for (auto& c : *l) c = -c;
            return l;
        }
        case Op::pow: {
            auto l = poly_rec(a->lhs, v);
            if (!l) return std::nullopt;
            Poly r{1.0};
            for (int i = 0; i < a->exponent; ++i) r = poly_mul(r, *l);
            return r;
        }
        default: return std::nullopt;
    }
}

}  // namespace

ParseError::ParseError(std::string message, std::size_t offset, std::string expected)
    : std::runtime_error(std::move(message)), offset_(offset), expected_(std::move(expected)) {}

UnboundVariable::UnboundVariable(Var v)
    : std::runtime_error(fmt::format("unbound variable '{}'", var_name(v))) {}

Ast constant(double v) {
    auto n = std::make_shared<Node>();
    n->op = Op::constant;
    n->value = v;
    return n;
}

Ast variable(Var v) {
    auto n = std::make_shared<Node>();
    n->op = Op::variable;
    n->var = v;
    return n;
}

Ast parse(std::string_view source) { return Parser(source).run(); }

double evaluate(const Ast& a, const Bindings& b) {
    switch (a->op) {
        case Op::constant: return a->value;
        case Op::variable: {
            const auto& slot = a->var == Var::x ? b.x : a->var == Var::t ? b.t : b.y;
            if (!slot) throw UnboundVariable(a->var);
            return *slot;
        }
        case Op::pow: return integer_power(evaluate(a->lhs, b), a->exponent);
        default: break;
    }
    if (is_unary(a->op)) return apply_unary(a->op, evaluate(a->lhs, b));
    return apply_binary(a->op, evaluate(a->lhs, b), evaluate(a->rhs, b));
}

Ast differentiate(const Ast& a, Var v) {
    switch (a->op) {
        case Op::constant: return constant(0.0);
        case Op::variable: return constant(a->var == v ? 1.0 : 0.0);
        case Op::add: return s_add(differentiate(a->lhs, v), differentiate(a->rhs, v));
        case Op::sub: return s_sub(differentiate(a->lhs, v), differentiate(a->rhs, v));
        case Op::mul:
            return s_add(s_mul(differentiate(a->lhs, v), a->rhs), s_mul(a->lhs, differentiate(a->rhs, v)));
        case Op::div: return s_div(differentiate(a->lhs, v), a->rhs);
        case Op::neg: return s_neg(differentiate(a->lhs, v));
        case Op::pow:
            return s_mul(s_mul(constant(a->exponent), s_pow(a->lhs, a->exponent - 1)), differentiate(a->lhs, v));
        case Op::sin: return s_mul(fold_unary(Op::cos, a->lhs), differentiate(a->lhs, v));
        case Op::cos: return s_neg(s_mul(fold_unary(Op::sin, a->lhs), differentiate(a->lhs, v)));
        case Op::tanh:
            return s_mul(s_sub(constant(1.0), s_pow(a, 2)), differentiate(a->lhs, v));
        case Op::exp: return s_mul(a, differentiate(a->lhs, v));
    }
    return constant(0.0);
}

std::string print(const Ast& ast) { return print_rec(ast); }

bool equal(const Ast& a, const Ast& b) {
    if (a == b) return true;
    if (!a || !b || a->op != b->op) return false;
    switch (a->op) {
        case Op::constant: return a->value == b->value;
        case Op::variable: return a->var == b->var;
        case Op::pow: return a->exponent == b->exponent && equal(a->lhs, b->lhs);
        default: break;
    }
    if (is_unary(a->op)) return equal(a->lhs, b->lhs);
    return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
}

bool depends_on(const Ast& a, Var v) {
    if (a->op == Op::constant) return false;
    if (a->op == Op::variable) return a->var == v;
    if (a->lhs && depends_on(a->lhs, v)) return true;
    return a->rhs && depends_on(a->rhs, v);
}

bool is_constant(const Ast& a) {
    return !depends_on(a, Var::x) && !depends_on(a, Var::t) && !depends_on(a, Var::y);
}

std::optional<std::vector<double>> as_polynomial(const Ast& ast, Var var) {
    auto p = poly_rec(ast, var);
    if (!p) return std::nullopt;
    while (p->size() > 1 && p->back() == 0.0) p->pop_back();
    return p;
}

// ---------------------------------------------------------------------------

namespace {

void emit(const Ast& a, std::vector<Ast>& out) {
    if (a->lhs) emit(a->lhs, out);
    if (a->rhs) emit(a->rhs, out);
    out.push_back(a);
}

}  // namespace

Compiled::Compiled(const Ast& ast) {
    std::vector<Ast> order;
    emit(ast, order);
    std::size_t depth = 0;
    for (const auto& n : order) {
        code_.push_back({n->op, n->value, n->var, n->exponent});
        if (n->op == Op::constant || n->op == Op::variable) depth_ = std::max(depth_, ++depth);
        else if (is_binary(n->op)) --depth;
    }
}

double Compiled::operator()(double x, double t, double y) const {
    constexpr std::size_t kInline = 32;
    double inline_stack[kInline]{};
    std::vector<double> heap;
    double* st = inline_stack;
    if (depth_ > kInline) {
        heap.resize(depth_);
        st = heap.data();
    }
    std::size_t sp = 0;
    for (const auto& in : code_) {
        switch (in.op) {
            case Op::constant: st[sp++] = in.value; break;
            case Op::variable: st[sp++] = in.var == Var::x ? x : in.var == Var::t ? t : y; break;
            case Op::add: --sp; st[sp - 1] += st[sp]; break;
            case Op::sub: --sp; st[sp - 1] -= st[sp]; break;
            case Op::mul: --sp; st[sp - 1] *= st[sp]; break;
            case Op::div: --sp; st[sp - 1] /= st[sp]; break;
            case Op::neg: st[sp - 1] = -st[sp - 1]; break;
            case Op::pow: st[sp - 1] = integer_power(st[sp - 1], in.exponent); break;
            case Op::sin: st[sp - 1] = std::sin(st[sp - 1]); break;
            case Op::cos: st[sp - 1] = std::cos(st[sp - 1]); break;
            case Op::tanh: st[sp - 1] = std::tanh(st[sp - 1]); break;
            case Op::exp: st[sp - 1] = std::exp(st[sp - 1]); break;
        }
    }
    return st[0];
}

}  // namespace delayopt::expr
