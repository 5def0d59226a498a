#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace delayopt::expr {

enum class Var { x, t, y };

enum class Op { constant, variable, add, sub, mul, div, neg, pow, sin, cos, tanh, exp };

struct Node;
using Ast = std::shared_ptr<const Node>;

/// Immutable expression tree node.
///
/// `div` only ever carries a constant denominator and `pow` only a
/// non-negative integer exponent; the parser enforces both.
struct Node {
    Op op = Op::constant;
    double value = 0.0;  // constant
    Var var = Var::x;    // variable
    int exponent = 0;    // pow
    Ast lhs;
    Ast rhs;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, std::size_t offset, std::string expected);

    std::size_t offset() const noexcept { return offset_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::string expected_;
};

class UnboundVariable : public std::runtime_error {
public:
    explicit UnboundVariable(Var v);
};

struct Bindings {
    std::optional<double> x;
    std::optional<double> t;
    std::optional<double> y;
};

Ast constant(double v);
Ast variable(Var v);

/// Parses standard infix text with precedence ^ > unary minus > * / > + -.
/// Constant subtrees are folded; `pi` and `sqrt2` are built-in names.
Ast parse(std::string_view source);

double evaluate(const Ast& ast, const Bindings& bindings);

/// Exact partial derivative with light constant folding.
Ast differentiate(const Ast& ast, Var var);

std::string print(const Ast& ast);

bool equal(const Ast& a, const Ast& b);
bool depends_on(const Ast& ast, Var var);
bool is_constant(const Ast& ast);

/// Coefficients c_0..c_n of `ast` as a polynomial in `var`, or nullopt if the
/// tree is not a polynomial in `var` alone (any other variable or any
/// transcendental function of `var` disqualifies it).
std::optional<std::vector<double>> as_polynomial(const Ast& ast, Var var);

/// Flattened postfix form of an Ast for hot loops.
class Compiled {
public:
    Compiled() = default;
    explicit Compiled(const Ast& ast);

    double operator()(double x, double t, double y = 0.0) const;
    bool empty() const noexcept { return code_.empty(); }

private:
    struct Instr {
        Op op;
        double value;
        Var var;
        int exponent;
    };
    std::vector<Instr> code_;
    std::size_t depth_ = 0;
};

}  // namespace delayopt::expr
