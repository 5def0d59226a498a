#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "delayopt/expr.hpp"

using namespace delayopt::expr;

TEST_CASE("precedence and folding") {
    CHECK(evaluate(parse("2+3*4^2"), {}) == 50.0);
    CHECK(evaluate(parse("-2^2"), {}) == -4.0);
    CHECK(evaluate(parse("(1+2)*3"), {}) == 9.0);
    CHECK(evaluate(parse("8/4/2"), {}) == 1.0);
    CHECK(is_constant(parse("pi/2+sqrt2")));
    CHECK(evaluate(parse("sqrt2^2"), {}) == Catch::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("variables and unbound lookups") {
    const auto a = parse("x*t+y");
    CHECK(evaluate(a, {1.5, 2.0, 0.25}) == 3.25);
    CHECK_THROWS_AS(evaluate(a, {1.0, 1.0, std::nullopt}), UnboundVariable);
    CHECK(depends_on(a, Var::y));
    CHECK_FALSE(depends_on(parse("x*t"), Var::y));
}

TEST_CASE("parse errors carry an offset") {
    for (const char* bad : {"", "1+", "sin(x", "x**2", "y^x", "x^-1", "foo(x)", "1/x", "x^1.5", "(x))"}) {
        INFO(bad);
        CHECK_THROWS_AS(parse(bad), ParseError);
    }
    try {
        parse("1 + * 2");
        FAIL("no throw");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
    }
}

TEST_CASE("print then parse is the identity") {
    for (const char* src : {"y*(y-0.25)*(y-1)", "0.5*(1-tanh((x-0.25*sqrt2*t)/2))", "3*sin(t-cos(pi/20*(x+20)))",
                            "-(x-t)^3/7", "exp(-x^2)*cos(2*t)", "-y", "x-(t-y)", "1-(-x)"}) {
        INFO(src);
        const auto a = parse(src);
        const auto b = parse(print(a));
        CHECK(equal(a, b));
        CHECK(print(b) == print(a));
    }
}

TEST_CASE("symbolic derivatives agree with central differences") {
    const char* sources[] = {"y*(y-0.25)*(y-1)", "sin(x*y)+exp(-t*y)", "tanh(y^3-x)/3", "cos(y)^2*t"};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (const char* src : sources) {
        const auto f = parse(src);
        const auto df = differentiate(f, Var::y);
        const Compiled cf(f), cdf(df);
        for (int i = 0; i < 100; ++i) {
            const double x = u(rng), t = u(rng), y = u(rng), h = 1e-5;
            const double fd = (cf(x, t, y + h) - cf(x, t, y - h)) / (2 * h);
            CHECK(cdf(x, t, y) == Catch::Approx(fd).epsilon(1e-7).margin(1e-8));
            CHECK(cf(x, t, y) == evaluate(f, {x, t, y}));
        }
    }
}

TEST_CASE("polynomial recognition") {
    const auto c = as_polynomial(parse("y*(y-0.25)*(y-1)"), Var::y);
    REQUIRE(c);
    REQUIRE(c->size() == 4);
    CHECK((*c)[0] == 0.0);
    CHECK((*c)[1] == Catch::Approx(0.25));
    CHECK((*c)[2] == Catch::Approx(-1.25));
    CHECK((*c)[3] == 1.0);
    CHECK_FALSE(as_polynomial(parse("x*y"), Var::y));
    CHECK_FALSE(as_polynomial(parse("sin(y)"), Var::y));
}
