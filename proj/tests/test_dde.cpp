#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "delayopt/dde.hpp"

using delayopt::oracle::LinearDde;

namespace {
constexpr double kA = std::numbers::pi / 2.0;
}

TEST_CASE("first interval is linear") {
    const LinearDde d(kA, 1.0, 1.0, 80.0, 1.0 / 52.0);
    for (double t = 0.0; t <= 1.0; t += 0.01) CHECK(d.value(t) == Catch::Approx(1.0 - kA * t).epsilon(1e-13).margin(1e-14));
}

TEST_CASE("dense output is continuous and matches the history") {
    const LinearDde d(kA, 1.0, 1.0, 20.0, 1.0 / 52.0);
    CHECK(d.value(-0.3) == 1.0);
    CHECK(d.derivative(0.5) == Catch::Approx(-kA));
    for (int n = 1; n < int(20.0 * 52); ++n) {
        const double t = n / 52.0;
        CHECK(d.value(t - 1e-12) == Catch::Approx(d.value(t + 1e-12)).margin(1e-9));
    }
}

// a = pi/2, d = 1 is the Hopf point: the solution approaches cos(pi t / 2) up to phase, period 4.
TEST_CASE("zero crossings are two time units apart") {
    const LinearDde d(kA, 1.0, 1.0, 80.0, 1.0 / 52.0);
    std::vector<double> zeros;
    const double h = 1e-3;
    for (double t = 0.0; t < 80.0 - h; t += h) {
        const double a = d.value(t), b = d.value(t + h);
        if (a * b < 0.0) zeros.push_back(t + h * a / (a - b));
    }
    REQUIRE(zeros.size() > 30);
    for (std::size_t i = zeros.size() - 10; i < zeros.size(); ++i)
        CHECK(zeros[i] - zeros[i - 1] == Catch::Approx(2.0).margin(1e-3));
}

TEST_CASE("step must divide the delay") {
    CHECK_THROWS_AS(LinearDde(1.0, 1.0, 1.0, 10.0, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(LinearDde(1.0, 0.0, 1.0, 10.0, 0.1), std::invalid_argument);
}

TEST_CASE("zero coefficient keeps the history") {
    const LinearDde d(0.0, 1.0, 0.7, 5.0, 0.25);
    for (double t = 0.0; t <= 5.0; t += 0.1) CHECK(d.value(t) == Catch::Approx(0.7).margin(1e-15));
}
