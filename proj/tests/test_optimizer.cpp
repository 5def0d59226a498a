#include "catch_amalgamated.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

#include "delayopt/optimizer.hpp"
#include "support.hpp"

using namespace delayopt;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Ill-conditioned convex quadratic with minimiser c.
ObjectiveHook quadratic(std::vector<double> c, std::vector<double> scale) {
    return [c, scale](const std::vector<double>& x) {
        double f = 0.0;
        std::vector<double> g(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            f += 0.5 * scale[i] * (x[i] - c[i]) * (x[i] - c[i]);
            g[i] = scale[i] * (x[i] - c[i]);
        }
        return std::pair{f, g};
    };
}

}  // namespace

TEST_CASE("unconstrained quadratic") {
    const auto f = quadratic({1.0, -2.0, 3.0}, {1.0, 100.0, 0.01});
    const auto r = minimize(f, {0.0, 0.0, 0.0}, {-kInf, -kInf, -kInf}, {kInf, kInf, kInf});
    CHECK(r.reason == Termination::converged);
    CHECK(r.x[0] == Catch::Approx(1.0).margin(1e-5));
    CHECK(r.x[1] == Catch::Approx(-2.0).margin(1e-7));
    CHECK(r.x[2] == Catch::Approx(3.0).margin(1e-3));
    CHECK(r.projected_norm <= 1e-6);
    for (std::size_t i = 1; i < r.iterates.size(); ++i) CHECK(r.iterates[i].value <= r.iterates[i - 1].value);
}

TEST_CASE("minimiser outside the box ends on the bound") {
    const auto f = quadratic({3.0, -3.0}, {1.0, 4.0});
    const auto r = minimize(f, {0.5, 0.5}, {-1.0, -1.0}, {1.0, 1.0});
    CHECK(r.reason == Termination::converged);
    CHECK(r.x == std::vector<double>{1.0, -1.0});
    CHECK(r.projected_norm == 0.0);
    CHECK(r.gradient[0] < 0.0);
    CHECK(r.gradient[1] > 0.0);
}

TEST_CASE("iteration budget") {
    OptimizerSettings s;
    s.max_iterations = 2;
    const auto f = quadratic({1.0, 2.0}, {1.0, 1e4});
    const auto r = minimize(f, {0.0, 0.0}, {-kInf, -kInf}, {kInf, kInf}, s);
    CHECK(r.reason == Termination::max_iterations);
    CHECK(r.iterates.size() == 3);
}

TEST_CASE("failed trial points are rejected") {
    const ObjectiveHook f = [](const std::vector<double>& x) {
        if (x[0] > 0.5) throw std::runtime_error("infeasible");
        return std::pair{(x[0] - 2.0) * (x[0] - 2.0), std::vector<double>{2.0 * (x[0] - 2.0)}};
    };
    const auto r = minimize(f, {0.0}, {-kInf}, {kInf});
    CHECK(r.x[0] <= 0.5);
    CHECK(r.value < 4.0);
}

TEST_CASE("run records serialise one line per iterate") {
    const auto r = minimize(quadratic({1.0}, {1.0}), {0.0}, {-kInf}, {kInf});
    const auto lines = r.to_json_lines();
    CHECK(std::count(lines.begin(), lines.end(), '\n') == std::ptrdiff_t(r.iterates.size()));
    const auto s = r.summary();
    CHECK(s["reason"] == "converged");
}

TEST_CASE("start sampling is seeded and respects the box") {
    const auto spec = testing::desk(VariantKind::direct_delay, ObjectiveKind::shifted).problem;
    const StartBox box{{1.0, 20.0}, {-1.0, 1.0}, {0.0, 1.0}};
    for (auto sampling : {Sampling::latin, Sampling::uniform}) {
        const auto a = sample_starts(spec, box, 12, 42, sampling);
        const auto b = sample_starts(spec, box, 12, 42, sampling);
        const auto c = sample_starts(spec, box, 12, 43, sampling);
        CHECK(a == b);
        CHECK_FALSE(a == c);
        for (const auto& u : a) {
            for (double s : u.delays) CHECK((s >= 1.0 && s <= 8.0));
            for (double k : u.weights) CHECK((k >= -1.0 && k <= 1.0));
            REQUIRE(u.shift);
            CHECK((*u.shift >= 0.0 && *u.shift <= 1.0));
        }
    }
    // one sample per stratum in every coordinate
    const auto l = sample_starts(spec, box, 10, 1, Sampling::latin);
    std::vector<int> hits(10, 0);
    for (const auto& u : l) ++hits[std::min(9, int((u.weights[0] + 1.0) / 0.2))];
    CHECK(std::count(hits.begin(), hits.end(), 1) == 10);
}

TEST_CASE("multistart is deterministic and ranked") {
    const auto cfg = testing::desk();
    const auto p = make_problem(cfg);
    const auto starts = sample_starts(cfg.problem, {{0.5, 4.0}, {-1.0, 1.0}, {0.0, 1.0}}, 4, 9, Sampling::latin);
    OptimizerSettings s;
    s.tolerance = 1e-5;
    const auto a = multistart(p, starts, s, 2);
    const auto b = multistart(p, starts, s, 1);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].u == b[i].u);
        CHECK(a[i].record.value == b[i].record.value);
        if (i) CHECK(a[i - 1].record.value <= a[i].record.value);
    }
    CHECK(a.front().record.projected_norm <= 1e-5);
}

TEST_CASE("failing starts are dropped") {
    const auto p = make_problem(testing::desk());
    const std::vector<ControlVector> bad{{{0.0, 0.0}, {5.0, 5.0}, std::nullopt}};
    CHECK_THROWS_AS(multistart(p, bad), std::runtime_error);
    auto mixed = bad;
    mixed.push_back({{1.3, 2.7}, {0.4, -0.3}, std::nullopt});
    CHECK(multistart(p, mixed).size() == 1);
}

TEST_CASE("shift scan only ever lowers J") {
    const auto p = make_problem(testing::desk(VariantKind::direct_delay, ObjectiveKind::shifted));
    const auto u0 = testing::desk_control(p.spec());
    OptimizerSettings st;
    st.tolerance = 1e-5;
    st.shift_scan = 16;
    const auto r = optimize(p, u0, st);
    CHECK(r.record.value <= evaluate(p, u0, false).value);
    for (std::size_t i = 1; i < r.record.iterates.size(); ++i)
        CHECK(r.record.iterates[i].value <= r.record.iterates[i - 1].value);
    CHECK(r.record.value == Catch::Approx(evaluate(p, r.u, false).value).epsilon(1e-12));
}
