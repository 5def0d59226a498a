#include "catch_amalgamated.hpp"

#include "delayopt/config.hpp"

using namespace delayopt;

TEST_CASE("built-in configs round-trip") {
    for (const auto& name : builtin_config_names()) {
        INFO(name);
        const auto c = builtin_config(name);
        const auto text = serialize_config(c);
        const auto back = parse_config(text);
        CHECK(back == c);
        CHECK(serialize_config(back) == text);
    }
}

TEST_CASE("paper grids") {
    const auto e1 = builtin_config("example1");
    CHECK(e1.problem.ode_mode);
    CHECK(e1.discretization.n_slabs == 4096);
    const auto e2 = builtin_config("example2");
    CHECK(e2.discretization.n_elements == 128);
    CHECK(e2.discretization.n_slabs == 128);
    CHECK(builtin_config("example4").problem.variant == VariantKind::pyragas);
    CHECK_THROWS_AS(builtin_config("example5"), ConfigError);
}

namespace {

const char* kMinimal = R"ini([problem]
space_interval = [-1, 1]
horizon = 2
num_delays = 2
weight_bounds = [-3, 3]
history = "cos(x)"
target = "0"
reaction = "y^3 - y"

[discretization]
n_elements = 4
n_slabs = 4
)ini";

}  // namespace

TEST_CASE("defaults and broadcasting") {
    const auto c = parse_config(kMinimal);
    CHECK(c.problem.delay_bounds == std::vector<Interval>(2, {0.0, 2.0}));
    CHECK(c.problem.weight_bounds == std::vector<Interval>(2, {-3.0, 3.0}));
    CHECK(c.optimizer == OptimizerSettings{});
    CHECK(c.starts.points.empty());
    CHECK(start_points(c).size() == 1);
    CHECK(parse_config(serialize_config(c)) == c);
}

TEST_CASE("constant expressions and infinities as numbers") {
    std::string text = kMinimal;
    text += "[starts]\npoints = [[\"pi/4\", 1, 0, \"-1/2\"]]\n";
    const auto c = parse_config(text);
    CHECK(c.starts.points.front().delays[0] == Catch::Approx(0.7853981633974483));
    CHECK(c.starts.points.front().weights[1] == -0.5);
}

TEST_CASE("config errors") {
    auto with = [](const std::string& extra) { return std::string(kMinimal).insert(10, extra + "\n"); };
    CHECK_THROWS_AS(parse_config(with("colour = 1")), ConfigError);
    std::string one_slab = kMinimal;
    one_slab.replace(one_slab.find("n_slabs = 4"), 11, "n_slabs = 1");
    CHECK_THROWS_AS(parse_config(one_slab), ConfigError);
    CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "[extra]\na = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(with("variant = \"other\"")), ConfigError);
    CHECK_THROWS_AS(parse_config(with("window = [1, 0]")), ConfigError);
    CHECK_THROWS_AS(parse_config("[problem]\nhorizon = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("no section line\n[[["), ConfigError);
    std::string bad_expr = kMinimal;
    bad_expr.replace(bad_expr.find("cos(x)"), 6, "cos(x");
    CHECK_THROWS_AS(parse_config(bad_expr), ConfigError);
    CHECK_THROWS_AS(parse_config(with("target_dde = [1, 1, 1]")), ConfigError);
}

TEST_CASE("control json") {
    const auto c = builtin_config("example3");
    const auto u = control_from_json(nlohmann::json::parse(R"({"s": [2.2785, 4.8126], "kappa": [-8.2564, -5.2898], "sigma": 2.3775})"),
                                     c.problem);
    CHECK(u.shift == 2.3775);
    CHECK(control_from_json(control_to_json(u), c.problem) == u);
    CHECK_THROWS_AS(control_from_json(nlohmann::json::parse(R"({"s": [1], "kappa": [1]})"), c.problem), ConfigError);
    CHECK_THROWS_AS(control_from_json(nlohmann::json::parse(R"({"s": [90, 1], "kappa": [1, 1]})"), c.problem), ConfigError);
}

TEST_CASE("screened starts") {
    auto c = builtin_config("desk");
    c.starts.points.clear();
    c.starts.count = 3;
    c.starts.screen = 8;
    c.starts.screen_grid = 4;
    const auto starts = select_starts(c);
    REQUIRE(starts.size() == 3);

    // Each start is a coarse local optimum, and they come out best first.
    auto coarse = c;
    coarse.discretization = {4, 4};
    const auto p = make_problem(coarse);
    double prev = -1.0;
    for (const auto& u : starts) {
        const double J = evaluate(p, u, false).value;
        CHECK(J >= prev);
        prev = J;
    }
    const auto raw = start_points(c);
    CHECK(evaluate(p, starts.front(), false).value <= evaluate(p, raw.front(), false).value);

    c.starts.screen = 2;
    CHECK_THROWS_AS(parse_config(serialize_config(c)), ConfigError);
}
