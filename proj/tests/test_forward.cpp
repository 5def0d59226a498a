#include "catch_amalgamated.hpp"

#include <cmath>

#include "delayopt/forward.hpp"
#include "delayopt/objective.hpp"
#include "delayopt/oracle.hpp"
#include "support.hpp"

using namespace delayopt;

TEST_CASE("zero weights make the state independent of the delays") {
    for (auto variant : {VariantKind::direct_delay, VariantKind::pyragas}) {
        const auto p = make_problem(testing::desk(variant));
        const auto a = solve_state(p, ControlVector{{1.3, 2.7}, {0.0, 0.0}, std::nullopt});
        const auto b = solve_state(p, ControlVector{{0.1, 7.9}, {0.0, 0.0}, std::nullopt});
        for (std::size_t k = 0; k <= p.grid().n_slabs(); ++k)
            for (std::size_t j = 0; j < p.dofs(); ++j) REQUIRE(a.node(k)[j] == b.node(k)[j]);
    }
}

TEST_CASE("equilibrium data is tracked exactly") {
    const auto cfg = builtin_config("equilibrium");
    const auto p = make_problem(cfg);
    const auto ev = evaluate(p, cfg.starts.points.front(), true);
    CHECK(std::abs(ev.value) <= 1e-12);
    for (double g : ev.gradient->pack()) CHECK(std::abs(g) <= 1e-12);
}

TEST_CASE("slab residuals vanish at the computed state") {
    for (auto variant : {VariantKind::direct_delay, VariantKind::pyragas}) {
        const auto cfg = testing::desk(variant);
        const auto p = make_problem(cfg);
        const auto u = testing::desk_control(p.spec());
        const Coupling coupling(p, u);
        const auto y = solve_state(p, coupling);
        for (std::size_t k = 1; k <= p.grid().n_slabs(); ++k)
            CHECK(p.space().dual_norm(slab_residual(p, coupling, y, k)) <= 1e-11);
    }
}

TEST_CASE("spatially constant data reduces to ode mode") {
    auto cfg = testing::desk();
    cfg.problem.history = HistorySpec::from_expression("0.5+0.1*t");
    cfg.problem.target = TargetSpec::from_expression("sin(t)");
    const auto pde = make_problem(cfg);
    cfg.problem.ode_mode = true;
    const auto ode = make_problem(cfg);
    const auto u = testing::desk_control(cfg.problem);
    const auto a = solve_state(pde, u);
    const auto b = solve_state_ode_mode(ode, u);
    for (std::size_t k = 0; k <= pde.grid().n_slabs(); ++k)
        for (double v : a.node(k)) CHECK(v == Catch::Approx(b.node(k)[0]).epsilon(1e-12));
    CHECK(evaluate_tracking(pde, u, a, false).value / 8.0 ==
          Catch::Approx(evaluate_tracking(ode, u, b, false).value).epsilon(1e-11));
    CHECK_THROWS_AS(solve_state_ode_mode(pde, u), std::invalid_argument);
}

TEST_CASE("newton failure names the slab") {
    const auto p = make_problem(testing::desk());
    try {
        (void)solve_state(p, ControlVector{{0.0, 0.0}, {5.0, 5.0}, std::nullopt});
        FAIL("expected a failure");
    } catch (const NewtonFailure& e) {
        CHECK(e.slab() == 1);
    }
}

TEST_CASE("temporal order two") {
    const auto rows = oracle::convergence_study(oracle::decay_case(), oracle::Refinement::time, {8, 16, 32, 64}, 1);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(*rows[i].order == Catch::Approx(2.0).margin(0.2));
}

TEST_CASE("spatial order two") {
    const auto rows = oracle::convergence_study(oracle::heat_case(), oracle::Refinement::space, {8, 16, 32}, 2048);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(*rows[i].order == Catch::Approx(2.0).margin(0.3));
}

TEST_CASE("constant data without reaction is reproduced exactly") {
    auto c = oracle::heat_case();
    c.spec.history = HistorySpec::from_expression("2");
    c.exact = [](double, double) { return 2.0; };
    for (const auto& r : oracle::convergence_study(c, oracle::Refinement::space, {4, 8}, 8)) CHECK(r.error <= 1e-13);
}
