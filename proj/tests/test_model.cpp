#include "catch_amalgamated.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "delayopt/model.hpp"
#include "support.hpp"

using namespace delayopt;

TEST_CASE("cubic reactions are recognised") {
    const auto r = ReactionSpec::from_expression("y*(y-0.25)*(y-1)");
    CHECK(r.is_polynomial());
    CHECK(r.value(0, 0, 2.0) == Catch::Approx(3.5));
    CHECK(r.derivative(0, 0, 2.0) == Catch::Approx(3 * 4 - 2.5 * 2 + 0.25));
    CHECK_FALSE(ReactionSpec::from_expression("sin(y)").is_polynomial());
    CHECK_FALSE(ReactionSpec::from_expression("y^4").is_polynomial());
    CHECK_THROWS_AS(HistorySpec::from_expression("y+t"), expr::ParseError);
}

TEST_CASE("validation reports every violation") {
    auto spec = testing::desk().problem;
    CHECK(validate(spec).ok());
    spec.weight_bounds[0] = {-std::numeric_limits<double>::infinity(), 1.0};
    spec.tikhonov = 0.0;
    spec.horizon = -1.0;
    const auto r = validate(spec);
    CHECK(r.violations.size() >= 2);
}

TEST_CASE("projection is idempotent and non-expansive") {
    const auto spec = testing::desk().problem;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (int i = 0; i < 200; ++i) {
        const ControlVector a{{u(rng), u(rng)}, {u(rng), u(rng)}, std::nullopt};
        const ControlVector b{{u(rng), u(rng)}, {u(rng), u(rng)}, std::nullopt};
        const auto pa = project_to_admissible(a, spec);
        const auto pb = project_to_admissible(b, spec);
        CHECK(project_to_admissible(pa, spec) == pa);
        double d = 0.0, dp = 0.0;
        const auto xa = a.pack(), xb = b.pack(), ya = pa.pack(), yb = pb.pack();
        for (std::size_t j = 0; j < xa.size(); ++j) {
            d += (xa[j] - xb[j]) * (xa[j] - xb[j]);
            dp += (ya[j] - yb[j]) * (ya[j] - yb[j]);
        }
        CHECK(dp <= d);
    }
}

TEST_CASE("pack and unpack") {
    const ControlVector u{{1.0, 2.0}, {3.0, 4.0}, 5.0};
    CHECK(u.pack() == std::vector<double>{1, 2, 3, 4, 5});
    CHECK(ControlVector::unpack(u.pack(), 2, true) == u);
    CHECK_THROWS_AS(ControlVector::unpack({1, 2, 3}, 2, false), std::invalid_argument);
}

TEST_CASE("DDE target evaluates the dense solution") {
    const auto t = TargetSpec::dde_reference({1.5707963267948966, 1.0, 1.0}, 10.0, 1.0 / 50.0);
    CHECK_FALSE(t.is_expression());
    CHECK(t.value(0.0, -0.5) == 1.0);
    CHECK(t.value(0.0, 0.5) == Catch::Approx(1.0 - 1.5707963267948966 * 0.5).epsilon(1e-12));
    CHECK_FALSE(t.depends_on_x());
}
