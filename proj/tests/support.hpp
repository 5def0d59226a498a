#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "delayopt/config.hpp"

namespace delayopt::testing {

// The 8-element, 16-slab desk instance with either variant and objective.
inline RunConfig desk(VariantKind variant = VariantKind::direct_delay, ObjectiveKind objective = ObjectiveKind::plain) {
    auto c = builtin_config("desk");
    c.problem.variant = variant;
    c.problem.objective = objective;
    return c;
}

inline ControlVector desk_control(const ProblemSpec& spec) {
    ControlVector u{{1.3, 2.7}, {0.4, -0.3}, std::nullopt};
    if (spec.shifted()) u.shift = 0.7;
    return u;
}

inline double rel_err(double a, double b) {
    if (a == b) return 0.0;
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

inline std::vector<std::vector<double>> random_field(std::mt19937_64& rng, std::size_t rows, std::size_t dofs) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> v(rows, std::vector<double>(dofs));
    for (auto& r : v)
        for (auto& x : r) x = u(rng);
    return v;
}

}  // namespace delayopt::testing
