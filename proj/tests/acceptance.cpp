// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments
// select criteria by name prefix.

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "delayopt/adjoint.hpp"
#include "delayopt/oracle.hpp"
#include "support.hpp"

using namespace delayopt;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string name;
    std::function<Outcome()> run;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const VariantKind kVariants[] = {VariantKind::direct_delay, VariantKind::pyragas};
const ObjectiveKind kObjectives[] = {ObjectiveKind::plain, ObjectiveKind::shifted};

Outcome gradient_exactness() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (auto v : kVariants)
        for (auto o : kObjectives) {
            const auto p = make_problem(testing::desk(v, o));
            const auto u = testing::desk_control(p.spec());
            const auto g = evaluate(p, u, true).gradient->pack();
            const auto f = oracle::fd_gradient(p, u).gradient.pack();
            for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, testing::rel_err(g[i], f[i]));
        }
    const double t = seconds_since(t0);
    return {worst <= 1e-6 && t < 10.0, fmt::format("max rel err {:.2e} (<= 1e-6), {:.2f} s (< 10 s)", worst, t)};
}

Outcome duality() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> d(-1.0, 1.0), s(0.0, 8.0);
    double worst_tangent = 0.0;
    for (auto v : kVariants)
        for (auto o : kObjectives) {
            const auto p = make_problem(testing::desk(v, o));
            const auto u = testing::desk_control(p.spec());
            const auto ev = evaluate(p, u, true);
            const auto g = ev.gradient->pack();
            for (int trial = 0; trial < 5; ++trial) {
                std::vector<double> dir(g.size());
                for (auto& x : dir) x = d(rng);
                double dot = 0.0;
                for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * dir[i];
                worst_tangent = std::max(worst_tangent, testing::rel_err(tangent_derivative(p, u, ev.state, dir), dot));
            }
        }
    double worst_transpose = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = make_problem(testing::desk(kVariants[trial % 2]));
        const ControlVector u{{s(rng), s(rng)}, {2 * d(rng), 2 * d(rng)}, std::nullopt};
        const Coupling c(p, u);
        const std::size_t n = p.grid().n_slabs();
        const auto z = testing::random_field(rng, n + 1, p.dofs());
        const auto phi = testing::random_field(rng, n, p.dofs());
        const auto dz = c.apply_delayed(z);
        const auto aphi = c.apply_advanced(phi);
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t k = 1; k <= n; ++k)
            for (std::size_t j = 0; j < p.dofs(); ++j) {
                lhs += aphi[k][j] * z[k][j];
                rhs += phi[k - 1][j] * dz[k - 1][j];
            }
        worst_transpose = std::max(worst_transpose, testing::rel_err(lhs, rhs));
    }
    return {worst_tangent <= 1e-8 && worst_transpose <= 1e-13,
            fmt::format("tangent {:.2e} (<= 1e-8), transpose {:.2e} (<= 1e-13)", worst_tangent, worst_transpose)};
}

Outcome example1() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = builtin_config("example1");
    const auto p = make_problem(cfg);
    const auto best = multistart(p, start_points(cfg), cfg.optimizer).front();
    const double t = seconds_since(t0);
    const double s = best.u.delays[0], k = best.u.weights[0], J = best.record.value;
    const bool ok = std::abs(s - 1.2409) <= 0.02 && std::abs(k + 1.7668) <= 0.02 && std::abs(J / 1.8701 - 1.0) <= 0.02 &&
                    best.record.projected_norm <= 1e-4 && t < 120.0;
    return {ok, fmt::format("s {:.5f}, kappa {:.5f}, J {:.5f}, |grad| {:.1e}, {:.1f} s", s, k, J,
                            best.record.projected_norm, t)};
}

Outcome example2() {
    const auto cfg = builtin_config("example2");
    const auto p = make_problem(cfg);
    const ControlVector u{{0.0, 0.9367, 6.7481, 28.3843, 32.2258, 39.8133},
                          {0.9846, -1.5039, 0.4542, -2.2799, 3.7013, -1.3844},
                          std::nullopt};
    const auto ev = evaluate(p, u, true);
    const auto report = stationarity_check(p.spec(), u, *ev.gradient, 1e-3);
    const auto& s1 = report.coordinates[0];
    const bool ok = std::abs(ev.value / 4209.3 - 1.0) <= 0.05 && s1.gradient > 0.0 &&
                    s1.status == CoordinateStatus::active_lower_consistent;
    return {ok, fmt::format("J {:.2f} (4209.3 +- 5%), dJ/ds_1 {:.1f} at s_1 = 0 ({})", ev.value, s1.gradient,
                            to_string(s1.status))};
}

Outcome example3() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = builtin_config("example3");
    const auto p = make_problem(cfg);
    const ControlVector table{{2.2785, 4.8126}, {-8.2564, -5.2898}, 2.3775};
    const double J_table = evaluate(p, table, false).value;
    const auto starts = select_starts(cfg);
    const auto runs = multistart(p, starts, cfg.optimizer);
    const auto& best = runs.front();
    const double t = seconds_since(t0);
    const bool ok = starts.size() == 16 && best.record.value <= 2200.0 && best.record.projected_norm <= 1e-3 &&
                    std::abs(J_table / 2114.5 - 1.0) <= 0.05 && t < 1800.0;
    return {ok, fmt::format("table J {:.2f}; best of {} starts J {:.2f}, |grad| {:.1e}, shift {:.4f}, {:.0f} s",
                            J_table, starts.size(), best.record.value, best.record.projected_norm, *best.u.shift, t)};
}

Outcome example4() {
    const auto cfg = builtin_config("example4");
    const auto p = make_problem(cfg);
    const auto& table = cfg.starts.points.front();
    const double J_table = evaluate(p, table, false).value;
    const auto polished = optimize(p, table, cfg.optimizer);
    const auto ev = evaluate(p, polished.u, true);
    const auto report = stationarity_check(p.spec(), polished.u, *ev.gradient, 1e-3);
    const bool ok = std::abs(J_table / 3763.4 - 1.0) <= 0.10 && report.stationary();
    return {ok, fmt::format("table J {:.2f} (3763.4 +- 10%); polished J {:.4f}, |grad| {:.1e}", J_table, ev.value,
                            report.projected_norm)};
}

Outcome orders() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rt = oracle::convergence_study(oracle::decay_case(), oracle::Refinement::time, {16, 32, 64, 128}, 1);
    const auto rs = oracle::convergence_study(oracle::heat_case(), oracle::Refinement::space, {8, 16, 32, 64}, 2048);
    const double ot = *rt.back().order, os = *rs.back().order;
    const double t = seconds_since(t0);
    return {std::abs(ot - 2.0) <= 0.2 && std::abs(os - 2.0) <= 0.3 && t < 60.0,
            fmt::format("time {:.3f}, space {:.3f}, {:.2f} s", ot, os, t)};
}

Outcome invariants() {
    bool ok = true;
    std::vector<std::string> notes;
    {
        const auto p = make_problem(testing::desk());
        const auto g = *evaluate(p, ControlVector{{1.3, 2.7}, {0.0, 0.0}, std::nullopt}, true).gradient;
        const bool z = g.d_delays[0] == 0.0 && g.d_delays[1] == 0.0;
        ok = ok && z;
        notes.push_back(z ? "kappa=0 delay gradient exactly 0" : "kappa=0 delay gradient nonzero");
    }
    {
        const auto cfg = builtin_config("equilibrium");
        const double J = evaluate(make_problem(cfg), cfg.starts.points.front(), false).value;
        ok = ok && std::abs(J) <= 1e-12;
        notes.push_back(fmt::format("equilibrium J {:.1e}", J));
    }
    {
        auto cfg = testing::desk(VariantKind::pyragas);
        cfg.problem.tikhonov = 0.0;
        const auto g = *evaluate(make_problem(cfg), ControlVector{{0.0, 2.7}, {0.4, -0.3}, std::nullopt}, true).gradient;
        ok = ok && g.d_weights[0] == 0.0;
        notes.push_back(fmt::format("pyragas s=0 dJ/dkappa {:.1e}", g.d_weights[0]));
    }
    {
        const double sum = -1.5039 + 0.4542 - 2.2799 + 3.7013 - 1.3844;
        ok = ok && std::abs(sum + 1.0127) <= 5e-4;
        notes.push_back(fmt::format("weight sum {:.4f}", sum));
    }
    return {ok, fmt::format("{}", fmt::join(notes, "; "))};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {"gradient-exactness", gradient_exactness},
        {"tangent-adjoint-duality", duality},
        {"example1-reproduction", example1},
        {"example2-objective", example2},
        {"example3-multistart", example3},
        {"example4-pyragas", example4},
        {"scheme-orders", orders},
        {"trivial-invariants", invariants},
    };
    int failed = 0, ran = 0;
    for (const auto& c : all) {
        bool selected = argc < 2;
        for (int i = 1; i < argc; ++i) selected = selected || c.name.starts_with(argv[i]);
        if (!selected) continue;
        ++ran;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        failed += !o.pass;
        fmt::print("{} {:<24} {}\n", o.pass ? "PASS" : "FAIL", c.name, o.detail);
        std::fflush(stdout);
    }
    fmt::print("{} of {} criteria passed\n", ran - failed, ran);
    return failed == 0 ? 0 : 1;
}
