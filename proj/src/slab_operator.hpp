#pragma once

// Reaction load and its derivatives over one time slab, shared by the state,
// adjoint and tangent solvers.

#include <span>

#include "delayopt/problem.hpp"

namespace delayopt::detail {

inline bool has_reaction(const DiscreteProblem& p) {
    const auto& c = p.spec().reaction.coefficients();
    if (!c) return true;
    for (double v : *c)
        if (v != 0.0) return true;
    return false;
}

/// out_j += int_{I_k} int R(x, t, y) phi_j with y linear in t from `prev` to `cur`.
inline void add_reaction_load(const DiscreteProblem& p, std::size_t k, std::span<const double> prev,
                              std::span<const double> cur, std::span<double> out) {
    const auto& grid = p.grid();
    const auto& rule = p.reaction_time_rule();
    const auto& reaction = p.spec().reaction;
    const double t0 = grid.nodes[k - 1];
    const double tau = grid.width(k);
    for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
        const double th = rule.nodes[g];
        const double t = t0 + th * tau;
        const double wt = rule.weights[g] * tau;
        for (const auto& q : p.reaction_points()) {
            const double y = (1.0 - th) * q.interpolate(prev) + th * q.interpolate(cur);
            const double r = wt * q.weight * reaction.value(q.x, t, y);
            out[q.a] += r * q.va;
            out[q.b] += r * q.vb;
        }
    }
}

/// Adds d(load)/d(prev) to `d_prev` and d(load)/d(cur) to `d_cur` (either may be null).
inline void add_reaction_jacobian(const DiscreteProblem& p, std::size_t k, std::span<const double> prev,
                                  std::span<const double> cur, Tridiagonal* d_prev, Tridiagonal* d_cur) {
    const auto& grid = p.grid();
    const auto& rule = p.reaction_time_rule();
    const auto& reaction = p.spec().reaction;
    const double t0 = grid.nodes[k - 1];
    const double tau = grid.width(k);
    auto scatter = [](Tridiagonal& m, const QuadPoint& q, double v) {
        m.diag[q.a] += v * q.va * q.va;
        if (q.a != q.b) {
            m.diag[q.b] += v * q.vb * q.vb;
            m.upper[q.a] += v * q.va * q.vb;
            m.lower[q.a] += v * q.va * q.vb;
        }
    };
    for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
        const double th = rule.nodes[g];
        const double t = t0 + th * tau;
        const double wt = rule.weights[g] * tau;
        for (const auto& q : p.reaction_points()) {
            const double y = (1.0 - th) * q.interpolate(prev) + th * q.interpolate(cur);
            const double d = wt * q.weight * reaction.derivative(q.x, t, y);
            if (d_cur) scatter(*d_cur, q, th * d);
            if (d_prev) scatter(*d_prev, q, (1.0 - th) * d);
        }
    }
}

}  // namespace delayopt::detail
