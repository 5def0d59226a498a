#include "delayopt/adjoint.hpp"

#include <fmt/format.h>

#include "delayopt/objective.hpp"
#include "slab_operator.hpp"

namespace delayopt {

namespace {

// Blocks of the linearized slab equation k: d F_k / d Y^k without the
// implicit coupling (diag) and d F_k / d Y^{k-1} without any coupling (off).
struct SlabJacobian {
    Tridiagonal diag;
    Tridiagonal off;
};

SlabJacobian slab_jacobian(const DiscreteProblem& p, const StateTrajectory& y, std::size_t k, bool reaction) {
    const auto& M = p.space().mass();
    const auto& K = p.space().stiffness();
    const double tau = p.grid().width(k);
    SlabJacobian j{M, M};
    j.diag.axpy(0.5 * tau, K);
    j.off.axpy(-2.0, M);
    j.off.axpy(0.5 * tau, K);
    if (reaction) detail::add_reaction_jacobian(p, k, y.node(k - 1), y.node(k), &j.off, &j.diag);
    return j;
}

void check_grid(const DiscreteProblem& p, const StateTrajectory& state) {
    if (state.grid().nodes != p.grid().nodes || state.dofs() != p.dofs())
        throw std::invalid_argument("state was solved on a different grid");
}

}  // namespace

AdjointTrajectory solve_adjoint(const DiscreteProblem& p, const Coupling& coupling, const StateTrajectory& state,
                                const std::vector<std::vector<double>>& dy) {
    check_grid(p, state);
    const std::size_t n = p.grid().n_slabs();
    const std::size_t dofs = p.dofs();
    const auto& M = p.space().mass();
    const bool reaction = detail::has_reaction(p);

    AdjointTrajectory phi(p.grid(), dofs);
    std::vector<std::vector<double>> acc(n + 1, std::vector<double>(dofs, 0.0));
    std::vector<double> rhs(dofs);
    SlabJacobian next;  // blocks of slab j + 1
    for (std::size_t j = n; j >= 1; --j) {
        auto jac = slab_jacobian(p, state, j, reaction);
        rhs = dy[j];
        M.apply(acc[j], rhs, 1.0, true);
        // The blocks are symmetric, so the transpose is the block itself.
        if (j < n) next.off.apply(phi.slab(j + 1), rhs, -1.0, true);
        jac.diag.axpy(-coupling.implicit_coefficient(j), M);
        std::vector<double> sol;
        try {
            sol = jac.diag.solve(rhs);
        } catch (const SingularSystem&) {
            throw SingularSystem(fmt::format("singular adjoint system on slab {}", j));
        }
        std::copy(sol.begin(), sol.end(), phi.slab(j).begin());
        coupling.scatter_advanced(j, phi.slab(j), acc);
        next = std::move(jac);
    }
    return phi;
}

AdjointTrajectory solve_adjoint(const DiscreteProblem& p, const ControlVector& u, const StateTrajectory& state) {
    const Coupling coupling(p, u);
    return solve_adjoint(p, coupling, state, evaluate_tracking(p, u, state, true).dy);
}

StateTrajectory solve_tangent(const DiscreteProblem& p, const ControlVector& u, const StateTrajectory& state,
                              std::span<const double> direction) {
    check_grid(p, state);
    const std::size_t m = p.num_delays();
    if (direction.size() < 2 * m) throw std::invalid_argument("direction is shorter than the control");
    const Coupling coupling(p, u);
    const std::size_t n = p.grid().n_slabs();
    const std::size_t dofs = p.dofs();
    const auto& M = p.space().mass();
    const bool reaction = detail::has_reaction(p);
    const bool pyragas = p.spec().variant == VariantKind::pyragas;
    const std::size_t inst = coupling.instantaneous_channel();

    StateTrajectory z(p.grid(), state.coordinates(), HistorySpec::from_expression("0"));
    std::vector<double> src(dofs), rhs(dofs);
    for (std::size_t k = 1; k <= n; ++k) {
        std::fill(src.begin(), src.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double c = coupling.channels()[i].coefficient;
            if (direction[i] != 0.0 && c != 0.0) {
                const auto rate = coupling.delayed_rate_integral(i, k, state);
                for (std::size_t j = 0; j < dofs; ++j) src[j] -= direction[i] * c * rate[j];
            }
            const double dk = direction[m + i];
            if (dk != 0.0) {
                const auto l = coupling.delayed_integral(i, k, state);
                for (std::size_t j = 0; j < dofs; ++j) src[j] += dk * l[j];
                if (pyragas) {
                    const auto l0 = coupling.delayed_integral(inst, k, state);
                    for (std::size_t j = 0; j < dofs; ++j) src[j] -= dk * l0[j];
                }
            }
        }
        // Delayed coupling to already computed tangent nodes.
        for (std::size_t ch = 0; ch < coupling.channels().size(); ++ch) {
            const double c = coupling.channels()[ch].coefficient;
            if (c == 0.0) continue;
            for (const auto& nw : coupling.window(ch, k).value) {
                if (nw.node == 0 || nw.node >= k) continue;
                const auto zn = z.node(nw.node);
                for (std::size_t j = 0; j < dofs; ++j) src[j] += c * nw.weight * zn[j];
            }
        }
        M.apply(src, rhs);
        auto jac = slab_jacobian(p, state, k, reaction);
        jac.off.apply(z.node(k - 1), rhs, -1.0, true);
        jac.diag.axpy(-coupling.implicit_coefficient(k), M);
        const auto sol = jac.diag.solve(rhs);
        std::copy(sol.begin(), sol.end(), z.node(k).begin());
    }
    return z;
}

double tangent_derivative(const DiscreteProblem& p, const ControlVector& u, const StateTrajectory& state,
                          std::span<const double> direction) {
    const std::size_t m = p.num_delays();
    const auto z = solve_tangent(p, u, state, direction);
    const auto tr = evaluate_tracking(p, u, state, true);
    double d = 0.0;
    for (std::size_t k = 1; k < tr.dy.size(); ++k) {
        const auto zk = z.node(k);
        for (std::size_t j = 0; j < zk.size(); ++j) d += tr.dy[k][j] * zk[j];
    }
    for (std::size_t i = 0; i < m; ++i) d += p.spec().tikhonov * u.weights[i] * direction[m + i];
    if (p.spec().shifted() && direction.size() > 2 * m) d += tr.d_shift * direction[2 * m];
    return d;
}

}  // namespace delayopt
