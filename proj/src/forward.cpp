#include "delayopt/forward.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "slab_operator.hpp"

namespace delayopt {

NewtonFailure::NewtonFailure(std::size_t slab, double residual)
    : std::runtime_error(fmt::format("Newton iteration failed on slab {} (residual {:.3e})", slab, residual)),
      slab_(slab),
      residual_(residual) {}

namespace {

// F(Y) = A Y + N(prev, Y) - b, with A = M + tau/2 K - d M and
// b = M prev - tau/2 K prev + M (explicit delayed load).
struct SlabSystem {
    const DiscreteProblem& p;
    std::size_t k;
    std::span<const double> prev;
    Tridiagonal a;
    std::vector<double> b;
    bool reaction;

    SlabSystem(const DiscreteProblem& problem, const Coupling& coupling, const StateTrajectory& y, std::size_t slab)
        : p(problem), k(slab), prev(y.node(slab - 1)), reaction(detail::has_reaction(problem)) {
        const auto& M = p.space().mass();
        const auto& K = p.space().stiffness();
        const double tau = p.grid().width(k);
        const std::size_t n = p.dofs();
        a = M;
        a.axpy(0.5 * tau, K);
        a.axpy(-coupling.implicit_coefficient(k), M);

        std::vector<double> load(n, 0.0);
        coupling.add_explicit_load(k, y, load);
        b.assign(n, 0.0);
        M.apply(prev, b);
        K.apply(prev, b, -0.5 * tau, true);
        M.apply(load, b, 1.0, true);
    }

    // Residual and a magnitude used to scale the roundoff floor.
    double residual(std::span<const double> cur, std::vector<double>& r) const {
        a.apply(cur, r);
        double scale = p.space().dual_norm(r) + p.space().dual_norm(b);
        if (reaction) {
            std::vector<double> nl(r.size(), 0.0);
            detail::add_reaction_load(p, k, prev, cur, nl);
            scale += p.space().dual_norm(nl);
            for (std::size_t j = 0; j < r.size(); ++j) r[j] += nl[j];
        }
        for (std::size_t j = 0; j < r.size(); ++j) r[j] -= b[j];
        return scale;
    }

    Tridiagonal jacobian(std::span<const double> cur) const {
        Tridiagonal j = a;
        if (reaction) detail::add_reaction_jacobian(p, k, prev, cur, nullptr, &j);
        return j;
    }
};

}  // namespace

StateTrajectory solve_state(const DiscreteProblem& problem, const Coupling& coupling,
                            const NewtonSettings& settings, std::ostream* diagnostics) {
    if (!(settings.tolerance > 0)) throw std::invalid_argument("Newton tolerance must be positive");
    auto y = problem.make_state();
    const std::size_t n = problem.dofs();
    const auto& space = problem.space();
    std::vector<double> r(n), trial(n), rt(n);
    constexpr double eps = std::numeric_limits<double>::epsilon();

    for (std::size_t k = 1; k <= problem.grid().n_slabs(); ++k) {
        SlabSystem sys(problem, coupling, y, k);
        auto cur = y.node(k);
        std::copy(sys.prev.begin(), sys.prev.end(), cur.begin());

        double scale = sys.residual(cur, r);
        double norm = space.dual_norm(r);
        int it = 0;
        for (;; ++it) {
            if (!std::isfinite(norm)) throw NewtonFailure(k, norm);
            if (norm <= std::max(settings.tolerance, 64.0 * eps * scale)) break;
            if (it >= settings.max_iterations) throw NewtonFailure(k, norm);
            std::vector<double> delta;
            try {
                delta = sys.jacobian(cur).solve(r);
            } catch (const SingularSystem&) {
                throw NewtonFailure(k, norm);
            }
            double lambda = 1.0;
            bool accepted = false;
            for (int h = 0; h <= settings.max_halvings; ++h) {
                for (std::size_t j = 0; j < n; ++j) trial[j] = cur[j] - lambda * delta[j];
                const double ts = sys.residual(trial, rt);
                const double tn = space.dual_norm(rt);
                if (std::isfinite(tn) && tn < norm) {
                    std::copy(trial.begin(), trial.end(), cur.begin());
                    std::swap(r, rt);
                    norm = tn;
                    scale = ts;
                    accepted = true;
                    break;
                }
                lambda *= settings.damping;
            }
            if (!accepted) {
                if (norm <= 1e3 * std::max(settings.tolerance, 64.0 * eps * scale)) break;
                throw NewtonFailure(k, norm);
            }
        }
        if (diagnostics) *diagnostics << fmt::format("slab {} iterations {} residual {:.3e}\n", k, it, norm);
    }
    return y;
}

StateTrajectory solve_state(const DiscreteProblem& problem, const ControlVector& u, const NewtonSettings& settings,
                            std::ostream* diagnostics) {
    return solve_state(problem, Coupling(problem, u), settings, diagnostics);
}

StateTrajectory solve_state_ode_mode(const DiscreteProblem& problem, const ControlVector& u,
                                     const NewtonSettings& settings, std::ostream* diagnostics) {
    if (!problem.space().is_point()) throw std::invalid_argument("ode mode requires a point space");
    return solve_state(problem, u, settings, diagnostics);
}

std::vector<double> slab_residual(const DiscreteProblem& problem, const Coupling& coupling, const StateTrajectory& y,
                                  std::size_t k) {
    SlabSystem sys(problem, coupling, y, k);
    std::vector<double> r(problem.dofs());
    sys.residual(y.node(k), r);
    return r;
}

}  // namespace delayopt
