#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>

#include "delayopt/problem.hpp"

namespace delayopt {

struct NewtonSettings {
    double tolerance = 1e-12;  // absolute, discrete L2 norm of the slab residual
    int max_iterations = 30;
    double damping = 0.5;
    int max_halvings = 20;
};

class NewtonFailure : public std::runtime_error {
public:
    NewtonFailure(std::size_t slab, double residual);
    std::size_t slab() const noexcept { return slab_; }
    double residual() const noexcept { return residual_; }

private:
    std::size_t slab_;
    double residual_;
};

/// Marches the slab equations k = 1..N. Throws NewtonFailure, or
/// std::invalid_argument for a negative delay.
StateTrajectory solve_state(const DiscreteProblem& problem, const ControlVector& u,
                            const NewtonSettings& settings = {}, std::ostream* diagnostics = nullptr);
StateTrajectory solve_state(const DiscreteProblem& problem, const Coupling& coupling,
                            const NewtonSettings& settings = {}, std::ostream* diagnostics = nullptr);

/// Same as solve_state; requires a problem built on a point space.
StateTrajectory solve_state_ode_mode(const DiscreteProblem& problem, const ControlVector& u,
                                     const NewtonSettings& settings = {}, std::ostream* diagnostics = nullptr);

/// Slab residual F_k for the given trajectory (entries 0..k-1 are read, k is the unknown).
std::vector<double> slab_residual(const DiscreteProblem& problem, const Coupling& coupling,
                                  const StateTrajectory& y, std::size_t k);

}  // namespace delayopt
