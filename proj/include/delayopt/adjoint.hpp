#pragma once

#include <span>
#include <vector>

#include "delayopt/problem.hpp"

namespace delayopt {

/// Backward march for the adjoint of the linearized slab equations with
/// source `dy` (dJ/dY^k, k = 0..N). Exact transpose of the forward scheme.
/// Throws std::invalid_argument on a grid mismatch, SingularSystem with the
/// slab index in the message.
AdjointTrajectory solve_adjoint(const DiscreteProblem& problem, const Coupling& coupling,
                                const StateTrajectory& state, const std::vector<std::vector<double>>& dy);
/// Uses the tracking residual of the problem's objective as source.
AdjointTrajectory solve_adjoint(const DiscreteProblem& problem, const ControlVector& u, const StateTrajectory& state);

/// Linearized state z = dY/du . direction for a packed control direction
/// (delays, weights, shift). Zero initial data and history.
StateTrajectory solve_tangent(const DiscreteProblem& problem, const ControlVector& u, const StateTrajectory& state,
                              std::span<const double> direction);

/// dJ/du . direction computed from the tangent.
double tangent_derivative(const DiscreteProblem& problem, const ControlVector& u, const StateTrajectory& state,
                          std::span<const double> direction);

}  // namespace delayopt
