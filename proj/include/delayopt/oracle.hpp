#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "delayopt/dde.hpp"
#include "delayopt/objective.hpp"

namespace delayopt::oracle {

struct FdGradient {
    GradientVector gradient;
    std::vector<double> steps;
    std::vector<bool> one_sided;  // coordinate too close to a bound for central differences
};

/// Differences of evaluate_objective with step step_scale * (1 + |u_i|),
/// central unless that would leave the admissible box.
FdGradient fd_gradient(const DiscreteProblem& problem, const ControlVector& u, double step_scale = 1e-4,
                       const NewtonSettings& settings = {});

/// A problem without active delay coupling and its exact solution.
struct ManufacturedCase {
    ProblemSpec spec;
    std::function<double(double x, double t)> exact;
};

/// y' = -y, y(0) = 1 in ode mode on (0, horizon).
ManufacturedCase decay_case(double horizon = 2.0);
/// y_t = y_xx on (-20, 20) with homogeneous Neumann data,
/// y = cos(pi (x + 20) / 40) exp(-(pi/40)^2 t).
ManufacturedCase heat_case(double horizon = 10.0);

struct ConvergenceRow {
    std::size_t n_elements = 0;
    std::size_t n_slabs = 0;
    double h = 0.0;  // refined mesh parameter
    double error = 0.0;
    std::optional<double> order;
};

enum class Refinement { time, space };

/// L2(Q) errors over the refinement levels (n_slabs for time refinement,
/// n_elements for space refinement, the other count held at `fixed`).
std::vector<ConvergenceRow> convergence_study(const ManufacturedCase& c, Refinement refine,
                                              const std::vector<std::size_t>& levels, std::size_t fixed);

}  // namespace delayopt::oracle
