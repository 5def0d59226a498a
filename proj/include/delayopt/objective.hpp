#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "delayopt/forward.hpp"
#include "delayopt/problem.hpp"

namespace delayopt {

struct GradientVector {
    std::vector<double> d_delays;
    std::vector<double> d_weights;
    std::optional<double> d_shift;
    double projected_norm = 0.0;

    /// Packed like ControlVector::pack.
    std::vector<double> pack() const;
    nlohmann::json to_json() const;
};

/// Tracking part of J together with its derivatives.
struct Tracking {
    double value = 0.0;                  // 1/2 int (y - y_Q(t - shift))^2 over the window
    std::vector<std::vector<double>> dy; // dJ/dY^k, k = 0..N (entry 0 is unused)
    double d_shift = 0.0;
};

Tracking evaluate_tracking(const DiscreteProblem& problem, const ControlVector& u, const StateTrajectory& state,
                           bool derivatives);

/// J = tracking + nu/2 |kappa|^2.
double evaluate_objective(const DiscreteProblem& problem, const ControlVector& u, const StateTrajectory& state);

GradientVector assemble_gradient(const DiscreteProblem& problem, const ControlVector& u,
                                 const StateTrajectory& state, const AdjointTrajectory& adjoint);
GradientVector assemble_gradient(const DiscreteProblem& problem, const Coupling& coupling, const ControlVector& u,
                                 const StateTrajectory& state, const AdjointTrajectory& adjoint, double d_shift);

enum class CoordinateStatus { interior_stationary, active_lower_consistent, active_upper_consistent, violated };
const char* to_string(CoordinateStatus s);

struct CoordinateReport {
    std::string name;  // s_1, kappa_1, sigma
    double value = 0.0;
    double gradient = 0.0;
    CoordinateStatus status = CoordinateStatus::interior_stationary;
};

struct StationarityReport {
    std::vector<CoordinateReport> coordinates;
    double projected_norm = 0.0;
    double tolerance = 0.0;
    bool stationary() const;
    nlohmann::json to_json() const;
};

/// max over coordinates of |min(0,g)| at a lower bound, |max(0,g)| at an upper
/// bound and |g| in the interior.
double projected_norm(const std::vector<double>& x, const std::vector<double>& g, const std::vector<double>& lo,
                      const std::vector<double>& hi);

StationarityReport stationarity_check(const ProblemSpec& spec, const ControlVector& u, const GradientVector& g,
                                      double tolerance);

/// One forward solve, and optionally adjoint plus gradient.
struct Evaluation {
    double value = 0.0;
    std::optional<GradientVector> gradient;
    StateTrajectory state;
    std::optional<AdjointTrajectory> adjoint;
};

Evaluation evaluate(const DiscreteProblem& problem, const ControlVector& u, bool with_gradient,
                    const NewtonSettings& settings = {});

}  // namespace delayopt
