#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "delayopt/objective.hpp"

namespace delayopt {

struct OptimizerSettings {
    int max_iterations = 500;
    double tolerance = 1e-6;  // on the projected gradient max-norm
    double armijo = 1e-4;
    double backtrack = 0.5;
    double initial_step = 1.0;
    int memory = 10;
    int max_backtracks = 40;
    /// Shifted objectives: after each accepted step, sample J at this many
    /// shifts spread over `shift_period` and jump to the best if it is lower.
    int shift_scan = 0;
    double shift_period = 6.283185307179586;

    bool operator==(const OptimizerSettings&) const = default;
};

enum class Termination { converged, max_iterations, line_search_failed };
const char* to_string(Termination t);

struct IterateRecord {
    int iteration = 0;
    std::vector<double> x;
    double value = 0.0;
    double projected_norm = 0.0;
    double step = 0.0;
};

struct RunRecord {
    std::vector<IterateRecord> iterates;
    Termination reason = Termination::max_iterations;
    double wall_time = 0.0;
    int evaluations = 0;
    std::vector<double> x;
    double value = 0.0;
    std::vector<double> gradient;
    double projected_norm = 0.0;

    /// One JSON object per iterate, newline separated.
    std::string to_json_lines() const;
    nlohmann::json summary() const;
};

/// Objective hook: value and gradient at x. Throwing marks x as infeasible
/// for a trial step.
using ObjectiveHook = std::function<std::pair<double, std::vector<double>>(const std::vector<double>&)>;

/// Optional move applied after every accepted step. It may replace x (with
/// its value and gradient) by a point of strictly lower value and returns
/// whether it did.
using JumpHook = std::function<bool(std::vector<double>& x, double& value, std::vector<double>& gradient)>;

/// Projected limited-memory quasi-Newton method with Armijo backtracking along
/// the projected arc. Infinite bounds are allowed. Errors from the hook at the
/// starting point propagate.
RunRecord minimize(const ObjectiveHook& f, std::vector<double> x0, const std::vector<double>& lo,
                   const std::vector<double>& hi, const OptimizerSettings& settings = {},
                   const JumpHook& jump = {});

struct OptimizeResult {
    ControlVector u;
    RunRecord record;
};

OptimizeResult optimize(const DiscreteProblem& problem, const ControlVector& u0, const OptimizerSettings& settings = {},
                        const NewtonSettings& newton = {});

/// Independent runs ranked by final J (stable for ties). Runs whose starting
/// point fails are dropped; throws std::runtime_error when all fail.
/// threads = 0 reads DELAYOPT_THREADS, falling back to the hardware count.
std::vector<OptimizeResult> multistart(const DiscreteProblem& problem, const std::vector<ControlVector>& starts,
                                       const OptimizerSettings& settings = {}, unsigned threads = 0,
                                       const NewtonSettings& newton = {});

enum class Sampling { latin, uniform };
const char* to_string(Sampling s);

/// Ranges used to draw starting points; each is intersected with the bounds.
struct StartBox {
    Interval delays{0.0, 10.0};
    Interval weights{-10.0, 10.0};
    Interval shift{0.0, 6.283185307179586};

    bool operator==(const StartBox&) const = default;
};

std::vector<ControlVector> sample_starts(const ProblemSpec& spec, const StartBox& box, std::size_t count,
                                         std::uint64_t seed, Sampling sampling);

}  // namespace delayopt
