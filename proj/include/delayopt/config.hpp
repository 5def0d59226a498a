#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "delayopt/optimizer.hpp"

namespace delayopt {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Discretization {
    std::size_t n_elements = 128;  // ignored in ode mode
    std::size_t n_slabs = 128;

    bool operator==(const Discretization&) const = default;
};

struct StartsConfig {
    std::vector<ControlVector> points;  // explicit starts; sampling is used when empty
    std::size_t count = 1;
    std::uint64_t seed = 1;
    Sampling sampling = Sampling::latin;
    StartBox box;
    /// Screening: draw this many points, run a local optimization from each on
    /// a screen_grid x screen_grid discretization and keep the `count` best
    /// end points as starts. 0 disables screening.
    std::size_t screen = 0;
    std::size_t screen_grid = 64;
    double screen_tolerance = 1e-2;

    bool operator==(const StartsConfig&) const = default;
};

struct RunConfig {
    ProblemSpec problem;
    Discretization discretization;
    OptimizerSettings optimizer;
    StartsConfig starts;
    std::string output_directory = "out";

    bool operator==(const RunConfig& other) const;
};

/// Sectioned key = value text ([problem], [discretization], [optimizer],
/// [starts], [outputs]). Values are JSON literals; numbers may also be given
/// as quoted constant expressions such as "pi/2", and "inf"/"-inf" are accepted.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& config);

const std::vector<std::string>& builtin_config_names();
RunConfig builtin_config(std::string_view name);

DiscreteProblem make_problem(const RunConfig& config);
/// Same discretization continued to twice the horizon with the objective
/// window kept at the original one.
DiscreteProblem make_extended_problem(const RunConfig& config);

/// Explicit points, or `count` sampled points (unscreened).
std::vector<ControlVector> start_points(const RunConfig& config);
/// Starts for a multistart run: explicit points, or sampled and screened per [starts].
std::vector<ControlVector> select_starts(const RunConfig& config);

/// {"s": [...], "kappa": [...], "sigma": x} (sigma only when present).
nlohmann::json control_to_json(const ControlVector& u);
ControlVector control_from_json(const nlohmann::json& j, const ProblemSpec& spec);

}  // namespace delayopt
