#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "delayopt/adjoint.hpp"
#include "delayopt/config.hpp"
#include "delayopt/forward.hpp"
#include "delayopt/oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace delayopt;

namespace {

constexpr int kConfigError = 1;
constexpr int kSolverError = 2;
constexpr int kGradcheckFailed = 3;

struct Common {
    std::string config_path;
    std::string example;
    std::string control;
    std::string out;
};

RunConfig load(const Common& c) {
    if (c.config_path.empty() == c.example.empty()) throw ConfigError("give exactly one of --config and --example");
    return c.example.empty() ? load_config(c.config_path) : builtin_config(c.example);
}

ControlVector control_for(const Common& c, const RunConfig& cfg) {
    if (c.control.empty()) {
        if (cfg.starts.points.empty()) throw ConfigError("no --control given and the config lists no start points");
        return cfg.starts.points.front();
    }
    std::string text = c.control;
    if (text.find('{') == std::string::npos) {
        std::ifstream in(text);
        if (!in) throw ConfigError(fmt::format("cannot open control file {}", text));
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("control: {}", e.what()));
    }
    return control_from_json(j, cfg.problem);
}

fs::path output_dir(const Common& c, const RunConfig& cfg) {
    fs::path dir = c.out.empty() ? fs::path(cfg.output_directory) : fs::path(c.out);
    fs::create_directories(dir);
    return dir;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    return os;
}

void write_json(const fs::path& path, const json& j) { open_out(path) << j.dump(2) << '\n'; }

// History rows on [-T/2, 0) followed by the trajectory itself.
void write_extended_csv(std::ostream& os, const DiscreteProblem& p, const StateTrajectory& y, double half_span) {
    const double tau = p.grid().width(1);
    const auto n_hist = static_cast<std::size_t>(std::llround(half_span / tau));
    os << csv_header(y.dofs()) << '\n';
    for (std::size_t j = n_hist; j > 0; --j) {
        const double t = -double(j) * tau;
        std::string line = fmt::format("{:.17g}", t);
        for (double v : p.history_nodal(t)) line += fmt::format(",{:.17g}", v);
        os << line << '\n';
    }
    std::ostringstream body;
    write_csv(body, y);
    const auto text = body.str();
    os << text.substr(text.find('\n') + 1);
}

void write_target_csv(std::ostream& os, const DiscreteProblem& p) {
    const auto& xs = p.space().coordinates();
    os << csv_header(xs.size()) << '\n';
    for (double t : p.grid().nodes) {
        std::string line = fmt::format("{:.17g}", t);
        for (double x : xs) line += fmt::format(",{:.17g}", p.spec().target.value(x, t));
        os << line << '\n';
    }
}

json value_json(const ControlVector& u, const Evaluation& ev) {
    json j{{"J", ev.value}, {"control", control_to_json(u)}};
    if (ev.gradient) j["gradient"] = ev.gradient->to_json();
    return j;
}

int cmd_simulate(const Common& c, bool extend, bool adjoint, bool target) {
    const auto cfg = load(c);
    const auto u = control_for(c, cfg);
    const auto p = make_problem(cfg);
    const auto dir = output_dir(c, cfg);

    const auto ev = evaluate(p, u, adjoint);
    {
        auto os = open_out(dir / "state.csv");
        write_csv(os, ev.state);
    }
    write_json(dir / "J.json", value_json(u, ev));
    if (adjoint) {
        auto os = open_out(dir / "adjoint.csv");
        write_csv(os, *ev.adjoint);
    }
    if (target) {
        auto os = open_out(dir / "target.csv");
        write_target_csv(os, p);
    }
    if (extend) {
        const auto px = make_extended_problem(cfg);
        const auto y = solve_state(px, u);
        auto os = open_out(dir / "state_extended.csv");
        write_extended_csv(os, px, y, 0.5 * cfg.problem.horizon);
    }
    fmt::print("J = {:.10g}\n", ev.value);
    if (ev.gradient) fmt::print("projected gradient norm = {:.3e}\n", ev.gradient->projected_norm);
    fmt::print("outputs in {}\n", dir.string());
    return 0;
}

int cmd_optimize(const Common& c) {
    const auto cfg = load(c);
    const auto p = make_problem(cfg);
    const auto dir = output_dir(c, cfg);
    const auto starts = c.control.empty() ? select_starts(cfg) : std::vector<ControlVector>{control_for(c, cfg)};

    const auto runs = multistart(p, starts, cfg.optimizer);
    const auto& best = runs.front();
    const auto ev = evaluate(p, best.u, true);
    const auto report = stationarity_check(p.spec(), best.u, *ev.gradient, cfg.optimizer.tolerance);

    write_json(dir / "control.json", control_to_json(best.u));
    open_out(dir / "run.jsonl") << best.record.to_json_lines();
    json all = json::array();
    for (const auto& r : runs) {
        auto s = r.record.summary();
        s["control"] = control_to_json(r.u);
        all.push_back(std::move(s));
    }
    write_json(dir / "runs.json", all);
    write_json(dir / "J.json", value_json(best.u, ev));
    write_json(dir / "stationarity.json", report.to_json());
    {
        auto os = open_out(dir / "state.csv");
        write_csv(os, ev.state);
    }

    fmt::print("{} of {} starts completed\n", runs.size(), starts.size());
    fmt::print("best J = {:.10g} ({}, {} iterations, {:.2f} s)\n", best.record.value, to_string(best.record.reason),
               best.record.iterates.empty() ? 0 : best.record.iterates.back().iteration, best.record.wall_time);
    for (const auto& co : report.coordinates)
        fmt::print("  {:<8} {:>14.6f}  grad {:>11.3e}  {}\n", co.name, co.value, co.gradient, to_string(co.status));
    fmt::print("projected gradient norm = {:.3e} ({})\n", report.projected_norm,
               report.stationary() ? "stationary" : "not stationary");
    fmt::print("outputs in {}\n", dir.string());
    return 0;
}

int cmd_gradcheck(const Common& c, double tol, double step) {
    const auto cfg = load(c);
    const auto u = control_for(c, cfg);
    const auto p = make_problem(cfg);

    const auto ev = evaluate(p, u, true);
    const auto fd = oracle::fd_gradient(p, u, step);
    const auto ga = ev.gradient->pack();
    const auto gf = fd.gradient.pack();
    const std::size_t m = p.num_delays();

    fmt::print("J = {:.12g}\n", ev.value);
    fmt::print("{:<9} {:>22} {:>22} {:>10}\n", "coord", "adjoint", "finite-diff", "rel-err");
    bool ok = true;
    for (std::size_t i = 0; i < ga.size(); ++i) {
        const auto name = i < m ? fmt::format("s_{}", i + 1) : i < 2 * m ? fmt::format("kappa_{}", i - m + 1) : "sigma";
        const double scale = std::max({std::abs(ga[i]), std::abs(gf[i]), 1e-12});
        const double rel = ga[i] == gf[i] ? 0.0 : std::abs(ga[i] - gf[i]) / scale;
        const bool pass = rel <= tol;
        ok = ok && pass;
        fmt::print("{:<9} {:>22.15g} {:>22.15g} {:>10.2e} {}{}\n", name, ga[i], gf[i], rel, pass ? "ok" : "FAIL",
                   fd.one_sided[i] ? " one-sided" : "");
    }
    fmt::print("{}\n", ok ? "gradient check passed" : fmt::format("gradient check failed (tol {:.1e})", tol));
    return ok ? 0 : kGradcheckFailed;
}

void add_common(CLI::App* sub, Common& c, bool with_control) {
    sub->add_option("--config", c.config_path, "Config file");
    sub->add_option("--example", c.example, "Built-in config name");
    if (with_control) sub->add_option("--control", c.control, "Control as inline JSON or a JSON file path");
    sub->add_option("--out", c.out, "Output directory (default: [outputs] directory)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal time delays in reaction-diffusion feedback control"};
    app.require_subcommand(1);

    Common common;
    auto* sim = app.add_subcommand("simulate", "Solve the state equation for a fixed control");
    add_common(sim, common, true);
    bool extend = false, adjoint = false, target = false;
    sim->add_flag("--extend", extend, "Also write state_extended.csv on [-T/2, 2T]");
    sim->add_flag("--adjoint", adjoint, "Also solve the adjoint and write adjoint.csv");
    sim->add_flag("--target", target, "Also write the desired state as target.csv");

    auto* opt = app.add_subcommand("optimize", "Multistart optimization of delays and weights");
    add_common(opt, common, true);

    auto* grad = app.add_subcommand("gradcheck", "Compare the adjoint gradient with finite differences");
    add_common(grad, common, true);
    double tol = 1e-5, step = 1e-4;
    grad->add_option("--tol", tol, "Relative error threshold")->capture_default_str();
    grad->add_option("--step", step, "Relative finite-difference step")->capture_default_str();

    auto* ex = app.add_subcommand("example", "Print a built-in config");
    std::string ex_name, ex_out;
    ex->add_option("name", ex_name, "Config name")->required();
    ex->add_option("--out", ex_out, "Write to this file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (sim->parsed()) return cmd_simulate(common, extend, adjoint, target);
        if (opt->parsed()) return cmd_optimize(common);
        if (grad->parsed()) return cmd_gradcheck(common, tol, step);
        const auto text = serialize_config(builtin_config(ex_name));
        if (ex_out.empty()) std::cout << text;
        else open_out(ex_out) << text;
        return 0;
    } catch (const ConfigError& e) {
        fmt::print(std::cerr, "config error: {}\n", e.what());
        return kConfigError;
    } catch (const expr::ParseError& e) {
        fmt::print(std::cerr, "config error: {}\n", e.what());
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        fmt::print(std::cerr, "config error: {}\n", e.what());
        return kConfigError;
    } catch (const std::exception& e) {
        fmt::print(std::cerr, "solver failure: {}\n", e.what());
        return kSolverError;
    }
}
