#include "delayopt/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

namespace delayopt {

namespace {

using nlohmann::json;
namespace pt = boost::property_tree;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string where(const std::string& section, const std::string& key) { return fmt::format("[{}] {}", section, key); }

double as_number(const json& v, const std::string& ctx) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
        try {
            const auto ast = expr::parse(s);
            if (expr::is_constant(ast)) return expr::evaluate(ast, {});
        } catch (const expr::ParseError&) {
        }
    }
    throw ConfigError(fmt::format("{}: expected a number, got {}", ctx, v.dump()));
}

std::vector<double> as_numbers(const json& v, const std::string& ctx) {
    if (!v.is_array()) throw ConfigError(fmt::format("{}: expected a list of numbers", ctx));
    std::vector<double> out;
    for (const auto& e : v) out.push_back(as_number(e, ctx));
    return out;
}

Interval as_interval(const json& v, const std::string& ctx) {
    const auto n = as_numbers(v, ctx);
    if (n.size() != 2) throw ConfigError(fmt::format("{}: expected [lo, hi]", ctx));
    if (!(n[0] <= n[1])) throw ConfigError(fmt::format("{}: lower bound exceeds upper bound", ctx));
    return {n[0], n[1]};
}

// A single pair is broadcast to every coordinate.
std::vector<Interval> as_intervals(const json& v, std::size_t count, const std::string& ctx) {
    if (v.is_array() && !v.empty() && !v[0].is_array()) return std::vector<Interval>(count, as_interval(v, ctx));
    if (!v.is_array()) throw ConfigError(fmt::format("{}: expected a list of [lo, hi] pairs", ctx));
    std::vector<Interval> out;
    for (const auto& e : v) out.push_back(as_interval(e, ctx));
    if (out.size() != count)
        throw ConfigError(fmt::format("{}: expected {} pairs, got {}", ctx, count, out.size()));
    return out;
}

std::string as_string(const json& v, const std::string& ctx) {
    if (!v.is_string()) throw ConfigError(fmt::format("{}: expected a quoted string", ctx));
    return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& ctx) {
    if (!v.is_boolean()) throw ConfigError(fmt::format("{}: expected true or false", ctx));
    return v.get<bool>();
}

template <class Int>
Int as_integer(const json& v, const std::string& ctx, Int min) {
    const double d = as_number(v, ctx);
    if (d != std::floor(d) || d < double(min) || d > double(std::numeric_limits<Int>::max()))
        throw ConfigError(fmt::format("{}: expected an integer >= {}", ctx, min));
    return static_cast<Int>(d);
}

// Keys of one section, consumed as they are read so leftovers can be reported.
class Section {
public:
    Section(std::string name, std::map<std::string, json> values) : name_(std::move(name)), values_(std::move(values)) {}

    std::optional<json> take(const std::string& key) {
        auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        json v = std::move(it->second);
        values_.erase(it);
        return v;
    }
    json require(const std::string& key) {
        auto v = take(key);
        if (!v) throw ConfigError(fmt::format("{}: missing", where(name_, key)));
        return *v;
    }
    std::string ctx(const std::string& key) const { return where(name_, key); }
    void finish() const {
        if (!values_.empty()) throw ConfigError(fmt::format("{}: unknown key", where(name_, values_.begin()->first)));
    }

private:
    std::string name_;
    std::map<std::string, json> values_;
};

json parse_value(const std::string& raw, const std::string& ctx) {
    try {
        return json::parse(raw);
    } catch (const json::parse_error&) {
        throw ConfigError(fmt::format("{}: cannot parse value '{}'", ctx, raw));
    }
}

template <class E>
E parse_enum(const std::string& s, const std::string& ctx, std::initializer_list<E> all) {
    for (E e : all)
        if (s == to_string(e)) return e;
    std::vector<std::string> names;
    for (E e : all) names.emplace_back(to_string(e));
    throw ConfigError(fmt::format("{}: expected one of {}", ctx, fmt::join(names, ", ")));
}

ControlVector control_from_list(const std::vector<double>& x, const ProblemSpec& spec, const std::string& ctx) {
    const auto m = static_cast<std::size_t>(spec.num_delays);
    const bool shifted = spec.shifted();
    if (x.size() != 2 * m + (shifted ? 1 : 0))
        throw ConfigError(fmt::format("{}: a start needs {} values", ctx, 2 * m + (shifted ? 1 : 0)));
    return ControlVector::unpack(x, m, shifted);
}

void parse_problem(Section& s, RunConfig& c, std::optional<DdeReference>& dde, std::string& target) {
    auto& p = c.problem;
    if (auto v = s.take("ode_mode")) p.ode_mode = as_bool(*v, s.ctx("ode_mode"));
    if (auto v = s.take("space_interval")) p.space_interval = as_interval(*v, s.ctx("space_interval"));
    p.horizon = as_number(s.require("horizon"), s.ctx("horizon"));
    p.num_delays = as_integer<int>(s.require("num_delays"), s.ctx("num_delays"), 1);
    const auto m = static_cast<std::size_t>(p.num_delays);
    if (auto v = s.take("delay_bounds")) p.delay_bounds = as_intervals(*v, m, s.ctx("delay_bounds"));
    else p.delay_bounds.assign(m, {0.0, p.horizon});
    p.weight_bounds = as_intervals(s.require("weight_bounds"), m, s.ctx("weight_bounds"));
    if (auto v = s.take("tikhonov")) p.tikhonov = as_number(*v, s.ctx("tikhonov"));
    try {
        if (auto v = s.take("reaction")) p.reaction = ReactionSpec::from_expression(as_string(*v, s.ctx("reaction")));
        p.history = HistorySpec::from_expression(as_string(s.require("history"), s.ctx("history")));
    } catch (const expr::ParseError& e) {
        throw ConfigError(fmt::format("[problem]: {}", e.what()));
    }
    auto expr_target = s.take("target");
    auto dde_target = s.take("target_dde");
    if (expr_target.has_value() == dde_target.has_value())
        throw ConfigError("[problem]: exactly one of target and target_dde is required");
    if (expr_target) {
        target = as_string(*expr_target, s.ctx("target"));
    } else {
        const auto n = as_numbers(*dde_target, s.ctx("target_dde"));
        if (n.size() != 3) throw ConfigError(fmt::format("{}: expected [a, d, history]", s.ctx("target_dde")));
        dde = DdeReference{n[0], n[1], n[2]};
    }
    if (auto v = s.take("variant"))
        p.variant = parse_enum(as_string(*v, s.ctx("variant")), s.ctx("variant"),
                               {VariantKind::direct_delay, VariantKind::pyragas});
    if (auto v = s.take("objective"))
        p.objective = parse_enum(as_string(*v, s.ctx("objective")), s.ctx("objective"),
                                 {ObjectiveKind::plain, ObjectiveKind::shifted});
    if (auto v = s.take("target_quadrature"))
        p.target_quadrature = parse_enum(as_string(*v, s.ctx("target_quadrature")), s.ctx("target_quadrature"),
                                         {TargetQuadrature::nodal, TargetQuadrature::gauss});
    if (auto v = s.take("window")) p.window = as_interval(*v, s.ctx("window"));
}

void parse_discretization(Section& s, RunConfig& c) {
    if (auto v = s.take("n_elements")) c.discretization.n_elements = as_integer<std::size_t>(*v, s.ctx("n_elements"), 1);
    if (auto v = s.take("n_slabs")) c.discretization.n_slabs = as_integer<std::size_t>(*v, s.ctx("n_slabs"), 2);
}

void parse_optimizer(Section& s, RunConfig& c) {
    auto& o = c.optimizer;
    if (auto v = s.take("max_iterations")) o.max_iterations = as_integer<int>(*v, s.ctx("max_iterations"), 0);
    if (auto v = s.take("tolerance")) o.tolerance = as_number(*v, s.ctx("tolerance"));
    if (auto v = s.take("armijo")) o.armijo = as_number(*v, s.ctx("armijo"));
    if (auto v = s.take("backtrack")) o.backtrack = as_number(*v, s.ctx("backtrack"));
    if (auto v = s.take("initial_step")) o.initial_step = as_number(*v, s.ctx("initial_step"));
    if (auto v = s.take("memory")) o.memory = as_integer<int>(*v, s.ctx("memory"), 0);
    if (auto v = s.take("max_backtracks")) o.max_backtracks = as_integer<int>(*v, s.ctx("max_backtracks"), 1);
    if (auto v = s.take("shift_scan")) o.shift_scan = as_integer<int>(*v, s.ctx("shift_scan"), 0);
    if (auto v = s.take("shift_period")) o.shift_period = as_number(*v, s.ctx("shift_period"));
    if (!(o.tolerance > 0.0)) throw ConfigError("[optimizer] tolerance: must be positive");
    if (!(o.armijo > 0.0 && o.armijo < 1.0)) throw ConfigError("[optimizer] armijo: must lie in (0, 1)");
    if (!(o.backtrack > 0.0 && o.backtrack < 1.0)) throw ConfigError("[optimizer] backtrack: must lie in (0, 1)");
    if (!(o.initial_step > 0.0)) throw ConfigError("[optimizer] initial_step: must be positive");
    if (!(o.shift_period > 0.0)) throw ConfigError("[optimizer] shift_period: must be positive");
}

void parse_starts(Section& s, RunConfig& c) {
    auto& st = c.starts;
    if (auto v = s.take("points")) {
        if (!v->is_array()) throw ConfigError(fmt::format("{}: expected a list of lists", s.ctx("points")));
        for (const auto& e : *v) st.points.push_back(control_from_list(as_numbers(e, s.ctx("points")), c.problem, s.ctx("points")));
    }
    if (auto v = s.take("count")) st.count = as_integer<std::size_t>(*v, s.ctx("count"), 1);
    if (auto v = s.take("seed")) st.seed = as_integer<std::uint64_t>(*v, s.ctx("seed"), 0);
    if (auto v = s.take("sampling"))
        st.sampling = parse_enum(as_string(*v, s.ctx("sampling")), s.ctx("sampling"), {Sampling::latin, Sampling::uniform});
    if (auto v = s.take("s_range")) st.box.delays = as_interval(*v, s.ctx("s_range"));
    if (auto v = s.take("kappa_range")) st.box.weights = as_interval(*v, s.ctx("kappa_range"));
    if (auto v = s.take("sigma_range")) st.box.shift = as_interval(*v, s.ctx("sigma_range"));
    if (auto v = s.take("screen")) st.screen = as_integer<std::size_t>(*v, s.ctx("screen"), 0);
    if (auto v = s.take("screen_grid")) st.screen_grid = as_integer<std::size_t>(*v, s.ctx("screen_grid"), 1);
    if (auto v = s.take("screen_tolerance")) st.screen_tolerance = as_number(*v, s.ctx("screen_tolerance"));
    if (!(st.screen_tolerance > 0.0)) throw ConfigError("[starts] screen_tolerance: must be positive");
    if (st.screen > 0 && st.screen < st.count) throw ConfigError("[starts] screen: must be 0 or at least count");
}

std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
    return fmt::format("{:.17g}", v);
}

std::string pair(Interval i) { return fmt::format("[{}, {}]", num(i.lo), num(i.hi)); }

std::string pairs(const std::vector<Interval>& v) {
    std::vector<std::string> parts;
    for (const auto& i : v) parts.push_back(pair(i));
    return fmt::format("[{}]", fmt::join(parts, ", "));
}

std::string quoted(const std::string& s) { return json(s).dump(); }

}  // namespace

bool RunConfig::operator==(const RunConfig& o) const {
    const auto& a = problem;
    const auto& b = o.problem;
    const bool same_target = a.target.dde() == b.target.dde() &&
                             (a.target.dde() || a.target.expression().source() == b.target.expression().source());
    return a.space_interval == b.space_interval && a.ode_mode == b.ode_mode && a.horizon == b.horizon &&
           a.num_delays == b.num_delays && a.delay_bounds == b.delay_bounds && a.weight_bounds == b.weight_bounds &&
           a.tikhonov == b.tikhonov && a.reaction.source() == b.reaction.source() &&
           a.history.source() == b.history.source() && same_target && a.variant == b.variant &&
           a.objective == b.objective && a.target_quadrature == b.target_quadrature && a.window == b.window &&
           discretization == o.discretization && optimizer == o.optimizer && starts == o.starts &&
           output_directory == o.output_directory;
}

RunConfig parse_config(const std::string& text) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(fmt::format("line {}: {}", e.line(), e.message()));
    }

    static const std::set<std::string> known{"problem", "discretization", "optimizer", "starts", "outputs"};
    std::map<std::string, Section> sections;
    for (const auto& [name, body] : tree) {
        if (!known.contains(name)) throw ConfigError(fmt::format("[{}]: unknown section", name));
        std::map<std::string, json> values;
        for (const auto& [key, leaf] : body) values[key] = parse_value(leaf.data(), where(name, key));
        sections.emplace(name, Section(name, std::move(values)));
    }
    for (const auto& name : known) sections.try_emplace(name, Section(name, {}));

    RunConfig c;
    std::optional<DdeReference> dde;
    std::string target;
    parse_problem(sections.at("problem"), c, dde, target);
    parse_discretization(sections.at("discretization"), c);
    if (c.problem.ode_mode) c.discretization.n_elements = 1;
    parse_optimizer(sections.at("optimizer"), c);
    parse_starts(sections.at("starts"), c);
    auto& out = sections.at("outputs");
    if (auto v = out.take("directory")) c.output_directory = as_string(*v, out.ctx("directory"));
    for (const auto& [_, s] : sections) s.finish();

    try {
        c.problem.target = dde ? TargetSpec::dde_reference(*dde, c.problem.horizon,
                                                           c.problem.horizon / double(c.discretization.n_slabs))
                               : TargetSpec::from_expression(target);
    } catch (const expr::ParseError& e) {
        throw ConfigError(fmt::format("[problem] target: {}", e.what()));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("[problem] target_dde: {}", e.what()));
    }
    const auto report = validate(c.problem);
    if (!report.ok()) throw ConfigError(fmt::format("[problem]: {}", fmt::join(report.violations, "; ")));
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open {}", path.string()));
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string serialize_config(const RunConfig& c) {
    const auto& p = c.problem;
    std::string s;
    auto line = [&](std::string_view key, const std::string& value) { s += fmt::format("{} = {}\n", key, value); };

    s += "[problem]\n";
    line("ode_mode", p.ode_mode ? "true" : "false");
    line("space_interval", pair(p.space_interval));
    line("horizon", num(p.horizon));
    line("num_delays", std::to_string(p.num_delays));
    line("delay_bounds", pairs(p.delay_bounds));
    line("weight_bounds", pairs(p.weight_bounds));
    line("tikhonov", num(p.tikhonov));
    line("reaction", quoted(p.reaction.source()));
    line("history", quoted(p.history.source()));
    if (const auto& ref = p.target.dde())
        line("target_dde", fmt::format("[{}, {}, {}]", num(ref->coefficient), num(ref->delay), num(ref->history)));
    else
        line("target", quoted(p.target.expression().source()));
    line("variant", quoted(to_string(p.variant)));
    line("objective", quoted(to_string(p.objective)));
    line("target_quadrature", quoted(to_string(p.target_quadrature)));
    if (p.window) line("window", pair(*p.window));

    s += "\n[discretization]\n";
    line("n_elements", std::to_string(c.discretization.n_elements));
    line("n_slabs", std::to_string(c.discretization.n_slabs));

    const auto& o = c.optimizer;
    s += "\n[optimizer]\n";
    line("max_iterations", std::to_string(o.max_iterations));
    line("tolerance", num(o.tolerance));
    line("armijo", num(o.armijo));
    line("backtrack", num(o.backtrack));
    line("initial_step", num(o.initial_step));
    line("memory", std::to_string(o.memory));
    line("max_backtracks", std::to_string(o.max_backtracks));
    line("shift_scan", std::to_string(o.shift_scan));
    line("shift_period", num(o.shift_period));

    const auto& st = c.starts;
    s += "\n[starts]\n";
    if (!st.points.empty()) {
        std::vector<std::string> pts;
        for (const auto& u : st.points) {
            std::vector<std::string> xs;
            for (double x : u.pack()) xs.push_back(num(x));
            pts.push_back(fmt::format("[{}]", fmt::join(xs, ", ")));
        }
        line("points", fmt::format("[{}]", fmt::join(pts, ", ")));
    }
    line("count", std::to_string(st.count));
    line("seed", std::to_string(st.seed));
    line("sampling", quoted(to_string(st.sampling)));
    line("s_range", pair(st.box.delays));
    line("kappa_range", pair(st.box.weights));
    line("sigma_range", pair(st.box.shift));
    line("screen", std::to_string(st.screen));
    line("screen_grid", std::to_string(st.screen_grid));
    line("screen_tolerance", num(st.screen_tolerance));

    s += "\n[outputs]\n";
    line("directory", quoted(c.output_directory));
    return s;
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kCubic = "y*(y-0.25)*(y-1)";
constexpr const char* kFront = "0.5*(1-tanh((x-0.25*sqrt2*t)/2))";
constexpr const char* kWave = "3*sin(t-cos(pi/20*(x+20)))";

RunConfig paper_base(int m) {
    RunConfig c;
    auto& p = c.problem;
    p.space_interval = {-20.0, 20.0};
    p.horizon = 80.0;
    p.num_delays = m;
    p.delay_bounds.assign(std::size_t(m), {0.0, 80.0});
    p.weight_bounds.assign(std::size_t(m), {-1000.0, 1000.0});
    p.reaction = ReactionSpec::from_expression(kCubic);
    p.history = HistorySpec::from_expression(kFront);
    p.target = TargetSpec::from_expression(kWave);
    c.discretization = {128, 128};
    return c;
}

RunConfig example1() {
    RunConfig c = paper_base(1);
    auto& p = c.problem;
    p.ode_mode = true;
    p.history = HistorySpec::from_expression("1");
    c.discretization = {1, 4096};
    p.target = TargetSpec::dde_reference({std::numbers::pi / 2.0, 1.0, 1.0}, p.horizon, p.horizon / 4096.0);
    c.starts.points = {ControlVector{{1.0}, {-std::numbers::pi / 2.0}, std::nullopt}};
    c.output_directory = "out/example1";
    return c;
}

RunConfig example2() {
    RunConfig c = paper_base(6);
    c.starts.count = 16;
    c.starts.seed = 2;
    c.starts.box.delays = {0.0, 20.0};
    c.starts.box.weights = {-5.0, 5.0};
    c.output_directory = "out/example2";
    return c;
}

RunConfig example3() {
    RunConfig c = paper_base(2);
    c.problem.objective = ObjectiveKind::shifted;
    c.optimizer.tolerance = 1e-3;
    c.starts.count = 16;
    c.starts.screen = 256;
    c.starts.seed = 1;
    c.starts.box.delays = {0.0, 2.0 * std::numbers::pi};
    c.starts.box.weights = {-10.0, 10.0};
    c.output_directory = "out/example3";
    return c;
}

RunConfig example4() {
    RunConfig c = paper_base(4);
    c.problem.objective = ObjectiveKind::shifted;
    c.problem.variant = VariantKind::pyragas;
    c.optimizer.tolerance = 1e-3;
    c.starts.points = {ControlVector{{1.8308, 7.0918, 28.3354, 36.1215}, {-2.1661, 2.2636, -1.7753, 1.7550}, -2.5013}};
    c.output_directory = "out/example4";
    return c;
}

RunConfig desk() {
    RunConfig c;
    auto& p = c.problem;
    p.space_interval = {-4.0, 4.0};
    p.horizon = 8.0;
    p.num_delays = 2;
    p.delay_bounds.assign(2, {0.0, 8.0});
    p.weight_bounds.assign(2, {-5.0, 5.0});
    p.tikhonov = 0.1;
    p.reaction = ReactionSpec::from_expression(kCubic);
    p.history = HistorySpec::from_expression("0.5*(1-tanh((x-0.5*t)/2))");
    p.target = TargetSpec::from_expression("sin(t-cos(pi/8*(x+4)))");
    c.discretization = {8, 16};
    c.starts.points = {ControlVector{{1.3, 2.7}, {0.4, -0.3}, std::nullopt}};
    c.starts.box = {{0.0, 8.0}, {-5.0, 5.0}, {0.0, 2.0 * std::numbers::pi}};
    c.output_directory = "out/desk";
    return c;
}

// y = 1 is a rest state of the cubic reaction; with zero weights it is tracked exactly.
RunConfig equilibrium() {
    RunConfig c = desk();
    c.problem.history = HistorySpec::from_expression("1");
    c.problem.target = TargetSpec::from_expression("1");
    c.problem.tikhonov = 0.0;
    c.starts.points = {ControlVector{{1.3, 2.7}, {0.0, 0.0}, std::nullopt}};
    c.output_directory = "out/equilibrium";
    return c;
}

}  // namespace

const std::vector<std::string>& builtin_config_names() {
    static const std::vector<std::string> names{"example1", "example2", "example3", "example4", "desk", "equilibrium"};
    return names;
}

RunConfig builtin_config(std::string_view name) {
    if (name == "example1") return example1();
    if (name == "example2") return example2();
    if (name == "example3") return example3();
    if (name == "example4") return example4();
    if (name == "desk") return desk();
    if (name == "equilibrium") return equilibrium();
    throw ConfigError(fmt::format("unknown example '{}' (available: {})", name, fmt::join(builtin_config_names(), ", ")));
}

DiscreteProblem make_problem(const RunConfig& c) {
    return DiscreteProblem::create(c.problem, c.discretization.n_elements, c.discretization.n_slabs);
}

DiscreteProblem make_extended_problem(const RunConfig& c) {
    ProblemSpec spec = c.problem;
    spec.window = c.problem.objective_window();
    spec.horizon = 2.0 * c.problem.horizon;
    if (const auto& ref = c.problem.target.dde())
        spec.target = TargetSpec::dde_reference(*ref, spec.horizon, c.problem.horizon / double(c.discretization.n_slabs));
    return DiscreteProblem::create(spec, c.discretization.n_elements, 2 * c.discretization.n_slabs);
}

std::vector<ControlVector> start_points(const RunConfig& c) {
    if (!c.starts.points.empty()) return c.starts.points;
    return sample_starts(c.problem, c.starts.box, c.starts.count, c.starts.seed, c.starts.sampling);
}

std::vector<ControlVector> select_starts(const RunConfig& c) {
    if (!c.starts.points.empty() || c.starts.screen == 0) return start_points(c);
    const auto pool = sample_starts(c.problem, c.starts.box, c.starts.screen, c.starts.seed, c.starts.sampling);

    // Local runs on a coarse grid sort the pool by basin far better than J at
    // the raw samples does.
    RunConfig coarse = c;
    coarse.discretization.n_slabs = c.starts.screen_grid;
    if (!c.problem.ode_mode) coarse.discretization.n_elements = c.starts.screen_grid;
    coarse.optimizer.tolerance = std::max(c.optimizer.tolerance, c.starts.screen_tolerance);
    coarse.optimizer.shift_scan = 0;
    const auto runs = multistart(make_problem(coarse), pool, coarse.optimizer);

    std::vector<ControlVector> out;
    for (std::size_t i = 0; i < std::min(c.starts.count, runs.size()); ++i) out.push_back(runs[i].u);
    return out;
}

json control_to_json(const ControlVector& u) {
    json j{{"s", u.delays}, {"kappa", u.weights}};
    if (u.shift) j["sigma"] = *u.shift;
    return j;
}

ControlVector control_from_json(const json& j, const ProblemSpec& spec) {
    if (!j.is_object() || !j.contains("s") || !j.contains("kappa"))
        throw ConfigError("control: expected an object with \"s\" and \"kappa\"");
    ControlVector u;
    u.delays = as_numbers(j.at("s"), "control s");
    u.weights = as_numbers(j.at("kappa"), "control kappa");
    const auto m = static_cast<std::size_t>(spec.num_delays);
    if (u.delays.size() != m || u.weights.size() != m)
        throw ConfigError(fmt::format("control: expected {} delays and {} weights", m, m));
    if (j.contains("sigma") && !j.at("sigma").is_null()) u.shift = as_number(j.at("sigma"), "control sigma");
    if (spec.shifted() && !u.shift) u.shift = 0.0;
    if (!spec.shifted() && u.shift) throw ConfigError("control: sigma given for a plain objective");
    const auto [lo, hi] = packed_bounds(spec);
    const auto x = u.pack();
    for (std::size_t i = 0; i < 2 * m; ++i)
        if (x[i] < lo[i] || x[i] > hi[i]) throw ConfigError("control: outside the admissible box");
    return u;
}

}  // namespace delayopt
