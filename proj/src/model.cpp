#include "delayopt/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace delayopt {

const char* to_string(VariantKind v) { return v == VariantKind::pyragas ? "pyragas" : "direct_delay"; }
const char* to_string(ObjectiveKind o) { return o == ObjectiveKind::shifted ? "shifted" : "plain"; }
const char* to_string(TargetQuadrature q) { return q == TargetQuadrature::gauss ? "gauss" : "nodal"; }

// ---------------------------------------------------------------------------

ReactionSpec::ReactionSpec() : ReactionSpec(std::string("0")) {}

ReactionSpec::ReactionSpec(const std::string& source)
    : source_(source), ast_(expr::parse(source)), dy_ast_(expr::differentiate(ast_, expr::Var::y)),
      value_(ast_), dy_(dy_ast_) {
    auto poly = expr::as_polynomial(ast_, expr::Var::y);
    if (poly && poly->size() <= 4) {
        poly->resize(4, 0.0);
        coefficients_ = std::move(poly);
    }
}

ReactionSpec ReactionSpec::from_expression(const std::string& source) { return ReactionSpec(source); }

double ReactionSpec::value(double x, double t, double y) const {
    if (coefficients_) {
        const auto& c = *coefficients_;
        return c[0] + y * (c[1] + y * (c[2] + y * c[3]));
    }
    return value_(x, t, y);
}

double ReactionSpec::derivative(double x, double t, double y) const {
    if (coefficients_) {
        const auto& c = *coefficients_;
        return c[1] + y * (2.0 * c[2] + 3.0 * y * c[3]);
    }
    return dy_(x, t, y);
}

// ---------------------------------------------------------------------------

SpaceTimeFunction::SpaceTimeFunction() : SpaceTimeFunction(std::string("0")) {}

SpaceTimeFunction::SpaceTimeFunction(const std::string& source) : source_(source), ast_(expr::parse(source)) {
    if (expr::depends_on(ast_, expr::Var::y))
        throw expr::ParseError(fmt::format("'{}' may only depend on x and t", source), 0, "x or t");
    dt_ast_ = expr::differentiate(ast_, expr::Var::t);
    value_ = expr::Compiled(ast_);
    dt_ = expr::Compiled(dt_ast_);
}

SpaceTimeFunction SpaceTimeFunction::from_expression(const std::string& source) { return SpaceTimeFunction(source); }

bool SpaceTimeFunction::depends_on_x() const { return expr::depends_on(ast_, expr::Var::x); }

// ---------------------------------------------------------------------------

TargetSpec::TargetSpec() = default;

TargetSpec TargetSpec::from_expression(const std::string& source) {
    TargetSpec t;
    t.expr_ = SpaceTimeFunction::from_expression(source);
    return t;
}

TargetSpec TargetSpec::dde_reference(const DdeReference& ref, double horizon, double max_step) {
    TargetSpec t;
    t.ref_ = ref;
    const double n = std::ceil(ref.delay / max_step - 1e-12);
    t.dde_ = std::make_shared<oracle::LinearDde>(ref.coefficient, ref.delay, ref.history, horizon,
                                                 ref.delay / n);
    return t;
}

bool TargetSpec::depends_on_x() const { return is_expression() && expr_.depends_on_x(); }

double TargetSpec::value(double x, double t) const {
    return dde_ ? dde_->value(t) : expr_.value(x, t);
}

double TargetSpec::time_derivative(double x, double t) const {
    return dde_ ? dde_->derivative(t) : expr_.time_derivative(x, t);
}

// ---------------------------------------------------------------------------

double ProblemSpec::max_delay_bound() const {
    double b = 0.0;
    for (const auto& iv : delay_bounds) b = std::max(b, iv.hi);
    return b;
}

std::vector<double> ControlVector::pack() const {
    std::vector<double> x(delays);
    x.insert(x.end(), weights.begin(), weights.end());
    if (shift) x.push_back(*shift);
    return x;
}

ControlVector ControlVector::unpack(const std::vector<double>& x, std::size_t m, bool with_shift) {
    if (x.size() != 2 * m + (with_shift ? 1 : 0))
        throw std::invalid_argument("packed control has the wrong length");
    ControlVector u;
    u.delays.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m));
    u.weights.assign(x.begin() + static_cast<std::ptrdiff_t>(m), x.begin() + static_cast<std::ptrdiff_t>(2 * m));
    if (with_shift) u.shift = x[2 * m];
    return u;
}

ValidationReport validate(const ProblemSpec& spec) {
    ValidationReport report;
    auto fail = [&](std::string msg) { report.violations.push_back(std::move(msg)); };
    const auto m = static_cast<std::size_t>(std::max(spec.num_delays, 0));

    if (!(spec.horizon > 0) || !std::isfinite(spec.horizon)) fail("horizon must be positive and finite");
    if (spec.num_delays < 1) fail("at least one delay is required");
    if (!(spec.space_interval.lo < spec.space_interval.hi)) fail("space interval is empty");
    if (spec.delay_bounds.size() != m) fail("delay_bounds must have one pair per delay");
    if (spec.weight_bounds.size() != m) fail("weight_bounds must have one pair per delay");

    for (std::size_t i = 0; i < spec.delay_bounds.size(); ++i) {
        const auto& [a, b] = spec.delay_bounds[i];
        if (!std::isfinite(a) || !std::isfinite(b)) fail(fmt::format("delay {}: bounds must be finite", i + 1));
        else if (a < 0) fail(fmt::format("delay {}: negative lower bound", i + 1));
        if (a > b) fail(fmt::format("delay {}: delay bounds reversed", i + 1));
    }
    bool weights_finite = true;
    for (std::size_t i = 0; i < spec.weight_bounds.size(); ++i) {
        const auto& [lo, hi] = spec.weight_bounds[i];
        if (std::isnan(lo) || std::isnan(hi)) fail(fmt::format("weight {}: NaN bound", i + 1));
        if (lo > hi) fail(fmt::format("weight {}: weight bounds reversed", i + 1));
        if (!std::isfinite(lo) || !std::isfinite(hi)) weights_finite = false;
    }
    if (!(spec.tikhonov >= 0)) fail("tikhonov parameter must be non-negative");
    if (spec.tikhonov == 0 && !weights_finite)
        fail("existence condition fails: tikhonov = 0 requires finite weight bounds");

    const auto w = spec.objective_window();
    if (!(w.lo >= 0 && w.lo < w.hi && w.hi <= spec.horizon))
        fail("objective window must satisfy 0 <= t_a < t_b <= T");

    if (spec.ode_mode) {
        if (expr::depends_on(spec.reaction.ast(), expr::Var::x) || spec.history.depends_on_x() ||
            spec.target.depends_on_x())
            fail("ode mode requires reaction, history and target independent of x");
    }

    // Lower bound on dR/dy: analytic for the cubic kind, sampled otherwise.
    if (spec.reaction.is_polynomial()) {
        const auto& c = *spec.reaction.coefficients();
        if (c[3] < 0 || (c[3] == 0 && c[2] != 0)) fail("reaction derivative is unbounded below");
    } else if (spec.horizon > 0 && std::isfinite(spec.horizon)) {
        bool finite = true;
        for (int ix = 0; ix <= 8 && finite; ++ix)
            for (int it = 0; it <= 8 && finite; ++it)
                for (int iy = 0; iy <= 40 && finite; ++iy) {
                    const double x = spec.space_interval.lo + (spec.space_interval.hi - spec.space_interval.lo) * ix / 8.0;
                    const double t = spec.horizon * it / 8.0;
                    const double y = -10.0 + 0.5 * iy;
                    finite = std::isfinite(spec.reaction.derivative(x, t, y)) &&
                             std::isfinite(spec.reaction.value(x, t, y));
                }
        if (!finite) fail("reaction or its derivative is not finite on the sampling grid");
    }

    // Continuity of the history on the closure of the history strip.
    const double b = std::max(spec.max_delay_bound(), 0.0);
    if (std::isfinite(b)) {
        bool finite = true;
        for (int ix = 0; ix <= 16 && finite; ++ix)
            for (int it = 0; it <= 16 && finite; ++it) {
                const double x = spec.space_interval.lo + (spec.space_interval.hi - spec.space_interval.lo) * ix / 16.0;
                const double t = -b * it / 16.0;
                finite = std::isfinite(spec.history.value(x, t)) && std::isfinite(spec.history.time_derivative(x, t));
            }
        if (!finite) fail("history is not finite on the history strip");
    }
    if (!spec.target.is_expression() && spec.target.dense()->horizon() < spec.horizon)
        fail("reference target does not cover the horizon");
    return report;
}

ControlVector project_to_admissible(const ControlVector& u, const ProblemSpec& spec) {
    const auto m = static_cast<std::size_t>(spec.num_delays);
    if (u.delays.size() != m || u.weights.size() != m || spec.delay_bounds.size() != m ||
        spec.weight_bounds.size() != m)
        throw std::invalid_argument("control dimension does not match the problem");
    ControlVector p = u;
    for (std::size_t i = 0; i < m; ++i) {
        p.delays[i] = std::clamp(u.delays[i], spec.delay_bounds[i].lo, spec.delay_bounds[i].hi);
        p.weights[i] = std::clamp(u.weights[i], spec.weight_bounds[i].lo, spec.weight_bounds[i].hi);
    }
    return p;
}

std::pair<std::vector<double>, std::vector<double>> packed_bounds(const ProblemSpec& spec) {
    std::vector<double> lo, hi;
    for (const auto& iv : spec.delay_bounds) {
        lo.push_back(iv.lo);
        hi.push_back(iv.hi);
    }
    for (const auto& iv : spec.weight_bounds) {
        lo.push_back(iv.lo);
        hi.push_back(iv.hi);
    }
    if (spec.shifted()) {
        lo.push_back(-std::numeric_limits<double>::infinity());
        hi.push_back(std::numeric_limits<double>::infinity());
    }
    return {lo, hi};
}

}  // namespace delayopt
