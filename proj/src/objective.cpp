#include "delayopt/objective.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "delayopt/adjoint.hpp"

namespace delayopt {

std::vector<double> GradientVector::pack() const {
    std::vector<double> g(d_delays);
    g.insert(g.end(), d_weights.begin(), d_weights.end());
    if (d_shift) g.push_back(*d_shift);
    return g;
}

nlohmann::json GradientVector::to_json() const {
    nlohmann::json j;
    j["d_s"] = d_delays;
    j["d_kappa"] = d_weights;
    j["d_shift"] = d_shift ? nlohmann::json(*d_shift) : nlohmann::json(nullptr);
    j["projected_norm"] = projected_norm;
    return j;
}

namespace {

void check_grid(const DiscreteProblem& p, const StateTrajectory& state) {
    if (state.grid().nodes != p.grid().nodes || state.dofs() != p.dofs())
        throw std::invalid_argument("state was solved on a different grid");
}

// y_Q replaced by its nodal interpolant; the bilinear residual is integrated exactly.
Tracking nodal_tracking(const DiscreteProblem& p, double shift, const StateTrajectory& state, bool derivatives) {
    const auto& grid = p.grid();
    const auto& target = p.spec().target;
    const auto& xs = p.space().coordinates();
    const auto& M = p.space().mass();
    const std::size_t dofs = p.dofs();
    const bool shifted = p.spec().shifted();

    Tracking tr;
    if (derivatives) tr.dy.assign(grid.nodes.size(), std::vector<double>(dofs, 0.0));
    std::vector<double> ea(dofs), eb(dofs), ma(dofs), mb(dofs), ra(dofs), rb(dofs);
    auto residual = [&](std::size_t k, std::vector<double>& e, std::vector<double>& r) {
        const auto y = state.node(k);
        const double t = grid.nodes[k] - shift;
        for (std::size_t j = 0; j < dofs; ++j) {
            e[j] = y[j] - target.value(xs[j], t);
            if (derivatives && shifted) r[j] = target.time_derivative(xs[j], t);
        }
    };
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
        return s;
    };
    residual(p.window_begin(), ea, ra);
    M.apply(ea, ma);
    for (std::size_t k = p.window_begin() + 1; k <= p.window_end(); ++k) {
        residual(k, eb, rb);
        M.apply(eb, mb);
        const double tau = grid.width(k);
        tr.value += tau / 6.0 * (dot(ea, ma) + dot(ea, mb) + dot(eb, mb));
        if (derivatives) {
            auto& dp = tr.dy[k - 1];
            auto& dc = tr.dy[k];
            for (std::size_t j = 0; j < dofs; ++j) {
                dp[j] += tau / 6.0 * (2.0 * ma[j] + mb[j]);
                dc[j] += tau / 6.0 * (ma[j] + 2.0 * mb[j]);
            }
            if (shifted)
                tr.d_shift += tau / 6.0 * (dot(ra, ma) * 2.0 + dot(ra, mb) + dot(rb, ma) + 2.0 * dot(rb, mb));
        }
        std::swap(ea, eb);
        std::swap(ma, mb);
        std::swap(ra, rb);
    }
    return tr;
}

Tracking gauss_tracking(const DiscreteProblem& p, double shift, const StateTrajectory& state, bool derivatives) {
    const auto& grid = p.grid();
    const auto& rule = p.objective_time_rule();
    const auto& target = p.spec().target;

    Tracking tr;
    if (derivatives) tr.dy.assign(grid.nodes.size(), std::vector<double>(p.dofs(), 0.0));
    for (std::size_t k = p.window_begin() + 1; k <= p.window_end(); ++k) {
        const auto prev = state.node(k - 1);
        const auto cur = state.node(k);
        const double t0 = grid.nodes[k - 1];
        const double tau = grid.width(k);
        for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
            const double th = rule.nodes[g];
            const double t = t0 + th * tau - shift;
            const double wt = rule.weights[g] * tau;
            for (const auto& q : p.objective_points()) {
                const double y = (1.0 - th) * q.interpolate(prev) + th * q.interpolate(cur);
                const double e = y - target.value(q.x, t);
                const double w = wt * q.weight;
                tr.value += 0.5 * w * e * e;
                if (!derivatives) continue;
                const double we = w * e;
                auto& dc = tr.dy[k];
                auto& dp = tr.dy[k - 1];
                dc[q.a] += th * we * q.va;
                dc[q.b] += th * we * q.vb;
                dp[q.a] += (1.0 - th) * we * q.va;
                dp[q.b] += (1.0 - th) * we * q.vb;
                if (p.spec().shifted()) tr.d_shift += we * target.time_derivative(q.x, t);
            }
        }
    }
    return tr;
}

}  // namespace

Tracking evaluate_tracking(const DiscreteProblem& p, const ControlVector& u, const StateTrajectory& state,
                           bool derivatives) {
    check_grid(p, state);
    const double shift = p.spec().shifted() ? u.shift.value_or(0.0) : 0.0;
    if (p.spec().target_quadrature == TargetQuadrature::gauss) return gauss_tracking(p, shift, state, derivatives);
    return nodal_tracking(p, shift, state, derivatives);
}

double evaluate_objective(const DiscreteProblem& p, const ControlVector& u, const StateTrajectory& state) {
    double reg = 0.0;
    for (double k : u.weights) reg += k * k;
    return evaluate_tracking(p, u, state, false).value + 0.5 * p.spec().tikhonov * reg;
}

GradientVector assemble_gradient(const DiscreteProblem& p, const Coupling& coupling, const ControlVector& u,
                                 const StateTrajectory& state, const AdjointTrajectory& adjoint, double d_shift) {
    const std::size_t m = p.num_delays();
    const auto& M = p.space().mass();
    const bool pyragas = p.spec().variant == VariantKind::pyragas;
    const std::size_t inst = coupling.instantaneous_channel();
    const std::size_t n_slabs = p.grid().n_slabs();

    GradientVector g;
    g.d_delays.assign(m, 0.0);
    g.d_weights.assign(m, 0.0);
    std::vector<double> mphi(p.dofs());
    auto dot = [](std::span<const double> a, std::span<const double> b) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
        return s;
    };
    for (std::size_t k = 1; k <= n_slabs; ++k) {
        M.apply(adjoint.slab(k), mphi);
        const double inst_term = pyragas ? dot(mphi, coupling.delayed_integral(inst, k, state)) : 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double c = coupling.channels()[i].coefficient;
            if (c != 0.0) g.d_delays[i] -= c * dot(mphi, coupling.delayed_rate_integral(i, k, state));
            g.d_weights[i] += dot(mphi, coupling.delayed_integral(i, k, state)) - inst_term;
        }
    }
    for (std::size_t i = 0; i < m; ++i) g.d_weights[i] += p.spec().tikhonov * u.weights[i];
    if (p.spec().shifted()) g.d_shift = d_shift;

    const auto [lo, hi] = packed_bounds(p.spec());
    auto x = u.pack();
    if (p.spec().shifted() && !u.shift) x.push_back(0.0);
    g.projected_norm = projected_norm(x, g.pack(), lo, hi);
    return g;
}

GradientVector assemble_gradient(const DiscreteProblem& p, const ControlVector& u, const StateTrajectory& state,
                                 const AdjointTrajectory& adjoint) {
    const Coupling coupling(p, u);
    const auto tr = evaluate_tracking(p, u, state, true);
    return assemble_gradient(p, coupling, u, state, adjoint, tr.d_shift);
}

// ---------------------------------------------------------------------------

const char* to_string(CoordinateStatus s) {
    switch (s) {
        case CoordinateStatus::interior_stationary: return "interior-stationary";
        case CoordinateStatus::active_lower_consistent: return "active-lower-consistent";
        case CoordinateStatus::active_upper_consistent: return "active-upper-consistent";
        case CoordinateStatus::violated: return "violated";
    }
    return "?";
}

namespace {

bool at_bound(double x, double b) { return std::isfinite(b) && std::abs(x - b) <= 1e-12 * (1.0 + std::abs(b)); }

}  // namespace

double projected_norm(const std::vector<double>& x, const std::vector<double>& g, const std::vector<double>& lo,
                      const std::vector<double>& hi) {
    double n = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double v;
        if (at_bound(x[i], lo[i])) v = std::max(0.0, -g[i]);
        else if (at_bound(x[i], hi[i])) v = std::max(0.0, g[i]);
        else v = std::abs(g[i]);
        n = std::max(n, v);
    }
    return n;
}

bool StationarityReport::stationary() const {
    return std::none_of(coordinates.begin(), coordinates.end(),
                        [](const auto& c) { return c.status == CoordinateStatus::violated; });
}

nlohmann::json StationarityReport::to_json() const {
    nlohmann::json j;
    j["tolerance"] = tolerance;
    j["projected_norm"] = projected_norm;
    j["stationary"] = stationary();
    j["coordinates"] = nlohmann::json::array();
    for (const auto& c : coordinates)
        j["coordinates"].push_back(
            {{"name", c.name}, {"value", c.value}, {"gradient", c.gradient}, {"status", to_string(c.status)}});
    return j;
}

StationarityReport stationarity_check(const ProblemSpec& spec, const ControlVector& u, const GradientVector& g,
                                      double tolerance) {
    const auto [lo, hi] = packed_bounds(spec);
    auto x = u.pack();
    if (spec.shifted() && !u.shift) x.push_back(0.0);
    const auto gp = g.pack();
    if (gp.size() != x.size()) throw std::invalid_argument("gradient and control dimensions differ");
    const std::size_t m = u.delays.size();

    StationarityReport r;
    r.tolerance = tolerance;
    for (std::size_t i = 0; i < x.size(); ++i) {
        CoordinateReport c;
        c.name = i < m ? fmt::format("s_{}", i + 1) : i < 2 * m ? fmt::format("kappa_{}", i - m + 1) : "sigma";
        c.value = x[i];
        c.gradient = gp[i];
        if (at_bound(x[i], lo[i]))
            c.status = gp[i] >= -tolerance ? CoordinateStatus::active_lower_consistent : CoordinateStatus::violated;
        else if (at_bound(x[i], hi[i]))
            c.status = gp[i] <= tolerance ? CoordinateStatus::active_upper_consistent : CoordinateStatus::violated;
        else
            c.status = std::abs(gp[i]) <= tolerance ? CoordinateStatus::interior_stationary : CoordinateStatus::violated;
        r.coordinates.push_back(std::move(c));
    }
    r.projected_norm = projected_norm(x, gp, lo, hi);
    return r;
}

Evaluation evaluate(const DiscreteProblem& p, const ControlVector& u, bool with_gradient,
                    const NewtonSettings& settings) {
    const Coupling coupling(p, u);
    Evaluation ev;
    ev.state = solve_state(p, coupling, settings);
    const auto tr = evaluate_tracking(p, u, ev.state, with_gradient);
    double reg = 0.0;
    for (double k : u.weights) reg += k * k;
    ev.value = tr.value + 0.5 * p.spec().tikhonov * reg;
    if (with_gradient) {
        ev.adjoint = solve_adjoint(p, coupling, ev.state, tr.dy);
        ev.gradient = assemble_gradient(p, coupling, u, ev.state, *ev.adjoint, tr.d_shift);
    }
    return ev;
}

}  // namespace delayopt
