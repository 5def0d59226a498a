#include "delayopt/oracle.hpp"

#include <cmath>
#include <numbers>

#include "delayopt/forward.hpp"

namespace delayopt::oracle {

FdGradient fd_gradient(const DiscreteProblem& p, const ControlVector& u, double step_scale,
                       const NewtonSettings& settings) {
    const std::size_t m = p.num_delays();
    const bool shifted = p.spec().shifted();
    auto x = u.pack();
    if (shifted && !u.shift) x.push_back(0.0);
    const auto [lo, hi] = packed_bounds(p.spec());

    auto value_at = [&](const std::vector<double>& xv) {
        const auto v = ControlVector::unpack(xv, m, shifted);
        return evaluate(p, v, false, settings).value;
    };

    FdGradient fd;
    std::vector<double> g(x.size());
    fd.steps.resize(x.size());
    fd.one_sided.assign(x.size(), false);
    const double f0 = value_at(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = step_scale * (1.0 + std::abs(x[i]));
        fd.steps[i] = h;
        auto xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const bool up = xp[i] <= hi[i];
        const bool down = xm[i] >= lo[i];
        if (up && down) {
            g[i] = (value_at(xp) - value_at(xm)) / (2.0 * h);
        } else if (up) {
            fd.one_sided[i] = true;
            g[i] = (value_at(xp) - f0) / h;
        } else if (down) {
            fd.one_sided[i] = true;
            g[i] = (f0 - value_at(xm)) / h;
        } else {
            fd.one_sided[i] = true;
            g[i] = 0.0;
        }
    }
    fd.gradient.d_delays.assign(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(m));
    fd.gradient.d_weights.assign(g.begin() + static_cast<std::ptrdiff_t>(m), g.begin() + static_cast<std::ptrdiff_t>(2 * m));
    if (shifted) fd.gradient.d_shift = g[2 * m];
    fd.gradient.projected_norm = projected_norm(x, g, lo, hi);
    return fd;
}

namespace {

ProblemSpec base_spec(double horizon) {
    ProblemSpec s;
    s.horizon = horizon;
    s.num_delays = 1;
    s.delay_bounds = {{0.0, horizon}};
    s.weight_bounds = {{-1.0, 1.0}};
    s.target = TargetSpec::from_expression("0");
    return s;
}

}  // namespace

ManufacturedCase decay_case(double horizon) {
    auto s = base_spec(horizon);
    s.ode_mode = true;
    s.reaction = ReactionSpec::from_expression("y");
    s.history = HistorySpec::from_expression("exp(-t)");
    return {s, [](double, double t) { return std::exp(-t); }};
}

ManufacturedCase heat_case(double horizon) {
    auto s = base_spec(horizon);
    s.space_interval = {-20.0, 20.0};
    s.history = HistorySpec::from_expression("cos(pi*(x+20)/40)*exp(-(pi/40)^2*t)");
    const double k = std::numbers::pi / 40.0;
    return {s, [k](double x, double t) { return std::cos(k * (x + 20.0)) * std::exp(-k * k * t); }};
}

std::vector<ConvergenceRow> convergence_study(const ManufacturedCase& c, Refinement refine,
                                              const std::vector<std::size_t>& levels, std::size_t fixed) {
    std::vector<ConvergenceRow> rows;
    const ControlVector u{{0.0}, {0.0}, std::nullopt};
    const auto& rule = gauss_rule(4);
    for (std::size_t level : levels) {
        const std::size_t ne = refine == Refinement::space ? level : fixed;
        const std::size_t nt = refine == Refinement::time ? level : fixed;
        const auto p = DiscreteProblem::create(c.spec, ne, nt);
        const auto y = solve_state(p, u);
        const auto pts = p.space().quadrature(4);
        double err2 = 0.0;
        for (std::size_t k = 1; k <= p.grid().n_slabs(); ++k) {
            const double tau = p.grid().width(k);
            for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
                const double th = rule.nodes[g];
                const double t = p.grid().nodes[k - 1] + th * tau;
                for (const auto& q : pts) {
                    const double yh = (1.0 - th) * q.interpolate(y.node(k - 1)) + th * q.interpolate(y.node(k));
                    const double e = yh - c.exact(q.x, t);
                    err2 += rule.weights[g] * tau * q.weight * e * e;
                }
            }
        }
        ConvergenceRow row;
        row.n_elements = ne;
        row.n_slabs = nt;
        row.h = refine == Refinement::time ? p.grid().max_width()
                                           : (c.spec.space_interval.hi - c.spec.space_interval.lo) / double(ne);
        row.error = std::sqrt(err2);
        if (!rows.empty() && row.error > 0 && rows.back().error > 0)
            row.order = std::log(rows.back().error / row.error) / std::log(rows.back().h / row.h);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace delayopt::oracle
