#include "delayopt/problem.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace delayopt {

namespace {

constexpr int kHistoryGauss = 6;

std::size_t snap_to_node(const TimeGrid& grid, double t, const char* what) {
    const std::size_t k = grid.node_index(t, 1e-9 * grid.horizon());
    if (k == TimeGrid::npos)
        throw std::invalid_argument(fmt::format("objective window {} {} does not coincide with a time node", what, t));
    return k;
}

}  // namespace

DiscreteProblem::DiscreteProblem(ProblemSpec spec, FemSpace space, TimeGrid grid)
    : spec_(std::move(spec)), space_(std::move(space)), grid_(std::move(grid)) {
    if (std::abs(grid_.horizon() - spec_.horizon) > 1e-12 * spec_.horizon)
        throw std::invalid_argument("time grid does not end at the horizon");
    if (spec_.reaction.is_polynomial()) {
        // Exact for cubic R composed with a linear-in-time P1 field.
        reaction_points_ = space_.quadrature(3);
        reaction_time_rule_ = &gauss_rule(2);
    } else {
        reaction_points_ = space_.quadrature(4);
        reaction_time_rule_ = &gauss_rule(4);
    }
    objective_points_ = space_.quadrature(4);
    objective_time_rule_ = &gauss_rule(4);

    const auto& history = spec_.history;
    if (space_.is_point()) initial_ = {history.value(space_.coordinates()[0], 0.0)};
    else initial_ = space_.project([&](double x) { return history.value(x, 0.0); });
    jump_ = initial_;
    const auto nodal0 = history_nodal(0.0);
    for (std::size_t j = 0; j < jump_.size(); ++j) jump_[j] -= nodal0[j];

    const auto w = spec_.objective_window();
    window_begin_ = snap_to_node(grid_, w.lo, "start");
    window_end_ = snap_to_node(grid_, w.hi, "end");
    if (window_end_ <= window_begin_) throw std::invalid_argument("objective window is empty on this grid");
}

DiscreteProblem DiscreteProblem::create(const ProblemSpec& spec, std::size_t n_elements, std::size_t n_slabs) {
    const auto report = validate(spec);
    if (!report.ok()) {
        std::string msg = "invalid problem:";
        for (const auto& v : report.violations) msg += " " + v + ";";
        throw std::invalid_argument(msg);
    }
    FemSpace space = spec.ode_mode
                         ? FemSpace::point(spec.space_interval.lo)
                         : FemSpace::interval(SpaceMesh::uniform(spec.space_interval.lo, spec.space_interval.hi, n_elements));
    return DiscreteProblem(spec, std::move(space), TimeGrid::uniform(spec.horizon, n_slabs));
}

std::vector<double> DiscreteProblem::history_nodal(double t) const {
    return space_.interpolate([&](double x) { return spec_.history.value(x, t); });
}

std::vector<double> DiscreteProblem::history_integral(double lo, double hi) const {
    std::vector<double> v(dofs(), 0.0);
    if (!(hi > lo)) return v;
    const auto& rule = gauss_rule(kHistoryGauss);
    const auto& xs = space_.coordinates();
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double r = lo + rule.nodes[q] * (hi - lo);
        const double w = rule.weights[q] * (hi - lo);
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += w * spec_.history.value(xs[j], r);
    }
    return v;
}

std::vector<double> DiscreteProblem::history_rate_integral(double lo, double hi) const {
    std::vector<double> v(dofs(), 0.0);
    if (!(hi > lo)) return v;
    const auto& rule = gauss_rule(kHistoryGauss);
    const auto& xs = space_.coordinates();
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double r = lo + rule.nodes[q] * (hi - lo);
        const double w = rule.weights[q] * (hi - lo);
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += w * spec_.history.time_derivative(xs[j], r);
    }
    return v;
}

StateTrajectory DiscreteProblem::make_state() const {
    StateTrajectory traj(grid_, space_.coordinates(), spec_.history);
    auto y0 = traj.node(0);
    std::copy(initial_.begin(), initial_.end(), y0.begin());
    return traj;
}

// ---------------------------------------------------------------------------

Coupling::Coupling(const DiscreteProblem& problem, const ControlVector& u) : problem_(&problem) {
    const std::size_t m = problem.num_delays();
    if (u.delays.size() != m || u.weights.size() != m)
        throw std::invalid_argument("control dimension does not match the problem");
    for (std::size_t i = 0; i < m; ++i) {
        if (!(u.delays[i] >= 0.0) || !std::isfinite(u.delays[i]))
            throw std::invalid_argument(fmt::format("invalid delay s_{} = {}", i + 1, u.delays[i]));
        channels_.push_back({u.weights[i], u.delays[i], static_cast<int>(i)});
    }
    if (problem.spec().variant == VariantKind::pyragas) {
        const double total = std::accumulate(u.weights.begin(), u.weights.end(), 0.0);
        instantaneous_ = channels_.size();
        channels_.push_back({-total, 0.0, -1});
    }

    const auto& grid = problem.grid();
    const std::size_t n = grid.n_slabs();
    windows_.resize(channels_.size());
    history_.resize(channels_.size());
    history_rate_.resize(channels_.size());
    for (std::size_t ch = 0; ch < channels_.size(); ++ch) {
        windows_[ch].reserve(n);
        history_[ch].resize(n);
        history_rate_[ch].resize(n);
        for (std::size_t k = 1; k <= n; ++k) {
            auto w = delay_window(grid, k, channels_[ch].delay);
            if (w.has_history) {
                history_[ch][k - 1] = problem.history_integral(w.history_lo, w.history_hi);
                history_rate_[ch][k - 1] = problem.history_rate_integral(w.history_lo, w.history_hi);
            }
            windows_[ch].push_back(std::move(w));
        }
    }
}

double Coupling::implicit_coefficient(std::size_t k) const {
    double d = 0.0;
    for (std::size_t ch = 0; ch < channels_.size(); ++ch) {
        const double c = channels_[ch].coefficient;
        if (c == 0.0) continue;
        for (const auto& nw : window(ch, k).value)
            if (nw.node == k) d += c * nw.weight;
    }
    return d;
}

void Coupling::add_explicit_load(std::size_t k, const StateTrajectory& y, std::span<double> out) const {
    for (std::size_t ch = 0; ch < channels_.size(); ++ch) {
        const double c = channels_[ch].coefficient;
        if (c == 0.0) continue;
        const auto h = history_load(ch, k);
        for (std::size_t j = 0; j < h.size(); ++j) out[j] += c * h[j];
        for (const auto& nw : window(ch, k).value) {
            if (nw.node >= k) continue;
            const auto yn = y.node(nw.node);
            const double cw = c * nw.weight;
            for (std::size_t j = 0; j < out.size(); ++j) out[j] += cw * yn[j];
        }
    }
}

std::vector<double> Coupling::delayed_integral(std::size_t ch, std::size_t k, const StateTrajectory& y) const {
    std::vector<double> v(problem_->dofs(), 0.0);
    const auto h = history_load(ch, k);
    for (std::size_t j = 0; j < h.size(); ++j) v[j] += h[j];
    for (const auto& nw : window(ch, k).value) {
        const auto yn = y.node(nw.node);
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += nw.weight * yn[j];
    }
    return v;
}

std::vector<double> Coupling::delayed_rate_integral(std::size_t ch, std::size_t k, const StateTrajectory& y) const {
    std::vector<double> v(problem_->dofs(), 0.0);
    const auto& hr = history_rate_[ch][k - 1];
    for (std::size_t j = 0; j < hr.size(); ++j) v[j] += hr[j];
    const auto& w = window(ch, k);
    for (const auto& nw : w.rate) {
        const auto yn = y.node(nw.node);
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += nw.weight * yn[j];
    }
    if (w.crosses_origin) {
        const auto& jump = problem_->origin_jump();
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += jump[j];
    }
    return v;
}

std::vector<std::vector<double>> Coupling::apply_delayed(const std::vector<std::vector<double>>& z) const {
    const std::size_t n = problem_->grid().n_slabs();
    const std::size_t dofs = problem_->dofs();
    std::vector<std::vector<double>> out(n, std::vector<double>(dofs, 0.0));
    for (std::size_t k = 1; k <= n; ++k) {
        std::vector<double> sum(dofs, 0.0);
        for (std::size_t ch = 0; ch < channels_.size(); ++ch) {
            const double c = channels_[ch].coefficient;
            if (c == 0.0) continue;
            for (const auto& nw : window(ch, k).value) {
                if (nw.node == 0) continue;
                for (std::size_t j = 0; j < dofs; ++j) sum[j] += c * nw.weight * z[nw.node][j];
            }
        }
        problem_->space().mass().apply(sum, out[k - 1]);
    }
    return out;
}

void Coupling::scatter_advanced(std::size_t k, std::span<const double> phi,
                                std::vector<std::vector<double>>& acc) const {
    for (std::size_t ch = 0; ch < channels_.size(); ++ch) {
        const double c = channels_[ch].coefficient;
        if (c == 0.0) continue;
        for (const auto& nw : window(ch, k).value) {
            if (nw.node == 0 || nw.node >= k) continue;
            auto& a = acc[nw.node];
            const double cw = c * nw.weight;
            for (std::size_t j = 0; j < phi.size(); ++j) a[j] += cw * phi[j];
        }
    }
}

std::vector<std::vector<double>> Coupling::apply_advanced(const std::vector<std::vector<double>>& phi) const {
    const std::size_t n = problem_->grid().n_slabs();
    const std::size_t dofs = problem_->dofs();
    std::vector<std::vector<double>> acc(n + 1, std::vector<double>(dofs, 0.0));
    for (std::size_t k = n; k >= 1; --k) {
        scatter_advanced(k, phi[k - 1], acc);
        const double d = implicit_coefficient(k);
        for (std::size_t j = 0; j < dofs; ++j) acc[k][j] += d * phi[k - 1][j];
    }
    std::vector<std::vector<double>> out(n + 1, std::vector<double>(dofs, 0.0));
    for (std::size_t k = 1; k <= n; ++k) problem_->space().mass().apply(acc[k], out[k]);
    return out;
}

}  // namespace delayopt
