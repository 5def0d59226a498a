#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "delayopt/discretization.hpp"
#include "delayopt/model.hpp"

namespace delayopt {

/// A ProblemSpec together with its space and time discretization and the
/// quadrature rules every solver shares. Immutable after construction.
class DiscreteProblem {
public:
    DiscreteProblem(ProblemSpec spec, FemSpace space, TimeGrid grid);
    /// Uniform grids; a single point space in ode mode (n_elements ignored).
    static DiscreteProblem create(const ProblemSpec& spec, std::size_t n_elements, std::size_t n_slabs);

    const ProblemSpec& spec() const { return spec_; }
    const FemSpace& space() const { return space_; }
    const TimeGrid& grid() const { return grid_; }
    std::size_t num_delays() const { return static_cast<std::size_t>(spec_.num_delays); }
    std::size_t dofs() const { return space_.dofs(); }

    const std::vector<QuadPoint>& reaction_points() const { return reaction_points_; }
    const GaussRule& reaction_time_rule() const { return *reaction_time_rule_; }
    const std::vector<QuadPoint>& objective_points() const { return objective_points_; }
    const GaussRule& objective_time_rule() const { return *objective_time_rule_; }

    /// L2 projection of the history at t = 0.
    const std::vector<double>& initial_value() const { return initial_; }
    /// Nodal interpolant of the history at time t <= 0.
    std::vector<double> history_nodal(double t) const;
    /// Integral over [lo, hi] of the nodal history interpolant.
    std::vector<double> history_integral(double lo, double hi) const;
    /// Integral over [lo, hi] of the nodal interpolant of d/dt history.
    std::vector<double> history_rate_integral(double lo, double hi) const;
    /// Initial value minus the history interpolant at 0.
    const std::vector<double>& origin_jump() const { return jump_; }

    /// Objective window as slab range: slabs k with window_begin < k <= window_end.
    std::size_t window_begin() const { return window_begin_; }
    std::size_t window_end() const { return window_end_; }

    StateTrajectory make_state() const;

private:
    ProblemSpec spec_;
    FemSpace space_;
    TimeGrid grid_;
    std::vector<QuadPoint> reaction_points_;
    const GaussRule* reaction_time_rule_;
    std::vector<QuadPoint> objective_points_;
    const GaussRule* objective_time_rule_;
    std::vector<double> initial_;
    std::vector<double> jump_;
    std::size_t window_begin_ = 0;
    std::size_t window_end_ = 0;
};

/// One feedback channel c * y(t - s). Pyragas problems get an extra
/// instantaneous channel with delay 0 and coefficient -sum(kappa).
struct Channel {
    double coefficient;
    double delay;
    int source;  // delay index, or -1 for the instantaneous Pyragas channel
};

/// Delayed-coupling tables for one control: per channel and slab, the exact
/// time integral of the delayed state over the slab split into stored-node
/// weights and a history part.
class Coupling {
public:
    Coupling(const DiscreteProblem& problem, const ControlVector& u);

    const std::vector<Channel>& channels() const { return channels_; }
    const DelayWindow& window(std::size_t ch, std::size_t k) const { return windows_[ch][k - 1]; }
    std::span<const double> history_load(std::size_t ch, std::size_t k) const { return history_[ch][k - 1]; }
    /// Channel of the instantaneous Pyragas term, or npos.
    std::size_t instantaneous_channel() const { return instantaneous_; }

    /// Sum over channels of c * (weight of Y^k in slab k).
    double implicit_coefficient(std::size_t k) const;
    /// out += sum over channels of c * (history + sum_{n<k} w_n Y^n) for slab k.
    void add_explicit_load(std::size_t k, const StateTrajectory& y, std::span<double> out) const;

    /// Integral over slab k of y(t - s_ch): history part plus all node weights.
    std::vector<double> delayed_integral(std::size_t ch, std::size_t k, const StateTrajectory& y) const;
    /// Integral over slab k of d/dt y(t - s_ch), including the jump at r = 0.
    std::vector<double> delayed_rate_integral(std::size_t ch, std::size_t k, const StateTrajectory& y) const;

    /// State side: (D z)_k = M sum_ch c sum_n w_n z^n for k = 1..N; z[0] is ignored.
    std::vector<std::vector<double>> apply_delayed(const std::vector<std::vector<double>>& z) const;
    /// Adjoint side: (A phi)_n = M sum_{k, ch} c w_n phi^k for n = 1..N; phi[k-1] is slab k.
    std::vector<std::vector<double>> apply_advanced(const std::vector<std::vector<double>>& phi) const;
    /// acc[n] += sum_ch c w_n phi for every node n < k fed by slab k.
    void scatter_advanced(std::size_t k, std::span<const double> phi, std::vector<std::vector<double>>& acc) const;

private:
    const DiscreteProblem* problem_;
    std::vector<Channel> channels_;
    std::vector<std::vector<DelayWindow>> windows_;
    std::vector<std::vector<std::vector<double>>> history_;
    std::vector<std::vector<std::vector<double>>> history_rate_;
    std::size_t instantaneous_ = static_cast<std::size_t>(-1);
};

}  // namespace delayopt
