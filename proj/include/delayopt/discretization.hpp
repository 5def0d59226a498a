#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "delayopt/model.hpp"

namespace delayopt {

/// Gauss-Legendre rule mapped to [0, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n in 1..8.
const GaussRule& gauss_rule(int n);

struct SpaceMesh {
    std::vector<double> nodes;

    static SpaceMesh uniform(double lo, double hi, std::size_t n_elements);
    std::size_t n_elements() const { return nodes.empty() ? 0 : nodes.size() - 1; }
    double width(std::size_t e) const { return nodes[e + 1] - nodes[e]; }
};

/// Partition 0 = t_0 < ... < t_N = T; slab k is I_k = (t_{k-1}, t_k], k = 1..N.
struct TimeGrid {
    std::vector<double> nodes;

    static TimeGrid uniform(double horizon, std::size_t n_slabs);
    /// Throws std::invalid_argument unless strictly increasing from 0.
    explicit TimeGrid(std::vector<double> nodes);
    TimeGrid() = default;

    std::size_t n_slabs() const { return nodes.size() - 1; }
    double horizon() const { return nodes.back(); }
    double width(std::size_t k) const { return nodes[k] - nodes[k - 1]; }
    double max_width() const;
    /// Slab k with t in (t_{k-1}, t_k]; t <= 0 maps to 1, t > T to N.
    std::size_t slab_of(double t) const;
    /// Index of the node within `tol` of t, or npos.
    std::size_t node_index(double t, double tol) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

class SingularSystem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Tridiagonal {
public:
    Tridiagonal() = default;
    explicit Tridiagonal(std::size_t n) : diag(n, 0.0), lower(n ? n - 1 : 0, 0.0), upper(n ? n - 1 : 0, 0.0) {}

    std::size_t size() const { return diag.size(); }
    /// Adds v to entry (i, j); |i - j| <= 1.
    void add(std::size_t i, std::size_t j, double v);
    /// this += alpha * other
    void axpy(double alpha, const Tridiagonal& other);
    Tridiagonal transposed() const;

    /// y (+)= alpha * A x
    void apply(std::span<const double> x, std::span<double> y, double alpha = 1.0, bool accumulate = false) const;
    std::vector<double> operator*(std::span<const double> x) const;
    /// Thomas algorithm without pivoting.
    std::vector<double> solve(std::span<const double> rhs) const;

    std::vector<double> diag;
    std::vector<double> lower;  // (i+1, i)
    std::vector<double> upper;  // (i, i+1)
};

struct FemMatrices {
    Tridiagonal mass;
    Tridiagonal stiffness;
};

/// Exact P1 element integrals. Throws std::invalid_argument on a degenerate element.
FemMatrices assemble(const SpaceMesh& mesh);

/// A spatial quadrature point with the two basis functions that are nonzero there.
struct QuadPoint {
    double x = 0.0;
    double weight = 0.0;
    std::size_t a = 0;
    std::size_t b = 0;
    double va = 1.0;
    double vb = 0.0;

    double interpolate(std::span<const double> v) const { return va * v[a] + vb * v[b]; }
};

/// Spatial discretization: P1 elements on an interval, or a single point
/// with unit mass and no stiffness for spatially constant problems.
class FemSpace {
public:
    static FemSpace interval(const SpaceMesh& mesh);
    static FemSpace point(double x = 0.0);

    bool is_point() const noexcept { return point_; }
    std::size_t dofs() const { return coords_.size(); }
    const std::vector<double>& coordinates() const { return coords_; }
    const SpaceMesh& mesh() const { return mesh_; }
    const Tridiagonal& mass() const { return matrices_.mass; }
    const Tridiagonal& stiffness() const { return matrices_.stiffness; }
    const std::vector<double>& lumped_mass() const { return lumped_; }

    std::vector<QuadPoint> quadrature(int points_per_element) const;

    /// sqrt(sum r_j^2 / m_j), a discrete L2 norm for residual (dual) vectors.
    double dual_norm(std::span<const double> r) const;
    /// sqrt(v^T M v)
    double l2_norm(std::span<const double> v) const;
    double inner(std::span<const double> u, std::span<const double> v) const;

    template <typename F>
    std::vector<double> interpolate(F&& f) const {
        std::vector<double> v(dofs());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(coords_[j]);
        return v;
    }

    /// L2 projection onto the discrete space.
    template <typename F>
    std::vector<double> project(F&& f) const {
        std::vector<double> rhs(dofs(), 0.0);
        for (const auto& q : quadrature(6)) {
            const double fv = f(q.x) * q.weight;
            rhs[q.a] += fv * q.va;
            rhs[q.b] += fv * q.vb;
        }
        return mass().solve(rhs);
    }

private:
    bool point_ = false;
    SpaceMesh mesh_;
    std::vector<double> coords_;
    FemMatrices matrices_;
    std::vector<double> lumped_;
};

/// Continuous, piecewise linear in time trajectory with a history for t <= 0.
class StateTrajectory {
public:
    StateTrajectory() = default;
    StateTrajectory(TimeGrid grid, std::vector<double> coordinates, HistorySpec history);

    const TimeGrid& grid() const { return grid_; }
    const std::vector<double>& coordinates() const { return coords_; }
    const HistorySpec& history() const { return history_; }
    std::size_t dofs() const { return coords_.size(); }

    std::span<const double> node(std::size_t k) const { return {values_.data() + k * dofs(), dofs()}; }
    std::span<double> node(std::size_t k) { return {values_.data() + k * dofs(), dofs()}; }

    /// History nodal interpolant for t <= 0, linear interpolation in (0, T].
    /// Throws std::out_of_range for t > T.
    std::vector<double> value(double t) const;

private:
    TimeGrid grid_;
    std::vector<double> coords_;
    HistorySpec history_;
    std::vector<double> values_;
};

/// Piecewise constant in time; slab k holds phi^k, zero for t >= T.
class AdjointTrajectory {
public:
    AdjointTrajectory() = default;
    AdjointTrajectory(TimeGrid grid, std::size_t dofs);

    const TimeGrid& grid() const { return grid_; }
    std::size_t dofs() const { return dofs_; }
    std::span<const double> slab(std::size_t k) const { return {values_.data() + (k - 1) * dofs_, dofs_}; }
    std::span<double> slab(std::size_t k) { return {values_.data() + (k - 1) * dofs_, dofs_}; }
    std::vector<double> value(double t) const;

private:
    TimeGrid grid_;
    std::size_t dofs_ = 0;
    std::vector<double> values_;
};

/// y(., t - s) as a nodal vector. Throws std::out_of_range when t - s > T.
std::vector<double> delayed_field(const StateTrajectory& traj, double t, double s);

/// Sub-partition of slab k (endpoints included) on whose pieces every
/// t - s_i stays inside one time slab or inside the history.
std::vector<double> breakpoints(const TimeGrid& grid, std::size_t k, std::span<const double> delays);

struct NodeWeight {
    std::size_t node;
    double weight;
};

/// Time integral over slab k of the delayed state y(t - s), in the shifted
/// variable r = t - s on [t_{k-1} - s, t_k - s].
struct DelayWindow {
    std::vector<NodeWeight> value;  // sum w_n Y^n = integral of y_sigma(r) over the r > 0 part
    std::vector<NodeWeight> rate;   // sum w_n Y^n = integral of d/dt y_sigma(r) over the r > 0 part
    bool has_history = false;
    double history_lo = 0.0;        // history part is [history_lo, history_hi], history_hi <= 0
    double history_hi = 0.0;
    bool crosses_origin = false;    // r_lo < 0 <= r_hi: the window sees the jump at r = 0
};

DelayWindow delay_window(const TimeGrid& grid, std::size_t k, double s);

void write_csv(std::ostream& os, const StateTrajectory& traj);
void write_csv(std::ostream& os, const AdjointTrajectory& traj);
std::string csv_header(std::size_t dofs);

}  // namespace delayopt
