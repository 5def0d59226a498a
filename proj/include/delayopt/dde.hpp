#pragma once

#include <vector>

namespace delayopt::oracle {

/// Dense solution of y'(t) = -a*y(t-d) with constant history on [-d, 0],
/// integrated by the method of steps with classic RK4. Values between grid
/// points use the cubic Hermite interpolant built from the stored values and
/// the exact right-hand side.
class LinearDde {
public:
    /// Throws std::invalid_argument unless `step` divides `d` and d > 0.
    LinearDde(double a, double d, double history, double horizon, double step);

    double value(double t) const;
    /// y'(t) = -a*y(t-d), exact for the dense output.
    double derivative(double t) const;

    double coefficient() const noexcept { return a_; }
    double delay() const noexcept { return d_; }
    double history() const noexcept { return history_; }
    double horizon() const noexcept { return horizon_; }
    double step() const noexcept { return step_; }
    const std::vector<double>& samples() const noexcept { return y_; }

private:
    double rhs_at(double t) const;

    double a_;
    double d_;
    double history_;
    double horizon_;
    double step_;
    int steps_per_delay_;
    std::vector<double> y_;  // y(n*step), n = 0..N
};

}  // namespace delayopt::oracle
