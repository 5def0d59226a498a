#include "delayopt/dde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace delayopt::oracle {

namespace {

double hermite(double y0, double y1, double f0, double f1, double h, double theta) {
    const double t2 = theta * theta;
    const double t3 = t2 * theta;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + theta) * h * f0 + (-2 * t3 + 3 * t2) * y1 +
           (t3 - t2) * h * f1;
}

}  // namespace

LinearDde::LinearDde(double a, double d, double history, double horizon, double step)
    : a_(a), d_(d), history_(history), horizon_(horizon), step_(step) {
    if (!(d > 0) || !(step > 0) || !(horizon > 0))
        throw std::invalid_argument("delay, step and horizon must be positive");
    const double ratio = d / step;
    steps_per_delay_ = static_cast<int>(std::lround(ratio));
    if (steps_per_delay_ < 1 || std::abs(ratio - steps_per_delay_) > 1e-9 * ratio)
        throw std::invalid_argument(fmt::format("step {} does not divide delay {}", step, d));

    const auto n_steps = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
    const int m = steps_per_delay_;
    y_.assign(n_steps + 1, history);
    std::vector<double> f(n_steps + 1);
    auto f_at = [&](std::size_t n) { return n >= static_cast<std::size_t>(m) ? -a * y_[n - m] : -a * history; };

    f[0] = f_at(0);
    for (std::size_t n = 0; n < n_steps; ++n) {
        // Delayed midpoint value: dense output of step n-m, all of whose data is final.
        double mid;
        if (n >= static_cast<std::size_t>(m)) {
            const std::size_t j = n - m;
            mid = hermite(y_[j], y_[j + 1], f[j], f[j + 1], step, 0.5);
        } else {
            mid = history;
        }
        f[n + 1] = f_at(n + 1);
        // RK4 on a right-hand side independent of the current state.
        y_[n + 1] = y_[n] + step / 6.0 * (f[n] + 4.0 * (-a * mid) + f[n + 1]);
    }
}

double LinearDde::rhs_at(double t) const { return -a_ * value(t - d_); }

double LinearDde::value(double t) const {
    if (t <= 0.0) return history_;
    const std::size_t last = y_.size() - 1;
    auto n = static_cast<std::size_t>(std::floor(t / step_));
    n = std::min(n, last - 1);
    const double theta = (t - static_cast<double>(n) * step_) / step_;
    const std::size_t m = static_cast<std::size_t>(steps_per_delay_);
    auto f_node = [&](std::size_t k) { return k >= m ? -a_ * y_[k - m] : -a_ * history_; };
    return hermite(y_[n], y_[n + 1], f_node(n), f_node(n + 1), step_, theta);
}

double LinearDde::derivative(double t) const { return rhs_at(t); }

}  // namespace delayopt::oracle
