#include "delayopt/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <thread>
#include <tuple>

#include <fmt/format.h>

namespace delayopt {

const char* to_string(Termination t) {
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::max_iterations: return "max_iterations";
        case Termination::line_search_failed: return "line_search_failed";
    }
    return "?";
}

const char* to_string(Sampling s) { return s == Sampling::uniform ? "uniform" : "latin"; }

std::string RunRecord::to_json_lines() const {
    std::string out;
    for (const auto& it : iterates) {
        nlohmann::json j{{"iteration", it.iteration},
                         {"x", it.x},
                         {"J", it.value},
                         {"projected_norm", it.projected_norm},
                         {"step", it.step}};
        out += j.dump() + "\n";
    }
    return out;
}

nlohmann::json RunRecord::summary() const {
    return {{"reason", to_string(reason)}, {"iterations", iterates.empty() ? 0 : iterates.back().iteration},
            {"evaluations", evaluations},  {"wall_time", wall_time},
            {"x", x},                      {"J", value},
            {"gradient", gradient},        {"projected_norm", projected_norm}};
}

namespace {

bool at_bound(double x, double b) { return std::isfinite(b) && std::abs(x - b) <= 1e-12 * (1.0 + std::abs(b)); }

struct Pair {
    std::vector<double> s;
    std::vector<double> y;
};

double masked_dot(const std::vector<double>& a, const std::vector<double>& b, const std::vector<char>& free) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (free[i]) s += a[i] * b[i];
    return s;
}

// Two-loop recursion restricted to the free coordinates.
std::vector<double> lbfgs_direction(const std::vector<double>& g, const std::deque<Pair>& mem,
                                    const std::vector<char>& free) {
    const std::size_t n = g.size();
    std::vector<double> q(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (free[i]) q[i] = g[i];
    std::vector<double> alpha(mem.size(), 0.0), rho(mem.size(), 0.0);
    for (std::size_t k = mem.size(); k-- > 0;) {
        const double sy = masked_dot(mem[k].s, mem[k].y, free);
        if (!(sy > 0)) continue;
        rho[k] = 1.0 / sy;
        alpha[k] = rho[k] * masked_dot(mem[k].s, q, free);
        for (std::size_t i = 0; i < n; ++i)
            if (free[i]) q[i] -= alpha[k] * mem[k].y[i];
    }
    double gamma = 1.0;
    if (!mem.empty()) {
        const double sy = masked_dot(mem.back().s, mem.back().y, free);
        const double yy = masked_dot(mem.back().y, mem.back().y, free);
        if (sy > 0 && yy > 0) gamma = sy / yy;
    }
    for (auto& v : q) v *= gamma;
    for (std::size_t k = 0; k < mem.size(); ++k) {
        if (rho[k] == 0.0) continue;
        const double beta = rho[k] * masked_dot(mem[k].y, q, free);
        for (std::size_t i = 0; i < n; ++i)
            if (free[i]) q[i] += (alpha[k] - beta) * mem[k].s[i];
    }
    for (auto& v : q) v = -v;
    return q;
}

}  // namespace

RunRecord minimize(const ObjectiveHook& f, std::vector<double> x, const std::vector<double>& lo,
                   const std::vector<double>& hi, const OptimizerSettings& st, const JumpHook& jump) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = x.size();
    if (lo.size() != n || hi.size() != n) throw std::invalid_argument("bounds do not match the start point");
    auto project = [&](std::vector<double>& v) {
        for (std::size_t i = 0; i < n; ++i) v[i] = std::clamp(v[i], lo[i], hi[i]);
    };
    project(x);

    RunRecord rec;
    std::deque<Pair> mem;
    std::vector<char> free(n, 1), prev_free;
    double last_step = 0.0;
    auto [fx, g] = f(x);
    rec.evaluations = 1;
    auto try_jump = [&] {
        const double before = fx;
        if (!jump || !jump(x, fx, g)) return false;
        if (!(fx < before)) throw std::logic_error("jump hook did not decrease the objective");
        ++rec.evaluations;
        return true;
    };
    if (try_jump()) prev_free.clear();

    for (int it = 0;; ++it) {
        const double pn = projected_norm(x, g, lo, hi);
        rec.iterates.push_back({it, x, fx, pn, last_step});
        if (pn <= st.tolerance) {
            rec.reason = Termination::converged;
            break;
        }
        if (it >= st.max_iterations) {
            rec.reason = Termination::max_iterations;
            break;
        }
        for (std::size_t i = 0; i < n; ++i)
            free[i] = !((at_bound(x[i], lo[i]) && g[i] > 0) || (at_bound(x[i], hi[i]) && g[i] < 0));
        if (free != prev_free) {
            mem.clear();
            prev_free = free;
        }

        bool accepted = false;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            auto d = lbfgs_direction(g, mem, free);
            double gd = masked_dot(g, d, free);
            if (!(gd < 0)) {
                mem.clear();
                d = lbfgs_direction(g, mem, free);
                gd = masked_dot(g, d, free);
            }
            double alpha = st.initial_step;
            if (mem.empty()) {
                double dmax = 0.0;
                for (double v : d) dmax = std::max(dmax, std::abs(v));
                if (dmax > 1.0) alpha /= dmax;
            }
            for (int bt = 0; bt <= st.max_backtracks; ++bt, alpha *= st.backtrack) {
                auto xt = x;
                for (std::size_t i = 0; i < n; ++i) xt[i] += alpha * d[i];
                project(xt);
                double decrease = 0.0;
                for (std::size_t i = 0; i < n; ++i) decrease += g[i] * (xt[i] - x[i]);
                if (xt == x) break;
                double ft = std::numeric_limits<double>::infinity();
                std::vector<double> gt;
                try {
                    std::tie(ft, gt) = f(xt);
                } catch (const std::exception&) {
                    ft = std::numeric_limits<double>::infinity();
                }
                ++rec.evaluations;
                if (std::isfinite(ft) && ft <= fx + st.armijo * decrease) {
                    assert(ft <= fx);
                    Pair p{std::vector<double>(n), std::vector<double>(n)};
                    double sy = 0.0, ss = 0.0, yy = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        p.s[i] = xt[i] - x[i];
                        p.y[i] = gt[i] - g[i];
                        sy += p.s[i] * p.y[i];
                        ss += p.s[i] * p.s[i];
                        yy += p.y[i] * p.y[i];
                    }
                    if (sy > 1e-12 * std::sqrt(ss * yy)) {
                        mem.push_back(std::move(p));
                        if (static_cast<int>(mem.size()) > st.memory) mem.pop_front();
                    }
                    last_step = alpha;
                    x = std::move(xt);
                    fx = ft;
                    g = std::move(gt);
                    accepted = true;
                    if (try_jump()) mem.clear();
                    break;
                }
            }
            if (accepted || mem.empty()) break;
            mem.clear();  // retry once along the projected steepest descent
        }
        if (!accepted) {
            rec.reason = Termination::line_search_failed;
            break;
        }
    }
    rec.x = x;
    rec.value = fx;
    rec.gradient = g;
    rec.projected_norm = rec.iterates.back().projected_norm;
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

namespace {

// Lowest J over the shifts sigma + period*q/samples, q = 0..samples-1, for an already solved state.
std::pair<double, double> scan_shifts(const DiscreteProblem& problem, ControlVector u, const StateTrajectory& state,
                                      int samples, double period) {
    double reg = 0.0;
    for (double k : u.weights) reg += k * k;
    reg *= 0.5 * problem.spec().tikhonov;
    const double sigma = u.shift.value_or(0.0);
    double best = std::numeric_limits<double>::infinity(), best_shift = sigma;
    for (int q = 0; q < samples; ++q) {
        u.shift = sigma + period * q / samples;
        const double j = evaluate_tracking(problem, u, state, false).value + reg;
        if (j < best) {
            best = j;
            best_shift = *u.shift;
        }
    }
    return {best, best_shift};
}

}  // namespace

OptimizeResult optimize(const DiscreteProblem& problem, const ControlVector& u0, const OptimizerSettings& settings,
                        const NewtonSettings& newton) {
    const auto& spec = problem.spec();
    const std::size_t m = problem.num_delays();
    const bool shifted = spec.shifted();
    auto x0 = project_to_admissible(u0, spec).pack();
    if (shifted && !u0.shift) x0.push_back(0.0);
    const auto [lo, hi] = packed_bounds(spec);
    const ObjectiveHook hook = [&](const std::vector<double>& x) {
        auto ev = evaluate(problem, ControlVector::unpack(x, m, shifted), true, newton);
        return std::make_pair(ev.value, ev.gradient->pack());
    };
    JumpHook jump;
    if (shifted && settings.shift_scan > 0) {
        jump = [&](std::vector<double>& x, double& value, std::vector<double>& gradient) {
            const auto u = ControlVector::unpack(x, m, true);
            const auto [best, best_shift] =
                scan_shifts(problem, u, solve_state(problem, u, newton), settings.shift_scan, settings.shift_period);
            if (best_shift == x.back() || !(best < value - 1e-10 * std::abs(value))) return false;
            x.back() = best_shift;
            const auto ev = evaluate(problem, ControlVector::unpack(x, m, true), true, newton);
            value = ev.value;
            gradient = ev.gradient->pack();
            return true;
        };
    }
    OptimizeResult r;
    r.record = minimize(hook, x0, lo, hi, settings, jump);
    r.u = ControlVector::unpack(r.record.x, m, shifted);
    return r;
}

std::vector<OptimizeResult> multistart(const DiscreteProblem& problem, const std::vector<ControlVector>& starts,
                                       const OptimizerSettings& settings, unsigned threads,
                                       const NewtonSettings& newton) {
    if (starts.empty()) throw std::invalid_argument("multistart needs at least one start");
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
        if (const char* env = std::getenv("DELAYOPT_THREADS")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v > 0) threads = static_cast<unsigned>(v);
        }
    }
    threads = std::min<unsigned>(threads, static_cast<unsigned>(starts.size()));

    std::vector<std::optional<OptimizeResult>> results(starts.size());
    std::vector<std::string> errors(starts.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < starts.size();) {
            try {
                results[i] = optimize(problem, starts[i], settings, newton);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<OptimizeResult> ok;
    for (auto& r : results)
        if (r) ok.push_back(std::move(*r));
    if (ok.empty()) throw std::runtime_error("all multistart runs failed: " + errors.front());
    std::stable_sort(ok.begin(), ok.end(),
                     [](const auto& a, const auto& b) { return a.record.value < b.record.value; });
    return ok;
}

std::vector<ControlVector> sample_starts(const ProblemSpec& spec, const StartBox& box, std::size_t count,
                                         std::uint64_t seed, Sampling sampling) {
    const auto m = static_cast<std::size_t>(spec.num_delays);
    const auto [lo, hi] = packed_bounds(spec);
    std::vector<Interval> ranges;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        const Interval& b = i < m ? box.delays : i < 2 * m ? box.weights : box.shift;
        Interval r{std::max(lo[i], b.lo), std::min(hi[i], b.hi)};
        if (r.lo > r.hi) r = {std::clamp(b.lo, lo[i], hi[i]), std::clamp(b.lo, lo[i], hi[i])};
        ranges.push_back(r);
    }

    std::mt19937_64 rng(seed);
    auto uniform01 = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    std::vector<std::vector<double>> points(count, std::vector<double>(ranges.size()));
    for (std::size_t d = 0; d < ranges.size(); ++d) {
        std::vector<std::size_t> strata(count);
        std::iota(strata.begin(), strata.end(), 0);
        if (sampling == Sampling::latin)
            for (std::size_t i = count; i > 1; --i) std::swap(strata[i - 1], strata[rng() % i]);
        for (std::size_t j = 0; j < count; ++j) {
            const double u = sampling == Sampling::latin ? (static_cast<double>(strata[j]) + uniform01()) / double(count)
                                                         : uniform01();
            points[j][d] = ranges[d].lo + u * (ranges[d].hi - ranges[d].lo);
        }
    }
    std::vector<ControlVector> starts;
    for (const auto& p : points) starts.push_back(ControlVector::unpack(p, m, spec.shifted()));
    return starts;
}

}  // namespace delayopt
