#include "delayopt/discretization.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

namespace delayopt {

namespace {

GaussRule make_gauss(int n) {
    GaussRule rule;
    // Newton iteration on the Legendre polynomial P_n from Chebyshev guesses.
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double pn = n == 0 ? 1.0 : (n == 1 ? z : p1);
            double pnm1 = n == 1 ? 1.0 : p0;
            dp = n * (z * pn - pnm1) / (z * z - 1.0);
            const double dz = pn / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        rule.nodes.push_back(0.5 * (1.0 - z));
        rule.weights.push_back(1.0 / ((1.0 - z * z) * dp * dp));
    }
    // Ascending order in [0, 1].
    std::vector<std::size_t> idx(rule.nodes.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return rule.nodes[a] < rule.nodes[b]; });
    GaussRule sorted;
    for (auto i : idx) {
        sorted.nodes.push_back(rule.nodes[i]);
        sorted.weights.push_back(rule.weights[i]);
    }
    return sorted;
}

void merge_weight(std::vector<NodeWeight>& ws, std::size_t node, double w) {
    for (auto& nw : ws) {
        if (nw.node == node) {
            nw.weight += w;
            return;
        }
    }
    ws.push_back({node, w});
}

}  // namespace

const GaussRule& gauss_rule(int n) {
    static const std::array<GaussRule, 8> rules = [] {
        std::array<GaussRule, 8> r;
        for (int i = 0; i < 8; ++i) r[static_cast<std::size_t>(i)] = make_gauss(i + 1);
        return r;
    }();
    if (n < 1 || n > 8) throw std::invalid_argument("gauss rule order must be in 1..8");
    return rules[static_cast<std::size_t>(n - 1)];
}

// ---------------------------------------------------------------------------

SpaceMesh SpaceMesh::uniform(double lo, double hi, std::size_t n_elements) {
    if (n_elements < 1) throw std::invalid_argument("mesh needs at least one element");
    SpaceMesh m;
    m.nodes.resize(n_elements + 1);
    const double h = (hi - lo) / static_cast<double>(n_elements);
    for (std::size_t i = 0; i <= n_elements; ++i) m.nodes[i] = lo + h * static_cast<double>(i);
    m.nodes.back() = hi;
    return m;
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t n_slabs) {
    if (n_slabs < 1 || !(horizon > 0)) throw std::invalid_argument("time grid needs a positive horizon and slabs");
    std::vector<double> nodes(n_slabs + 1);
    const double tau = horizon / static_cast<double>(n_slabs);
    for (std::size_t i = 0; i <= n_slabs; ++i) nodes[i] = tau * static_cast<double>(i);
    nodes.back() = horizon;
    return TimeGrid(std::move(nodes));
}

TimeGrid::TimeGrid(std::vector<double> n) : nodes(std::move(n)) {
    if (nodes.size() < 2 || nodes.front() != 0.0)
        throw std::invalid_argument("time grid must start at 0 and have at least one slab");
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i] > nodes[i - 1])) throw std::invalid_argument("time grid must be strictly increasing");
}

double TimeGrid::max_width() const {
    double w = 0.0;
    for (std::size_t k = 1; k < nodes.size(); ++k) w = std::max(w, width(k));
    return w;
}

std::size_t TimeGrid::slab_of(double t) const {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), t);
    const auto k = static_cast<std::size_t>(it - nodes.begin());
    return std::clamp<std::size_t>(k, 1, n_slabs());
}

std::size_t TimeGrid::node_index(double t, double tol) const {
    const std::size_t k = slab_of(t);
    if (std::abs(nodes[k] - t) <= tol) return k;
    if (std::abs(nodes[k - 1] - t) <= tol) return k - 1;
    return npos;
}

// ---------------------------------------------------------------------------

void Tridiagonal::add(std::size_t i, std::size_t j, double v) {
    if (i == j) diag[i] += v;
    else if (j == i + 1) upper[i] += v;
    else if (i == j + 1) lower[j] += v;
    else throw std::out_of_range("entry outside the tridiagonal band");
}

void Tridiagonal::axpy(double alpha, const Tridiagonal& o) {
    for (std::size_t i = 0; i < diag.size(); ++i) diag[i] += alpha * o.diag[i];
    for (std::size_t i = 0; i < lower.size(); ++i) {
        lower[i] += alpha * o.lower[i];
        upper[i] += alpha * o.upper[i];
    }
}

Tridiagonal Tridiagonal::transposed() const {
    Tridiagonal t = *this;
    std::swap(t.lower, t.upper);
    return t;
}

void Tridiagonal::apply(std::span<const double> x, std::span<double> y, double alpha, bool accumulate) const {
    const std::size_t n = diag.size();
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * x[i];
        if (i > 0) s += lower[i - 1] * x[i - 1];
        if (i + 1 < n) s += upper[i] * x[i + 1];
        y[i] = accumulate ? y[i] + alpha * s : alpha * s;
    }
}

std::vector<double> Tridiagonal::operator*(std::span<const double> x) const {
    std::vector<double> y(diag.size());
    apply(x, y);
    return y;
}

std::vector<double> Tridiagonal::solve(std::span<const double> rhs) const {
    const std::size_t n = diag.size();
    std::vector<double> c(n, 0.0), d(n, 0.0);
    double scale = 0.0;
    for (double v : diag) scale = std::max(scale, std::abs(v));
    for (double v : lower) scale = std::max(scale, std::abs(v));
    for (double v : upper) scale = std::max(scale, std::abs(v));
    const double tiny = 1e-300 + scale * 1e-14;
    double piv = diag[0];
    if (std::abs(piv) <= tiny || !std::isfinite(piv)) throw SingularSystem("zero pivot in tridiagonal solve");
    if (n > 1) c[0] = upper[0] / piv;
    d[0] = rhs[0] / piv;
    for (std::size_t i = 1; i < n; ++i) {
        piv = diag[i] - lower[i - 1] * c[i - 1];
        if (std::abs(piv) <= tiny || !std::isfinite(piv)) throw SingularSystem("zero pivot in tridiagonal solve");
        if (i + 1 < n) c[i] = upper[i] / piv;
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / piv;
    }
    for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
    return d;
}

FemMatrices assemble(const SpaceMesh& mesh) {
    const std::size_t n = mesh.nodes.size();
    if (n < 2) throw std::invalid_argument("mesh needs at least one element");
    FemMatrices m{Tridiagonal(n), Tridiagonal(n)};
    for (std::size_t e = 0; e + 1 < n; ++e) {
        const double h = mesh.width(e);
        if (!(h > 0)) throw std::invalid_argument(fmt::format("degenerate element {} (h = {})", e, h));
        m.mass.add(e, e, h / 3.0);
        m.mass.add(e + 1, e + 1, h / 3.0);
        m.mass.add(e, e + 1, h / 6.0);
        m.mass.add(e + 1, e, h / 6.0);
        m.stiffness.add(e, e, 1.0 / h);
        m.stiffness.add(e + 1, e + 1, 1.0 / h);
        m.stiffness.add(e, e + 1, -1.0 / h);
        m.stiffness.add(e + 1, e, -1.0 / h);
    }
    return m;
}

// ---------------------------------------------------------------------------

FemSpace FemSpace::interval(const SpaceMesh& mesh) {
    FemSpace s;
    s.mesh_ = mesh;
    s.coords_ = mesh.nodes;
    s.matrices_ = assemble(mesh);
    s.lumped_.assign(s.coords_.size(), 0.0);
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        s.lumped_[e] += 0.5 * mesh.width(e);
        s.lumped_[e + 1] += 0.5 * mesh.width(e);
    }
    return s;
}

FemSpace FemSpace::point(double x) {
    FemSpace s;
    s.point_ = true;
    s.coords_ = {x};
    s.matrices_.mass = Tridiagonal(1);
    s.matrices_.mass.diag[0] = 1.0;
    s.matrices_.stiffness = Tridiagonal(1);
    s.lumped_ = {1.0};
    return s;
}

std::vector<QuadPoint> FemSpace::quadrature(int points_per_element) const {
    if (point_) return {QuadPoint{coords_[0], 1.0, 0, 0, 1.0, 0.0}};
    const auto& rule = gauss_rule(points_per_element);
    std::vector<QuadPoint> pts;
    pts.reserve(mesh_.n_elements() * rule.nodes.size());
    for (std::size_t e = 0; e < mesh_.n_elements(); ++e) {
        const double h = mesh_.width(e);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double xi = rule.nodes[q];
            pts.push_back({mesh_.nodes[e] + xi * h, rule.weights[q] * h, e, e + 1, 1.0 - xi, xi});
        }
    }
    return pts;
}

double FemSpace::dual_norm(std::span<const double> r) const {
    double s = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * r[j] / lumped_[j];
    return std::sqrt(s);
}

double FemSpace::inner(std::span<const double> u, std::span<const double> v) const {
    const auto mv = mass() * v;
    double s = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) s += u[j] * mv[j];
    return s;
}

double FemSpace::l2_norm(std::span<const double> v) const { return std::sqrt(std::max(0.0, inner(v, v))); }

// ---------------------------------------------------------------------------

StateTrajectory::StateTrajectory(TimeGrid grid, std::vector<double> coordinates, HistorySpec history)
    : grid_(std::move(grid)), coords_(std::move(coordinates)), history_(std::move(history)) {
    values_.assign(grid_.nodes.size() * coords_.size(), 0.0);
}

std::vector<double> StateTrajectory::value(double t) const {
    std::vector<double> v(dofs());
    if (t <= 0.0) {
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = history_.value(coords_[j], t);
        return v;
    }
    const double T = grid_.horizon();
    if (t > T * (1.0 + 1e-14)) throw std::out_of_range(fmt::format("t = {} beyond the horizon {}", t, T));
    const std::size_t k = grid_.slab_of(t);
    const double theta = (t - grid_.nodes[k - 1]) / grid_.width(k);
    const auto a = node(k - 1);
    const auto b = node(k);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = (1.0 - theta) * a[j] + theta * b[j];
    return v;
}

AdjointTrajectory::AdjointTrajectory(TimeGrid grid, std::size_t dofs)
    : grid_(std::move(grid)), dofs_(dofs), values_(grid_.n_slabs() * dofs, 0.0) {}

std::vector<double> AdjointTrajectory::value(double t) const {
    if (t >= grid_.horizon()) return std::vector<double>(dofs_, 0.0);
    const auto s = slab(grid_.slab_of(t));
    return {s.begin(), s.end()};
}

std::vector<double> delayed_field(const StateTrajectory& traj, double t, double s) {
    if (t - s > traj.grid().horizon() * (1.0 + 1e-14))
        throw std::out_of_range("delayed argument beyond the horizon");
    return traj.value(t - s);
}

std::vector<double> breakpoints(const TimeGrid& grid, std::size_t k, std::span<const double> delays) {
    const double t0 = grid.nodes[k - 1];
    const double t1 = grid.nodes[k];
    std::vector<double> pts{t0, t1};
    for (double s : delays) {
        const double ra = t0 - s;
        const double rb = t1 - s;
        if (ra < 0.0 && 0.0 < rb) pts.push_back(s);
        auto it = std::upper_bound(grid.nodes.begin(), grid.nodes.end(), ra);
        for (; it != grid.nodes.end() && *it < rb; ++it) {
            const double t = *it + s;
            if (t > t0 && t < t1) pts.push_back(t);
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

DelayWindow delay_window(const TimeGrid& grid, std::size_t k, double s) {
    if (!(s >= 0.0)) throw std::invalid_argument("delays must be non-negative");
    DelayWindow w;
    const double ra = grid.nodes[k - 1] - s;
    const double rb = grid.nodes[k] - s;
    if (ra < 0.0) {
        w.has_history = true;
        w.history_lo = ra;
        w.history_hi = std::min(rb, 0.0);
        w.crosses_origin = rb >= 0.0;
    }
    const double lo = std::max(ra, 0.0);
    const double hi = rb;
    if (hi <= lo) return w;
    auto j = static_cast<std::size_t>(std::upper_bound(grid.nodes.begin(), grid.nodes.end(), lo) - grid.nodes.begin());
    for (; j <= grid.n_slabs() && grid.nodes[j - 1] < hi; ++j) {
        const double a = std::max(lo, grid.nodes[j - 1]);
        const double b = std::min(hi, grid.nodes[j]);
        if (!(b > a)) continue;
        const double len = b - a;
        const double mid = 0.5 * (a + b);
        const double tau = grid.width(j);
        merge_weight(w.value, j - 1, len * (grid.nodes[j] - mid) / tau);
        merge_weight(w.value, j, len * (mid - grid.nodes[j - 1]) / tau);
        merge_weight(w.rate, j - 1, -len / tau);
        merge_weight(w.rate, j, len / tau);
    }
    return w;
}

// ---------------------------------------------------------------------------

std::string csv_header(std::size_t dofs) {
    std::string h = "t";
    for (std::size_t j = 0; j < dofs; ++j) h += fmt::format(",x_{}", j);
    return h;
}

void write_csv(std::ostream& os, const StateTrajectory& traj) {
    os << csv_header(traj.dofs()) << '\n';
    for (std::size_t k = 0; k < traj.grid().nodes.size(); ++k) {
        std::string line = fmt::format("{:.17g}", traj.grid().nodes[k]);
        for (double v : traj.node(k)) line += fmt::format(",{:.17g}", v);
        os << line << '\n';
    }
}

void write_csv(std::ostream& os, const AdjointTrajectory& traj) {
    os << csv_header(traj.dofs()) << '\n';
    const auto& g = traj.grid();
    for (std::size_t k = 1; k <= g.n_slabs(); ++k) {
        std::string line = fmt::format("{:.17g}", 0.5 * (g.nodes[k - 1] + g.nodes[k]));
        for (double v : traj.slab(k)) line += fmt::format(",{:.17g}", v);
        os << line << '\n';
    }
}

}  // namespace delayopt
