#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "delayopt/dde.hpp"
#include "delayopt/expr.hpp"

namespace delayopt {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool operator==(const Interval&) const = default;
};

enum class VariantKind { direct_delay, pyragas };
enum class ObjectiveKind { plain, shifted };
/// How the tracking integral treats y_Q: `nodal` replaces it by its space-time
/// nodal interpolant and integrates exactly, `gauss` samples y_Q at 4x4 Gauss points.
enum class TargetQuadrature { nodal, gauss };

const char* to_string(VariantKind v);
const char* to_string(ObjectiveKind o);
const char* to_string(TargetQuadrature q);

/// Reaction term R(x, t, y). Expressions that are polynomials of degree <= 3
/// in y alone are recognised as the cubic kind, which the solvers integrate
/// exactly.
class ReactionSpec {
public:
    ReactionSpec();
    static ReactionSpec from_expression(const std::string& source);

    const std::string& source() const noexcept { return source_; }
    bool is_polynomial() const noexcept { return coefficients_.has_value(); }
    /// c_0..c_3, present for the cubic kind.
    const std::optional<std::vector<double>>& coefficients() const noexcept { return coefficients_; }
    const expr::Ast& ast() const noexcept { return ast_; }
    const expr::Ast& derivative_ast() const noexcept { return dy_ast_; }

    double value(double x, double t, double y) const;
    double derivative(double x, double t, double y) const;

private:
    explicit ReactionSpec(const std::string& source);

    std::string source_;
    expr::Ast ast_;
    expr::Ast dy_ast_;
    expr::Compiled value_;
    expr::Compiled dy_;
    std::optional<std::vector<double>> coefficients_;
};

/// A scalar function of (x, t) together with its exact time derivative.
class SpaceTimeFunction {
public:
    SpaceTimeFunction();
    static SpaceTimeFunction from_expression(const std::string& source);

    const std::string& source() const noexcept { return source_; }
    const expr::Ast& ast() const noexcept { return ast_; }
    bool depends_on_x() const;

    double value(double x, double t) const { return value_(x, t); }
    double time_derivative(double x, double t) const { return dt_(x, t); }

private:
    explicit SpaceTimeFunction(const std::string& source);

    std::string source_;
    expr::Ast ast_;
    expr::Ast dt_ast_;
    expr::Compiled value_;
    expr::Compiled dt_;
};

using HistorySpec = SpaceTimeFunction;

struct DdeReference {
    double coefficient = 0.0;  // a in y' = -a*y(t-d)
    double delay = 1.0;        // d
    double history = 1.0;      // constant history on [-d, 0)

    bool operator==(const DdeReference&) const = default;
};

/// Desired state y_Q, either a formula or the dense solution of a linear DDE.
class TargetSpec {
public:
    TargetSpec();
    static TargetSpec from_expression(const std::string& source);
    /// Integrates the reference DDE up to `horizon` with the largest step not
    /// exceeding `max_step` that divides the delay.
    static TargetSpec dde_reference(const DdeReference& ref, double horizon, double max_step);

    bool is_expression() const noexcept { return !dde_; }
    const SpaceTimeFunction& expression() const { return expr_; }
    const std::optional<DdeReference>& dde() const noexcept { return ref_; }
    const oracle::LinearDde* dense() const noexcept { return dde_.get(); }
    bool depends_on_x() const;

    double value(double x, double t) const;
    double time_derivative(double x, double t) const;

private:
    SpaceTimeFunction expr_;
    std::optional<DdeReference> ref_;
    std::shared_ptr<const oracle::LinearDde> dde_;
};

/// The continuous optimization problem.
struct ProblemSpec {
    Interval space_interval{0.0, 1.0};
    /// Spatially constant reduction; history, reaction and target must not depend on x.
    bool ode_mode = false;
    double horizon = 1.0;
    int num_delays = 1;
    std::vector<Interval> delay_bounds;
    std::vector<Interval> weight_bounds;
    double tikhonov = 0.0;
    ReactionSpec reaction;
    HistorySpec history;
    TargetSpec target;
    VariantKind variant = VariantKind::direct_delay;
    ObjectiveKind objective = ObjectiveKind::plain;
    TargetQuadrature target_quadrature = TargetQuadrature::nodal;
    std::optional<Interval> window;

    Interval objective_window() const { return window.value_or(Interval{0.0, horizon}); }
    bool shifted() const noexcept { return objective == ObjectiveKind::shifted; }
    double max_delay_bound() const;
};

struct ControlVector {
    std::vector<double> delays;
    std::vector<double> weights;
    std::optional<double> shift;

    std::size_t size() const { return delays.size() + weights.size() + (shift ? 1 : 0); }
    /// Packs as (s_1..s_m, kappa_1..kappa_m, shift?).
    std::vector<double> pack() const;
    static ControlVector unpack(const std::vector<double>& x, std::size_t m, bool with_shift);

    bool operator==(const ControlVector&) const = default;
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const noexcept { return violations.empty(); }
};

ValidationReport validate(const ProblemSpec& spec);

/// Componentwise clamp onto the admissible box. The shift is left alone.
ControlVector project_to_admissible(const ControlVector& u, const ProblemSpec& spec);

/// Lower/upper bounds of the packed control (shift is unbounded).
std::pair<std::vector<double>, std::vector<double>> packed_bounds(const ProblemSpec& spec);

}  // namespace delayopt
