// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace evsched::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Solver tolerances. Every downstream feasibility check refers to these.
inline constexpr double kFeasibilityTol = 1e-6;
inline constexpr double kPivotTol = 1e-7;
inline constexpr double kOptimalityTol = 1e-7;

enum class Relation { kLessEqual, kGreaterEqual, kEqual };

struct Term {
    std::size_t index{};
    double coef{};
};

struct Constraint {
    std::vector<Term> terms;
    Relation relation{Relation::kLessEqual};
    double rhs{};
};

// Variable bounds; `upper` may be kInfinity, `lower` must be finite.
struct Bounds {
    double lower{0.0};
    double upper{kInfinity};
};

// Minimize objective . x subject to constraints and per-variable bounds.
class LinearProgram {
public:
    LinearProgram() = default;
    explicit LinearProgram(std::size_t num_vars);

    std::size_t num_vars() const noexcept { return objective_.size(); }
    std::size_t num_constraints() const noexcept { return constraints_.size(); }

    void set_objective(std::size_t index, double coef);
    void set_bounds(std::size_t index, double lower, double upper);
    std::size_t add_constraint(std::vector<Term> terms, Relation relation, double rhs);

    const std::vector<double>& objective() const noexcept { return objective_; }
    const std::vector<Bounds>& bounds() const noexcept { return bounds_; }
    const std::vector<Constraint>& constraints() const noexcept { return constraints_; }

    // Throws InputError naming the first violated structural invariant.
    void validate() const;

private:
    std::vector<double> objective_;
    std::vector<Bounds> bounds_;
    std::vector<Constraint> constraints_;
};

enum class Status { kOptimal, kInfeasible, kUnbounded };

const char* to_string(Status status);

struct LpSolution {
    Status status{Status::kInfeasible};
    std::vector<double> x;                  // empty unless optimal
    std::optional<double> objective_value;  // set iff optimal
    std::size_t iterations{0};

    bool optimal() const noexcept { return status == Status::kOptimal; }
};

// Two-phase bounded-variable primal simplex on a dense tableau.
// Dantzig pricing, switching to Bland's rule after 10*(m+n) iterations.
LpSolution solve_lp(const LinearProgram& lp);

struct Violation {
    enum class Kind { kLowerBound, kUpperBound, kConstraint };
    Kind kind{};
    std::size_t index{};  // variable index for bounds, row index for constraints
    double magnitude{};
};

// Empty iff x satisfies every bound and constraint within tol.
std::vector<Violation> check_point(const LinearProgram& lp, std::span<const double> x, double tol);

double evaluate_objective(const LinearProgram& lp, std::span<const double> x);

// Plain-text dump: one `c<k>: idx:coef ... <rel> <rhs>` line per constraint,
// preceded by the objective and any non-default bounds.
void write_text(std::ostream& out, const LinearProgram& lp);

}  // namespace evsched::lp
