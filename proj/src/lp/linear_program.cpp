// SPDX-License-Identifier: Apache-2.0
#include "evsched/lp.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "evsched/errors.hpp"

namespace evsched::lp {

LinearProgram::LinearProgram(std::size_t num_vars) : objective_(num_vars, 0.0), bounds_(num_vars) {}

void LinearProgram::set_objective(std::size_t index, double coef) {
    if (index >= num_vars()) throw InputError("objective index " + std::to_string(index) + " out of range");
    objective_[index] = coef;
}

void LinearProgram::set_bounds(std::size_t index, double lower, double upper) {
    if (index >= num_vars()) throw InputError("bound index " + std::to_string(index) + " out of range");
    bounds_[index] = Bounds{lower, upper};
}

std::size_t LinearProgram::add_constraint(std::vector<Term> terms, Relation relation, double rhs) {
    constraints_.push_back(Constraint{std::move(terms), relation, rhs});
    return constraints_.size() - 1;
}

void LinearProgram::validate() const {
    if (bounds_.size() != objective_.size()) throw InputError("objective length differs from number of variables");
    for (std::size_t j = 0; j < num_vars(); ++j) {
        const auto& b = bounds_[j];
        if (!std::isfinite(objective_[j])) throw InputError("non-finite objective coefficient for variable " + std::to_string(j));
        if (!std::isfinite(b.lower)) throw InputError("variable " + std::to_string(j) + " has a non-finite lower bound");
        if (std::isnan(b.upper) || b.upper == -kInfinity) throw InputError("variable " + std::to_string(j) + " has an invalid upper bound");
        if (b.lower > b.upper) throw InputError("variable " + std::to_string(j) + " has lower > upper");
    }
    for (std::size_t k = 0; k < constraints_.size(); ++k) {
        const auto& c = constraints_[k];
        if (!std::isfinite(c.rhs)) throw InputError("constraint " + std::to_string(k) + " has a non-finite right-hand side");
        for (const auto& t : c.terms) {
            if (t.index >= num_vars())
                throw InputError("constraint " + std::to_string(k) + " references variable " + std::to_string(t.index) +
                                 " but only " + std::to_string(num_vars()) + " exist");
            if (!std::isfinite(t.coef)) throw InputError("constraint " + std::to_string(k) + " has a non-finite coefficient");
        }
    }
}

const char* to_string(Status status) {
    switch (status) {
        case Status::kOptimal: return "optimal";
        case Status::kInfeasible: return "infeasible";
        case Status::kUnbounded: return "unbounded";
    }
    return "unknown";
}

double evaluate_objective(const LinearProgram& lp, std::span<const double> x) {
    if (x.size() != lp.num_vars()) throw InputError("point length differs from number of variables");
    double value = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) value += lp.objective()[j] * x[j];
    return value;
}

std::vector<Violation> check_point(const LinearProgram& lp, std::span<const double> x, double tol) {
    if (x.size() != lp.num_vars())
        throw InputError("point has " + std::to_string(x.size()) + " entries, LP has " + std::to_string(lp.num_vars()) +
                         " variables");
    std::vector<Violation> out;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const auto& b = lp.bounds()[j];
        if (x[j] < b.lower - tol) out.push_back({Violation::Kind::kLowerBound, j, b.lower - x[j]});
        if (x[j] > b.upper + tol) out.push_back({Violation::Kind::kUpperBound, j, x[j] - b.upper});
    }
    for (std::size_t k = 0; k < lp.num_constraints(); ++k) {
        const auto& c = lp.constraints()[k];
        double lhs = 0.0;
        for (const auto& t : c.terms) lhs += t.coef * x[t.index];
        double excess = 0.0;
        switch (c.relation) {
            case Relation::kLessEqual: excess = lhs - c.rhs; break;
            case Relation::kGreaterEqual: excess = c.rhs - lhs; break;
            case Relation::kEqual: excess = std::abs(lhs - c.rhs); break;
        }
        if (excess > tol) out.push_back({Violation::Kind::kConstraint, k, excess});
    }
    return out;
}

namespace {
const char* relation_text(Relation r) {
    switch (r) {
        case Relation::kLessEqual: return "<=";
        case Relation::kGreaterEqual: return ">=";
        case Relation::kEqual: return "=";
    }
    return "?";
}
}  // namespace

void write_text(std::ostream& out, const LinearProgram& lp) {
    const auto old_precision = out.precision(17);
    out << "vars " << lp.num_vars() << "\n";
    out << "min:";
    for (std::size_t j = 0; j < lp.num_vars(); ++j)
        if (lp.objective()[j] != 0.0) out << ' ' << j << ':' << lp.objective()[j];
    out << "\n";
    for (std::size_t j = 0; j < lp.num_vars(); ++j) {
        const auto& b = lp.bounds()[j];
        if (b.lower == 0.0 && b.upper == kInfinity) continue;
        out << "b" << j << ": " << b.lower << ' ';
        if (b.upper == kInfinity)
            out << "inf";
        else
            out << b.upper;
        out << "\n";
    }
    for (std::size_t k = 0; k < lp.num_constraints(); ++k) {
        const auto& c = lp.constraints()[k];
        out << 'c' << k << ':';
        for (const auto& t : c.terms) out << ' ' << t.index << ':' << t.coef;
        out << ' ' << relation_text(c.relation) << ' ' << c.rhs << "\n";
    }
    out.precision(old_precision);
}

}  // namespace evsched::lp
