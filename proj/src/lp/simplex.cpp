// SPDX-License-Identifier: Apache-2.0
//
// Two-phase primal simplex with bounded variables on a dense tableau.
//
// Structural variables are shifted to x' = x - lower, so every tableau column
// lives in [0, upper']. Fixed variables (lower == upper) are substituted into
// the right-hand side and never get a column. Each row receives exactly one
// initially basic column with coefficient +1 (a slack, or an artificial for
// rows that cannot start from a slack), so B^-1 can be read off those columns
// whenever the basic values need to be recomputed from scratch.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "evsched/lp.hpp"

namespace evsched::lp {
namespace {

enum class ColStatus : unsigned char { kBasic, kAtLower, kAtUpper };

constexpr double kDropTol = 1e-13;

class Tableau {
public:
    explicit Tableau(const LinearProgram& lp) : lp_(lp) { build(); }

    LpSolution solve();

private:
    void build();
    void compute_reduced_costs(const std::vector<double>& cost);
    // Returns false if the phase stopped on an unbounded ray.
    bool run_phase(const std::vector<double>& cost);
    void pivot(std::size_t row, std::size_t col);
    void drive_out_artificials();
    void recompute_basic_values();
    double column_value(std::size_t col) const;

    double& at(std::size_t r, std::size_t c) { return tab_[r * ncols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return tab_[r * ncols_ + c]; }

    const LinearProgram& lp_;

    std::size_t m_{0};
    std::size_t ncols_{0};
    std::size_t first_artificial_{0};

    std::vector<long> col_of_var_;      // -1 for substituted fixed variables
    std::vector<double> tab_;           // m x ncols, row-major, holds B^-1 A
    std::vector<double> original_;      // same shape, A before any pivot
    std::vector<double> rhs_;           // shifted, sign-normalised right-hand side
    std::vector<double> upper_;         // per-column upper bound (lower is 0)
    std::vector<ColStatus> status_;
    std::vector<std::size_t> basis_;    // basic column per row
    std::vector<std::size_t> initial_;  // initially basic (+1) column per row
    std::vector<double> beta_;          // values of basic columns
    std::vector<double> reduced_;
    std::vector<double> phase2_cost_;

    std::size_t iterations_{0};
    std::size_t bland_threshold_{0};
    std::size_t iteration_cap_{0};
};

void Tableau::build() {
    const std::size_t n = lp_.num_vars();
    const auto& bounds = lp_.bounds();
    const auto& cons = lp_.constraints();
    m_ = cons.size();

    col_of_var_.assign(n, -1);
    std::size_t nstruct = 0;
    for (std::size_t j = 0; j < n; ++j)
        if (bounds[j].upper > bounds[j].lower) col_of_var_[j] = static_cast<long>(nstruct++);

    // Shifted right-hand sides and the slack/artificial layout per row.
    struct RowPlan {
        double sign;
        double rhs;
        double slack_coef;  // 0 for equality rows
        bool artificial;
    };
    std::vector<RowPlan> plan(m_);
    std::size_t nslack = 0;
    std::size_t nart = 0;
    for (std::size_t k = 0; k < m_; ++k) {
        double b = cons[k].rhs;
        for (const auto& t : cons[k].terms) b -= t.coef * bounds[t.index].lower;
        RowPlan p{1.0, b, 0.0, false};
        switch (cons[k].relation) {
            case Relation::kLessEqual:
                if (b >= 0.0) {
                    p.slack_coef = 1.0;
                } else {
                    p = {-1.0, -b, -1.0, true};
                }
                break;
            case Relation::kGreaterEqual:
                if (b <= 0.0) {
                    p = {-1.0, -b, 1.0, false};
                } else {
                    p = {1.0, b, -1.0, true};
                }
                break;
            case Relation::kEqual:
                p = {b < 0.0 ? -1.0 : 1.0, std::abs(b), 0.0, true};
                break;
        }
        if (p.slack_coef != 0.0) ++nslack;
        if (p.artificial) ++nart;
        plan[k] = p;
    }

    first_artificial_ = nstruct + nslack;
    ncols_ = first_artificial_ + nart;
    tab_.assign(m_ * ncols_, 0.0);
    rhs_.resize(m_);
    upper_.assign(ncols_, kInfinity);
    status_.assign(ncols_, ColStatus::kAtLower);
    basis_.resize(m_);
    initial_.resize(m_);
    phase2_cost_.assign(ncols_, 0.0);

    for (std::size_t j = 0; j < n; ++j) {
        if (col_of_var_[j] < 0) continue;
        const auto c = static_cast<std::size_t>(col_of_var_[j]);
        upper_[c] = bounds[j].upper - bounds[j].lower;
        phase2_cost_[c] = lp_.objective()[j];
    }

    std::size_t next_slack = nstruct;
    std::size_t next_art = first_artificial_;
    for (std::size_t k = 0; k < m_; ++k) {
        const auto& p = plan[k];
        for (const auto& t : cons[k].terms) {
            const long c = col_of_var_[t.index];
            if (c >= 0) at(k, static_cast<std::size_t>(c)) += p.sign * t.coef;
        }
        rhs_[k] = p.rhs;
        if (p.slack_coef != 0.0) {
            at(k, next_slack) = p.slack_coef;
            if (!p.artificial) initial_[k] = next_slack;
            ++next_slack;
        }
        if (p.artificial) {
            at(k, next_art) = 1.0;
            initial_[k] = next_art;
            ++next_art;
        }
        basis_[k] = initial_[k];
        status_[initial_[k]] = ColStatus::kBasic;
    }
    original_ = tab_;
    beta_ = rhs_;

    bland_threshold_ = 10 * (m_ + ncols_);
    iteration_cap_ = 50 * (m_ + ncols_) + 1000;
}

double Tableau::column_value(std::size_t col) const {
    switch (status_[col]) {
        case ColStatus::kAtLower: return 0.0;
        case ColStatus::kAtUpper: return upper_[col];
        case ColStatus::kBasic: break;
    }
    for (std::size_t r = 0; r < m_; ++r)
        if (basis_[r] == col) return beta_[r];
    return 0.0;
}

void Tableau::compute_reduced_costs(const std::vector<double>& cost) {
    reduced_ = cost;
    for (std::size_t r = 0; r < m_; ++r) {
        const double cb = cost[basis_[r]];
        if (cb == 0.0) continue;
        const double* row = &tab_[r * ncols_];
        for (std::size_t c = 0; c < ncols_; ++c) reduced_[c] -= cb * row[c];
    }
    for (std::size_t r = 0; r < m_; ++r) reduced_[basis_[r]] = 0.0;
}

void Tableau::pivot(std::size_t row, std::size_t col) {
    double* prow = &tab_[row * ncols_];
    const double inv = 1.0 / prow[col];
    std::vector<std::size_t> nz;
    nz.reserve(ncols_);
    for (std::size_t c = 0; c < ncols_; ++c) {
        if (prow[c] == 0.0) continue;
        prow[c] *= inv;
        if (std::abs(prow[c]) < kDropTol) {
            prow[c] = 0.0;
            continue;
        }
        nz.push_back(c);
    }
    prow[col] = 1.0;

    for (std::size_t r = 0; r < m_; ++r) {
        if (r == row) continue;
        double* trow = &tab_[r * ncols_];
        const double f = trow[col];
        if (f == 0.0) continue;
        for (const std::size_t c : nz) {
            double v = trow[c] - f * prow[c];
            trow[c] = std::abs(v) < kDropTol ? 0.0 : v;
        }
        trow[col] = 0.0;
    }
    const double f = reduced_[col];
    if (f != 0.0) {
        for (const std::size_t c : nz) reduced_[c] -= f * prow[c];
        reduced_[col] = 0.0;
    }
}

bool Tableau::run_phase(const std::vector<double>& cost) {
    compute_reduced_costs(cost);
    while (true) {
        if (iterations_ >= iteration_cap_) throw std::runtime_error("simplex iteration limit reached");
        const bool bland = iterations_ >= bland_threshold_;

        std::size_t enter = ncols_;
        double best_score = 0.0;
        for (std::size_t c = 0; c < ncols_; ++c) {
            if (status_[c] == ColStatus::kBasic || !(upper_[c] > 0.0)) continue;
            double score = 0.0;
            if (status_[c] == ColStatus::kAtLower && reduced_[c] < -kOptimalityTol) score = -reduced_[c];
            if (status_[c] == ColStatus::kAtUpper && reduced_[c] > kOptimalityTol) score = reduced_[c];
            if (score == 0.0) continue;
            if (bland) {
                enter = c;
                break;
            }
            if (score > best_score) {
                best_score = score;
                enter = c;
            }
        }
        if (enter == ncols_) return true;

        const double dir = status_[enter] == ColStatus::kAtLower ? 1.0 : -1.0;
        double theta = upper_[enter];
        std::size_t leave = m_;
        bool leave_to_upper = false;
        double leave_alpha = 0.0;
        for (std::size_t r = 0; r < m_; ++r) {
            const double alpha = at(r, enter);
            const double delta = dir * alpha;
            double limit;
            bool to_upper;
            if (delta > kPivotTol) {
                limit = beta_[r] / delta;
                to_upper = false;
            } else if (delta < -kPivotTol && upper_[basis_[r]] < kInfinity) {
                limit = (upper_[basis_[r]] - beta_[r]) / -delta;
                to_upper = true;
            } else {
                continue;
            }
            limit = std::max(limit, 0.0);
            bool take = false;
            if (leave == m_) {
                take = limit < theta;
            } else if (limit < theta - 1e-12) {
                take = true;
            } else if (limit <= theta + 1e-12) {
                take = bland ? basis_[r] < basis_[leave] : std::abs(alpha) > std::abs(leave_alpha);
            }
            if (take) {
                theta = limit;
                leave = r;
                leave_to_upper = to_upper;
                leave_alpha = alpha;
            }
        }
        if (theta == kInfinity) return false;

        ++iterations_;
        const double start = status_[enter] == ColStatus::kAtLower ? 0.0 : upper_[enter];
        if (theta != 0.0)
            for (std::size_t r = 0; r < m_; ++r) beta_[r] -= dir * theta * at(r, enter);

        if (leave == m_) {
            status_[enter] = dir > 0 ? ColStatus::kAtUpper : ColStatus::kAtLower;
            continue;
        }
        const std::size_t leaving = basis_[leave];
        status_[leaving] = leave_to_upper ? ColStatus::kAtUpper : ColStatus::kAtLower;
        pivot(leave, enter);
        basis_[leave] = enter;
        status_[enter] = ColStatus::kBasic;
        beta_[leave] = start + dir * theta;
    }
}

void Tableau::drive_out_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
        if (basis_[r] < first_artificial_) continue;
        std::size_t best = first_artificial_;
        double best_abs = kPivotTol;
        for (std::size_t c = 0; c < first_artificial_; ++c) {
            if (status_[c] == ColStatus::kBasic) continue;
            const double a = std::abs(at(r, c));
            if (a > best_abs) {
                best_abs = a;
                best = c;
            }
        }
        if (best == first_artificial_) continue;  // redundant row; artificial stays basic at zero
        const std::size_t leaving = basis_[r];
        const double value = column_value(best);
        pivot(r, best);
        basis_[r] = best;
        status_[best] = ColStatus::kBasic;
        status_[leaving] = ColStatus::kAtLower;
        beta_[r] = value;
    }
}

void Tableau::recompute_basic_values() {
    std::vector<double> b = rhs_;
    for (std::size_t c = 0; c < ncols_; ++c) {
        if (status_[c] != ColStatus::kAtUpper) continue;
        for (std::size_t k = 0; k < m_; ++k) b[k] -= original_[k * ncols_ + c] * upper_[c];
    }
    for (std::size_t r = 0; r < m_; ++r) {
        double v = 0.0;
        for (std::size_t k = 0; k < m_; ++k) v += at(r, initial_[k]) * b[k];
        beta_[r] = v;
    }
}

LpSolution Tableau::solve() {
    LpSolution out;
    if (first_artificial_ < ncols_) {
        std::vector<double> phase1_cost(ncols_, 0.0);
        for (std::size_t c = first_artificial_; c < ncols_; ++c) phase1_cost[c] = 1.0;
        run_phase(phase1_cost);
        recompute_basic_values();
        double infeasibility = 0.0;
        for (std::size_t r = 0; r < m_; ++r)
            if (basis_[r] >= first_artificial_) infeasibility += std::max(beta_[r], 0.0);
        if (infeasibility > kFeasibilityTol) {
            out.status = Status::kInfeasible;
            out.iterations = iterations_;
            return out;
        }
        for (std::size_t c = first_artificial_; c < ncols_; ++c) upper_[c] = 0.0;
        drive_out_artificials();
    }

    const bool bounded = run_phase(phase2_cost_);
    out.iterations = iterations_;
    if (!bounded) {
        out.status = Status::kUnbounded;
        return out;
    }
    recompute_basic_values();

    std::vector<double> col_value(ncols_, 0.0);
    for (std::size_t c = 0; c < ncols_; ++c)
        if (status_[c] == ColStatus::kAtUpper) col_value[c] = upper_[c];
    for (std::size_t r = 0; r < m_; ++r) col_value[basis_[r]] = beta_[r];

    const auto& bounds = lp_.bounds();
    out.x.resize(lp_.num_vars());
    for (std::size_t j = 0; j < lp_.num_vars(); ++j) {
        const long c = col_of_var_[j];
        const double v = c < 0 ? bounds[j].lower : bounds[j].lower + col_value[static_cast<std::size_t>(c)];
        out.x[j] = std::clamp(v, bounds[j].lower, bounds[j].upper);
    }
    out.status = Status::kOptimal;
    out.objective_value = evaluate_objective(lp_, out.x);
    return out;
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
    lp.validate();
    Tableau tableau(lp);
    return tableau.solve();
}

}  // namespace evsched::lp
