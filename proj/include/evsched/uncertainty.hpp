// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "evsched/model.hpp"
#include "evsched/scenario.hpp"

namespace evsched::uncertainty {

struct UncertaintyBudget {
    double gamma{0.0};
    std::vector<double> deviation_bound;  // EUR/kWh per slot

    void validate() const;
};

// Largest extra cost an adversary can add to a fixed purchase profile:
// max sum_t z_t a_t over 0 <= z <= 1, sum z <= gamma, a_t = dev_t * S_t * dt.
// Evaluated as a continuous knapsack, with no LP involved.
double worst_case_extra_cost(std::span<const double> net_purchase, double dt, const UncertaintyBudget& budget);

// Nominal cost of the schedule plus the worst-case extra cost.
double worst_case_total_cost(const model::Schedule& sched, const PriceSeries& prices, double dt, const UncertaintyBudget& budget);

struct DualCheck {
    double dual_optimum{};
    double oracle{};
    double residual{};
};

// Solves min gamma*lambda + sum mu s.t. mu_t + lambda >= a_t with the simplex
// and compares against the knapsack value. Throws ConsistencyError if the
// residual exceeds 1e-6 * (1 + oracle).
DualCheck verify_dual_equivalence(std::span<const double> net_purchase, double dt, const UncertaintyBudget& budget);

}  // namespace evsched::uncertainty
