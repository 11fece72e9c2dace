// SPDX-License-Identifier: Apache-2.0
#include "evsched/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "evsched/errors.hpp"
#include "evsched/lp.hpp"

namespace evsched::uncertainty {
namespace {

std::vector<double> exposure(std::span<const double> net_purchase, double dt, const UncertaintyBudget& budget) {
    budget.validate();
    if (net_purchase.size() != budget.deviation_bound.size())
        throw InputError("purchase profile and deviation bounds differ in length");
    if (!(dt > 0.0)) throw InputError("slot length must be positive");
    std::vector<double> a(net_purchase.size());
    for (std::size_t t = 0; t < a.size(); ++t) {
        if (!(net_purchase[t] >= 0.0)) throw InputError("net purchase must be nonnegative");
        a[t] = budget.deviation_bound[t] * net_purchase[t] * dt;
    }
    return a;
}

}  // namespace

void UncertaintyBudget::validate() const {
    if (!(gamma >= 0.0) || std::isnan(gamma)) throw InputError("gamma must be nonnegative");
    for (const double d : deviation_bound)
        if (!(d >= 0.0) || !std::isfinite(d)) throw InputError("deviation bounds must be finite and nonnegative");
}

double worst_case_extra_cost(std::span<const double> net_purchase, double dt, const UncertaintyBudget& budget) {
    auto a = exposure(net_purchase, dt, budget);
    std::sort(a.begin(), a.end(), std::greater<>());
    double remaining = budget.gamma;
    double total = 0.0;
    for (const double v : a) {
        if (remaining <= 0.0) break;
        const double take = std::min(1.0, remaining);
        total += take * v;
        remaining -= take;
    }
    return total;
}

double worst_case_total_cost(const model::Schedule& sched, const PriceSeries& prices, double dt,
                             const UncertaintyBudget& budget) {
    if (prices.nominal.size() != sched.net_purchase.size()) throw InputError("price series and schedule differ in length");
    double nominal = 0.0;
    for (std::size_t t = 0; t < prices.nominal.size(); ++t) nominal += prices.nominal[t] * sched.net_purchase[t] * dt;
    return nominal + worst_case_extra_cost(sched.net_purchase, dt, budget);
}

DualCheck verify_dual_equivalence(std::span<const double> net_purchase, double dt, const UncertaintyBudget& budget) {
    const auto a = exposure(net_purchase, dt, budget);
    const std::size_t T = a.size();
    lp::LinearProgram dual(T + 1);
    dual.set_objective(0, budget.gamma);
    for (std::size_t t = 0; t < T; ++t) {
        dual.set_objective(t + 1, 1.0);
        dual.add_constraint({{t + 1, 1.0}, {0, 1.0}}, lp::Relation::kGreaterEqual, a[t]);
    }
    const auto sol = lp::solve_lp(dual);
    if (!sol.optimal()) throw ConsistencyError("dual protection program did not reach an optimum");

    DualCheck out;
    out.dual_optimum = *sol.objective_value;
    out.oracle = worst_case_extra_cost(net_purchase, dt, budget);
    out.residual = std::abs(out.dual_optimum - out.oracle);
    if (out.residual > 1e-6 * (1.0 + out.oracle)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "dual optimum " << out.dual_optimum << " differs from knapsack value " << out.oracle;
        throw ConsistencyError(msg.str());
    }
    return out;
}

}  // namespace evsched::uncertainty
