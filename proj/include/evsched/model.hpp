// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "evsched/lp.hpp"
#include "evsched/matrix.hpp"
#include "evsched/scenario.hpp"

namespace evsched::model {

// Column layout: Y (session-major), then S+, then R, then lambda and mu for
// robust programs.
class VariableMap {
public:
    VariableMap() = default;
    VariableMap(std::size_t sessions, std::size_t slots, bool robust)
        : sessions_(sessions), slots_(slots), robust_(robust) {}

    std::size_t sessions() const noexcept { return sessions_; }
    std::size_t slots() const noexcept { return slots_; }
    bool robust() const noexcept { return robust_; }

    std::size_t y(std::size_t i, std::size_t t) const { return i * slots_ + t; }
    std::size_t net_purchase(std::size_t t) const { return sessions_ * slots_ + t; }
    std::size_t solar(std::size_t t) const { return sessions_ * slots_ + slots_ + t; }
    std::size_t lambda() const { return sessions_ * slots_ + 2 * slots_; }
    std::size_t mu(std::size_t t) const { return lambda() + 1 + t; }
    std::size_t num_vars() const { return sessions_ * slots_ + (robust_ ? 3 * slots_ + 1 : 2 * slots_); }

    // name -> column index, e.g. {"Y[0,3]": 3, "S[0]": ..., "lambda": ...}
    nlohmann::json to_json() const;

private:
    std::size_t sessions_{0};
    std::size_t slots_{0};
    bool robust_{false};
};

struct BuiltLp {
    lp::LinearProgram program;
    VariableMap vars;
};

// Per-socket power limits Y <= s_i * A_{t,i} are carried as variable upper
// bounds, so the row count is N + 2T (nominal) and N + 3T (robust).
std::size_t expected_constraint_count(std::size_t sessions, std::size_t slots, bool robust);

BuiltLp build_nominal_lp(const Scenario& sc);
BuiltLp build_robust_lp(const Scenario& sc, double gamma);

enum class DemandPolicy { kStrict, kClamp };

struct DemandAdjustment {
    std::size_t session{};
    std::string session_id;
    double requested{};    // kWh
    double deliverable{};  // kWh, jointly achievable
};

struct DemandPolicyResult {
    Scenario scenario;
    std::vector<DemandAdjustment> adjustments;
};

// Energy session i could receive if it had the station to itself.
double max_deliverable_energy(const Scenario& sc, std::size_t session);

// strict: throws InfeasibleDemandError if any demand is jointly unreachable.
// clamp: replaces unreachable demands with the jointly deliverable energy.
DemandPolicyResult apply_demand_policy(const Scenario& sc, DemandPolicy policy);

struct Schedule {
    Matrix charging_power;             // sessions x slots, kW
    std::vector<double> net_purchase;  // kW, the S+ variables
    std::vector<double> solar_used;    // kW
    std::optional<double> lambda;      // robust only
    std::vector<double> mu;            // robust only
    double gamma{0.0};
    double nominal_cost{0.0};          // EUR at nominal prices
    double protection_cost{0.0};       // EUR, gamma * lambda + sum(mu)
    double objective_value{0.0};

    bool robust() const noexcept { return lambda.has_value(); }
};

// Recomputes costs from the decoded variables and checks them against the
// solver objective and the charging constraints. Throws ConsistencyError.
Schedule extract_schedule(const lp::LpSolution& sol, const VariableMap& vars, const Scenario& sc, double gamma);

// Human-readable violations of the charging constraints (demand, socket,
// grid, nonnegativity, solar cap). Empty iff all hold within tol.
std::vector<std::string> constraint_violations(const Scenario& sc, const Matrix& power, std::span<const double> net_purchase,
                                               std::span<const double> solar_used, double tol);

// max(sum_i Y_{i,t} - R_t, 0) per slot.
std::vector<double> grid_draw(const Matrix& power, std::span<const double> solar_used);

// Sum over slots of price * grid draw * slot length.
double realized_cost(const Scenario& sc, const Matrix& power, std::span<const double> solar_used);

// Maps an externally computed allocation onto the nominal LP's columns with
// solar netted greedily and S+ set to the resulting grid draw.
std::vector<double> point_from_allocation(const VariableMap& vars, const Scenario& sc, const Matrix& power);

// Builds, solves and decodes. gamma = nullopt selects the nominal program.
// Throws InfeasibleDemandError if the program has no feasible point.
Schedule optimize(const Scenario& sc, std::optional<double> gamma);

}  // namespace evsched::model
