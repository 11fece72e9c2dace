// SPDX-License-Identifier: Apache-2.0
#include "evsched/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "evsched/errors.hpp"

namespace evsched::model {
namespace {

using lp::Relation;
using lp::Term;

void add_charging_structure(const Scenario& sc, const VariableMap& vars, lp::LinearProgram& program) {
    const std::size_t N = sc.num_sessions();
    const std::size_t T = sc.num_slots();
    const double dt = sc.grid.slot_hours;
    const double eta = sc.station.charge_efficiency;

    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t t = 0; t < T; ++t)
            program.set_bounds(vars.y(i, t), 0.0, sc.sessions[i].max_power * sc.availability(i, t));
    for (std::size_t t = 0; t < T; ++t) {
        program.set_bounds(vars.net_purchase(t), 0.0, lp::kInfinity);
        program.set_bounds(vars.solar(t), 0.0, sc.solar.cap[t]);
        program.set_objective(vars.net_purchase(t), sc.prices.nominal[t] * dt);
    }

    // Delivered energy over the presence window.
    for (std::size_t i = 0; i < N; ++i) {
        std::vector<Term> terms;
        for (std::size_t t = 0; t < T; ++t)
            if (sc.availability(i, t) > 0.0) terms.push_back({vars.y(i, t), eta * dt});
        program.add_constraint(std::move(terms), Relation::kGreaterEqual, sc.sessions[i].required_energy);
    }
    // Grid capacity after solar.
    for (std::size_t t = 0; t < T; ++t) {
        std::vector<Term> terms;
        for (std::size_t i = 0; i < N; ++i)
            if (sc.availability(i, t) > 0.0) terms.push_back({vars.y(i, t), 1.0});
        terms.push_back({vars.solar(t), -1.0});
        program.add_constraint(std::move(terms), Relation::kLessEqual, sc.station.grid_capacity);
    }
    // S+ bounds the net load from above.
    for (std::size_t t = 0; t < T; ++t) {
        std::vector<Term> terms{{vars.net_purchase(t), 1.0}};
        for (std::size_t i = 0; i < N; ++i)
            if (sc.availability(i, t) > 0.0) terms.push_back({vars.y(i, t), -1.0});
        terms.push_back({vars.solar(t), 1.0});
        program.add_constraint(std::move(terms), Relation::kGreaterEqual, 0.0);
    }
}

}  // namespace

nlohmann::json VariableMap::to_json() const {
    nlohmann::json out = nlohmann::json::object();
    for (std::size_t i = 0; i < sessions_; ++i)
        for (std::size_t t = 0; t < slots_; ++t)
            out["Y[" + std::to_string(i) + "," + std::to_string(t) + "]"] = y(i, t);
    for (std::size_t t = 0; t < slots_; ++t) {
        out["S[" + std::to_string(t) + "]"] = net_purchase(t);
        out["R[" + std::to_string(t) + "]"] = solar(t);
    }
    if (robust_) {
        out["lambda"] = lambda();
        for (std::size_t t = 0; t < slots_; ++t) out["mu[" + std::to_string(t) + "]"] = mu(t);
    }
    return out;
}

std::size_t expected_constraint_count(std::size_t sessions, std::size_t slots, bool robust) {
    return sessions + (robust ? 3 : 2) * slots;
}

BuiltLp build_nominal_lp(const Scenario& sc) {
    sc.validate();
    BuiltLp out{lp::LinearProgram(0), VariableMap(sc.num_sessions(), sc.num_slots(), false)};
    out.program = lp::LinearProgram(out.vars.num_vars());
    add_charging_structure(sc, out.vars, out.program);
    return out;
}

BuiltLp build_robust_lp(const Scenario& sc, double gamma) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InputError("gamma must be a finite nonnegative number");
    sc.validate();
    BuiltLp out{lp::LinearProgram(0), VariableMap(sc.num_sessions(), sc.num_slots(), true)};
    const auto& vars = out.vars;
    out.program = lp::LinearProgram(vars.num_vars());
    add_charging_structure(sc, vars, out.program);

    const double dt = sc.grid.slot_hours;
    out.program.set_objective(vars.lambda(), gamma);
    for (std::size_t t = 0; t < sc.num_slots(); ++t) {
        out.program.set_objective(vars.mu(t), 1.0);
        out.program.add_constraint(
            {{vars.mu(t), 1.0}, {vars.lambda(), 1.0}, {vars.net_purchase(t), -sc.prices.deviation_bound[t] * dt}},
            Relation::kGreaterEqual, 0.0);
    }
    return out;
}

double max_deliverable_energy(const Scenario& sc, std::size_t session) {
    const auto& s = sc.sessions.at(session);
    double energy = 0.0;
    for (std::size_t t = 0; t < sc.num_slots(); ++t) {
        const double power = std::min(s.max_power * sc.availability(session, t), sc.station.grid_capacity + sc.solar.cap[t]);
        energy += power * sc.grid.slot_hours;
    }
    return sc.station.charge_efficiency * energy;
}

DemandPolicyResult apply_demand_policy(const Scenario& sc, DemandPolicy policy) {
    sc.validate();
    const std::size_t N = sc.num_sessions();
    const std::size_t T = sc.num_slots();
    const double dt = sc.grid.slot_hours;
    const double eta = sc.station.charge_efficiency;

    // Maximise total delivered energy subject to the socket, grid and solar
    // limits with each session capped at its request.
    const std::size_t solar0 = N * T;
    lp::LinearProgram aux(N * T + T);
    for (std::size_t i = 0; i < N; ++i) {
        std::vector<Term> terms;
        for (std::size_t t = 0; t < T; ++t) {
            const std::size_t col = i * T + t;
            aux.set_bounds(col, 0.0, sc.sessions[i].max_power * sc.availability(i, t));
            aux.set_objective(col, -eta * dt);
            if (sc.availability(i, t) > 0.0) terms.push_back({col, eta * dt});
        }
        aux.add_constraint(std::move(terms), Relation::kLessEqual, sc.sessions[i].required_energy);
    }
    for (std::size_t t = 0; t < T; ++t) {
        aux.set_bounds(solar0 + t, 0.0, sc.solar.cap[t]);
        std::vector<Term> terms;
        for (std::size_t i = 0; i < N; ++i)
            if (sc.availability(i, t) > 0.0) terms.push_back({i * T + t, 1.0});
        terms.push_back({solar0 + t, -1.0});
        aux.add_constraint(std::move(terms), Relation::kLessEqual, sc.station.grid_capacity);
    }
    const auto sol = lp::solve_lp(aux);
    if (!sol.optimal()) throw ConsistencyError("demand feasibility program did not reach an optimum");

    DemandPolicyResult out{sc, {}};
    for (std::size_t i = 0; i < N; ++i) {
        double delivered = 0.0;
        for (std::size_t t = 0; t < T; ++t) delivered += eta * sol.x[i * T + t] * dt;
        const double requested = sc.sessions[i].required_energy;
        if (delivered >= requested - 1e-7 * std::max(1.0, requested)) continue;
        delivered = std::max(0.0, delivered);
        out.adjustments.push_back({i, sc.sessions[i].id, requested, delivered});
        out.scenario.sessions[i].required_energy = delivered;
    }

    if (policy == DemandPolicy::kStrict && !out.adjustments.empty()) {
        std::ostringstream msg;
        msg << "unreachable energy demand for " << out.adjustments.size() << " session(s):";
        for (const auto& a : out.adjustments) {
            msg << "\n  session " << a.session_id << ": requested " << a.requested << " kWh, max deliverable alone "
                << max_deliverable_energy(sc, a.session) << " kWh, jointly " << a.deliverable << " kWh";
        }
        throw InfeasibleDemandError(msg.str());
    }
    return out;
}

std::vector<double> grid_draw(const Matrix& power, std::span<const double> solar_used) {
    std::vector<double> out(power.cols(), 0.0);
    for (std::size_t t = 0; t < power.cols(); ++t) {
        double load = 0.0;
        for (std::size_t i = 0; i < power.rows(); ++i) load += power(i, t);
        out[t] = std::max(load - solar_used[t], 0.0);
    }
    return out;
}

double realized_cost(const Scenario& sc, const Matrix& power, std::span<const double> solar_used) {
    const auto draw = grid_draw(power, solar_used);
    double cost = 0.0;
    for (std::size_t t = 0; t < draw.size(); ++t) cost += sc.prices.nominal[t] * draw[t] * sc.grid.slot_hours;
    return cost;
}

std::vector<std::string> constraint_violations(const Scenario& sc, const Matrix& power, std::span<const double> net_purchase,
                                               std::span<const double> solar_used, double tol) {
    std::vector<std::string> out;
    const std::size_t N = sc.num_sessions();
    const std::size_t T = sc.num_slots();
    const double dt = sc.grid.slot_hours;
    auto report = [&](const std::string& what, double amount) {
        std::ostringstream msg;
        msg << what << " violated by " << amount;
        out.push_back(msg.str());
    };
    if (power.rows() != N || power.cols() != T || net_purchase.size() != T || solar_used.size() != T) {
        out.push_back("shape mismatch against the scenario");
        return out;
    }
    for (std::size_t i = 0; i < N; ++i) {
        double delivered = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            const double y = power(i, t);
            delivered += y * dt;
            if (y < -tol) report("nonnegativity Y[" + std::to_string(i) + "," + std::to_string(t) + "]", -y);
            const double cap = sc.sessions[i].max_power * sc.availability(i, t);
            if (y > cap + tol) report("socket limit Y[" + std::to_string(i) + "," + std::to_string(t) + "]", y - cap);
        }
        delivered *= sc.station.charge_efficiency;
        if (delivered < sc.sessions[i].required_energy - tol)
            report("energy demand of session " + sc.sessions[i].id, sc.sessions[i].required_energy - delivered);
    }
    for (std::size_t t = 0; t < T; ++t) {
        double load = 0.0;
        for (std::size_t i = 0; i < N; ++i) load += power(i, t);
        const auto slot = std::to_string(t);
        if (load - solar_used[t] > sc.station.grid_capacity + tol)
            report("grid capacity at slot " + slot, load - solar_used[t] - sc.station.grid_capacity);
        if (net_purchase[t] < -tol) report("nonnegativity S[" + slot + "]", -net_purchase[t]);
        if (net_purchase[t] < load - solar_used[t] - tol)
            report("net purchase cover at slot " + slot, load - solar_used[t] - net_purchase[t]);
        if (solar_used[t] < -tol) report("nonnegativity R[" + slot + "]", -solar_used[t]);
        if (solar_used[t] > sc.solar.cap[t] + tol) report("solar cap at slot " + slot, solar_used[t] - sc.solar.cap[t]);
    }
    return out;
}

Schedule extract_schedule(const lp::LpSolution& sol, const VariableMap& vars, const Scenario& sc, double gamma) {
    if (!sol.optimal()) throw InputError("cannot decode a schedule from a non-optimal solution");
    if (sol.x.size() != vars.num_vars() || vars.sessions() != sc.num_sessions() || vars.slots() != sc.num_slots())
        throw InputError("solution does not match the variable map or scenario");
    const std::size_t N = sc.num_sessions();
    const std::size_t T = sc.num_slots();
    const double dt = sc.grid.slot_hours;

    Schedule s;
    s.gamma = vars.robust() ? gamma : 0.0;
    s.charging_power = Matrix(N, T);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t t = 0; t < T; ++t) s.charging_power(i, t) = sol.x[vars.y(i, t)];
    s.net_purchase.resize(T);
    s.solar_used.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
        s.net_purchase[t] = sol.x[vars.net_purchase(t)];
        s.solar_used[t] = sol.x[vars.solar(t)];
        s.nominal_cost += sc.prices.nominal[t] * s.net_purchase[t] * dt;
    }
    if (vars.robust()) {
        s.lambda = sol.x[vars.lambda()];
        s.mu.resize(T);
        s.protection_cost = gamma * *s.lambda;
        for (std::size_t t = 0; t < T; ++t) {
            s.mu[t] = sol.x[vars.mu(t)];
            s.protection_cost += s.mu[t];
        }
    }
    s.objective_value = s.nominal_cost + s.protection_cost;

    const double reported = sol.objective_value.value_or(s.objective_value);
    if (std::abs(reported - s.objective_value) > 1e-6 * (1.0 + std::abs(reported))) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "decoded cost " << s.objective_value << " disagrees with solver objective " << reported;
        throw ConsistencyError(msg.str());
    }
    const auto violations = constraint_violations(sc, s.charging_power, s.net_purchase, s.solar_used, lp::kFeasibilityTol);
    if (!violations.empty()) throw ConsistencyError("decoded schedule is infeasible: " + violations.front());
    if (vars.robust()) {
        for (std::size_t t = 0; t < T; ++t) {
            const double need = sc.prices.deviation_bound[t] * s.net_purchase[t] * dt - *s.lambda;
            if (s.mu[t] < need - lp::kFeasibilityTol || s.mu[t] < -lp::kFeasibilityTol)
                throw ConsistencyError("protection variable mu[" + std::to_string(t) + "] below its dual bound");
        }
        if (*s.lambda < -lp::kFeasibilityTol) throw ConsistencyError("negative lambda");
    }
    return s;
}

std::vector<double> point_from_allocation(const VariableMap& vars, const Scenario& sc, const Matrix& power) {
    std::vector<double> x(vars.num_vars(), 0.0);
    for (std::size_t t = 0; t < sc.num_slots(); ++t) {
        double load = 0.0;
        for (std::size_t i = 0; i < sc.num_sessions(); ++i) {
            x[vars.y(i, t)] = power(i, t);
            load += power(i, t);
        }
        const double solar = std::min(load, sc.solar.cap[t]);
        x[vars.solar(t)] = solar;
        x[vars.net_purchase(t)] = std::max(load - solar, 0.0);
    }
    return x;
}

Schedule optimize(const Scenario& sc, std::optional<double> gamma) {
    const BuiltLp built = gamma ? build_robust_lp(sc, *gamma) : build_nominal_lp(sc);
    const auto sol = lp::solve_lp(built.program);
    switch (sol.status) {
        case lp::Status::kOptimal: break;
        case lp::Status::kInfeasible: throw InfeasibleDemandError("charging program is infeasible; apply a demand policy");
        case lp::Status::kUnbounded: throw ConsistencyError("charging program reported unbounded");
    }
    return extract_schedule(sol, built.vars, sc, gamma.value_or(0.0));
}

}  // namespace evsched::model
