// SPDX-License-Identifier: Apache-2.0
#include "evsched/mpc.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>
#include <string>

#include "evsched/errors.hpp"

namespace evsched::mpc {
namespace {

// Residual demand at or below this is treated as satisfied (kWh).
constexpr double kDemandEpsilon = 1e-9;

struct Plan {
    std::size_t start{0};
    std::vector<std::size_t> sessions;
    model::Schedule schedule;

    bool covers(std::size_t k) const { return k >= start && k < start + schedule.solar_used.size(); }
};

}  // namespace

const char* to_string(Trigger trigger) {
    switch (trigger) {
        case Trigger::kNone: return "none";
        case Trigger::kArrival: return "arrival";
        case Trigger::kDeparture: return "departure";
        case Trigger::kPeriodic: return "periodic";
    }
    return "unknown";
}

void MpcConfig::validate() const {
    if (resolve_interval < 1) throw InputError("resolve interval must be at least one slot");
    if (gamma && !(*gamma >= 0.0)) throw InputError("gamma must be nonnegative");
}

Trigger detect_trigger(std::size_t k, std::optional<std::size_t> last_solve, SlotEvents events, const MpcConfig& cfg) {
    if (events.arrival) return Trigger::kArrival;
    if (events.departure) return Trigger::kDeparture;
    if (!last_solve || k - *last_solve >= cfg.resolve_interval) return Trigger::kPeriodic;
    return Trigger::kNone;
}

MpcTrace run_online(const Scenario& sc, const MpcConfig& cfg) {
    sc.validate();
    cfg.validate();
    const std::size_t N = sc.num_sessions();
    const std::size_t T = sc.num_slots();
    const double dt = sc.grid.slot_hours;
    const double eta = sc.station.charge_efficiency;

    std::vector<std::size_t> arrive(N), depart(N);
    for (std::size_t i = 0; i < N; ++i) std::tie(arrive[i], depart[i]) = presence_window(sc, i);

    MpcTrace trace;
    trace.applied_power = Matrix(N, T);
    trace.applied_solar.assign(T, 0.0);
    trace.slot_cost.assign(T, 0.0);
    trace.residual_demand = Matrix(T, N);

    std::vector<double> remaining(N, 0.0);
    std::vector<bool> registered(N, false);
    std::optional<std::size_t> last_solve;
    std::optional<Plan> plan;

    for (std::size_t k = 0; k < T; ++k) {
        SlotEvents events;
        for (std::size_t i = 0; i < N; ++i) {
            if (arrive[i] == depart[i]) continue;  // never present
            if (arrive[i] == k) {
                remaining[i] = sc.sessions[i].required_energy;
                registered[i] = true;
                events.arrival = true;
            }
            if (depart[i] == k) events.departure = true;
        }

        std::vector<std::size_t> active;
        for (std::size_t i = 0; i < N; ++i)
            if (arrive[i] <= k && k < depart[i] && remaining[i] > kDemandEpsilon) active.push_back(i);

        const Trigger trigger = detect_trigger(k, last_solve, events, cfg);
        if (trigger != Trigger::kNone && !active.empty()) {
            const auto started = std::chrono::steady_clock::now();
            std::size_t horizon_end = k + 1;
            std::vector<double> demands;
            for (const std::size_t i : active) {
                horizon_end = std::max(horizon_end, depart[i]);
                demands.push_back(remaining[i]);
            }
            const Scenario window = slice_scenario(sc, k, horizon_end - k, active, demands);
            SolveEvent event;
            event.slot = k;
            event.trigger = trigger;
            event.horizon = horizon_end - k;
            event.sessions = active.size();
            model::DemandPolicyResult adjusted{window, {}};
            try {
                adjusted = model::apply_demand_policy(window, cfg.demand_policy);
            } catch (const InfeasibleDemandError& e) {
                throw InfeasibleDemandError("slot " + std::to_string(k) + ": " + e.what());
            }
            for (auto adj : adjusted.adjustments) {
                adj.session = active[adj.session];
                event.adjustments.push_back(std::move(adj));
            }
            plan = Plan{k, active, model::optimize(adjusted.scenario, cfg.gamma)};
            last_solve = k;
            event.session_indices = active;
            event.planned_power = plan->schedule.charging_power;
            event.planned_solar = plan->schedule.solar_used;
            event.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            trace.solve_events.push_back(std::move(event));
        }

        double load = 0.0;
        if (plan && plan->covers(k)) {
            const std::size_t col = k - plan->start;
            for (const std::size_t i : active) {
                const auto it = std::find(plan->sessions.begin(), plan->sessions.end(), i);
                if (it == plan->sessions.end()) continue;
                const auto row = static_cast<std::size_t>(it - plan->sessions.begin());
                const double y = std::clamp(plan->schedule.charging_power(row, col), 0.0,
                                            sc.sessions[i].max_power * sc.availability(i, k));
                trace.applied_power(i, k) = y;
                load += y;
                remaining[i] = std::max(0.0, remaining[i] - eta * y * dt);
                if (remaining[i] <= kDemandEpsilon) remaining[i] = 0.0;
            }
            trace.applied_solar[k] = std::min(plan->schedule.solar_used[col], load);
        } else {
            trace.unplanned_slots.push_back(k);
        }

        trace.slot_cost[k] = sc.prices.nominal[k] * std::max(load - trace.applied_solar[k], 0.0) * dt;
        trace.total_cost += trace.slot_cost[k];
        for (std::size_t i = 0; i < N; ++i) trace.residual_demand(k, i) = remaining[i];
    }

    trace.unmet_energy.resize(N);
    for (std::size_t i = 0; i < N; ++i) trace.unmet_energy[i] = registered[i] ? remaining[i] : sc.sessions[i].required_energy;
    return trace;
}

nlohmann::json to_json(const MpcTrace& trace) {
    using nlohmann::json;
    json out;
    json power = json::array();
    for (std::size_t i = 0; i < trace.applied_power.rows(); ++i) {
        const auto row = trace.applied_power.row(i);
        power.push_back(std::vector<double>(row.begin(), row.end()));
    }
    out["applied_power"] = std::move(power);
    out["applied_solar"] = trace.applied_solar;
    out["slot_cost"] = trace.slot_cost;
    json residual = json::array();
    for (std::size_t k = 0; k < trace.residual_demand.rows(); ++k) {
        const auto row = trace.residual_demand.row(k);
        residual.push_back(std::vector<double>(row.begin(), row.end()));
    }
    out["residual_demand_history"] = std::move(residual);
    json events = json::array();
    for (const auto& e : trace.solve_events) {
        json adj = json::array();
        for (const auto& a : e.adjustments)
            adj.push_back({{"session", a.session_id}, {"requested_kwh", a.requested}, {"deliverable_kwh", a.deliverable}});
        events.push_back({{"slot", e.slot},
                          {"trigger", to_string(e.trigger)},
                          {"horizon", e.horizon},
                          {"sessions", e.sessions},
                          {"wall_seconds", e.wall_seconds},
                          {"adjustments", std::move(adj)}});
    }
    out["solve_events"] = std::move(events);
    out["unplanned_slots"] = trace.unplanned_slots;
    out["unmet_energy"] = trace.unmet_energy;
    out["total_cost"] = trace.total_cost;
    return out;
}

void write_solve_events_csv(std::ostream& out, const MpcTrace& trace) {
    out << "slot,trigger,horizon,sessions,wall_seconds\n";
    for (const auto& e : trace.solve_events)
        out << e.slot << ',' << to_string(e.trigger) << ',' << e.horizon << ',' << e.sessions << ',' << e.wall_seconds
            << "\n";
}

}  // namespace evsched::mpc
