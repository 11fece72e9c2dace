// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include <json.hpp>

#include "evsched/matrix.hpp"
#include "evsched/model.hpp"
#include "evsched/scenario.hpp"

namespace evsched::mpc {

enum class Trigger { kNone, kArrival, kDeparture, kPeriodic };

const char* to_string(Trigger trigger);

struct MpcConfig {
    std::size_t resolve_interval{1};  // slots between periodic re-solves
    std::optional<double> gamma;      // nullopt: nominal program
    model::DemandPolicy demand_policy{model::DemandPolicy::kClamp};

    void validate() const;
};

struct SlotEvents {
    bool arrival{false};
    bool departure{false};
};

// Arrival beats departure beats periodic in the returned label.
Trigger detect_trigger(std::size_t k, std::optional<std::size_t> last_solve, SlotEvents events, const MpcConfig& cfg);

struct SolveEvent {
    std::size_t slot{};
    Trigger trigger{Trigger::kNone};
    std::size_t horizon{};   // slots in the solved window
    std::size_t sessions{};  // |V_k|
    double wall_seconds{};
    std::vector<model::DemandAdjustment> adjustments;  // clamp policy only
    std::vector<std::size_t> session_indices;          // rows of planned_power
    Matrix planned_power;                              // |V_k| x horizon, kW
    std::vector<double> planned_solar;                 // kW per horizon slot
};

struct MpcTrace {
    Matrix applied_power;                 // sessions x slots, kW
    std::vector<double> applied_solar;    // kW per slot
    std::vector<double> slot_cost;        // EUR per slot at realised prices
    std::vector<SolveEvent> solve_events;
    Matrix residual_demand;               // slots x sessions, after each slot's update
    std::vector<std::size_t> unplanned_slots;  // executed without any plan (R_k = 0)
    std::vector<double> unmet_energy;     // kWh per session
    double total_cost{0.0};
};

// Receding-horizon loop: re-solve on arrival, departure or every
// resolve_interval slots; execute only the current slot of the latest plan.
MpcTrace run_online(const Scenario& sc, const MpcConfig& cfg);

nlohmann::json to_json(const MpcTrace& trace);
void write_solve_events_csv(std::ostream& out, const MpcTrace& trace);

}  // namespace evsched::mpc
