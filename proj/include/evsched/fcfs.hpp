// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "evsched/matrix.hpp"
#include "evsched/scenario.hpp"

namespace evsched::fcfs {

struct FcfsResult {
    Matrix allocation;                 // sessions x slots, kW
    std::vector<double> unmet_energy;  // kWh per session
    std::vector<double> grid_draw;     // kW per slot
    std::vector<double> solar_used;    // kW per slot
    double cost{0.0};                  // EUR
};

// Sessions sorted by arrival time, ties broken by id.
std::vector<std::size_t> arrival_order(const Scenario& sc);

// Price-blind greedy baseline: each slot serves present sessions in arrival
// order with min(socket limit, residual demand power, station headroom).
FcfsResult run_fcfs(const Scenario& sc);

}  // namespace evsched::fcfs
