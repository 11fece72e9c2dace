// SPDX-License-Identifier: Apache-2.0
#include "evsched/fcfs.hpp"

#include <algorithm>
#include <numeric>

namespace evsched::fcfs {

std::vector<std::size_t> arrival_order(const Scenario& sc) {
    std::vector<std::size_t> order(sc.num_sessions());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& sa = sc.sessions[a];
        const auto& sb = sc.sessions[b];
        if (sa.arrival != sb.arrival) return sa.arrival < sb.arrival;
        return sa.id < sb.id;
    });
    return order;
}

FcfsResult run_fcfs(const Scenario& sc) {
    sc.validate();
    const std::size_t N = sc.num_sessions();
    const std::size_t T = sc.num_slots();
    const double dt = sc.grid.slot_hours;
    const double eta = sc.station.charge_efficiency;

    FcfsResult out;
    out.allocation = Matrix(N, T);
    out.grid_draw.assign(T, 0.0);
    out.solar_used.assign(T, 0.0);
    std::vector<double> residual(N);
    for (std::size_t i = 0; i < N; ++i) residual[i] = sc.sessions[i].required_energy;

    const auto order = arrival_order(sc);
    for (std::size_t t = 0; t < T; ++t) {
        double headroom = sc.station.grid_capacity + sc.solar.cap[t];
        double load = 0.0;
        for (const std::size_t i : order) {
            const double avail = sc.availability(i, t);
            if (avail <= 0.0 || residual[i] <= 0.0 || headroom <= 0.0) continue;
            const double x = std::min({sc.sessions[i].max_power * avail, residual[i] / (eta * dt), headroom});
            out.allocation(i, t) = x;
            residual[i] = std::max(0.0, residual[i] - eta * x * dt);
            headroom -= x;
            load += x;
        }
        out.solar_used[t] = std::min(load, sc.solar.cap[t]);
        out.grid_draw[t] = std::max(load - sc.solar.cap[t], 0.0);
        out.cost += sc.prices.nominal[t] * out.grid_draw[t] * dt;
    }
    out.unmet_energy = std::move(residual);
    return out;
}

}  // namespace evsched::fcfs
