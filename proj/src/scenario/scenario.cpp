// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <string>

#include "evsched/errors.hpp"
#include "evsched/scenario.hpp"

namespace evsched {

Timestamp TimeGrid::slot_start(std::size_t t) const {
    const auto offset = std::llround(static_cast<double>(t) * slot_seconds());
    return start + std::chrono::seconds{offset};
}

void TimeGrid::validate() const {
    if (num_slots < 1) throw InputError("time grid needs at least one slot");
    if (!(slot_hours > 0.0) || !std::isfinite(slot_hours)) throw InputError("slot length must be positive");
}

StationConfig StationConfig::caltech() { return StationConfig{300.0, 0.9, 0.2, 80.0, 86.0}; }

StationConfig StationConfig::jpl() { return StationConfig{300.0, 0.9, 0.2, 80.0, 37.5}; }

void StationConfig::validate() const {
    if (!(grid_capacity > 0.0)) throw InputError("grid capacity must be positive");
    if (!(charge_efficiency > 0.0 && charge_efficiency <= 1.0)) throw InputError("charge efficiency must lie in (0, 1]");
    if (!(pv_efficiency > 0.0 && pv_efficiency <= 1.0)) throw InputError("PV efficiency must lie in (0, 1]");
    if (!(pv_area >= 0.0)) throw InputError("PV area must be nonnegative");
    if (!(default_max_power > 0.0)) throw InputError("default max power must be positive");
}

std::vector<double> DeviationRule::apply(std::span<const double> nominal) const {
    if (!(value >= 0.0) || !std::isfinite(value)) throw InputError("deviation rule value must be a nonnegative number");
    std::vector<double> out(nominal.size());
    for (std::size_t t = 0; t < nominal.size(); ++t) out[t] = kind == Kind::kFraction ? value * nominal[t] : value;
    return out;
}

std::vector<double> availability_row(const TimeGrid& grid, Timestamp arrival, Timestamp departure) {
    std::vector<double> row(grid.num_slots, 0.0);
    const double a = static_cast<double>(arrival.time_since_epoch().count());
    const double d = static_cast<double>(departure.time_since_epoch().count());
    for (std::size_t t = 0; t < grid.num_slots; ++t) {
        const double s0 = static_cast<double>(grid.slot_start(t).time_since_epoch().count());
        const double s1 = static_cast<double>(grid.slot_start(t + 1).time_since_epoch().count());
        const double overlap = std::min(s1, d) - std::max(s0, a);
        if (overlap > 0.0) row[t] = std::min(1.0, overlap / (s1 - s0));
    }
    return row;
}

void Scenario::validate() const {
    grid.validate();
    station.validate();
    const std::size_t T = grid.num_slots;
    if (prices.nominal.size() != T) throw InputError("nominal price series length differs from the grid");
    if (prices.deviation_bound.size() != T) throw InputError("deviation bound length differs from the grid");
    if (solar.cap.size() != T) throw InputError("solar series length differs from the grid");
    for (std::size_t t = 0; t < T; ++t) {
        if (!(prices.nominal[t] >= 0.0)) throw InputError("nominal price must be nonnegative at slot " + std::to_string(t));
        if (!(prices.deviation_bound[t] >= 0.0))
            throw InputError("deviation bound must be nonnegative at slot " + std::to_string(t));
        if (!(solar.cap[t] >= 0.0)) throw InputError("solar cap must be nonnegative at slot " + std::to_string(t));
    }
    if (availability.rows() != sessions.size() || availability.cols() != T)
        throw InputError("availability matrix shape differs from sessions x slots");
    for (const auto& s : sessions) {
        if (s.departure <= s.arrival) throw InputError("session " + s.id + ": departure must follow arrival");
        if (!(s.required_energy >= 0.0)) throw InputError("session " + s.id + ": required energy must be nonnegative");
        if (!(s.max_power > 0.0)) throw InputError("session " + s.id + ": max power must be positive");
    }
}

SolarSeries pv_cap(std::span<const double> irradiance, const StationConfig& station) {
    SolarSeries out;
    out.cap.reserve(irradiance.size());
    for (std::size_t t = 0; t < irradiance.size(); ++t) {
        if (!(irradiance[t] >= 0.0)) throw InputError("negative irradiance at slot " + std::to_string(t));
        out.cap.push_back(station.pv_area * irradiance[t] / 1000.0 * station.pv_efficiency);
    }
    return out;
}

Scenario build_scenario(std::vector<ChargingSession> sessions, std::vector<double> nominal_prices, SolarSeries solar,
                        const TimeGrid& grid, const StationConfig& station, const DeviationRule& deviation) {
    grid.validate();
    if (nominal_prices.size() != grid.num_slots)
        throw InputError("price series has " + std::to_string(nominal_prices.size()) + " slots, grid has " +
                         std::to_string(grid.num_slots));
    if (solar.cap.size() != grid.num_slots)
        throw InputError("solar series has " + std::to_string(solar.cap.size()) + " slots, grid has " +
                         std::to_string(grid.num_slots));
    Scenario sc;
    sc.grid = grid;
    sc.station = station;
    sc.prices.deviation_bound = deviation.apply(nominal_prices);
    sc.prices.nominal = std::move(nominal_prices);
    sc.solar = std::move(solar);
    sc.sessions = std::move(sessions);
    sc.availability = Matrix(sc.sessions.size(), grid.num_slots);
    for (std::size_t i = 0; i < sc.sessions.size(); ++i) {
        const auto row = availability_row(grid, sc.sessions[i].arrival, sc.sessions[i].departure);
        std::copy(row.begin(), row.end(), sc.availability.row(i).begin());
    }
    sc.validate();
    return sc;
}

Scenario slice_scenario(const Scenario& sc, std::size_t first, std::size_t count, std::span<const std::size_t> session_ids,
                        std::span<const double> demands) {
    if (first + count > sc.num_slots() || count == 0) throw InputError("slice outside the scenario grid");
    if (demands.size() != session_ids.size()) throw InputError("one demand per sliced session required");
    Scenario out;
    out.grid = TimeGrid{sc.grid.slot_start(first), count, sc.grid.slot_hours};
    out.station = sc.station;
    const auto from = static_cast<std::ptrdiff_t>(first);
    const auto to = static_cast<std::ptrdiff_t>(first + count);
    out.prices.nominal.assign(sc.prices.nominal.begin() + from, sc.prices.nominal.begin() + to);
    out.prices.deviation_bound.assign(sc.prices.deviation_bound.begin() + from, sc.prices.deviation_bound.begin() + to);
    out.solar.cap.assign(sc.solar.cap.begin() + from, sc.solar.cap.begin() + to);
    out.availability = Matrix(session_ids.size(), count);
    for (std::size_t k = 0; k < session_ids.size(); ++k) {
        const std::size_t i = session_ids[k];
        ChargingSession s = sc.sessions.at(i);
        s.arrival = std::max(s.arrival, out.grid.start);
        s.departure = std::min(s.departure, out.grid.end());
        s.required_energy = demands[k];
        out.sessions.push_back(std::move(s));
        for (std::size_t t = 0; t < count; ++t) out.availability(k, t) = sc.availability(i, first + t);
    }
    return out;
}

Scenario without_solar(Scenario sc) {
    std::fill(sc.solar.cap.begin(), sc.solar.cap.end(), 0.0);
    return sc;
}

std::pair<std::size_t, std::size_t> presence_window(const Scenario& sc, std::size_t session) {
    const auto row = sc.availability.row(session);
    std::size_t first = row.size();
    std::size_t last = 0;
    for (std::size_t t = 0; t < row.size(); ++t) {
        if (row[t] > 0.0) {
            first = std::min(first, t);
            last = t + 1;
        }
    }
    if (first == row.size()) return {0, 0};
    return {first, last};
}

}  // namespace evsched
