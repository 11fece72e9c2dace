// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evsched/matrix.hpp"

namespace evsched {

using Timestamp = std::chrono::sys_seconds;

// Accepts ISO-8601 (`2018-04-25T11:08:04Z`, optional offset, optional seconds,
// space instead of `T`) and RFC 1123 (`Wed, 25 Apr 2018 11:08:04 GMT`).
// Everything is normalised to UTC.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

struct TimeGrid {
    Timestamp start{};
    std::size_t num_slots{24};
    double slot_hours{1.0};

    double slot_seconds() const { return slot_hours * 3600.0; }
    Timestamp slot_start(std::size_t t) const;
    Timestamp end() const { return slot_start(num_slots); }
    void validate() const;
};

struct ChargingSession {
    std::string id;
    Timestamp arrival{};
    Timestamp departure{};
    double required_energy{0.0};  // kWh
    double max_power{0.0};        // kW
};

struct PriceSeries {
    std::vector<double> nominal;          // EUR/kWh
    std::vector<double> deviation_bound;  // EUR/kWh
};

struct SolarSeries {
    std::vector<double> cap;  // kW
};

struct StationConfig {
    double grid_capacity{300.0};
    double charge_efficiency{0.9};
    double pv_efficiency{0.2};
    double pv_area{80.0};
    double default_max_power{86.0};

    static StationConfig caltech();
    static StationConfig jpl();
    void validate() const;
};

// Rule for the per-slot price deviation bound.
struct DeviationRule {
    enum class Kind { kFraction, kAbsolute };
    Kind kind{Kind::kFraction};
    double value{0.25};

    static DeviationRule fraction(double f) { return {Kind::kFraction, f}; }
    static DeviationRule absolute(double v) { return {Kind::kAbsolute, v}; }
    std::vector<double> apply(std::span<const double> nominal) const;
};

struct Scenario {
    TimeGrid grid;
    PriceSeries prices;
    SolarSeries solar;
    StationConfig station;
    std::vector<ChargingSession> sessions;
    Matrix availability;  // sessions x slots, fraction of slot connected

    std::size_t num_sessions() const noexcept { return sessions.size(); }
    std::size_t num_slots() const noexcept { return grid.num_slots; }
    void validate() const;
};

// Fraction of each slot during which [arrival, departure) is connected.
std::vector<double> availability_row(const TimeGrid& grid, Timestamp arrival, Timestamp departure);

struct SessionParseResult {
    std::vector<ChargingSession> sessions;
    std::size_t rejected_rows{0};    // departure <= arrival
    std::size_t dropped_outside{0};  // no overlap with the grid window
};

// CSV (header required) or ACN JSON export (`.json`). Sessions are clipped to
// the grid window; required energy is kept unchanged.
SessionParseResult parse_sessions(const std::filesystem::path& path, const TimeGrid& grid, const StationConfig& station);
SessionParseResult parse_sessions_csv(std::istream& in, const std::string& source, const TimeGrid& grid,
                                      const StationConfig& station);
SessionParseResult parse_sessions_acn_json(std::istream& in, const std::string& source, const TimeGrid& grid,
                                           const StationConfig& station);
void write_sessions_csv(std::ostream& out, std::span<const ChargingSession> sessions);

enum class PriceUnits { kEurPerMWh, kEurPerKWh };

struct SeriesPoint {
    Timestamp time{};
    double value{};
};

// Two-column CSV `timestamp,value`; an optional header line is skipped.
std::vector<SeriesPoint> read_series_csv(std::istream& in, const std::string& source);

// Time-weighted average of the rows over each slot; every row covers
// [time, time + row_hours). Throws InputError listing uncovered slots.
std::vector<double> align_series(std::span<const SeriesPoint> rows, const TimeGrid& grid, const std::string& what,
                                 double row_hours = 1.0);

std::vector<double> parse_prices(const std::filesystem::path& path, const TimeGrid& grid, PriceUnits units);
std::vector<double> parse_irradiance(const std::filesystem::path& path, const TimeGrid& grid);

// PV output in kW: pv_area * G / 1000 * pv_efficiency.
SolarSeries pv_cap(std::span<const double> irradiance, const StationConfig& station);

Scenario build_scenario(std::vector<ChargingSession> sessions, std::vector<double> nominal_prices, SolarSeries solar,
                        const TimeGrid& grid, const StationConfig& station, const DeviationRule& deviation);

// Slots [first, first + count) restricted to the given sessions, with their
// required energy replaced by `demands`.
Scenario slice_scenario(const Scenario& sc, std::size_t first, std::size_t count, std::span<const std::size_t> session_ids,
                        std::span<const double> demands);

// Copy with every PV cap set to zero.
Scenario without_solar(Scenario sc);

// First slot with positive availability and one past the last; {0,0} if never present.
std::pair<std::size_t, std::size_t> presence_window(const Scenario& sc, std::size_t session);

}  // namespace evsched
