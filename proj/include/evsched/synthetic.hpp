// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "evsched/scenario.hpp"

namespace evsched::synthetic {

// Platform-independent uniform draws on top of mt19937_64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

private:
    std::mt19937_64 engine_;
};

struct Options {
    std::size_t sessions{10};
    std::size_t days{1};
    double slot_hours{1.0};
    std::uint64_t seed{1};
    Timestamp start{std::chrono::sys_days{std::chrono::year{2019} / 9 / 2}};
    StationConfig station{StationConfig::caltech()};
    double deviation_fraction{0.25};
    double min_stay_hours{2.0};
    double max_stay_hours{8.0};
    double max_session_energy{60.0};  // kWh
    bool concurrent{false};   // every session present for the whole horizon
    bool flat_prices{false};
    bool solar{true};
};

struct Data {
    TimeGrid grid;
    std::vector<ChargingSession> sessions;
    std::vector<double> prices_eur_mwh;   // one per slot
    std::vector<double> irradiance;       // W/m^2, one per slot
};

// Arrivals uniform over the day (minute resolution), stays uniform in
// [min_stay, max_stay], demand a uniform fraction of what the session could
// draw alone, capped at max_session_energy.
Data generate(const Options& opt);

Scenario to_scenario(const Data& data, const StationConfig& station, double deviation_fraction);
Scenario make_scenario(const Options& opt);

// sessions.csv, prices.csv (EUR/MWh) and irradiance.csv (W/m^2).
void write_fixture(const std::filesystem::path& dir, const Data& data);

}  // namespace evsched::synthetic
