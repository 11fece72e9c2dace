// SPDX-License-Identifier: Apache-2.0
#include "evsched/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "evsched/errors.hpp"

namespace evsched::synthetic {

Data generate(const Options& opt) {
    if (opt.days < 1) throw InputError("synthetic horizon needs at least one day");
    if (!(opt.min_stay_hours > 0.0) || opt.max_stay_hours < opt.min_stay_hours) throw InputError("invalid stay range");
    Rng rng(opt.seed);
    Data out;
    const double horizon_hours = 24.0 * static_cast<double>(opt.days);
    const auto slots = static_cast<std::size_t>(std::llround(horizon_hours / opt.slot_hours));
    out.grid = TimeGrid{opt.start, slots, opt.slot_hours};
    const double eta = opt.station.charge_efficiency;
    const double power = opt.station.default_max_power;

    for (std::size_t n = 0; n < opt.sessions; ++n) {
        double arrive_h = 0.0;
        double stay_h = horizon_hours;
        if (!opt.concurrent) {
            const auto day = static_cast<double>(rng.index(opt.days));
            arrive_h = 24.0 * day + std::floor(rng.uniform(0.0, 24.0 * 60.0)) / 60.0;
            stay_h = std::round(rng.uniform(opt.min_stay_hours, opt.max_stay_hours) * 60.0) / 60.0;
        }
        const double depart_h = std::min(arrive_h + stay_h, horizon_hours);
        const double reachable = eta * power * (depart_h - arrive_h);
        const double energy = std::round(rng.uniform(0.2, 1.0) * std::min(reachable, opt.max_session_energy) * 1000.0) / 1000.0;
        ChargingSession s;
        char id[16];
        std::snprintf(id, sizeof id, "ev%04zu", n);
        s.id = id;
        s.arrival = opt.start + std::chrono::seconds{std::llround(arrive_h * 3600.0)};
        s.departure = opt.start + std::chrono::seconds{std::llround(depart_h * 3600.0)};
        s.required_energy = energy;
        s.max_power = power;
        out.sessions.push_back(std::move(s));
    }

    out.prices_eur_mwh.resize(slots);
    out.irradiance.resize(slots);
    double day_level = 0.0;
    double clearness = 1.0;
    for (std::size_t t = 0; t < slots; ++t) {
        const double hour_abs = static_cast<double>(t) * opt.slot_hours;
        const double hour = std::fmod(hour_abs, 24.0);
        if (t == 0 || std::fmod(hour_abs, 24.0) < opt.slot_hours - 1e-9) {
            day_level = rng.uniform(-6.0, 6.0);
            clearness = rng.uniform(0.4, 1.0);
        }
        const double mid = hour + 0.5 * opt.slot_hours;
        if (opt.flat_prices) {
            out.prices_eur_mwh[t] = 50.0;
        } else {
            const double evening = 18.0 * std::cos(2.0 * std::numbers::pi * (mid - 20.0) / 24.0);
            const double morning = 8.0 * std::exp(-0.5 * std::pow((mid - 8.5) / 1.5, 2.0));
            out.prices_eur_mwh[t] = std::max(5.0, std::round((52.0 + day_level + evening + morning + rng.uniform(-5.0, 5.0)) * 100.0) / 100.0);
        }
        const double sun = std::sin(std::numbers::pi * (mid - 6.0) / 14.0);
        out.irradiance[t] = opt.solar && sun > 0.0 ? std::round(950.0 * clearness * sun * 10.0) / 10.0 : 0.0;
    }
    return out;
}

Scenario to_scenario(const Data& data, const StationConfig& station, double deviation_fraction) {
    std::vector<double> prices(data.prices_eur_mwh.size());
    for (std::size_t t = 0; t < prices.size(); ++t) prices[t] = data.prices_eur_mwh[t] / 1000.0;
    return build_scenario(data.sessions, std::move(prices), pv_cap(data.irradiance, station), data.grid, station,
                          DeviationRule::fraction(deviation_fraction));
}

Scenario make_scenario(const Options& opt) { return to_scenario(generate(opt), opt.station, opt.deviation_fraction); }

void write_fixture(const std::filesystem::path& dir, const Data& data) {
    std::filesystem::create_directories(dir);
    std::ofstream sessions(dir / "sessions.csv");
    write_sessions_csv(sessions, data.sessions);
    std::ofstream prices(dir / "prices.csv");
    std::ofstream irradiance(dir / "irradiance.csv");
    prices.precision(10);
    irradiance.precision(10);
    prices << "timestamp,price_eur_mwh\n";
    irradiance << "timestamp,irradiance_w_m2\n";
    for (std::size_t t = 0; t < data.grid.num_slots; ++t) {
        const auto ts = format_timestamp(data.grid.slot_start(t));
        prices << ts << ',' << data.prices_eur_mwh[t] << "\n";
        irradiance << ts << ',' << data.irradiance[t] << "\n";
    }
    if (!sessions || !prices || !irradiance) throw InputError("cannot write fixture to " + dir.string());
}

}  // namespace evsched::synthetic
