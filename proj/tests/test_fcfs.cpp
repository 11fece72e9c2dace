#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "evsched/fcfs.hpp"
#include "evsched/model.hpp"
#include "support/scenarios.hpp"

using namespace evsched;
using testing::hourly_scenario;

TEST_CASE("greedy charges at arrival regardless of price") {
    auto st = StationConfig::caltech();
    st.charge_efficiency = 1.0;
    const auto sc = hourly_scenario({0.2, 0.1}, {{"ev", 0, 2, 10.0, 10.0}}, {}, st);
    const auto res = fcfs::run_fcfs(sc);
    CHECK(res.allocation(0, 0) == doctest::Approx(10.0));
    CHECK(res.allocation(0, 1) == doctest::Approx(0.0));
    CHECK(res.cost == doctest::Approx(2.0));
    CHECK(res.cost == doctest::Approx(2.0 * model::optimize(sc, std::nullopt).nominal_cost));
    CHECK(res.unmet_energy[0] == doctest::Approx(0.0));
}

TEST_CASE("earlier arrival takes the last of the capacity") {
    auto st = StationConfig::caltech();
    st.grid_capacity = 10.0;
    TimeGrid grid{parse_timestamp("2019-09-05T00:00:00Z"), 1, 1.0};
    // both present for the whole slot; "late" arrived later in the previous hour
    std::vector<ChargingSession> sessions{
        {"late", grid.start - std::chrono::minutes{10}, grid.end(), 10.0, 10.0},
        {"early", grid.start - std::chrono::minutes{40}, grid.end(), 10.0, 10.0},
    };
    const auto sc = build_scenario(sessions, {0.1}, SolarSeries{{0.0}}, grid, st, DeviationRule::fraction(0.25));
    CHECK(fcfs::arrival_order(sc) == std::vector<std::size_t>{1, 0});
    const auto res = fcfs::run_fcfs(sc);
    CHECK(res.allocation(1, 0) == doctest::Approx(10.0));
    CHECK(res.allocation(0, 0) == 0.0);
    CHECK(res.unmet_energy[0] == doctest::Approx(10.0));
    CHECK(res.unmet_energy[1] == doctest::Approx(1.0));
}

TEST_CASE("arrival ties are broken by id") {
    const auto sc = hourly_scenario({0.1}, {{"b", 0, 1, 1.0, 5.0}, {"a", 0, 1, 1.0, 5.0}, {"c", 0, 1, 1.0, 5.0}});
    CHECK(fcfs::arrival_order(sc) == std::vector<std::size_t>{1, 0, 2});
}

TEST_CASE("zero demand draws nothing") {
    const auto sc = hourly_scenario({0.3, 0.3}, {{"idle", 0, 2, 0.0, 10.0}});
    const auto res = fcfs::run_fcfs(sc);
    CHECK(res.allocation(0, 0) == 0.0);
    CHECK(res.allocation(0, 1) == 0.0);
    CHECK(res.cost == 0.0);
}

TEST_CASE("solar offsets the grid draw") {
    auto st = StationConfig::caltech();
    st.charge_efficiency = 1.0;
    const auto sc = hourly_scenario({0.5}, {{"ev", 0, 1, 10.0, 10.0}}, {4.0}, st);
    const auto res = fcfs::run_fcfs(sc);
    CHECK(res.solar_used[0] == doctest::Approx(4.0));
    CHECK(res.grid_draw[0] == doctest::Approx(6.0));
    CHECK(res.cost == doctest::Approx(3.0));
}

TEST_CASE("FCFS invariants on random scenarios") {
    synthetic::Rng rng(71);
    for (int trial = 0; trial < 60; ++trial) {
        CAPTURE(trial);
        const auto sc = testing::random_day(rng, 12);
        const auto res = fcfs::run_fcfs(sc);
        const auto& st = sc.station;
        const double dt = sc.grid.slot_hours;
        std::vector<double> residual(sc.sessions.size());
        for (std::size_t i = 0; i < sc.sessions.size(); ++i) residual[i] = sc.sessions[i].required_energy;

        double cost = 0.0;
        for (std::size_t t = 0; t < sc.grid.num_slots; ++t) {
            double load = 0.0;
            for (std::size_t i = 0; i < sc.sessions.size(); ++i) {
                const double x = res.allocation(i, t);
                CHECK(x >= 0.0);
                CHECK(x <= sc.sessions[i].max_power * sc.availability(i, t) + 1e-9);
                load += x;
                residual[i] -= st.charge_efficiency * x * dt;
            }
            const double solar = std::min(load, sc.solar.cap[t]);
            CHECK(load - solar <= st.grid_capacity + 1e-9);
            CHECK(res.grid_draw[t] == doctest::Approx(std::max(load - sc.solar.cap[t], 0.0)));
            cost += sc.prices.nominal[t] * res.grid_draw[t] * dt;

            // maximality: leftover headroom means every present session is saturated
            const double headroom = st.grid_capacity + sc.solar.cap[t] - load;
            if (headroom > 1e-7) {
                for (std::size_t i = 0; i < sc.sessions.size(); ++i) {
                    if (sc.availability(i, t) <= 0.0) continue;
                    const bool capped = res.allocation(i, t) >= sc.sessions[i].max_power * sc.availability(i, t) - 1e-9;
                    const bool done = residual[i] <= 1e-9;
                    CHECK((capped || done));
                }
            }
        }
        CHECK(res.cost == doctest::Approx(cost).epsilon(1e-12));
        for (std::size_t i = 0; i < sc.sessions.size(); ++i)
            CHECK(res.unmet_energy[i] == doctest::Approx(std::max(0.0, residual[i])).epsilon(1e-9));
    }
}

TEST_CASE("FCFS is deterministic") {
    synthetic::Rng rng(5);
    const auto sc = testing::random_day(rng, 20);
    const auto a = fcfs::run_fcfs(sc);
    const auto b = fcfs::run_fcfs(sc);
    CHECK(a.allocation == b.allocation);
    CHECK(a.unmet_energy == b.unmet_energy);
    CHECK(a.grid_draw == b.grid_draw);
    CHECK(a.cost == b.cost);
}
