#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "evsched/errors.hpp"
#include "evsched/scenario.hpp"
#include "evsched/synthetic.hpp"

using namespace evsched;

namespace {

TimeGrid day_grid(std::size_t slots = 24, double hours = 1.0) {
    return TimeGrid{parse_timestamp("2019-09-05T00:00:00Z"), slots, hours};
}

SessionParseResult parse_csv(const std::string& text, const TimeGrid& grid,
                             const StationConfig& station = StationConfig::caltech()) {
    std::istringstream in(text);
    return parse_sessions_csv(in, "sessions.csv", grid, station);
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / ("evsched_test_" + name);
    std::ofstream(path) << text;
    return path;
}

}  // namespace

TEST_CASE("timestamps") {
    const auto base = parse_timestamp("2018-04-25T11:08:04Z");
    CHECK(format_timestamp(base) == "2018-04-25T11:08:04Z");
    CHECK(parse_timestamp("Wed, 25 Apr 2018 11:08:04 GMT") == base);
    CHECK(parse_timestamp("2018-04-25 11:08:04") == base);
    CHECK(parse_timestamp("2018-04-25T13:08:04+02:00") == base);
    CHECK(parse_timestamp("2018-04-25T04:08:04-0700") == base);
    CHECK(parse_timestamp("2018-04-25T11:08:04.250Z") == base);
    CHECK(format_timestamp(parse_timestamp("2018-04-25")) == "2018-04-25T00:00:00Z");
    CHECK_THROWS_AS(parse_timestamp("2018-02-30T00:00Z"), InputError);
    CHECK_THROWS_AS(parse_timestamp("yesterday"), InputError);
    CHECK_THROWS_AS(parse_timestamp(""), InputError);
}

TEST_CASE("session windowing") {
    const auto grid = day_grid();
    const auto res = parse_csv(
        "id,arrival,departure,energy_kwh\n"
        "a,2019-09-05T08:30:00Z,2019-09-05T11:30:00Z,10\n"
        "early,2019-09-04T08:00:00Z,2019-09-04T11:00:00Z,5\n"
        "late,2019-09-05T22:00:00Z,2019-09-06T03:00:00Z,7\n",
        grid);
    REQUIRE(res.sessions.size() == 2);
    CHECK(res.dropped_outside == 1);
    const auto& a = res.sessions[0];
    CHECK(a.required_energy == 10.0);
    CHECK(a.max_power == 86.0);
    const auto row = availability_row(grid, a.arrival, a.departure);
    for (std::size_t t = 0; t < 24; ++t) {
        CAPTURE(t);
        const double expected = t == 8 || t == 11 ? 0.5 : (t == 9 || t == 10 ? 1.0 : 0.0);
        CHECK(row[t] == doctest::Approx(expected));
    }
    const auto& late = res.sessions[1];
    CHECK(late.departure == grid.end());
    CHECK(late.required_energy == 7.0);
}

TEST_CASE("default socket power follows the station") {
    const auto grid = day_grid();
    const std::string text = "id,arrival,departure,energy_kwh\nx,2019-09-05T08:00:00Z,2019-09-05T09:00:00Z,3\n";
    CHECK(parse_csv(text, grid, StationConfig::caltech()).sessions[0].max_power == 86.0);
    CHECK(parse_csv(text, grid, StationConfig::jpl()).sessions[0].max_power == 37.5);
    const auto explicit_power =
        parse_csv("id,arrival,departure,energy_kwh,max_power_kw\nx,2019-09-05T08:00:00Z,2019-09-05T09:00:00Z,3,11\n", grid);
    CHECK(explicit_power.sessions[0].max_power == 11.0);
}

TEST_CASE("malformed session rows") {
    const auto grid = day_grid();
    SUBCASE("bad timestamp names row and field") {
        try {
            parse_csv("id,arrival,departure,energy_kwh\nok,2019-09-05T08:00Z,2019-09-05T09:00Z,1\nbad,noon,2019-09-05T09:00Z,1\n",
                      grid);
            FAIL("expected an error");
        } catch (const InputError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("row 3") != std::string::npos);
            CHECK(msg.find("arrival") != std::string::npos);
        }
    }
    SUBCASE("bad energy") {
        CHECK_THROWS_WITH_AS(parse_csv("id,arrival,departure,energy_kwh\nx,2019-09-05T08:00Z,2019-09-05T09:00Z,lots\n", grid),
                             doctest::Contains("energy"), InputError);
    }
    SUBCASE("reversed times are rejected and counted") {
        const auto res = parse_csv(
            "id,arrival,departure,energy_kwh\nx,2019-09-05T09:00Z,2019-09-05T08:00Z,1\ny,2019-09-05T08:00Z,2019-09-05T09:00Z,1\n",
            grid);
        CHECK(res.rejected_rows == 1);
        CHECK(res.sessions.size() == 1);
    }
    SUBCASE("missing column") {
        CHECK_THROWS_AS(parse_csv("id,arrival,energy_kwh\n", grid), InputError);
    }
}

TEST_CASE("ACN JSON export") {
    const auto grid = TimeGrid{parse_timestamp("2018-04-25T00:00:00Z"), 24, 1.0};
    std::istringstream in(R"({"_items": [
        {"sessionID": "2_39_78_362", "connectionTime": "Wed, 25 Apr 2018 11:08:04 GMT",
         "disconnectTime": "Wed, 25 Apr 2018 13:20:10 GMT", "kWhDelivered": 7.932},
        {"sessionID": "2_39_95_27", "connectionTime": "Wed, 25 Apr 2018 13:45:10 GMT",
         "disconnectTime": "Thu, 26 Apr 2018 00:56:16 GMT", "kWhDelivered": 10.013}
    ]})");
    const auto res = parse_sessions_acn_json(in, "acn.json", grid, StationConfig::caltech());
    REQUIRE(res.sessions.size() == 2);
    CHECK(res.sessions[0].id == "2_39_78_362");
    CHECK(res.sessions[0].required_energy == 7.932);
    CHECK(res.sessions[1].departure == grid.end());

    std::istringstream broken(R"({"_items": [{"sessionID": "x", "connectionTime": "Wed, 25 Apr 2018 11:08:04 GMT"}]})");
    CHECK_THROWS_WITH_AS(parse_sessions_acn_json(broken, "acn.json", grid, StationConfig::caltech()),
                         doctest::Contains("disconnectTime"), InputError);
}

TEST_CASE("price ingestion") {
    const auto grid = day_grid(3);
    SUBCASE("EUR/MWh is divided by 1000") {
        const auto path = write_temp("p_mwh.csv",
                                     "timestamp,price\n2019-09-05T00:00Z,55.0\n2019-09-05T01:00Z,55.0\n2019-09-05T02:00Z,55.0\n");
        const auto p = parse_prices(path, grid, PriceUnits::kEurPerMWh);
        CHECK(p == std::vector<double>(3, 0.055));
    }
    SUBCASE("EUR/kWh passes through") {
        const auto path = write_temp("p_kwh.csv", "2019-09-05T00:00Z,0.12\n2019-09-05T01:00Z,0.12\n2019-09-05T02:00Z,0.12\n");
        CHECK(parse_prices(path, grid, PriceUnits::kEurPerKWh) == std::vector<double>(3, 0.12));
    }
    SUBCASE("constant series") {
        std::string text;
        for (int h = 0; h < 24; ++h) text += "2019-09-05T" + std::string(h < 10 ? "0" : "") + std::to_string(h) + ":00Z,1.0\n";
        const auto path = write_temp("p_const.csv", text);
        CHECK(parse_prices(path, day_grid(), PriceUnits::kEurPerKWh) == std::vector<double>(24, 1.0));
    }
    SUBCASE("gaps are listed") {
        const auto path = write_temp("p_gap.csv", "2019-09-05T00:00Z,1\n2019-09-05T02:00Z,1\n");
        CHECK_THROWS_WITH_AS(parse_prices(path, grid, PriceUnits::kEurPerKWh), doctest::Contains("slot(s) 1"), InputError);
    }
    SUBCASE("quarter-hour slots take the covering hour") {
        std::istringstream in("2019-09-05T00:00Z,10\n2019-09-05T01:00Z,20\n");
        const auto rows = read_series_csv(in, "mem");
        const auto v = align_series(rows, day_grid(8, 0.25), "mem");
        CHECK(v == std::vector<double>{10, 10, 10, 10, 20, 20, 20, 20});
    }
    SUBCASE("two-hour slots average") {
        std::istringstream in("2019-09-05T00:00Z,10\n2019-09-05T01:00Z,20\n");
        const auto rows = read_series_csv(in, "mem");
        CHECK(align_series(rows, day_grid(1, 2.0), "mem")[0] == doctest::Approx(15.0));
    }
}

TEST_CASE("PV capacity") {
    const auto station = StationConfig::caltech();
    const auto cap = pv_cap(std::vector<double>{0.0, 1000.0, 500.0}, station).cap;
    CHECK(cap[0] == 0.0);
    CHECK(cap[1] == doctest::Approx(16.0));
    CHECK(cap[2] == doctest::Approx(8.0));
    CHECK_THROWS_AS(pv_cap(std::vector<double>{-1.0}, station), InputError);

    synthetic::Rng rng(5);
    for (int k = 0; k < 50; ++k) {
        const double g1 = rng.uniform(0, 1100), g2 = rng.uniform(0, 1100), s = rng.uniform(0, 3);
        auto st = station;
        const double sum = pv_cap(std::vector<double>{g1 + g2}, st).cap[0];
        CHECK(sum == doctest::Approx(pv_cap(std::vector<double>{g1}, st).cap[0] + pv_cap(std::vector<double>{g2}, st).cap[0]));
        const double base = pv_cap(std::vector<double>{g1}, st).cap[0];
        st.pv_area *= s;
        CHECK(pv_cap(std::vector<double>{g1}, st).cap[0] == doctest::Approx(s * base));
    }
}

TEST_CASE("scenario assembly") {
    const auto grid = day_grid();
    const auto start = grid.start;
    using std::chrono::minutes;
    using std::chrono::hours;
    std::vector<ChargingSession> sessions{
        {"ten-min", start + hours{5} + minutes{20}, start + hours{5} + minutes{30}, 1.0, 10.0},
        {"three-slots", start + hours{3}, start + hours{6}, 5.0, 10.0},
    };
    const auto sc = build_scenario(sessions, std::vector<double>(24, 0.08), SolarSeries{std::vector<double>(24, 0.0)}, grid,
                                   StationConfig::caltech(), DeviationRule::fraction(0.25));
    CHECK(sc.availability(0, 5) == doctest::Approx(10.0 / 60.0));
    for (std::size_t t = 0; t < 24; ++t) CHECK(sc.availability(1, t) == (t >= 3 && t <= 5 ? 1.0 : 0.0));
    CHECK(sc.prices.deviation_bound[0] == doctest::Approx(0.02));

    const auto abs_sc = build_scenario(sessions, std::vector<double>(24, 0.08), SolarSeries{std::vector<double>(24, 0.0)},
                                       grid, StationConfig::caltech(), DeviationRule::absolute(0.01));
    CHECK(abs_sc.prices.deviation_bound[7] == 0.01);

    CHECK_THROWS_AS(build_scenario(sessions, std::vector<double>(23, 0.08), SolarSeries{std::vector<double>(24, 0.0)}, grid,
                                   StationConfig::caltech(), DeviationRule::fraction(0.25)),
                    InputError);
    CHECK_THROWS_AS(build_scenario(sessions, std::vector<double>(24, 0.08), SolarSeries{std::vector<double>(2, 0.0)}, grid,
                                   StationConfig::caltech(), DeviationRule::fraction(0.25)),
                    InputError);
}

TEST_CASE("availability integrates to the clipped connection time") {
    synthetic::Rng rng(11);
    for (const double slot_hours : {1.0, 0.25, 2.0}) {
        const auto grid = day_grid(static_cast<std::size_t>(24.0 / slot_hours), slot_hours);
        for (int k = 0; k < 100; ++k) {
            const auto a = grid.start + std::chrono::seconds{static_cast<long>(rng.uniform(-4, 26) * 3600)};
            const auto d = a + std::chrono::seconds{static_cast<long>(rng.uniform(60, 12 * 3600))};
            const auto row = availability_row(grid, a, d);
            double hours = 0.0;
            for (const double v : row) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
                hours += v * slot_hours;
            }
            const auto lo = std::max(a, grid.start);
            const auto hi = std::min(d, grid.end());
            const double expected = hi > lo ? static_cast<double>((hi - lo).count()) / 3600.0 : 0.0;
            CHECK(hours == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("sessions survive a write/parse round trip") {
    synthetic::Options opt;
    opt.sessions = 25;
    opt.days = 2;
    opt.seed = 3;
    const auto data = synthetic::generate(opt);
    std::ostringstream out;
    write_sessions_csv(out, data.sessions);
    const auto back = parse_csv(out.str(), data.grid);
    REQUIRE(back.sessions.size() == data.sessions.size());
    for (std::size_t i = 0; i < back.sessions.size(); ++i) {
        CHECK(back.sessions[i].id == data.sessions[i].id);
        CHECK(back.sessions[i].arrival == data.sessions[i].arrival);
        CHECK(back.sessions[i].departure == data.sessions[i].departure);
        CHECK(back.sessions[i].required_energy == data.sessions[i].required_energy);
        CHECK(back.sessions[i].max_power == data.sessions[i].max_power);
    }
}

TEST_CASE("bundled toy fixture loads") {
    const std::filesystem::path dir = EVSCHED_DATA_DIR "/toy";
    const auto grid = day_grid();
    const auto station = StationConfig::caltech();
    const auto sessions = parse_sessions(dir / "sessions.csv", grid, station);
    CHECK(sessions.sessions.size() == 3);
    CHECK(sessions.sessions[0].max_power == 86.0);
    CHECK(sessions.sessions[1].max_power == 37.5);
    const auto prices = parse_prices(dir / "prices.csv", grid, PriceUnits::kEurPerMWh);
    CHECK(prices[10] == doctest::Approx(0.055));
    const auto solar = pv_cap(parse_irradiance(dir / "irradiance.csv", grid), station);
    CHECK(solar.cap[0] == 0.0);
    CHECK(solar.cap[12] > 10.0);
}
