// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "evsched/fcfs.hpp"
#include "evsched/lp.hpp"
#include "evsched/model.hpp"
#include "evsched/mpc.hpp"
#include "evsched/report.hpp"
#include "evsched/uncertainty.hpp"
#include "oracles/random_lp.hpp"
#include "oracles/vertex_enumeration.hpp"
#include "support/scenarios.hpp"

using namespace evsched;

namespace {

struct Outcome {
    bool pass{false};
    std::string detail;
};

// Independent check of the charging constraints: delivered energy, socket cap,
// grid cap, nonnegativity and solar cap.
std::optional<std::string> violated(const Scenario& sc, const model::Schedule& s, double tol) {
    const double dt = sc.grid.slot_hours;
    for (std::size_t i = 0; i < sc.sessions.size(); ++i) {
        double energy = 0.0;
        for (std::size_t t = 0; t < sc.grid.num_slots; ++t) {
            const double y = s.charging_power(i, t);
            if (y < -tol) return "negative power";
            if (y > sc.sessions[i].max_power * sc.availability(i, t) + tol) return "socket cap";
            energy += y * dt;
        }
        if (sc.station.charge_efficiency * energy < sc.sessions[i].required_energy - tol) return "delivered energy";
    }
    for (std::size_t t = 0; t < sc.grid.num_slots; ++t) {
        double load = 0.0;
        for (std::size_t i = 0; i < sc.sessions.size(); ++i) load += s.charging_power(i, t);
        if (load - s.solar_used[t] > sc.station.grid_capacity + tol) return "grid cap";
        if (s.net_purchase[t] < -tol || s.net_purchase[t] < load - s.solar_used[t] - tol) return "net purchase";
        if (s.solar_used[t] < -tol || s.solar_used[t] > sc.solar.cap[t] + tol) return "solar cap";
    }
    return std::nullopt;
}

Scenario week_fixture() {
    const std::filesystem::path dir = EVSCHED_DATA_DIR "/week";
    std::ifstream in(dir / "prices.csv");
    const auto rows = read_series_csv(in, "prices.csv");
    const TimeGrid grid{rows.front().time, rows.size(), 1.0};
    const auto station = StationConfig::caltech();
    auto sessions = parse_sessions(dir / "sessions.csv", grid, station).sessions;
    auto prices = parse_prices(dir / "prices.csv", grid, PriceUnits::kEurPerMWh);
    auto solar = pv_cap(parse_irradiance(dir / "irradiance.csv", grid), station);
    return build_scenario(std::move(sessions), std::move(prices), std::move(solar), grid, station,
                          DeviationRule::fraction(0.25));
}

Outcome dual_equivalence() {
    synthetic::Rng rng(20240501);
    double worst = 0.0;
    int fractional = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + rng.index(12);
        std::vector<double> s(n), dev(n);
        for (std::size_t t = 0; t < n; ++t) {
            s[t] = rng.uniform() < 0.15 ? 0.0 : rng.uniform(0, 100);
            dev[t] = rng.uniform(0, 0.08);
        }
        const bool integral = trial % 2 == 0;
        const double gamma = integral ? static_cast<double>(rng.index(n + 2)) : rng.uniform(0, static_cast<double>(n) + 1);
        fractional += !integral;
        const auto res = uncertainty::verify_dual_equivalence(s, rng.uniform(0.25, 2.0), {gamma, dev});
        worst = std::max(worst, res.residual / (1.0 + res.oracle));
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "500 instances (%d fractional gamma), max residual/(1+oracle) %.2e", fractional, worst);
    return {worst <= 1e-6, buf};
}

Outcome lp_oracle() {
    synthetic::Rng rng(1234567);
    int mismatches = 0, infeasible = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto rlp = testing::random_lp(rng);
        const auto expected = oracle::enumerate_vertices(rlp.program);
        const auto sol = lp::solve_lp(rlp.program);
        if (!expected) {
            ++infeasible;
            mismatches += sol.status != lp::Status::kInfeasible;
            continue;
        }
        if (!sol.optimal() || std::abs(*sol.objective_value - *expected) > 1e-6 * std::max(1.0, std::abs(*expected)))
            ++mismatches;
    }

    // Beale's cycling example and a stack of duplicated degenerate rows.
    lp::LinearProgram beale(4);
    const double obj[] = {-0.75, 20.0, -0.5, 6.0};
    for (std::size_t j = 0; j < 4; ++j) beale.set_objective(j, obj[j]);
    beale.add_constraint({{0, 0.25}, {1, -8.0}, {2, -1.0}, {3, 9.0}}, lp::Relation::kLessEqual, 0.0);
    beale.add_constraint({{0, 0.5}, {1, -12.0}, {2, -0.5}, {3, 3.0}}, lp::Relation::kLessEqual, 0.0);
    beale.add_constraint({{2, 1.0}}, lp::Relation::kLessEqual, 1.0);
    const auto b = lp::solve_lp(beale);
    const bool beale_ok = b.optimal() && std::abs(*b.objective_value + 1.25) <= 1e-9;

    lp::LinearProgram dup(3);
    for (std::size_t j = 0; j < 3; ++j) {
        dup.set_bounds(j, 0.0, 5.0);
        dup.set_objective(j, -1.0 - static_cast<double>(j));
    }
    for (int k = 0; k < 5; ++k) {
        dup.add_constraint({{0, 1.0}, {1, 1.0}, {2, 1.0}}, lp::Relation::kLessEqual, 4.0);
        dup.add_constraint({{0, 1.0}, {2, -1.0}}, lp::Relation::kGreaterEqual, 0.0);
        dup.add_constraint({{0, 1.0}, {1, 1.0}, {2, 1.0}}, lp::Relation::kEqual, 4.0);
    }
    const auto d = lp::solve_lp(dup);
    const bool dup_ok = d.optimal() && std::abs(*d.objective_value - *oracle::enumerate_vertices(dup)) <= 1e-9;

    char buf[160];
    std::snprintf(buf, sizeof buf, "200 programs (%d infeasible), %d mismatches; degenerate fixtures %s", infeasible,
                  mismatches, beale_ok && dup_ok ? "terminate at their optima" : "FAILED");
    return {mismatches == 0 && beale_ok && dup_ok, buf};
}

Outcome fcfs_dominance() {
    synthetic::Rng rng(777);
    int checked = 0, attempts = 0, failures = 0;
    double savings = 0.0;
    while (checked < 200 && attempts < 2000) {
        ++attempts;
        const auto sc = testing::random_day(rng, 10);
        const auto greedy = fcfs::run_fcfs(sc);
        if (*std::max_element(greedy.unmet_energy.begin(), greedy.unmet_energy.end()) > 1e-9) continue;
        ++checked;
        const auto built = model::build_nominal_lp(sc);
        const auto point = model::point_from_allocation(built.vars, sc, greedy.allocation);
        const bool feasible = lp::check_point(built.program, point, 1e-6).empty();
        const double optimum = model::optimize(sc, std::nullopt).nominal_cost;
        if (!feasible || optimum > greedy.cost + 1e-9) ++failures;
        if (greedy.cost > 0.0) savings += (greedy.cost - optimum) / greedy.cost;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d scenarios with FCFS meeting demand, %d failures, mean saving %.1f%%", checked, failures,
                  checked ? 100.0 * savings / checked : 0.0);
    return {checked == 200 && failures == 0, buf};
}

Outcome gamma_monotonicity() {
    synthetic::Rng rng(4242);
    int failures = 0;
    double worst_zero = 0.0, worst_full = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto sc = model::apply_demand_policy(testing::random_day(rng, 8), model::DemandPolicy::kClamp).scenario;
        const std::size_t T = sc.grid.num_slots;
        const double nominal = model::optimize(sc, std::nullopt).objective_value;
        auto inflated = sc;
        for (std::size_t t = 0; t < T; ++t) inflated.prices.nominal[t] += sc.prices.deviation_bound[t];
        const double inflated_opt = model::optimize(inflated, std::nullopt).objective_value;
        double prev = -1.0;
        for (std::size_t g = 0; g <= T; ++g) {
            const double obj = model::optimize(sc, static_cast<double>(g)).objective_value;
            if (obj < prev - 1e-9) ++failures;
            prev = obj;
            if (g == 0) worst_zero = std::max(worst_zero, std::abs(obj - nominal) / std::max(1.0, std::abs(nominal)));
            if (g == T) worst_full = std::max(worst_full, std::abs(obj - inflated_opt) / std::max(1.0, std::abs(inflated_opt)));
        }
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "50 scenarios x gamma 0..T, %d decreases, gamma=0 rel err %.1e, gamma=T rel err %.1e",
                  failures, worst_zero, worst_full);
    return {failures == 0 && worst_zero <= 1e-9 && worst_full <= 1e-6, buf};
}

Outcome sensitivity_trend() {
    const auto sc = week_fixture();
    const auto r = report::sensitivity(sc, {0.0, 30.0}, model::DemandPolicy::kClamp, 30.0);
    const auto& lo = r.sensitivity.front();
    const auto& hi = r.sensitivity.back();
    const double worst_drop = lo.worst_case_cost > 0.0 ? 100.0 * (lo.worst_case_cost - hi.worst_case_cost) / lo.worst_case_cost : 0.0;
    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "week fixture: nominal %.2f -> %.2f EUR (+%.2f%%), worst case at gamma 30 %.2f -> %.2f EUR (-%.2f%%)",
                  lo.nominal_cost, hi.nominal_cost, hi.increase_percent, lo.worst_case_cost, hi.worst_case_cost, worst_drop);
    return {hi.nominal_cost > lo.nominal_cost && hi.worst_case_cost < lo.worst_case_cost, buf};
}

Outcome mpc_offline() {
    synthetic::Rng rng(6060);
    int failures = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t T = 6 + rng.index(19);
        std::vector<double> prices(T), solar(T);
        for (std::size_t t = 0; t < T; ++t) {
            prices[t] = rng.uniform(0.02, 0.3);
            solar[t] = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0, 30);
        }
        std::vector<testing::Stay> stays;
        const std::size_t n = 1 + rng.index(8);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t end = 1 + rng.index(T);
            const double power = rng.uniform(3.0, 20.0);
            stays.push_back({"ev" + std::to_string(i), 0, end, rng.uniform(0.0, 0.9) * power * static_cast<double>(end), power});
        }
        auto st = StationConfig::caltech();
        st.grid_capacity = rng.uniform(20.0, 80.0);
        const auto sc = model::apply_demand_policy(testing::hourly_scenario(prices, stays, solar, st),
                                                   model::DemandPolicy::kClamp).scenario;
        const double offline = model::optimize(sc, std::nullopt).nominal_cost;
        mpc::MpcConfig cfg;
        cfg.resolve_interval = T + 1;
        const double online = mpc::run_online(sc, cfg).total_cost;
        const double rel = std::abs(online - offline) / std::max(1.0, offline);
        worst = std::max(worst, rel);
        failures += rel > 1e-6;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "50 batch scenarios, %d mismatches, max rel diff %.1e", failures, worst);
    return {failures == 0, buf};
}

Outcome solve_time() {
    report::BenchOptions opt;
    opt.counts = {10, 50};
    opt.repetitions = 5;
    const auto r = report::bench(opt);
    const double t10 = r.bench[0].mean_seconds, t50 = r.bench[1].mean_seconds;
    char buf[160];
    std::snprintf(buf, sizeof buf, "robust 24-slot solve mean: 10 EVs %.4f s (limit 1), 50 EVs %.4f s (limit 5)", t10, t50);
    return {t10 <= 1.0 && t50 <= 5.0, buf};
}

Outcome savings() {
    const auto r = report::simulate(week_fixture(), {});
    const double fcfs = r.find("fcfs")->total_cost;
    const double opt = r.find("nominal")->total_cost;
    char buf[160];
    std::snprintf(buf, sizeof buf, "week fixture: FCFS %.2f EUR, optimized %.2f EUR, savings %.2f%%", fcfs, opt,
                  100.0 * (fcfs - opt) / fcfs);
    return {opt < fcfs, buf};
}

Outcome constraint_fuzz() {
    synthetic::Rng rng(9999);
    int failures = 0, robust = 0;
    std::string first;
    for (int trial = 0; trial < 500; ++trial) {
        const auto sc = model::apply_demand_policy(testing::random_day(rng, 12), model::DemandPolicy::kClamp).scenario;
        std::optional<double> gamma;
        if (trial % 2) {
            gamma = rng.uniform(0, 24);
            ++robust;
        }
        const auto sched = model::optimize(sc, gamma);
        if (const auto why = violated(sc, sched, 1e-6)) {
            ++failures;
            if (first.empty()) first = *why;
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "500 scenarios (%d robust), %d violating schedules%s%s", robust, failures,
                  first.empty() ? "" : ", first: ", first.c_str());
    return {failures == 0, buf};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
        double time_limit;  // seconds, 0 = none
    };
    const std::vector<Criterion> criteria{
        {1, "dual equivalence", dual_equivalence, 10.0},
        {2, "LP oracle equivalence", lp_oracle, 10.0},
        {3, "FCFS dominance", fcfs_dominance, 60.0},
        {4, "gamma monotonicity and endpoints", gamma_monotonicity, 0.0},
        {5, "sensitivity trend", sensitivity_trend, 0.0},
        {6, "MPC matches offline", mpc_offline, 0.0},
        {7, "solve time", solve_time, 0.0},
        {8, "savings vs FCFS", savings, 0.0},
        {9, "constraint fuzz", constraint_fuzz, 0.0},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome out;
        const auto started = std::chrono::steady_clock::now();
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        if (c.time_limit > 0.0 && seconds > c.time_limit) {
            out.pass = false;
            out.detail += " (over time limit)";
        }
        failed += !out.pass;
        std::printf("[%s] %d %s: %s [%.2f s]\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(), seconds);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
