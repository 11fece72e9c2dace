// SPDX-License-Identifier: Apache-2.0
// evsched: offline/online EV charging schedules, FCFS comparison, budget
// sensitivity sweeps and solve-time benchmarks.
#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "evsched/errors.hpp"
#include "evsched/model.hpp"
#include "evsched/report.hpp"
#include "evsched/scenario.hpp"
#include "evsched/synthetic.hpp"

namespace fs = std::filesystem;
using namespace evsched;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitInternal = 3;

struct DataFlags {
    std::string sessions;
    std::string prices;
    std::string price_units{"eur/mwh"};
    std::string irradiance;
    std::string start;
    std::size_t slots{0};
    double slot_hours{1.0};
    std::string station{"caltech"};
    std::optional<double> grid_capacity;
    std::optional<double> pv_area;
    double deviation_fraction{0.25};
    std::optional<double> deviation_absolute;
    bool no_solar{false};
    std::string demand_policy{"clamp"};
};

void add_data_flags(CLI::App* cmd, DataFlags& f) {
    cmd->add_option("--sessions", f.sessions, "Sessions file (.csv or ACN .json)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--prices", f.prices, "Price CSV (timestamp,value)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--price-units", f.price_units, "eur/mwh or eur/kwh")
        ->check(CLI::IsMember({"eur/mwh", "eur/kwh"}))
        ->capture_default_str();
    cmd->add_option("--irradiance", f.irradiance, "Irradiance CSV in W/m^2; omit for no PV")->check(CLI::ExistingFile);
    cmd->add_option("--start", f.start, "Grid start (default: first price timestamp)");
    cmd->add_option("--slots", f.slots, "Number of slots (default: span of the price file)");
    cmd->add_option("--slot-hours", f.slot_hours, "Slot length in hours")->capture_default_str();
    cmd->add_option("--station", f.station, "Station preset")->check(CLI::IsMember({"caltech", "jpl"}))->capture_default_str();
    cmd->add_option("--grid-capacity", f.grid_capacity, "Grid capacity override (kW)");
    cmd->add_option("--pv-area", f.pv_area, "PV area override (m^2)");
    auto* frac = cmd->add_option("--deviation-fraction", f.deviation_fraction, "Price deviation bound as a fraction of price")
                     ->capture_default_str();
    cmd->add_option("--deviation-absolute", f.deviation_absolute, "Price deviation bound in EUR/kWh")->excludes(frac);
    cmd->add_flag("--no-solar", f.no_solar, "Zero the PV cap for every method");
    cmd->add_option("--demand-policy", f.demand_policy, "strict or clamp")
        ->check(CLI::IsMember({"strict", "clamp"}))
        ->capture_default_str();
}

model::DemandPolicy demand_policy(const std::string& name) {
    return name == "strict" ? model::DemandPolicy::kStrict : model::DemandPolicy::kClamp;
}

TimeGrid resolve_grid(const DataFlags& f) {
    if (!(f.slot_hours > 0.0)) throw InputError("--slot-hours must be positive");
    std::ifstream in(f.prices);
    if (!in) throw InputError("cannot open " + f.prices);
    const auto rows = read_series_csv(in, f.prices);
    if (rows.empty()) throw InputError(f.prices + ": no rows");
    TimeGrid grid;
    grid.slot_hours = f.slot_hours;
    grid.start = f.start.empty() ? rows.front().time : parse_timestamp(f.start);
    if (f.slots > 0) {
        grid.num_slots = f.slots;
    } else {
        const auto end = rows.back().time + std::chrono::hours{1};
        const double hours = std::chrono::duration<double>(end - grid.start).count() / 3600.0;
        if (hours <= 0.0) throw InputError("--start lies after the last price row");
        grid.num_slots = static_cast<std::size_t>(std::floor(hours / f.slot_hours + 1e-9));
    }
    grid.validate();
    return grid;
}

Scenario load_scenario(const DataFlags& f) {
    const auto grid = resolve_grid(f);
    auto station = f.station == "jpl" ? StationConfig::jpl() : StationConfig::caltech();
    if (f.grid_capacity) station.grid_capacity = *f.grid_capacity;
    if (f.pv_area) station.pv_area = *f.pv_area;
    station.validate();

    auto sessions = parse_sessions(f.sessions, grid, station);
    if (sessions.rejected_rows > 0 || sessions.dropped_outside > 0)
        std::cerr << "sessions: " << sessions.sessions.size() << " loaded, " << sessions.rejected_rows << " rejected, "
                  << sessions.dropped_outside << " outside the horizon\n";
    auto prices = parse_prices(f.prices, grid, f.price_units == "eur/kwh" ? PriceUnits::kEurPerKWh : PriceUnits::kEurPerMWh);
    SolarSeries solar{std::vector<double>(grid.num_slots, 0.0)};
    if (!f.irradiance.empty()) solar = pv_cap(parse_irradiance(f.irradiance, grid), station);
    const auto rule =
        f.deviation_absolute ? DeviationRule::absolute(*f.deviation_absolute) : DeviationRule::fraction(f.deviation_fraction);
    auto sc = build_scenario(std::move(sessions.sessions), std::move(prices), std::move(solar), grid, station, rule);
    return f.no_solar ? without_solar(std::move(sc)) : sc;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    return out;
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
    auto out = open_out(path);
    out << std::setw(2) << doc << "\n";
}

void print_adjustments(const report::RunReport& r) {
    for (const auto& a : r.adjustments)
        std::cerr << "demand clamped: " << a.session_id << " " << a.requested << " kWh -> " << a.deliverable << " kWh\n";
}

void print_methods(const report::RunReport& r) {
    std::cout << std::fixed << std::setprecision(4);
    for (const auto& m : r.methods) {
        std::cout << std::left << std::setw(8) << m.name << " cost " << m.total_cost << " EUR  unmet " << m.unmet_energy
                  << " kWh";
        if (m.worst_case_cost) std::cout << "  worst case " << *m.worst_case_cost << " EUR";
        std::cout << "\n";
    }
    for (const auto& row : r.monthly)
        std::cout << row.month << "  fcfs " << row.fcfs_cost << "  " << r.optimized_method << " " << row.optimized_cost
                  << "  savings " << std::setprecision(2) << row.savings_percent << "%\n"
                  << std::setprecision(4);
}

int run_simulate(const DataFlags& data, const std::string& policy, double gamma, std::size_t resolve_interval,
                 const std::string& horizon, const std::string& out_dir, const std::string& dump_lp) {
    const Scenario sc = load_scenario(data);
    report::SimulateOptions opt;
    opt.policy = report::method_from_string(policy);
    opt.gamma = gamma;
    opt.resolve_interval = resolve_interval;
    opt.demand_policy = demand_policy(data.demand_policy);
    opt.daily_horizon = horizon == "daily";

    if (!dump_lp.empty()) {
        const auto adjusted = model::apply_demand_policy(sc, opt.demand_policy);
        const auto built = opt.policy == report::Method::kRobust ? model::build_robust_lp(adjusted.scenario, gamma)
                                                                  : model::build_nominal_lp(adjusted.scenario);
        auto out = open_out(dump_lp);
        lp::write_text(out, built.program);
        write_json(fs::path(dump_lp).concat(".vars.json"), built.vars.to_json());
    }

    const auto r = report::simulate(sc, opt);
    print_adjustments(r);
    if (out_dir.empty()) {
        std::cout << std::setw(2) << report::to_json(r) << "\n";
        return 0;
    }
    fs::create_directories(out_dir);
    write_json(fs::path(out_dir) / "report.json", report::to_json(r));
    auto slots = open_out(fs::path(out_dir) / "slots.csv");
    report::write_slot_csv(slots, r);
    if (r.mpc_trace) {
        write_json(fs::path(out_dir) / "mpc_trace.json", mpc::to_json(*r.mpc_trace));
        auto events = open_out(fs::path(out_dir) / "solve_events.csv");
        mpc::write_solve_events_csv(events, *r.mpc_trace);
    }
    print_methods(r);
    return 0;
}

int run_sensitivity(const DataFlags& data, const std::vector<double>& gammas, std::optional<double> eval_gamma,
                    const std::string& out_dir) {
    const Scenario sc = load_scenario(data);
    const auto r = report::sensitivity(sc, gammas, demand_policy(data.demand_policy), eval_gamma);
    print_adjustments(r);
    if (out_dir.empty()) {
        std::cout << std::setw(2) << report::to_json(r) << "\n";
        return 0;
    }
    fs::create_directories(out_dir);
    write_json(fs::path(out_dir) / "report.json", report::to_json(r));
    auto csv = open_out(fs::path(out_dir) / "sensitivity.csv");
    report::write_sensitivity_csv(csv, r);
    std::cout << "worst case evaluated at gamma " << *r.evaluation_gamma << "\n" << std::fixed << std::setprecision(4);
    for (const auto& row : r.sensitivity)
        std::cout << "gamma " << std::setw(6) << row.gamma << "  nominal " << row.nominal_cost << "  worst case "
                  << row.worst_case_cost << "  increase " << std::setprecision(2) << row.increase_percent << "%\n"
                  << std::setprecision(4);
    return 0;
}

int run_bench(const report::BenchOptions& opt, const std::string& out_dir) {
    const auto r = report::bench(opt);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_json(fs::path(out_dir) / "report.json", report::to_json(r));
        auto csv = open_out(fs::path(out_dir) / "bench.csv");
        report::write_bench_csv(csv, r);
    }
    std::cout << std::fixed << std::setprecision(4);
    for (const auto& row : r.bench)
        std::cout << std::setw(4) << row.num_evs << " EVs  mean " << row.mean_seconds << " s over " << row.repetitions
                  << " runs\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EV charging schedules: FCFS, nominal and robust LP, receding-horizon control"};
    app.require_subcommand(1);

    DataFlags sim_data;
    std::string policy{"nominal"}, horizon{"single"}, sim_out, dump_lp;
    double gamma{0.0};
    std::size_t resolve_interval{1};
    auto* sim = app.add_subcommand("simulate", "Compare FCFS with an optimized policy on one scenario");
    add_data_flags(sim, sim_data);
    sim->add_option("--policy", policy, "fcfs, nominal, robust or mpc")
        ->check(CLI::IsMember({"fcfs", "nominal", "robust", "mpc"}))
        ->capture_default_str();
    sim->add_option("--gamma", gamma, "Uncertainty budget (robust, mpc, worst-case column)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sim->add_option("--resolve-interval", resolve_interval, "Slots between periodic re-solves (mpc)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sim->add_option("--horizon", horizon, "single or daily (offline methods)")
        ->check(CLI::IsMember({"single", "daily"}))
        ->capture_default_str();
    sim->add_option("--out", sim_out, "Output directory (default: JSON on stdout)");
    sim->add_option("--dump-lp", dump_lp, "Write the assembled LP as text");

    DataFlags sens_data;
    std::vector<double> gammas{0.0, 15.0, 30.0};
    std::optional<double> eval_gamma;
    std::string sens_out;
    auto* sens = app.add_subcommand("sensitivity", "Robust solves over a list of budgets");
    add_data_flags(sens, sens_data);
    sens->add_option("--gammas", gammas, "Budgets to solve")->delimiter(',')->capture_default_str();
    sens->add_option("--eval-gamma", eval_gamma, "Budget for worst-case evaluation (default: largest gamma)");
    sens->add_option("--out", sens_out, "Output directory (default: JSON on stdout)");

    report::BenchOptions bench_opt;
    std::string bench_out;
    auto* bench = app.add_subcommand("bench", "Time robust solves with concurrent EVs");
    bench->add_option("--counts", bench_opt.counts, "EV counts")->delimiter(',')->capture_default_str();
    bench->add_option("--repetitions", bench_opt.repetitions, "Solves per count")->capture_default_str();
    bench->add_option("--seed", bench_opt.seed, "Scenario seed")->capture_default_str();
    bench->add_option("--gamma", bench_opt.gamma, "Uncertainty budget")->capture_default_str();
    bench->add_option("--slots", bench_opt.slots, "Slots per day")->capture_default_str();
    bench->add_option("--out", bench_out, "Output directory");

    synthetic::Options gen_opt;
    std::string gen_out, gen_station{"caltech"};
    bool gen_flat{false}, gen_dark{false};
    auto* gen = app.add_subcommand("generate", "Write a seeded synthetic fixture (sessions, prices, irradiance)");
    gen->add_option("--out", gen_out, "Fixture directory")->required();
    gen->add_option("--sessions", gen_opt.sessions, "Number of sessions")->capture_default_str();
    gen->add_option("--days", gen_opt.days, "Number of days")->capture_default_str();
    gen->add_option("--seed", gen_opt.seed, "Seed")->capture_default_str();
    gen->add_option("--start", [&](const std::vector<std::string>& v) {
        gen_opt.start = parse_timestamp(v.front());
        return true;
    }, "First day (UTC)");
    gen->add_option("--station", gen_station, "Station preset")->check(CLI::IsMember({"caltech", "jpl"}));
    gen->add_flag("--flat-prices", gen_flat, "Constant prices");
    gen->add_flag("--no-solar", gen_dark, "Zero irradiance");
    gen->add_flag("--concurrent", gen_opt.concurrent, "Every EV present for the whole horizon");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (*sim) return run_simulate(sim_data, policy, gamma, resolve_interval, horizon, sim_out, dump_lp);
        if (*sens) return run_sensitivity(sens_data, gammas, eval_gamma, sens_out);
        if (*bench) return run_bench(bench_opt, bench_out);
        if (*gen) {
            gen_opt.station = gen_station == "jpl" ? StationConfig::jpl() : StationConfig::caltech();
            gen_opt.flat_prices = gen_flat;
            gen_opt.solar = !gen_dark;
            const auto data = synthetic::generate(gen_opt);
            synthetic::write_fixture(gen_out, data);
            std::cout << "wrote " << data.sessions.size() << " sessions over " << data.grid.num_slots << " slots to "
                      << gen_out << "\n";
            return 0;
        }
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const InfeasibleDemandError& e) {
        std::cerr << "infeasible demand: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return 0;
}
