// SPDX-License-Identifier: Apache-2.0
#include "evsched/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <ostream>

#include "evsched/errors.hpp"
#include "evsched/fcfs.hpp"
#include "evsched/mpc.hpp"
#include "evsched/synthetic.hpp"
#include "evsched/uncertainty.hpp"

namespace evsched::report {
namespace {

struct Allocation {
    Matrix power;                    // sessions x slots
    std::vector<double> solar;       // solar made available to the load, kW
};

// A scenario window plus where its sessions and slots sit in the parent.
struct Window {
    Scenario scenario;
    std::size_t first_slot{0};
    std::vector<std::size_t> sessions;
};

std::vector<Window> make_windows(const Scenario& sc, bool daily) {
    if (!daily) {
        std::vector<std::size_t> all(sc.num_sessions());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return {Window{sc, 0, std::move(all)}};
    }
    const auto per_day = static_cast<std::size_t>(std::max<long long>(1, std::llround(24.0 / sc.grid.slot_hours)));
    std::vector<Window> out;
    for (std::size_t first = 0; first < sc.num_slots(); first += per_day) {
        const std::size_t count = std::min(per_day, sc.num_slots() - first);
        std::vector<std::size_t> ids;
        std::vector<double> demands;
        for (std::size_t i = 0; i < sc.num_sessions(); ++i) {
            const auto [begin, end] = presence_window(sc, i);
            if (begin == end || begin < first || begin >= first + count) continue;
            ids.push_back(i);
            demands.push_back(sc.sessions[i].required_energy);
        }
        out.push_back(Window{slice_scenario(sc, first, count, ids, demands), first, ids});
    }
    return out;
}

Allocation stitch(const Scenario& sc, const std::vector<Window>& windows,
                  const std::function<Allocation(const Scenario&)>& solve) {
    Allocation out{Matrix(sc.num_sessions(), sc.num_slots()), std::vector<double>(sc.num_slots(), 0.0)};
    for (const auto& w : windows) {
        const Allocation part = solve(w.scenario);
        for (std::size_t k = 0; k < w.sessions.size(); ++k)
            for (std::size_t t = 0; t < w.scenario.num_slots(); ++t)
                out.power(w.sessions[k], w.first_slot + t) = part.power(k, t);
        for (std::size_t t = 0; t < w.scenario.num_slots(); ++t) out.solar[w.first_slot + t] = part.solar[t];
    }
    return out;
}

MethodResult summarize(const std::string& name, const Scenario& sc, const Allocation& alloc) {
    MethodResult r;
    r.name = name;
    const std::size_t T = sc.num_slots();
    r.grid_draw = model::grid_draw(alloc.power, alloc.solar);
    r.solar_used.resize(T);
    r.slot_cost.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
        double load = 0.0;
        for (std::size_t i = 0; i < sc.num_sessions(); ++i) load += alloc.power(i, t);
        r.solar_used[t] = std::min(load, alloc.solar[t]);
        r.slot_cost[t] = sc.prices.nominal[t] * r.grid_draw[t] * sc.grid.slot_hours;
        r.total_cost += r.slot_cost[t];
    }
    for (std::size_t i = 0; i < sc.num_sessions(); ++i) {
        double delivered = 0.0;
        for (std::size_t t = 0; t < T; ++t) delivered += alloc.power(i, t) * sc.grid.slot_hours;
        delivered *= sc.station.charge_efficiency;
        r.unmet_energy += std::max(0.0, sc.sessions[i].required_energy - delivered);
    }
    return r;
}

Allocation offline(const Scenario& window, std::optional<double> gamma, model::DemandPolicy policy,
                   std::vector<AdjustmentRow>* adjustments) {
    auto adjusted = model::apply_demand_policy(window, policy);
    if (adjustments)
        for (const auto& a : adjusted.adjustments) adjustments->push_back({a.session_id, a.requested, a.deliverable});
    auto sched = model::optimize(adjusted.scenario, gamma);
    return Allocation{std::move(sched.charging_power), std::move(sched.solar_used)};
}

double percent_change(double from, double to) { return from > 0.0 ? 100.0 * (to - from) / from : 0.0; }

}  // namespace

const char* to_string(Method method) {
    switch (method) {
        case Method::kFcfs: return "fcfs";
        case Method::kNominal: return "nominal";
        case Method::kRobust: return "robust";
        case Method::kMpc: return "mpc";
    }
    return "unknown";
}

Method method_from_string(const std::string& name) {
    if (name == "fcfs") return Method::kFcfs;
    if (name == "nominal") return Method::kNominal;
    if (name == "robust") return Method::kRobust;
    if (name == "mpc") return Method::kMpc;
    throw InputError("unknown policy '" + name + "'");
}

const MethodResult* RunReport::find(const std::string& name) const {
    for (const auto& m : methods)
        if (m.name == name) return &m;
    return nullptr;
}

RunReport simulate(const Scenario& sc, const SimulateOptions& opt) {
    if (!(opt.gamma >= 0.0)) throw InputError("gamma must be nonnegative");
    const Scenario base = opt.no_solar ? without_solar(sc) : sc;
    auto adjusted = model::apply_demand_policy(base, opt.demand_policy);
    const Scenario& work = adjusted.scenario;

    RunReport report;
    for (std::size_t t = 0; t < work.num_slots(); ++t) report.timestamps.push_back(format_timestamp(work.grid.slot_start(t)));
    report.prices = work.prices.nominal;
    for (const auto& a : adjusted.adjustments) report.adjustments.push_back({a.session_id, a.requested, a.deliverable});

    const auto windows = make_windows(work, opt.daily_horizon);
    const uncertainty::UncertaintyBudget budget{opt.gamma, work.prices.deviation_bound};
    auto add = [&](const std::string& name, const Allocation& alloc) {
        auto r = summarize(name, work, alloc);
        r.worst_case_cost = r.total_cost + uncertainty::worst_case_extra_cost(r.grid_draw, work.grid.slot_hours, budget);
        report.methods.push_back(std::move(r));
    };

    add("fcfs", stitch(work, windows, [](const Scenario& w) {
            auto f = fcfs::run_fcfs(w);
            return Allocation{std::move(f.allocation), w.solar.cap};
        }));
    report.optimized_method = "fcfs";
    if (opt.policy != Method::kFcfs) {
        // Day windows clip overnight sessions, so they get their own demand pass.
        std::vector<AdjustmentRow>* window_adjustments = opt.daily_horizon ? &report.adjustments : nullptr;
        add("nominal", stitch(work, windows, [&](const Scenario& w) {
                return offline(w, std::nullopt, opt.demand_policy, window_adjustments);
            }));
        report.optimized_method = "nominal";
        if (opt.policy == Method::kRobust) {
            add("robust", stitch(work, windows, [&](const Scenario& w) {
                    return offline(w, opt.gamma, opt.demand_policy, nullptr);
                }));
            report.optimized_method = "robust";
        }
        if (opt.policy == Method::kMpc) {
            mpc::MpcConfig cfg;
            cfg.resolve_interval = opt.resolve_interval;
            cfg.demand_policy = opt.demand_policy;
            if (opt.gamma > 0.0) cfg.gamma = opt.gamma;
            auto trace = mpc::run_online(work, cfg);
            add("mpc", Allocation{trace.applied_power, trace.applied_solar});
            report.mpc_trace = std::move(trace);
            report.optimized_method = "mpc";
        }
    }

    const auto* fcfs_result = report.find("fcfs");
    const auto* opt_result = report.find(report.optimized_method);
    std::map<std::string, MonthlyRow> months;
    for (std::size_t t = 0; t < work.num_slots(); ++t) {
        const auto key = report.timestamps[t].substr(0, 7);
        auto& row = months[key];
        row.month = key;
        row.fcfs_cost += fcfs_result->slot_cost[t];
        row.optimized_cost += opt_result->slot_cost[t];
    }
    for (auto& [key, row] : months) {
        row.savings_percent = row.fcfs_cost > 0.0 ? 100.0 * (row.fcfs_cost - row.optimized_cost) / row.fcfs_cost : 0.0;
        report.monthly.push_back(row);
    }
    return report;
}

RunReport sensitivity(const Scenario& sc, std::vector<double> gammas, model::DemandPolicy demand_policy,
                      std::optional<double> evaluation_gamma) {
    if (gammas.empty()) throw InputError("sensitivity needs at least one gamma");
    for (const double g : gammas)
        if (!(g >= 0.0)) throw InputError("gammas must be nonnegative");
    std::sort(gammas.begin(), gammas.end());
    gammas.erase(std::unique(gammas.begin(), gammas.end()), gammas.end());
    const double eval_gamma = evaluation_gamma.value_or(gammas.back());
    if (!(eval_gamma >= 0.0)) throw InputError("evaluation gamma must be nonnegative");

    const auto adjusted = model::apply_demand_policy(sc, demand_policy);
    const Scenario& work = adjusted.scenario;

    std::vector<double> solve_for = gammas;
    if (solve_for.front() != 0.0) solve_for.insert(solve_for.begin(), 0.0);
    std::vector<std::future<model::Schedule>> jobs;
    for (const double g : solve_for)
        jobs.push_back(std::async(std::launch::async, [&work, g] { return model::optimize(work, g); }));
    std::vector<model::Schedule> schedules;
    for (auto& j : jobs) schedules.push_back(j.get());

    const uncertainty::UncertaintyBudget budget{eval_gamma, work.prices.deviation_bound};
    const double baseline = schedules.front().nominal_cost;
    RunReport report;
    report.evaluation_gamma = eval_gamma;
    for (const auto& a : adjusted.adjustments) report.adjustments.push_back({a.session_id, a.requested, a.deliverable});
    for (std::size_t k = 0; k < solve_for.size(); ++k) {
        if (!std::binary_search(gammas.begin(), gammas.end(), solve_for[k])) continue;
        const auto& s = schedules[k];
        SensitivityRow row;
        row.gamma = solve_for[k];
        row.nominal_cost = s.nominal_cost;
        row.worst_case_cost = uncertainty::worst_case_total_cost(s, work.prices, work.grid.slot_hours, budget);
        row.increase_percent = percent_change(baseline, s.nominal_cost);
        report.sensitivity.push_back(row);
    }
    return report;
}

RunReport bench(const BenchOptions& opt) {
    if (opt.repetitions < 1) throw InputError("bench needs at least one repetition");
    RunReport report;
    for (const std::size_t count : opt.counts) {
        if (count < 1) throw InputError("EV counts must be at least 1");
        synthetic::Options gen;
        gen.sessions = count;
        gen.seed = opt.seed;
        gen.concurrent = true;
        gen.slot_hours = 24.0 / static_cast<double>(opt.slots);
        const Scenario sc = synthetic::make_scenario(gen);
        BenchRow row;
        row.num_evs = count;
        row.repetitions = opt.repetitions;
        for (std::size_t r = 0; r < opt.repetitions; ++r) {
            const auto started = std::chrono::steady_clock::now();
            const auto adjusted = model::apply_demand_policy(sc, model::DemandPolicy::kClamp);
            const auto sched = model::optimize(adjusted.scenario, opt.gamma);
            const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            row.samples.push_back(seconds);
        }
        double sum = 0.0;
        for (const double s : row.samples) sum += s;
        row.mean_seconds = sum / static_cast<double>(row.samples.size());
        report.bench.push_back(std::move(row));
    }
    return report;
}

nlohmann::json to_json(const RunReport& report) {
    using nlohmann::json;
    json out;
    out["timestamps"] = report.timestamps;
    out["prices_eur_kwh"] = report.prices;
    out["optimized_method"] = report.optimized_method;
    json methods = json::array();
    for (const auto& m : report.methods) {
        json j{{"name", m.name},
               {"total_cost", m.total_cost},
               {"unmet_energy_kwh", m.unmet_energy},
               {"grid_draw_kw", m.grid_draw},
               {"solar_used_kw", m.solar_used},
               {"slot_cost", m.slot_cost}};
        if (m.worst_case_cost) j["worst_case_cost"] = *m.worst_case_cost;
        methods.push_back(std::move(j));
    }
    out["methods"] = std::move(methods);
    json monthly = json::array();
    for (const auto& r : report.monthly)
        monthly.push_back({{"month", r.month},
                           {"fcfs_cost", r.fcfs_cost},
                           {"optimized_cost", r.optimized_cost},
                           {"savings_percent", r.savings_percent}});
    out["monthly"] = std::move(monthly);
    json sens = json::array();
    for (const auto& r : report.sensitivity)
        sens.push_back({{"gamma", r.gamma},
                        {"nominal_cost", r.nominal_cost},
                        {"worst_case_cost", r.worst_case_cost},
                        {"increase_percent", r.increase_percent}});
    out["sensitivity"] = std::move(sens);
    if (report.evaluation_gamma) out["evaluation_gamma"] = *report.evaluation_gamma;
    json bench_rows = json::array();
    for (const auto& r : report.bench)
        bench_rows.push_back({{"num_evs", r.num_evs},
                              {"repetitions", r.repetitions},
                              {"mean_seconds", r.mean_seconds},
                              {"samples", r.samples}});
    out["bench"] = std::move(bench_rows);
    json adj = json::array();
    for (const auto& a : report.adjustments)
        adj.push_back({{"session", a.session_id}, {"requested_kwh", a.requested}, {"deliverable_kwh", a.deliverable}});
    out["demand_adjustments"] = std::move(adj);
    return out;
}

RunReport from_json(const nlohmann::json& doc) {
    RunReport report;
    try {
        report.timestamps = doc.at("timestamps").get<std::vector<std::string>>();
        report.prices = doc.at("prices_eur_kwh").get<std::vector<double>>();
        report.optimized_method = doc.at("optimized_method").get<std::string>();
        for (const auto& j : doc.at("methods")) {
            MethodResult m;
            m.name = j.at("name").get<std::string>();
            m.total_cost = j.at("total_cost").get<double>();
            m.unmet_energy = j.at("unmet_energy_kwh").get<double>();
            m.grid_draw = j.at("grid_draw_kw").get<std::vector<double>>();
            m.solar_used = j.at("solar_used_kw").get<std::vector<double>>();
            m.slot_cost = j.at("slot_cost").get<std::vector<double>>();
            if (j.contains("worst_case_cost")) m.worst_case_cost = j["worst_case_cost"].get<double>();
            report.methods.push_back(std::move(m));
        }
        for (const auto& j : doc.at("monthly"))
            report.monthly.push_back({j.at("month").get<std::string>(), j.at("fcfs_cost").get<double>(),
                                      j.at("optimized_cost").get<double>(), j.at("savings_percent").get<double>()});
        for (const auto& j : doc.at("sensitivity"))
            report.sensitivity.push_back({j.at("gamma").get<double>(), j.at("nominal_cost").get<double>(),
                                          j.at("worst_case_cost").get<double>(), j.at("increase_percent").get<double>()});
        if (doc.contains("evaluation_gamma")) report.evaluation_gamma = doc["evaluation_gamma"].get<double>();
        for (const auto& j : doc.at("bench"))
            report.bench.push_back({j.at("num_evs").get<std::size_t>(), j.at("repetitions").get<std::size_t>(),
                                    j.at("mean_seconds").get<double>(), j.at("samples").get<std::vector<double>>()});
        for (const auto& j : doc.at("demand_adjustments"))
            report.adjustments.push_back({j.at("session").get<std::string>(), j.at("requested_kwh").get<double>(),
                                          j.at("deliverable_kwh").get<double>()});
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed report: ") + e.what());
    }
    return report;
}

void write_slot_csv(std::ostream& out, const RunReport& report) {
    const auto old_precision = out.precision(12);
    out << "slot,timestamp,price_eur_kwh";
    for (const auto& m : report.methods) out << ',' << m.name << "_grid_kw," << m.name << "_solar_kw," << m.name << "_cost";
    out << "\n";
    for (std::size_t t = 0; t < report.timestamps.size(); ++t) {
        out << t << ',' << report.timestamps[t] << ',' << report.prices[t];
        for (const auto& m : report.methods) out << ',' << m.grid_draw[t] << ',' << m.solar_used[t] << ',' << m.slot_cost[t];
        out << "\n";
    }
    out.precision(old_precision);
}

void write_sensitivity_csv(std::ostream& out, const RunReport& report) {
    const auto old_precision = out.precision(12);
    out << "gamma,nominal_cost,worst_case_cost,increase_percent\n";
    for (const auto& r : report.sensitivity)
        out << r.gamma << ',' << r.nominal_cost << ',' << r.worst_case_cost << ',' << r.increase_percent << "\n";
    out.precision(old_precision);
}

void write_bench_csv(std::ostream& out, const RunReport& report) {
    out << "num_evs,repetitions,mean_seconds\n";
    for (const auto& r : report.bench) out << r.num_evs << ',' << r.repetitions << ',' << r.mean_seconds << "\n";
}

}  // namespace evsched::report
