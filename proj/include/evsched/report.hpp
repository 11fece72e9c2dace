// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evsched/model.hpp"
#include "evsched/mpc.hpp"
#include "evsched/scenario.hpp"

namespace evsched::report {

enum class Method { kFcfs, kNominal, kRobust, kMpc };

const char* to_string(Method method);
Method method_from_string(const std::string& name);

// Per-method totals and the per-slot series they are summed from.
struct MethodResult {
    std::string name;
    double total_cost{0.0};           // EUR at realised (nominal) prices
    double unmet_energy{0.0};         // kWh over all sessions
    std::optional<double> worst_case_cost;
    std::vector<double> grid_draw;    // kW
    std::vector<double> solar_used;   // kW
    std::vector<double> slot_cost;    // EUR
};

struct MonthlyRow {
    std::string month;  // YYYY-MM
    double fcfs_cost{0.0};
    double optimized_cost{0.0};
    double savings_percent{0.0};
};

struct SensitivityRow {
    double gamma{0.0};
    double nominal_cost{0.0};
    double worst_case_cost{0.0};
    double increase_percent{0.0};
};

struct BenchRow {
    std::size_t num_evs{0};
    std::size_t repetitions{0};
    double mean_seconds{0.0};
    std::vector<double> samples;
};

struct AdjustmentRow {
    std::string session_id;
    double requested{0.0};
    double deliverable{0.0};
};

struct RunReport {
    std::vector<std::string> timestamps;  // slot starts
    std::vector<double> prices;           // EUR/kWh
    std::vector<MethodResult> methods;
    std::string optimized_method;
    std::vector<MonthlyRow> monthly;
    std::vector<SensitivityRow> sensitivity;
    std::optional<double> evaluation_gamma;  // budget used for sensitivity worst cases
    std::vector<BenchRow> bench;
    std::vector<AdjustmentRow> adjustments;
    std::optional<mpc::MpcTrace> mpc_trace;  // not part of the JSON report

    const MethodResult* find(const std::string& name) const;
};

struct SimulateOptions {
    Method policy{Method::kNominal};
    double gamma{0.0};
    std::size_t resolve_interval{1};
    model::DemandPolicy demand_policy{model::DemandPolicy::kClamp};
    bool no_solar{false};
    bool daily_horizon{false};  // solve each UTC day separately (offline methods)
};

// FCFS always; nominal for every optimising policy; robust and MPC when
// selected. All methods run on the same demand-adjusted scenario.
RunReport simulate(const Scenario& sc, const SimulateOptions& opt);

// One robust solve per gamma. Worst cases come from the knapsack oracle under
// a common evaluation budget (default: the largest gamma in the list).
RunReport sensitivity(const Scenario& sc, std::vector<double> gammas, model::DemandPolicy demand_policy,
                      std::optional<double> evaluation_gamma = std::nullopt);

struct BenchOptions {
    std::vector<std::size_t> counts{10, 25, 50};
    std::size_t repetitions{5};
    std::uint64_t seed{1};
    double gamma{12.0};
    std::size_t slots{24};
};

// Times robust build+solve on synthetic scenarios where every EV is present
// for the whole horizon.
RunReport bench(const BenchOptions& opt);

nlohmann::json to_json(const RunReport& report);
RunReport from_json(const nlohmann::json& doc);

// One row per slot: timestamp, price and each method's grid draw, solar and cost.
void write_slot_csv(std::ostream& out, const RunReport& report);
void write_sensitivity_csv(std::ostream& out, const RunReport& report);
void write_bench_csv(std::ostream& out, const RunReport& report);

}  // namespace evsched::report
