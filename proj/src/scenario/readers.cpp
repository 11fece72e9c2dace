// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "evsched/errors.hpp"
#include "evsched/scenario.hpp"

namespace evsched {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Splits one CSV line; double quotes group fields and `""` escapes a quote.
std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char ch = line[k];
        if (quoted) {
            if (ch == '"' && k + 1 < line.size() && line[k + 1] == '"') {
                cur.push_back('"');
                ++k;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.emplace_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.emplace_back(trim(cur));
    return fields;
}

std::optional<double> to_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string where(const std::string& source, std::size_t row) {
    return source + " row " + std::to_string(row);
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    return in;
}

struct RawSession {
    std::string id;
    Timestamp arrival;
    Timestamp departure;
    double energy;
    std::optional<double> power;
};

// Applies windowing rules shared by the CSV and JSON readers.
void admit(SessionParseResult& out, const RawSession& raw, const std::string& origin, const TimeGrid& grid,
           const StationConfig& station) {
    if (raw.departure <= raw.arrival) {
        std::cerr << "warning: " << origin << ": departure not after arrival, row rejected\n";
        ++out.rejected_rows;
        return;
    }
    if (raw.energy < 0.0) throw InputError(origin + ": field 'energy': negative required energy");
    if (raw.power && !(*raw.power > 0.0)) throw InputError(origin + ": field 'max_power': must be positive");
    const Timestamp arrival = std::max(raw.arrival, grid.start);
    const Timestamp departure = std::min(raw.departure, grid.end());
    if (departure <= arrival) {
        ++out.dropped_outside;
        return;
    }
    out.sessions.push_back(
        ChargingSession{raw.id, arrival, departure, raw.energy, raw.power.value_or(station.default_max_power)});
}

int find_column(const std::vector<std::string>& header, std::initializer_list<std::string_view> names) {
    for (std::size_t k = 0; k < header.size(); ++k)
        for (const auto name : names)
            if (header[k] == name) return static_cast<int>(k);
    return -1;
}

}  // namespace

SessionParseResult parse_sessions_csv(std::istream& in, const std::string& source, const TimeGrid& grid,
                                      const StationConfig& station) {
    grid.validate();
    std::string line;
    std::size_t row = 0;
    if (!std::getline(in, line)) throw InputError(source + ": empty sessions file");
    ++row;
    const auto header = split_csv(line);
    const int c_id = find_column(header, {"id", "session_id", "sessionID"});
    const int c_arr = find_column(header, {"arrival", "connectionTime", "connection_time"});
    const int c_dep = find_column(header, {"departure", "disconnectTime", "disconnect_time"});
    const int c_energy = find_column(header, {"energy_kwh", "required_energy", "kWhDelivered", "kwh"});
    const int c_power = find_column(header, {"max_power_kw", "max_power"});
    if (c_arr < 0) throw InputError(source + ": missing arrival column");
    if (c_dep < 0) throw InputError(source + ": missing departure column");
    if (c_energy < 0) throw InputError(source + ": missing energy column");

    SessionParseResult out;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        const auto origin = where(source, row);
        auto field = [&](int col, const char* name) -> const std::string& {
            if (col >= static_cast<int>(fields.size()))
                throw InputError(origin + ": field '" + name + "': missing");
            return fields[static_cast<std::size_t>(col)];
        };
        RawSession raw;
        raw.id = c_id >= 0 ? field(c_id, "id") : std::to_string(row - 1);
        try {
            raw.arrival = parse_timestamp(field(c_arr, "arrival"));
        } catch (const InputError& e) {
            throw InputError(origin + ": field 'arrival': " + e.what());
        }
        try {
            raw.departure = parse_timestamp(field(c_dep, "departure"));
        } catch (const InputError& e) {
            throw InputError(origin + ": field 'departure': " + e.what());
        }
        const auto energy = to_double(field(c_energy, "energy"));
        if (!energy) throw InputError(origin + ": field 'energy': not a number");
        raw.energy = *energy;
        if (c_power >= 0 && c_power < static_cast<int>(fields.size()) && !fields[static_cast<std::size_t>(c_power)].empty()) {
            raw.power = to_double(fields[static_cast<std::size_t>(c_power)]);
            if (!raw.power) throw InputError(origin + ": field 'max_power': not a number");
        }
        admit(out, raw, origin, grid, station);
    }
    return out;
}

SessionParseResult parse_sessions_acn_json(std::istream& in, const std::string& source, const TimeGrid& grid,
                                           const StationConfig& station) {
    grid.validate();
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(source + ": invalid JSON: " + e.what());
    }
    const nlohmann::json* items = &doc;
    if (doc.is_object()) {
        if (!doc.contains("_items")) throw InputError(source + ": expected an '_items' array");
        items = &doc["_items"];
    }
    if (!items->is_array()) throw InputError(source + ": expected an array of sessions");

    SessionParseResult out;
    std::size_t row = 0;
    for (const auto& item : *items) {
        ++row;
        const auto origin = source + " item " + std::to_string(row);
        auto text = [&](const char* key) -> std::string {
            if (!item.contains(key) || !item[key].is_string()) throw InputError(origin + ": field '" + key + "': missing");
            return item[key].get<std::string>();
        };
        RawSession raw;
        raw.id = item.contains("sessionID") && item["sessionID"].is_string() ? item["sessionID"].get<std::string>()
                                                                             : std::to_string(row);
        try {
            raw.arrival = parse_timestamp(text("connectionTime"));
        } catch (const InputError& e) {
            throw InputError(origin + ": field 'connectionTime': " + e.what());
        }
        try {
            raw.departure = parse_timestamp(text("disconnectTime"));
        } catch (const InputError& e) {
            throw InputError(origin + ": field 'disconnectTime': " + e.what());
        }
        if (!item.contains("kWhDelivered") || !item["kWhDelivered"].is_number())
            throw InputError(origin + ": field 'kWhDelivered': missing or not a number");
        raw.energy = item["kWhDelivered"].get<double>();
        if (item.contains("maxPower") && item["maxPower"].is_number()) raw.power = item["maxPower"].get<double>();
        admit(out, raw, origin, grid, station);
    }
    return out;
}

SessionParseResult parse_sessions(const std::filesystem::path& path, const TimeGrid& grid, const StationConfig& station) {
    auto in = open_input(path);
    if (path.extension() == ".json") return parse_sessions_acn_json(in, path.string(), grid, station);
    return parse_sessions_csv(in, path.string(), grid, station);
}

void write_sessions_csv(std::ostream& out, std::span<const ChargingSession> sessions) {
    const auto old_precision = out.precision(17);
    out << "id,arrival,departure,energy_kwh,max_power_kw\n";
    for (const auto& s : sessions) {
        out << s.id << ',' << format_timestamp(s.arrival) << ',' << format_timestamp(s.departure) << ','
            << s.required_energy << ',' << s.max_power << "\n";
    }
    out.precision(old_precision);
}

std::vector<SeriesPoint> read_series_csv(std::istream& in, const std::string& source) {
    std::vector<SeriesPoint> rows;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() < 2) throw InputError(where(source, row) + ": expected two columns");
        const auto value = to_double(fields[1]);
        if (!value) {
            if (row == 1) continue;  // header
            throw InputError(where(source, row) + ": field 'value': not a number");
        }
        try {
            rows.push_back({parse_timestamp(fields[0]), *value});
        } catch (const InputError& e) {
            throw InputError(where(source, row) + ": field 'timestamp': " + e.what());
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
    for (std::size_t k = 1; k < rows.size(); ++k)
        if (rows[k].time == rows[k - 1].time)
            throw InputError(source + ": duplicate timestamp " + format_timestamp(rows[k].time));
    return rows;
}

std::vector<double> align_series(std::span<const SeriesPoint> rows, const TimeGrid& grid, const std::string& what,
                                 double row_hours) {
    grid.validate();
    const double row_seconds = row_hours * 3600.0;
    std::vector<double> out(grid.num_slots, 0.0);
    std::vector<std::size_t> missing;
    for (std::size_t t = 0; t < grid.num_slots; ++t) {
        const double s0 = static_cast<double>(grid.slot_start(t).time_since_epoch().count());
        const double s1 = s0 + grid.slot_seconds();
        // First row whose interval could still reach s0.
        auto it = std::lower_bound(rows.begin(), rows.end(), s0 - row_seconds, [](const SeriesPoint& p, double v) {
            return static_cast<double>(p.time.time_since_epoch().count()) <= v;
        });
        double covered = 0.0;
        double acc = 0.0;
        std::size_t contributing = 0;
        double single = 0.0;
        for (; it != rows.end(); ++it) {
            const double r0 = static_cast<double>(it->time.time_since_epoch().count());
            if (r0 >= s1) break;
            const double overlap = std::min(s1, r0 + row_seconds) - std::max(s0, r0);
            if (overlap <= 0.0) continue;
            covered += overlap;
            acc += overlap * it->value;
            ++contributing;
            single = it->value;
        }
        if (covered < grid.slot_seconds() - 1e-6)
            missing.push_back(t);
        else
            out[t] = contributing == 1 ? single : acc / covered;
    }
    if (!missing.empty()) {
        std::string msg = what + ": no data for slot(s)";
        for (std::size_t k = 0; k < missing.size() && k < 20; ++k)
            msg += " " + std::to_string(missing[k]) + " (" + format_timestamp(grid.slot_start(missing[k])) + ")";
        if (missing.size() > 20) msg += " ... " + std::to_string(missing.size()) + " total";
        throw InputError(msg);
    }
    return out;
}

std::vector<double> parse_prices(const std::filesystem::path& path, const TimeGrid& grid, PriceUnits units) {
    auto in = open_input(path);
    const auto rows = read_series_csv(in, path.string());
    auto prices = align_series(rows, grid, path.string());
    for (auto& p : prices) {
        if (units == PriceUnits::kEurPerMWh) p /= 1000.0;
        if (p < 0.0) throw InputError(path.string() + ": negative prices are not supported");
    }
    return prices;
}

std::vector<double> parse_irradiance(const std::filesystem::path& path, const TimeGrid& grid) {
    auto in = open_input(path);
    const auto rows = read_series_csv(in, path.string());
    return align_series(rows, grid, path.string());
}

}  // namespace evsched
