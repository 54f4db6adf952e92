#ifndef DRIPSIM_SCENARIO_HPP
#define DRIPSIM_SCENARIO_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dripsim/control.hpp"
#include "dripsim/hydro.hpp"
#include "dripsim/netlink.hpp"
#include "dripsim/sense.hpp"
#include "dripsim/sensors.hpp"
#include "dripsim/util.hpp"

namespace dripsim::sim {

struct ScheduledFault {
    double at_s = 0.0;
    hydro::Fault fault;
};

struct Scenario {
    double duration_s = 0.0;
    int tick_ms = 100;
    std::uint64_t seed = 0;
    int sample_period_ms = 2000;
    std::int64_t staleness_timeout_ticks = 50;
    hydro::PlantConfig plant;
    hydro::PlantState initial;  // tick/flow/stations ignored; filled at run start
    netlink::LinkModel link;
    control::Thresholds thresholds;
    double air_temp_c = 22.0;
    double air_humidity_pct = 55.0;
    std::map<std::uint8_t, sense::TransducerSpec> transducers = default_transducers();
    std::map<std::uint8_t, sense::CalibrationCurve> curves =
        default_curves(default_transducers());
    std::vector<ScheduledFault> faults;
};

inline void validate(const Scenario& sc) {
    if (!(sc.duration_s > 0)) throw ScenarioError("duration_s: must be > 0");
    if (sc.tick_ms <= 0) throw ScenarioError("tick_ms: must be > 0");
    if (sc.sample_period_ms <= 0 || sc.sample_period_ms % sc.tick_ms != 0)
        throw ScenarioError("sample_period_ms: must be a positive multiple of tick_ms");
    if (sc.staleness_timeout_ticks <= 0)
        throw ScenarioError("staleness_timeout_ticks: must be > 0");
    try {
        hydro::validate(sc.plant);
        netlink::validate(sc.link);
        control::validate(sc.thresholds);
        for (const auto& [id, spec] : sc.transducers) sense::validate(spec);
    } catch (const ConfigError& e) {
        throw ScenarioError(e.what());
    }
    if (sc.initial.filter_clog < 0 || sc.initial.filter_clog >= 1)
        throw ScenarioError("initial.filter_clog: outside [0,1)");
    if (sc.initial.emitter_clog < 0 || sc.initial.emitter_clog > 1)
        throw ScenarioError("initial.emitter_clog: outside [0,1]");
    if (sc.initial.soil_moisture < 0 || sc.initial.soil_moisture > 1)
        throw ScenarioError("initial.soil_moisture: outside [0,1]");
    for (std::size_t i = 0; i < sc.faults.size(); ++i) {
        const double t = sc.faults[i].at_s;
        if (!(t >= 0) || t > sc.duration_s)
            throw ScenarioError("faults[" + std::to_string(i) + "].at_s: outside [0, duration_s]");
        try {
            (void)hydro::apply_fault(hydro::PlantState{}, sc.faults[i].fault);
        } catch (const FaultError& e) {
            throw ScenarioError("faults[" + std::to_string(i) + "]: " + e.what());
        }
    }
    for (const SensorInfo& s : kSensorTable) {
        if (!sc.transducers.contains(s.id))
            throw ScenarioError(std::string("transducers: missing spec for sensor ") + s.name);
        if (!sc.curves.contains(s.id))
            throw ScenarioError(std::string("calibration: missing curve for sensor ") + s.name);
    }
}

namespace detail {

using json = nlohmann::json;

inline void check_keys(const json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) { known = true; break; }
        if (!known) throw ScenarioError(path + ": unknown field '" + key + "'");
    }
}

inline double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ScenarioError(path + ": expected a number");
    return v.get<double>();
}

inline double num_field(const json& obj, const std::string& path, const char* key,
                        double fallback) {
    if (!obj.contains(key)) return fallback;
    return as_number(obj.at(key), path + "." + key);
}

inline int int_field(const json& obj, const std::string& path, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw ScenarioError(path + "." + key + ": expected an integer");
    return v.get<int>();
}

inline bool bool_field(const json& obj, const std::string& path, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw ScenarioError(path + "." + key + ": expected a boolean");
    return v.get<bool>();
}

inline std::uint8_t sensor_key(const std::string& key, const std::string& path) {
    int id = 0;
    try {
        std::size_t pos = 0;
        id = std::stoi(key, &pos, 10);
        if (pos != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
        throw ScenarioError(path + ": sensor key '" + key + "' is not a decimal id");
    }
    for (const SensorInfo& s : kSensorTable)
        if (s.id == id) return s.id;
    throw ScenarioError(path + ": unknown sensor id " + key);
}

}  // namespace detail

inline Scenario parse_scenario(const nlohmann::json& j) {
    using detail::bool_field;
    using detail::check_keys;
    using detail::int_field;
    using detail::num_field;

    if (!j.is_object()) throw ScenarioError("scenario: top level must be an object");
    check_keys(j, "scenario",
               {"duration_s", "tick_ms", "seed", "sample_period_ms", "staleness_timeout_ticks",
                "plant", "initial", "link", "thresholds", "ambient", "transducers", "calibration",
                "faults"});

    Scenario sc;
    if (!j.contains("duration_s")) throw ScenarioError("duration_s: required field missing");
    sc.duration_s = detail::as_number(j.at("duration_s"), "duration_s");
    if (!j.contains("seed")) throw ScenarioError("seed: required field missing (runs must be reproducible)");
    if (!j.at("seed").is_number_integer()) throw ScenarioError("seed: expected an integer");
    sc.seed = j.at("seed").get<std::uint64_t>();
    sc.tick_ms = int_field(j, "scenario", "tick_ms", sc.tick_ms);
    sc.sample_period_ms = int_field(j, "scenario", "sample_period_ms", sc.sample_period_ms);
    sc.staleness_timeout_ticks =
        int_field(j, "scenario", "staleness_timeout_ticks",
                  static_cast<int>(sc.staleness_timeout_ticks));

    if (j.contains("plant")) {
        const auto& p = j.at("plant");
        check_keys(p, "plant",
                   {"supply_pressure_kpa", "k_filter_clean", "k_lateral", "emitter_count",
                    "k_emitter", "emitter_exponent", "soil_capacity_l", "infiltration_efficiency",
                    "et_rate"});
        sc.plant.supply_pressure_kpa = num_field(p, "plant", "supply_pressure_kpa", sc.plant.supply_pressure_kpa);
        sc.plant.k_filter_clean = num_field(p, "plant", "k_filter_clean", sc.plant.k_filter_clean);
        sc.plant.k_lateral = num_field(p, "plant", "k_lateral", sc.plant.k_lateral);
        sc.plant.emitter_count = int_field(p, "plant", "emitter_count", sc.plant.emitter_count);
        sc.plant.k_emitter = num_field(p, "plant", "k_emitter", sc.plant.k_emitter);
        sc.plant.emitter_exponent = num_field(p, "plant", "emitter_exponent", sc.plant.emitter_exponent);
        sc.plant.soil_capacity_l = num_field(p, "plant", "soil_capacity_l", sc.plant.soil_capacity_l);
        sc.plant.infiltration_efficiency =
            num_field(p, "plant", "infiltration_efficiency", sc.plant.infiltration_efficiency);
        sc.plant.et_rate = num_field(p, "plant", "et_rate", sc.plant.et_rate);
    }

    if (j.contains("initial")) {
        const auto& s = j.at("initial");
        check_keys(s, "initial",
                   {"valve_open", "shutoff_open", "filter_clog", "emitter_clog", "soil_moisture"});
        sc.initial.valve_open = bool_field(s, "initial", "valve_open", sc.initial.valve_open);
        sc.initial.shutoff_open = bool_field(s, "initial", "shutoff_open", sc.initial.shutoff_open);
        sc.initial.filter_clog = num_field(s, "initial", "filter_clog", sc.initial.filter_clog);
        sc.initial.emitter_clog = num_field(s, "initial", "emitter_clog", sc.initial.emitter_clog);
        sc.initial.soil_moisture = num_field(s, "initial", "soil_moisture", sc.initial.soil_moisture);
    }

    if (j.contains("link")) {
        const auto& l = j.at("link");
        check_keys(l, "link", {"drop_probability", "corruption_probability", "latency_ticks"});
        sc.link.drop_probability = num_field(l, "link", "drop_probability", sc.link.drop_probability);
        sc.link.corruption_probability =
            num_field(l, "link", "corruption_probability", sc.link.corruption_probability);
        sc.link.latency_ticks = int_field(l, "link", "latency_ticks", sc.link.latency_ticks);
    }

    if (j.contains("thresholds")) {
        const auto& t = j.at("thresholds");
        check_keys(t, "thresholds",
                   {"moisture_open", "moisture_close", "filter_dp_max_kpa",
                    "lateral_dp_epsilon_kpa", "p1_min_kpa", "debounce_ticks"});
        sc.thresholds.moisture_open = num_field(t, "thresholds", "moisture_open", sc.thresholds.moisture_open);
        sc.thresholds.moisture_close = num_field(t, "thresholds", "moisture_close", sc.thresholds.moisture_close);
        sc.thresholds.filter_dp_max_kpa =
            num_field(t, "thresholds", "filter_dp_max_kpa", sc.thresholds.filter_dp_max_kpa);
        sc.thresholds.lateral_dp_epsilon_kpa =
            num_field(t, "thresholds", "lateral_dp_epsilon_kpa", sc.thresholds.lateral_dp_epsilon_kpa);
        sc.thresholds.p1_min_kpa = num_field(t, "thresholds", "p1_min_kpa", sc.thresholds.p1_min_kpa);
        sc.thresholds.debounce_ticks =
            int_field(t, "thresholds", "debounce_ticks", sc.thresholds.debounce_ticks);
    }

    if (j.contains("ambient")) {
        const auto& a = j.at("ambient");
        check_keys(a, "ambient", {"air_temp_c", "air_humidity_pct"});
        sc.air_temp_c = num_field(a, "ambient", "air_temp_c", sc.air_temp_c);
        sc.air_humidity_pct = num_field(a, "ambient", "air_humidity_pct", sc.air_humidity_pct);
    }

    if (j.contains("transducers")) {
        const auto& t = j.at("transducers");
        if (!t.is_object()) throw ScenarioError("transducers: expected an object keyed by sensor id");
        for (const auto& [key, spec_json] : t.items()) {
            const std::uint8_t id = detail::sensor_key(key, "transducers");
            const std::string path = "transducers." + key;
            check_keys(spec_json, path, {"span_min", "span_max", "noise_sigma_counts"});
            sense::TransducerSpec& spec = sc.transducers.at(id);
            spec.span_min = num_field(spec_json, path, "span_min", spec.span_min);
            spec.span_max = num_field(spec_json, path, "span_max", spec.span_max);
            spec.noise_sigma_counts =
                num_field(spec_json, path, "noise_sigma_counts", spec.noise_sigma_counts);
            // A span override retunes the matching default curve; an explicit
            // calibration entry below still wins.
            sc.curves.at(id) = inverse_curve(spec);
        }
    }

    if (j.contains("calibration")) {
        const auto& c = j.at("calibration");
        if (!c.is_object()) throw ScenarioError("calibration: expected an object keyed by sensor id");
        for (const auto& [key, curve_json] : c.items()) {
            const std::uint8_t id = detail::sensor_key(key, "calibration");
            const std::string path = "calibration." + key;
            check_keys(curve_json, path, {"intercept", "slope", "unit"});
            sense::CalibrationCurve& curve = sc.curves.at(id);
            curve.intercept = num_field(curve_json, path, "intercept", curve.intercept);
            curve.slope = num_field(curve_json, path, "slope", curve.slope);
            if (curve_json.contains("unit")) {
                if (!curve_json.at("unit").is_string())
                    throw ScenarioError(path + ".unit: expected a string");
                curve.unit_label = curve_json.at("unit").get<std::string>();
            }
        }
    }

    if (j.contains("faults")) {
        const auto& f = j.at("faults");
        if (!f.is_array()) throw ScenarioError("faults: expected an array");
        for (std::size_t i = 0; i < f.size(); ++i) {
            const std::string path = "faults[" + std::to_string(i) + "]";
            const auto& entry = f.at(i);
            check_keys(entry, path, {"at_s", "kind", "level"});
            if (!entry.contains("at_s") || !entry.contains("kind"))
                throw ScenarioError(path + ": needs at_s and kind");
            ScheduledFault fault;
            fault.at_s = detail::as_number(entry.at("at_s"), path + ".at_s");
            if (!entry.at("kind").is_string()) throw ScenarioError(path + ".kind: expected a string");
            const std::string kind = entry.at("kind").get<std::string>();
            const auto level = [&] {
                if (!entry.contains("level"))
                    throw ScenarioError(path + ".level: required for clog faults");
                return detail::as_number(entry.at("level"), path + ".level");
            };
            if (kind == "filter_clog") fault.fault = hydro::FilterClog{level()};
            else if (kind == "emitter_clog") fault.fault = hydro::EmitterClog{level()};
            else if (kind == "supply_loss") fault.fault = hydro::SupplyLoss{};
            else if (kind == "supply_restore") fault.fault = hydro::SupplyRestore{};
            else throw ScenarioError(path + ".kind: unknown fault '" + kind + "'");
            sc.faults.push_back(std::move(fault));
        }
    }

    validate(sc);
    return sc;
}

inline Scenario load_scenario(const std::string& file_path) {
    std::ifstream in(file_path);
    if (!in) throw ScenarioError("cannot open scenario file: " + file_path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ScenarioError(file_path + ": " + e.what());
    }
    try {
        return parse_scenario(j);
    } catch (const ScenarioError& e) {
        throw ScenarioError(file_path + ": " + e.what());
    }
}

}  // namespace dripsim::sim

#endif
