#ifndef DRIPSIM_SENSORS_HPP
#define DRIPSIM_SENSORS_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "dripsim/hydro.hpp"
#include "dripsim/sense.hpp"
#include "dripsim/util.hpp"

namespace dripsim {

// Fixed sensor-id table. Node 1 sits at the filter, node 2 at the lateral
// head, node 3 in the irrigation zone; the regulator gauge is wired to the
// master itself and never crosses the radio.
inline constexpr std::uint8_t kSensorP1Regulator = 0x01;
inline constexpr std::uint8_t kSensorP2PreFilter = 0x02;
inline constexpr std::uint8_t kSensorP3PostFilter = 0x03;
inline constexpr std::uint8_t kSensorFlow = 0x04;
inline constexpr std::uint8_t kSensorPHead = 0x05;
inline constexpr std::uint8_t kSensorPEnd = 0x06;
inline constexpr std::uint8_t kSensorSoilMoisture = 0x07;
inline constexpr std::uint8_t kSensorAirTemp = 0x08;
inline constexpr std::uint8_t kSensorAirHumidity = 0x09;

struct SensorInfo {
    std::uint8_t id;
    sense::Quantity quantity;
    std::uint8_t node_id;  // 0 = master-local
    const char* name;
};

inline constexpr SensorInfo kSensorTable[] = {
    {kSensorP1Regulator, sense::Quantity::Pressure, 0, "p1_regulator"},
    {kSensorP2PreFilter, sense::Quantity::Pressure, 1, "p2_pre_filter"},
    {kSensorP3PostFilter, sense::Quantity::Pressure, 1, "p3_post_filter"},
    {kSensorFlow, sense::Quantity::Flow, 1, "flow"},
    {kSensorPHead, sense::Quantity::Pressure, 2, "p_head"},
    {kSensorPEnd, sense::Quantity::Pressure, 3, "p_end"},
    {kSensorSoilMoisture, sense::Quantity::SoilMoisture, 3, "soil_moisture"},
    {kSensorAirTemp, sense::Quantity::AirTemp, 3, "air_temp"},
    {kSensorAirHumidity, sense::Quantity::AirHumidity, 3, "air_humidity"},
};

inline const SensorInfo& sensor_info(std::uint8_t sensor_id) {
    for (const SensorInfo& s : kSensorTable)
        if (s.id == sensor_id) return s;
    throw ConfigError("unknown sensor id " + std::to_string(sensor_id));
}

inline std::vector<std::uint8_t> sensors_of_node(std::uint8_t node_id) {
    std::vector<std::uint8_t> ids;
    for (const SensorInfo& s : kSensorTable)
        if (s.node_id == node_id) ids.push_back(s.id);
    return ids;
}

/// What a sensor physically sees. Pressure transducers read in mca.
struct SensorEnvironment {
    const hydro::PlantState* plant = nullptr;
    double air_temp_c = 22.0;
    double air_humidity_pct = 55.0;
};

inline double ground_truth(std::uint8_t sensor_id, const SensorEnvironment& env) {
    const hydro::StationPressures& st = env.plant->stations;
    switch (sensor_id) {
        case kSensorP1Regulator: return st.p1_regulator / sense::kKpaPerMca;
        case kSensorP2PreFilter: return st.p2_pre_filter / sense::kKpaPerMca;
        case kSensorP3PostFilter: return st.p3_post_filter / sense::kKpaPerMca;
        case kSensorFlow: return env.plant->flow_lph;
        case kSensorPHead: return st.p_head / sense::kKpaPerMca;
        case kSensorPEnd: return st.p_end / sense::kKpaPerMca;
        case kSensorSoilMoisture: return env.plant->soil_moisture;
        case kSensorAirTemp: return env.air_temp_c;
        case kSensorAirHumidity: return env.air_humidity_pct;
        default: throw ConfigError("unknown sensor id " + std::to_string(sensor_id));
    }
}

// Default emulated transducers. The pressure span of 0-25 mca keeps the
// normal 150-200 kPa line (about 15.3-20.4 mca) in the upper middle of the
// range instead of against a rail.
inline std::map<std::uint8_t, sense::TransducerSpec> default_transducers() {
    std::map<std::uint8_t, sense::TransducerSpec> specs;
    for (const SensorInfo& s : kSensorTable) {
        sense::TransducerSpec spec;
        spec.sensor_id = s.id;
        spec.quantity = s.quantity;
        switch (s.quantity) {
            case sense::Quantity::Pressure: spec.span_min = 0.0; spec.span_max = 25.0; break;
            case sense::Quantity::Flow: spec.span_min = 0.0; spec.span_max = 200.0; break;
            case sense::Quantity::SoilMoisture: spec.span_min = 0.0; spec.span_max = 1.0; break;
            case sense::Quantity::AirTemp: spec.span_min = -10.0; spec.span_max = 50.0; break;
            case sense::Quantity::AirHumidity: spec.span_min = 0.0; spec.span_max = 100.0; break;
        }
        specs[s.id] = spec;
    }
    return specs;
}

inline const char* unit_label_for(sense::Quantity q) {
    switch (q) {
        case sense::Quantity::Pressure: return "mca";
        case sense::Quantity::Flow: return "lph";
        case sense::Quantity::SoilMoisture: return "frac";
        case sense::Quantity::AirTemp: return "degc";
        case sense::Quantity::AirHumidity: return "pct";
    }
    return "?";
}

/// The line that undoes a transducer's span mapping exactly (up to
/// quantization): intercept = span_min, slope = span / 1023.
inline sense::CalibrationCurve inverse_curve(const sense::TransducerSpec& spec) {
    sense::CalibrationCurve curve;
    curve.intercept = spec.span_min;
    curve.slope = (spec.span_max - spec.span_min) / spec.adc_max;
    curve.unit_label = unit_label_for(spec.quantity);
    return curve;
}

inline std::map<std::uint8_t, sense::CalibrationCurve> default_curves(
    const std::map<std::uint8_t, sense::TransducerSpec>& specs) {
    std::map<std::uint8_t, sense::CalibrationCurve> curves;
    for (const auto& [id, spec] : specs) curves[id] = inverse_curve(spec);
    return curves;
}

}  // namespace dripsim

#endif
