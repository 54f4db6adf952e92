#ifndef DRIPSIM_CONTROL_HPP
#define DRIPSIM_CONTROL_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dripsim/netlink.hpp"
#include "dripsim/sense.hpp"
#include "dripsim/sensors.hpp"
#include "dripsim/util.hpp"

namespace dripsim::control {

struct Thresholds {
    double moisture_open = 0.50;       // activate below this soil fraction
    double moisture_close = 0.95;      // shut off at or above this fraction
    double filter_dp_max_kpa = 50.0;   // saturated filter above this drop
    double lateral_dp_epsilon_kpa = 1.0;  // "no discharge" band for head-end
    double p1_min_kpa = 100.0;         // supply considered lost below this
    int debounce_ticks = 3;            // consecutive evaluations to latch
};

inline void validate(const Thresholds& t) {
    if (!(t.moisture_open > 0) || !(t.moisture_open < t.moisture_close) ||
        !(t.moisture_close <= 1))
        throw ConfigError("thresholds: need 0 < moisture_open < moisture_close <= 1");
    if (!(t.filter_dp_max_kpa > 0)) throw ConfigError("thresholds: filter_dp_max must be > 0");
    if (!(t.lateral_dp_epsilon_kpa > 0))
        throw ConfigError("thresholds: lateral_dp_epsilon must be > 0");
    if (!(t.p1_min_kpa >= 0)) throw ConfigError("thresholds: p1_min must be >= 0");
    if (t.debounce_ticks < 1) throw ConfigError("thresholds: debounce_ticks must be >= 1");
}

enum class ValveCmd { Open, Closed };

inline const char* to_string(ValveCmd v) { return v == ValveCmd::Open ? "open" : "closed"; }

enum class AlertKind { FilterSaturated, DrippersClogged, SupplyFailure, CommLoss };

inline const char* to_string(AlertKind k) {
    switch (k) {
        case AlertKind::FilterSaturated: return "FilterSaturated";
        case AlertKind::DrippersClogged: return "DrippersClogged";
        case AlertKind::SupplyFailure: return "SupplyFailure";
        case AlertKind::CommLoss: return "CommLoss";
    }
    return "?";
}

// Alert sinks available to the person in charge.
enum AlertChannel : std::uint8_t {
    kChannelDisplay = 1,
    kChannelBuzzer = 2,
    kChannelLed = 4,
};

inline std::uint8_t alert_channels(AlertKind k) {
    switch (k) {
        case AlertKind::FilterSaturated: return kChannelDisplay | kChannelLed;
        case AlertKind::DrippersClogged: return kChannelDisplay | kChannelBuzzer;
        case AlertKind::SupplyFailure: return kChannelDisplay | kChannelBuzzer | kChannelLed;
        case AlertKind::CommLoss: return kChannelDisplay | kChannelBuzzer;
    }
    return kChannelDisplay;
}

struct Alert {
    AlertKind kind = AlertKind::CommLoss;
    std::uint8_t channels = kChannelDisplay;
    std::string text;
    std::int64_t raised_tick = 0;
    std::uint8_t node_id = 0;  // CommLoss only
};

// Detector slots for debounce bookkeeping.
enum DetectorIndex { kDetFilter = 0, kDetDrippers = 1, kDetSupply = 2, kDetectorCount = 3 };

struct ControllerState {
    ValveCmd valve_cmd = ValveCmd::Closed;
    std::array<int, kDetectorCount> debounce{};  // each in [0, debounce_ticks]
    std::array<bool, kDetectorCount> latched{};
    std::set<std::uint8_t> comm_latched;  // node ids with a latched CommLoss
    std::int64_t last_eval_tick = -1;

    bool is_latched(AlertKind k) const {
        switch (k) {
            case AlertKind::FilterSaturated: return latched[kDetFilter];
            case AlertKind::DrippersClogged: return latched[kDetDrippers];
            case AlertKind::SupplyFailure: return latched[kDetSupply];
            case AlertKind::CommLoss: return !comm_latched.empty();
        }
        return false;
    }

    /// Alert kinds currently latched, in fixed enum order.
    std::vector<AlertKind> latched_kinds() const {
        std::vector<AlertKind> kinds;
        for (const AlertKind k : {AlertKind::FilterSaturated, AlertKind::DrippersClogged,
                                  AlertKind::SupplyFailure, AlertKind::CommLoss})
            if (is_latched(k)) kinds.push_back(k);
        return kinds;
    }

    /// Clears a latch so the alert can be raised again later.
    void clear(AlertKind k, std::uint8_t node_id = 0) {
        switch (k) {
            case AlertKind::FilterSaturated: latched[kDetFilter] = false; break;
            case AlertKind::DrippersClogged: latched[kDetDrippers] = false; break;
            case AlertKind::SupplyFailure: latched[kDetSupply] = false; break;
            case AlertKind::CommLoss: comm_latched.erase(node_id); break;
        }
    }
};

// Hysteresis valve rule: open below moisture_open, close at or above
// moisture_close, hold in between. A non-finite moisture reading is treated
// as stale data and leaves the command unchanged.
inline ValveCmd decide_valve(double moisture, const ControllerState& state, const Thresholds& th) {
    if (!std::isfinite(moisture)) return state.valve_cmd;
    if (moisture < th.moisture_open) return ValveCmd::Open;
    if (moisture >= th.moisture_close) return ValveCmd::Closed;
    return state.valve_cmd;
}

/// Saturated filter: drop across the filter strictly above the limit.
inline bool detect_filter_saturation(double p2_kpa, double p3_kpa, const Thresholds& th) {
    return (p2_kpa - p3_kpa) > th.filter_dp_max_kpa;
}

// Clogged drippers: no head-to-end pressure difference on the lateral means
// no discharge. Only meaningful while the valve is commanded open and the
// supply is known good; otherwise a zero drop is expected.
inline bool detect_dripper_clog(double p_head_kpa, double p_end_kpa, ValveCmd valve_cmd,
                                bool supply_ok, const Thresholds& th) {
    return valve_cmd == ValveCmd::Open && supply_ok &&
           std::abs(p_head_kpa - p_end_kpa) <= th.lateral_dp_epsilon_kpa;
}

/// Supply failure: regulator pressure strictly below the floor. p1 sits
/// upstream of the solenoid, so the test holds regardless of valve command.
inline bool detect_supply_failure(double p1_kpa, const Thresholds& th) {
    return p1_kpa < th.p1_min_kpa;
}

struct EvalResult {
    ValveCmd valve_cmd = ValveCmd::Closed;
    std::vector<Alert> raised;  // alerts newly latched this evaluation
    std::vector<std::uint8_t> stale_nodes;
    // Calibrated views the decision actually used; empty when stale/missing.
    std::optional<double> p1_kpa, p2_kpa, p3_kpa, p_head_kpa, p_end_kpa;
    std::optional<double> soil_moisture;
};

namespace detail {

inline double calibrated_value(const sense::CalibrationCurve& curve, std::uint16_t raw,
                               sense::Quantity quantity) {
    const double v = sense::apply_calibration(curve, raw);
    if (quantity != sense::Quantity::Pressure) return v;
    if (curve.unit_label == "mca") return sense::mca_to_kpa(v);
    if (curve.unit_label == "kpa") return v;
    throw ConfigError("pressure calibration curve must be labeled 'mca' or 'kpa'");
}

/// Debounced latch update. Returns true when the detector newly latches.
inline bool update_detector(ControllerState& state, DetectorIndex det, bool condition,
                            const Thresholds& th) {
    int& counter = state.debounce[det];
    if (!condition) {
        counter = 0;
        return false;
    }
    counter = std::min(counter + 1, th.debounce_ticks);
    if (counter >= th.debounce_ticks && !state.latched[det]) {
        state.latched[det] = true;
        return true;
    }
    return false;
}

}  // namespace detail

// One master evaluation over an inbox snapshot. Detectors whose inputs are
// stale or absent are skipped (their debounce counters hold); stale nodes
// latch CommLoss instead. Detector conditions are evaluated against the valve
// command that produced the sampled data, then the soil rule picks the next
// command. Each latch is reported exactly once.
inline EvalResult controller_tick(const netlink::MasterInbox& inbox,
                                  const std::map<std::uint8_t, sense::CalibrationCurve>& curves,
                                  ControllerState& state, const Thresholds& th,
                                  std::int64_t now) {
    validate(th);
    EvalResult result;
    result.stale_nodes = netlink::staleness_check(inbox, now);

    const auto stale = [&](std::uint8_t node_id) {
        for (const std::uint8_t n : result.stale_nodes)
            if (n == node_id) return true;
        return false;
    };
    const auto calibrated = [&](std::uint8_t sensor_id) -> std::optional<double> {
        const SensorInfo& info = sensor_info(sensor_id);
        if (info.node_id != 0 && stale(info.node_id)) return std::nullopt;
        const auto reading = inbox.reading(sensor_id);
        if (!reading) return std::nullopt;
        const auto curve = curves.find(sensor_id);
        if (curve == curves.end())
            throw ConfigError(std::string("no calibration curve for sensor ") + info.name);
        return detail::calibrated_value(curve->second, reading->raw, info.quantity);
    };

    for (const std::uint8_t node_id : result.stale_nodes) {
        if (state.comm_latched.contains(node_id)) continue;
        state.comm_latched.insert(node_id);
        result.raised.push_back(Alert{AlertKind::CommLoss, alert_channels(AlertKind::CommLoss),
                                      "node " + std::to_string(node_id) + " telemetry stale", now,
                                      node_id});
    }

    result.p1_kpa = calibrated(kSensorP1Regulator);
    result.p2_kpa = calibrated(kSensorP2PreFilter);
    result.p3_kpa = calibrated(kSensorP3PostFilter);
    result.p_head_kpa = calibrated(kSensorPHead);
    result.p_end_kpa = calibrated(kSensorPEnd);
    result.soil_moisture = calibrated(kSensorSoilMoisture);

    bool supply_raw_failure = false;
    if (result.p1_kpa) {
        supply_raw_failure = detect_supply_failure(*result.p1_kpa, th);
        if (detail::update_detector(state, kDetSupply, supply_raw_failure, th))
            result.raised.push_back(Alert{AlertKind::SupplyFailure,
                                          alert_channels(AlertKind::SupplyFailure),
                                          "regulator pressure low; water is not entering the system",
                                          now});
    }

    if (result.p2_kpa && result.p3_kpa) {
        if (detail::update_detector(state, kDetFilter,
                                    detect_filter_saturation(*result.p2_kpa, *result.p3_kpa, th),
                                    th))
            result.raised.push_back(Alert{AlertKind::FilterSaturated,
                                          alert_channels(AlertKind::FilterSaturated),
                                          "pressure drop across the filter too high; change the filter",
                                          now});
    }

    if (result.p_head_kpa && result.p_end_kpa && result.p1_kpa) {
        const bool supply_ok = !supply_raw_failure && !state.latched[kDetSupply];
        if (detail::update_detector(
                state, kDetDrippers,
                detect_dripper_clog(*result.p_head_kpa, *result.p_end_kpa, state.valve_cmd,
                                    supply_ok, th),
                th))
            result.raised.push_back(Alert{AlertKind::DrippersClogged,
                                          alert_channels(AlertKind::DrippersClogged),
                                          "no pressure difference across the lateral; drippers clogged",
                                          now});
    }

    if (result.soil_moisture) state.valve_cmd = decide_valve(*result.soil_moisture, state, th);
    state.last_eval_tick = now;
    result.valve_cmd = state.valve_cmd;
    return result;
}

}  // namespace dripsim::control

#endif
