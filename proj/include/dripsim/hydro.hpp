#ifndef DRIPSIM_HYDRO_HPP
#define DRIPSIM_HYDRO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>

#include "dripsim/util.hpp"

namespace dripsim::hydro {

// Ground-truth model of one drip line: regulated supply, solenoid valve,
// filter, and a single lateral carrying identical emitters. Pressures in kPa,
// flow in L/h, soil moisture as a fraction of field capacity.

struct PlantConfig {
    double supply_pressure_kpa = 180.0;  // regulator set point
    double k_filter_clean = 1e-4;        // kPa per (L/h)^2, clean filter
    double k_lateral = 2.5e-3;           // kPa per (L/h)^2, whole lateral
    int emitter_count = 10;
    double k_emitter = 0.4;              // L/h per kPa^emitter_exponent
    double emitter_exponent = 0.5;       // turbulent-emitter default
    double soil_capacity_l = 10.0;       // root-zone storage at field capacity
    double infiltration_efficiency = 0.9;  // fraction of discharge reaching soil
    double et_rate = 1e-4;               // moisture fraction lost per second
};

struct StationPressures {
    double p1_regulator = 0.0;   // after the regulator, before the solenoid
    double p2_pre_filter = 0.0;
    double p3_post_filter = 0.0;
    double p_head = 0.0;         // lateral start
    double p_end = 0.0;          // lateral end

    bool operator==(const StationPressures&) const = default;
};

struct PlantState {
    bool valve_open = false;    // solenoid, commanded by the controller
    bool shutoff_open = true;   // manual upstream valve
    double filter_clog = 0.0;   // [0, 1)
    double emitter_clog = 0.0;  // [0, 1]
    double soil_moisture = 0.5; // [0, 1] of field capacity
    double flow_lph = 0.0;
    StationPressures stations{};
    std::int64_t tick = 0;
};

inline void validate(const PlantConfig& c) {
    const auto bad = [](double v) { return !std::isfinite(v); };
    if (bad(c.supply_pressure_kpa) || bad(c.k_filter_clean) || bad(c.k_lateral) ||
        bad(c.k_emitter) || bad(c.emitter_exponent) || bad(c.soil_capacity_l) ||
        bad(c.infiltration_efficiency) || bad(c.et_rate))
        throw ConfigError("plant config: non-finite value");
    if (c.supply_pressure_kpa < 0 || c.k_filter_clean < 0 || c.k_lateral < 0 ||
        c.k_emitter < 0 || c.emitter_exponent < 0 || c.et_rate < 0)
        throw ConfigError("plant config: negative coefficient");
    if (c.emitter_count < 1)
        throw ConfigError("plant config: emitter_count must be >= 1");
    if (c.soil_capacity_l <= 0)
        throw ConfigError("plant config: soil_capacity_l must be > 0");
    if (c.infiltration_efficiency < 0 || c.infiltration_efficiency > 1)
        throw ConfigError("plant config: infiltration_efficiency outside [0,1]");
}

struct FlowSolution {
    double flow_lph = 0.0;
    StationPressures stations{};
};

// Steady-state line flow. The emitters discharge q = k_e * p^x at the mean
// lateral pressure p_op = supply - dP_filter(Q) - dP_lateral(Q)/2, with
// dP_filter = k_filter_clean / (1 - filter_clog)^2 * Q^2 and
// dP_lateral = k_lateral * Q^2. Total demand N * (1 - emitter_clog) * q(p_op)
// falls as Q rises, so Q - demand(Q) has exactly one root; bisection on
// [0, demand at full supply] finds it to ~machine precision.
inline FlowSolution solve_flow(const PlantConfig& cfg, const PlantState& s) {
    validate(cfg);
    if (!std::isfinite(s.filter_clog) || s.filter_clog < 0 || s.filter_clog >= 1)
        throw ConfigError("plant state: filter_clog outside [0,1)");
    if (!std::isfinite(s.emitter_clog) || s.emitter_clog < 0 || s.emitter_clog > 1)
        throw ConfigError("plant state: emitter_clog outside [0,1]");

    FlowSolution out;
    if (!s.shutoff_open) return out;  // everything at rest, p1 included

    out.stations.p1_regulator = cfg.supply_pressure_kpa;
    if (!s.valve_open) return out;  // downstream of the solenoid stays at 0

    const double supply = cfg.supply_pressure_kpa;
    const double k_filter = cfg.k_filter_clean / ((1.0 - s.filter_clog) * (1.0 - s.filter_clog));
    const double k_demand = cfg.emitter_count * (1.0 - s.emitter_clog) * cfg.k_emitter;
    const double x = cfg.emitter_exponent;

    const auto demand = [&](double p) { return p > 0 ? k_demand * std::pow(p, x) : 0.0; };
    const auto operating_pressure = [&](double q) {
        return supply - k_filter * q * q - 0.5 * cfg.k_lateral * q * q;
    };

    double hi = demand(supply);
    double q = 0.0;
    if (hi > 0) {
        double lo = 0.0;
        for (int i = 0; i < 200 && (hi - lo) > 1e-15 * std::max(hi, 1.0); ++i) {
            const double mid = 0.5 * (lo + hi);
            (mid >= demand(operating_pressure(mid)) ? hi : lo) = mid;
        }
        q = 0.5 * (lo + hi);
    }

    const double dp_filter = k_filter * q * q;
    const double dp_lateral = cfg.k_lateral * q * q;
    out.flow_lph = q;
    out.stations.p2_pre_filter = supply;
    out.stations.p3_post_filter = supply - dp_filter;
    out.stations.p_head = out.stations.p3_post_filter;
    // The lumped lateral can nominally overdraw at extreme friction; the
    // physical end pressure bottoms out at atmospheric.
    out.stations.p_end = std::max(out.stations.p_head - dp_lateral, 0.0);
    return out;
}

// One explicit time step: refresh flow and pressures, then integrate the soil
// water balance d(theta)/dt = eta * Q / V - ET, clamped to [0, 1].
inline PlantState step(const PlantConfig& cfg, const PlantState& s, double dt_s) {
    if (!(dt_s > 0)) throw ConfigError("step: dt must be > 0");
    const FlowSolution sol = solve_flow(cfg, s);
    PlantState next = s;
    next.flow_lph = sol.flow_lph;
    next.stations = sol.stations;
    const double inflow = cfg.infiltration_efficiency * sol.flow_lph / 3600.0 / cfg.soil_capacity_l;
    next.soil_moisture = std::clamp(s.soil_moisture + dt_s * (inflow - cfg.et_rate), 0.0, 1.0);
    next.tick = s.tick + 1;
    return next;
}

struct FilterClog {
    double level;  // [0, 1)
};
struct EmitterClog {
    double level;  // [0, 1]
};
struct SupplyLoss {};
struct SupplyRestore {};

using Fault = std::variant<FilterClog, EmitterClog, SupplyLoss, SupplyRestore>;

/// Sets exactly the state field the fault targets; everything else untouched.
inline PlantState apply_fault(const PlantState& s, const Fault& fault) {
    PlantState next = s;
    std::visit(
        [&next](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, FilterClog>) {
                if (!std::isfinite(f.level) || f.level < 0 || f.level >= 1)
                    throw FaultError("filter_clog level outside [0,1)");
                next.filter_clog = f.level;
            } else if constexpr (std::is_same_v<T, EmitterClog>) {
                if (!std::isfinite(f.level) || f.level < 0 || f.level > 1)
                    throw FaultError("emitter_clog level outside [0,1]");
                next.emitter_clog = f.level;
            } else if constexpr (std::is_same_v<T, SupplyLoss>) {
                next.shutoff_open = false;
            } else {
                next.shutoff_open = true;
            }
        },
        fault);
    return next;
}

}  // namespace dripsim::hydro

#endif
