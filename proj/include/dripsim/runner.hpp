#ifndef DRIPSIM_RUNNER_HPP
#define DRIPSIM_RUNNER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dripsim/control.hpp"
#include "dripsim/hydro.hpp"
#include "dripsim/netlink.hpp"
#include "dripsim/node.hpp"
#include "dripsim/rng.hpp"
#include "dripsim/scenario.hpp"
#include "dripsim/sensors.hpp"
#include "dripsim/util.hpp"

namespace dripsim::sim {

// Deterministic closed loop: plant -> transducers -> slave nodes -> lossy
// link -> master inbox -> controller -> valve -> plant. One randomness stream
// per run; within a tick the draws happen in this fixed order:
//   1. scheduled faults are applied, then flow/pressures are re-solved
//   2. the master samples its local regulator gauge (one gaussian)
//   3. slave nodes 1..3 in id order; a node that is due samples its sensors
//      in listed order (one gaussian each), then the link draws: drop
//      uniform, corruption uniform, and if corrupting, byte index and mask
//   4. due frames are delivered in send order and ingested
//   5. on the sample grid, the controller evaluates and commands the valve
//   6. the plant integrates one tick
// Telemetry carries ground truth, one CSV record per controller evaluation;
// alerts and link anomalies go to a JSON-lines event log. Identical scenario
// and seed give byte-identical output files.

struct EvalRecord {
    std::int64_t tick = 0;
    double time_s = 0.0;
    control::ValveCmd cmd_before = control::ValveCmd::Closed;
    control::ValveCmd cmd_after = control::ValveCmd::Closed;
    control::EvalResult eval;    // calibrated views + newly raised alerts
    hydro::PlantState truth;     // plant state the sensors saw this tick
    std::vector<control::AlertKind> active;  // latched set after this evaluation
};

using EvalObserver = std::function<void(const EvalRecord&)>;

struct RunSummary {
    std::map<control::AlertKind, int> alerts;  // latch events by kind
    std::int64_t ticks = 0;
    int evaluations = 0;
    int frames_sent = 0;
    int frames_delivered = 0;
    int frames_dropped = 0;
    int decode_errors = 0;
    int duplicates = 0;
    int lost_frames = 0;
    hydro::PlantState final_state;
};

namespace detail {

inline std::string csv_row(const EvalRecord& r) {
    const hydro::StationPressures& st = r.truth.stations;
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%lld,%.3f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%s,",
                  static_cast<long long>(r.tick), r.time_s, st.p1_regulator, st.p2_pre_filter,
                  st.p3_post_filter, st.p_head, st.p_end, r.truth.flow_lph, r.truth.soil_moisture,
                  control::to_string(r.cmd_after));
    std::string row(buf);
    for (std::size_t i = 0; i < r.active.size(); ++i) {
        if (i > 0) row += '|';
        row += control::to_string(r.active[i]);
    }
    row += '\n';
    return row;
}

inline nlohmann::ordered_json event_base(std::int64_t tick, double time_s, const char* type) {
    nlohmann::ordered_json e;
    e["tick"] = tick;
    e["time_s"] = time_s;
    e["type"] = type;
    return e;
}

inline std::vector<std::string> channel_names(std::uint8_t channels) {
    std::vector<std::string> names;
    if (channels & control::kChannelDisplay) names.emplace_back("display");
    if (channels & control::kChannelBuzzer) names.emplace_back("buzzer");
    if (channels & control::kChannelLed) names.emplace_back("led");
    return names;
}

struct FaultEvent {
    std::int64_t at_tick = 0;
    std::size_t order = 0;  // schedule position, for stable same-tick ordering
    hydro::Fault fault;
};

inline const char* fault_name(const hydro::Fault& f) {
    if (std::holds_alternative<hydro::FilterClog>(f)) return "filter_clog";
    if (std::holds_alternative<hydro::EmitterClog>(f)) return "emitter_clog";
    if (std::holds_alternative<hydro::SupplyLoss>(f)) return "supply_loss";
    return "supply_restore";
}

inline std::optional<double> fault_level(const hydro::Fault& f) {
    if (const auto* fc = std::get_if<hydro::FilterClog>(&f)) return fc->level;
    if (const auto* ec = std::get_if<hydro::EmitterClog>(&f)) return ec->level;
    return std::nullopt;
}

}  // namespace detail

inline RunSummary run_scenario(const Scenario& scenario,
                               const std::filesystem::path& out_dir,
                               const EvalObserver& observer = {}) {
    validate(scenario);
    std::filesystem::create_directories(out_dir);
    std::ofstream telemetry(out_dir / "telemetry.csv", std::ios::binary);
    std::ofstream events(out_dir / "events.jsonl", std::ios::binary);
    if (!telemetry || !events)
        throw InputError("cannot open output files under " + out_dir.string());
    telemetry << "tick,time_s,p1_kpa,p2_kpa,p3_kpa,p_head_kpa,p_end_kpa,flow_lph,"
                 "soil_moisture,valve_cmd,alerts\n";

    const double dt = scenario.tick_ms / 1000.0;
    const std::int64_t total_ticks =
        std::llround(scenario.duration_s * 1000.0 / scenario.tick_ms);
    const std::int64_t eval_period = scenario.sample_period_ms / scenario.tick_ms;

    RngStream rng(scenario.seed);
    hydro::PlantState plant = scenario.initial;
    plant.tick = 0;

    std::vector<netlink::NodeState> nodes;
    for (std::uint8_t id : {std::uint8_t{1}, std::uint8_t{2}, std::uint8_t{3}})
        nodes.push_back(netlink::NodeState{id, sensors_of_node(id), scenario.sample_period_ms, 0, 0});
    netlink::MasterInbox inbox({1, 2, 3}, scenario.staleness_timeout_ticks, 0);
    control::ControllerState controller;

    std::vector<detail::FaultEvent> schedule;
    for (std::size_t i = 0; i < scenario.faults.size(); ++i) {
        const double exact = scenario.faults[i].at_s * 1000.0 / scenario.tick_ms;
        schedule.push_back({static_cast<std::int64_t>(std::ceil(exact - 1e-9)), i,
                            scenario.faults[i].fault});
    }
    std::stable_sort(schedule.begin(), schedule.end(),
                     [](const auto& a, const auto& b) { return a.at_tick < b.at_tick; });
    std::size_t next_fault = 0;

    std::deque<netlink::Delivery> in_flight;
    RunSummary summary;
    const SensorEnvironment env{&plant, scenario.air_temp_c, scenario.air_humidity_pct};
    const auto emit = [&events](nlohmann::ordered_json e) { events << e.dump() << '\n'; };

    for (std::int64_t tick = 0; tick < total_ticks; ++tick) {
        const double time_s = tick * dt;

        while (next_fault < schedule.size() && schedule[next_fault].at_tick <= tick) {
            const detail::FaultEvent& f = schedule[next_fault];
            plant = hydro::apply_fault(plant, f.fault);
            auto e = detail::event_base(tick, time_s, "fault");
            e["kind"] = detail::fault_name(f.fault);
            if (const auto level = detail::fault_level(f.fault)) e["level"] = *level;
            emit(std::move(e));
            ++next_fault;
        }

        {
            const hydro::FlowSolution sol = hydro::solve_flow(scenario.plant, plant);
            plant.flow_lph = sol.flow_lph;
            plant.stations = sol.stations;
        }

        const sense::RawSample p1 = sense::transduce(
            ground_truth(kSensorP1Regulator, env), scenario.transducers.at(kSensorP1Regulator),
            rng, tick);
        inbox.ingest_local(kSensorP1Regulator, static_cast<std::uint16_t>(p1.raw), tick);

        for (netlink::NodeState& node : nodes) {
            const auto frame =
                netlink::slave_tick(node, env, scenario.transducers, tick, scenario.tick_ms, rng);
            if (!frame) continue;
            ++summary.frames_sent;
            auto delivery = netlink::link_transmit(scenario.link, encode_frame(*frame), tick, rng);
            if (delivery) {
                in_flight.push_back(std::move(*delivery));
            } else {
                ++summary.frames_dropped;
            }
        }

        while (!in_flight.empty() && in_flight.front().deliver_tick <= tick) {
            const netlink::Delivery delivery = std::move(in_flight.front());
            in_flight.pop_front();
            const auto decoded = netlink::decode_frame(delivery.bytes);
            if (!decoded.ok()) {
                ++summary.decode_errors;
                auto e = detail::event_base(tick, time_s, "link");
                e["anomaly"] = "decode_error";
                e["error"] = netlink::to_string(decoded.error());
                emit(std::move(e));
                continue;
            }
            ++summary.frames_delivered;
            for (const auto& anomaly : inbox.ingest(decoded.value(), tick)) {
                auto e = detail::event_base(tick, time_s, "link");
                if (anomaly.kind == netlink::MasterInbox::Anomaly::Kind::Duplicate) {
                    ++summary.duplicates;
                    e["anomaly"] = "duplicate";
                    e["node"] = anomaly.node_id;
                } else {
                    summary.lost_frames += anomaly.lost;
                    e["anomaly"] = "lost_frames";
                    e["node"] = anomaly.node_id;
                    e["count"] = anomaly.lost;
                }
                emit(std::move(e));
            }
        }

        if (tick % eval_period == 0) {
            EvalRecord record;
            record.tick = tick;
            record.time_s = time_s;
            record.cmd_before = controller.valve_cmd;
            record.eval = control::controller_tick(inbox, scenario.curves, controller,
                                                   scenario.thresholds, tick);
            record.cmd_after = record.eval.valve_cmd;
            record.truth = plant;
            record.active = controller.latched_kinds();
            plant.valve_open = record.cmd_after == control::ValveCmd::Open;
            ++summary.evaluations;

            for (const control::Alert& alert : record.eval.raised) {
                ++summary.alerts[alert.kind];
                auto e = detail::event_base(tick, time_s, "alert");
                e["kind"] = control::to_string(alert.kind);
                if (alert.kind == control::AlertKind::CommLoss) e["node"] = alert.node_id;
                e["channels"] = detail::channel_names(alert.channels);
                e["text"] = alert.text;
                emit(std::move(e));
            }
            if (record.cmd_after != record.cmd_before) {
                auto e = detail::event_base(tick, time_s, "valve");
                e["from"] = control::to_string(record.cmd_before);
                e["to"] = control::to_string(record.cmd_after);
                emit(std::move(e));
            }
            telemetry << detail::csv_row(record);
            if (observer) observer(record);
            log::debug("eval t=" + std::to_string(time_s) + "s valve=" +
                       control::to_string(record.cmd_after));
        }

        plant = hydro::step(scenario.plant, plant, dt);
    }

    summary.ticks = total_ticks;
    summary.final_state = plant;
    if (!telemetry.flush() || !events.flush())
        throw InputError("failed writing outputs under " + out_dir.string());
    return summary;
}

}  // namespace dripsim::sim

#endif
