#ifndef DRIPSIM_NODE_HPP
#define DRIPSIM_NODE_HPP

#include <cstdint>
#include <map>
#include <optional>

#include "dripsim/netlink.hpp"
#include "dripsim/sensors.hpp"

namespace dripsim::netlink {

// One sampling pass of a slave node. Emits a frame with fresh raw samples of
// every attached sensor each sample period (2000 ms of simulated time by
// default, mirroring the 2 s loop delay of the original firmware), advancing
// seq mod 256. Sensors are transduced in listed order, one gaussian noise
// draw each.
inline std::optional<Frame> slave_tick(NodeState& node, const SensorEnvironment& env,
                                       const std::map<std::uint8_t, sense::TransducerSpec>& specs,
                                       std::int64_t tick, int tick_ms, RngStream& rng) {
    if (tick_ms <= 0 || node.sample_period_ms % tick_ms != 0)
        throw ConfigError("slave_tick: sample period must be a multiple of the tick");
    if (tick < node.next_sample_tick) return std::nullopt;

    Frame frame;
    frame.node_id = node.node_id;
    frame.seq = node.seq;
    frame.entries.reserve(node.sensor_ids.size());
    for (const std::uint8_t sid : node.sensor_ids) {
        const sense::TransducerSpec& spec = specs.at(sid);
        const sense::RawSample sample = sense::transduce(ground_truth(sid, env), spec, rng, tick);
        frame.entries.push_back({sid, static_cast<std::uint16_t>(sample.raw)});
    }
    node.seq = static_cast<std::uint8_t>(node.seq + 1);
    node.next_sample_tick = tick + node.sample_period_ms / tick_ms;
    return frame;
}

}  // namespace dripsim::netlink

#endif
