#ifndef DRIPSIM_NETLINK_HPP
#define DRIPSIM_NETLINK_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "dripsim/rng.hpp"
#include "dripsim/util.hpp"

namespace dripsim::netlink {

// Wire format, bit-exact:
//   [0x7E] [version<<4 | node_id] [seq] [count]
//   per entry: [sensor_id] [value_hi (top 6 bits zero)] [value_lo]
//   [crc8]
// crc8: polynomial 0x07, init 0x00, MSB first, over every byte after the SOF
// and before the checksum itself.

inline constexpr std::uint8_t kSof = 0x7E;
inline constexpr std::size_t kMaxEntries = 16;
inline constexpr std::size_t kMinFrameBytes = 5;  // SOF + header + seq + count + crc

struct FrameEntry {
    std::uint8_t sensor_id = 0;
    std::uint16_t value = 0;  // 10-bit raw counts

    bool operator==(const FrameEntry&) const = default;
};

struct Frame {
    std::uint8_t version = 1;   // 4-bit
    std::uint8_t node_id = 1;   // 4-bit, nonzero
    std::uint8_t seq = 0;       // wraps mod 256
    std::vector<FrameEntry> entries;

    bool operator==(const Frame&) const = default;
};

inline std::uint8_t crc8(std::span<const std::uint8_t> data) {
    std::uint8_t crc = 0x00;
    for (const std::uint8_t byte : data) {
        crc ^= byte;
        for (int bit = 0; bit < 8; ++bit)
            crc = (crc & 0x80) ? static_cast<std::uint8_t>((crc << 1) ^ 0x07)
                               : static_cast<std::uint8_t>(crc << 1);
    }
    return crc;
}

inline std::size_t encoded_size(const Frame& f) { return kMinFrameBytes + 3 * f.entries.size(); }

inline std::vector<std::uint8_t> encode_frame(const Frame& f) {
    if (f.version != 1) throw EncodeError("encode_frame: version must be 1");
    if (f.node_id == 0 || f.node_id > 0x0F)
        throw EncodeError("encode_frame: node_id must fit 4 bits and be nonzero");
    if (f.entries.size() > kMaxEntries)
        throw EncodeError("encode_frame: more than 16 entries");
    for (std::size_t i = 0; i < f.entries.size(); ++i) {
        if (f.entries[i].value > 1023)
            throw EncodeError("encode_frame: raw value exceeds 1023");
        for (std::size_t j = i + 1; j < f.entries.size(); ++j)
            if (f.entries[i].sensor_id == f.entries[j].sensor_id)
                throw EncodeError("encode_frame: duplicate sensor_id in frame");
    }

    std::vector<std::uint8_t> out;
    out.reserve(encoded_size(f));
    out.push_back(kSof);
    out.push_back(static_cast<std::uint8_t>((f.version << 4) | f.node_id));
    out.push_back(f.seq);
    out.push_back(static_cast<std::uint8_t>(f.entries.size()));
    for (const FrameEntry& e : f.entries) {
        out.push_back(e.sensor_id);
        out.push_back(static_cast<std::uint8_t>(e.value >> 8));
        out.push_back(static_cast<std::uint8_t>(e.value & 0xFF));
    }
    out.push_back(crc8(std::span(out).subspan(1)));
    return out;
}

enum class DecodeError { BadSof, Truncated, BadChecksum, BadValueRange };

inline const char* to_string(DecodeError e) {
    switch (e) {
        case DecodeError::BadSof: return "BadSof";
        case DecodeError::Truncated: return "Truncated";
        case DecodeError::BadChecksum: return "BadChecksum";
        case DecodeError::BadValueRange: return "BadValueRange";
    }
    return "?";
}

// Decodes one complete frame. The checksum is verified over the whole buffer
// before any field is trusted, so flipping any single byte after the SOF is
// reported as BadChecksum; structural checks (count vs length, reserved bits,
// duplicate ids) only ever see checksum-clean input.
inline Result<Frame, DecodeError> decode_frame(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kMinFrameBytes) {
        if (!bytes.empty() && bytes[0] != kSof) return DecodeError::BadSof;
        return DecodeError::Truncated;
    }
    if (bytes[0] != kSof) return DecodeError::BadSof;
    if (crc8(bytes.subspan(1, bytes.size() - 2)) != bytes.back())
        return DecodeError::BadChecksum;

    Frame f;
    f.version = bytes[1] >> 4;
    f.node_id = bytes[1] & 0x0F;
    f.seq = bytes[2];
    const std::size_t count = bytes[3];
    if (f.version != 1 || f.node_id == 0) return DecodeError::BadValueRange;
    if (count > kMaxEntries) return DecodeError::BadValueRange;
    if (bytes.size() != kMinFrameBytes + 3 * count) return DecodeError::Truncated;

    f.entries.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint8_t sid = bytes[4 + 3 * i];
        const std::uint8_t hi = bytes[5 + 3 * i];
        const std::uint8_t lo = bytes[6 + 3 * i];
        if (hi & 0xFC) return DecodeError::BadValueRange;
        for (const FrameEntry& prev : f.entries)
            if (prev.sensor_id == sid) return DecodeError::BadValueRange;
        f.entries.push_back({sid, static_cast<std::uint16_t>((hi << 8) | lo)});
    }
    return f;
}

// Pulls every recoverable frame out of a byte stream. Parsing is
// length-prefixed from each SOF candidate; after any failure the scan resumes
// at the next 0x7E. Diagnostics, when requested, record one error per failed
// candidate.
inline std::vector<Frame> decode_stream(std::span<const std::uint8_t> bytes,
                                        std::vector<DecodeError>* diagnostics = nullptr) {
    std::vector<Frame> frames;
    std::size_t i = 0;
    while (i < bytes.size()) {
        if (bytes[i] != kSof) {
            ++i;
            continue;
        }
        bool consumed = false;
        if (i + 4 <= bytes.size()) {
            const std::size_t len = kMinFrameBytes + 3 * bytes[i + 3];
            if (i + len <= bytes.size()) {
                auto r = decode_frame(bytes.subspan(i, len));
                if (r.ok()) {
                    frames.push_back(std::move(r).value());
                    i += len;
                    consumed = true;
                } else if (diagnostics) {
                    diagnostics->push_back(r.error());
                }
            } else if (diagnostics) {
                diagnostics->push_back(DecodeError::Truncated);
            }
        } else if (diagnostics) {
            diagnostics->push_back(DecodeError::Truncated);
        }
        if (!consumed) ++i;  // resynchronize at the next SOF
    }
    return frames;
}

// Stand-in for the radio hop: frames vanish with drop_probability, otherwise
// arrive latency_ticks later, with corruption_probability of one byte after
// the SOF getting XORed with a random nonzero mask.
struct LinkModel {
    double drop_probability = 0.0;
    double corruption_probability = 0.0;
    int latency_ticks = 0;
};

inline void validate(const LinkModel& l) {
    if (!(l.drop_probability >= 0 && l.drop_probability <= 1) ||
        !(l.corruption_probability >= 0 && l.corruption_probability <= 1))
        throw ConfigError("link: probabilities must be in [0,1]");
    if (l.latency_ticks < 0) throw ConfigError("link: latency_ticks must be >= 0");
}

struct Delivery {
    std::int64_t deliver_tick = 0;
    std::vector<std::uint8_t> bytes;
};

// Draw order per transmission: drop uniform; if kept and corruption is
// possible, corruption uniform; if corrupting, byte index then mask.
inline std::optional<Delivery> link_transmit(const LinkModel& link,
                                             std::vector<std::uint8_t> bytes,
                                             std::int64_t tick, RngStream& rng) {
    validate(link);
    if (rng.uniform01() < link.drop_probability) return std::nullopt;
    if (link.corruption_probability > 0 && rng.uniform01() < link.corruption_probability &&
        bytes.size() > 1) {
        const std::size_t index = 1 + rng.uniform_below(static_cast<std::uint32_t>(bytes.size() - 1));
        const std::uint8_t mask = static_cast<std::uint8_t>(1 + rng.uniform_below(255));
        bytes[index] ^= mask;
    }
    return Delivery{tick + link.latency_ticks, std::move(bytes)};
}

struct NodeState {
    std::uint8_t node_id = 1;
    std::vector<std::uint8_t> sensor_ids;  // sampled in listed order
    int sample_period_ms = 2000;
    std::uint8_t seq = 0;
    std::int64_t next_sample_tick = 0;
};

/// Latest reading the master holds for one sensor.
struct Reading {
    std::uint16_t raw = 0;
    std::int64_t arrival_tick = 0;
    std::uint8_t source_seq = 0;
};

// Per-sensor latest values plus per-node sequence tracking. A node whose
// newest arrival is older than the timeout is reported stale; nodes never
// heard from age from the inbox start tick.
class MasterInbox {
public:
    struct Anomaly {
        enum class Kind { Duplicate, LostFrames };
        Kind kind = Kind::Duplicate;
        std::uint8_t node_id = 0;
        int lost = 0;  // LostFrames only
    };

    MasterInbox() = default;
    MasterInbox(std::vector<std::uint8_t> node_ids, std::int64_t staleness_timeout_ticks,
                std::int64_t start_tick = 0)
        : timeout_(staleness_timeout_ticks) {
        for (const std::uint8_t id : node_ids) nodes_[id] = NodeTrack{std::nullopt, start_tick};
    }

    std::vector<Anomaly> ingest(const Frame& frame, std::int64_t arrival_tick) {
        std::vector<Anomaly> anomalies;
        NodeTrack& track = nodes_[frame.node_id];
        if (track.last_seq && *track.last_seq == frame.seq) {
            anomalies.push_back({Anomaly::Kind::Duplicate, frame.node_id, 0});
            return anomalies;  // readings untouched
        }
        if (track.last_seq) {
            const int gap = static_cast<std::uint8_t>(frame.seq - *track.last_seq - 1);
            if (gap > 0) anomalies.push_back({Anomaly::Kind::LostFrames, frame.node_id, gap});
        }
        track.last_seq = frame.seq;
        track.newest_arrival = arrival_tick;
        for (const FrameEntry& e : frame.entries)
            readings_[e.sensor_id] = Reading{e.value, arrival_tick, frame.seq};
        return anomalies;
    }

    /// Master-attached sensors bypass the radio; no sequence bookkeeping.
    void ingest_local(std::uint8_t sensor_id, std::uint16_t raw, std::int64_t tick) {
        readings_[sensor_id] = Reading{raw, tick, 0};
    }

    std::optional<Reading> reading(std::uint8_t sensor_id) const {
        const auto it = readings_.find(sensor_id);
        if (it == readings_.end()) return std::nullopt;
        return it->second;
    }

    /// Nodes silent for strictly longer than the timeout. At the boundary a
    /// node still counts as fresh.
    std::vector<std::uint8_t> stale_nodes(std::int64_t now) const {
        std::vector<std::uint8_t> stale;
        for (const auto& [id, track] : nodes_)
            if (now - track.newest_arrival > timeout_) stale.push_back(id);
        return stale;
    }

    std::int64_t staleness_timeout_ticks() const { return timeout_; }

private:
    struct NodeTrack {
        std::optional<std::uint8_t> last_seq;
        std::int64_t newest_arrival = 0;
    };

    std::map<std::uint8_t, NodeTrack> nodes_;
    std::map<std::uint8_t, Reading> readings_;
    std::int64_t timeout_ = 50;
};

/// staleness_check: CommLoss candidates at `now`.
inline std::vector<std::uint8_t> staleness_check(const MasterInbox& inbox, std::int64_t now) {
    return inbox.stale_nodes(now);
}

}  // namespace dripsim::netlink

#endif
