// dripsim command line: scenario runner, calibration fitter, frame decoder.
//
// Exit codes: 0 clean, 2 validation error (bad scenario/arguments/input),
// 3 runtime fault. Set DRIPSIM_LOG=info or =debug for progress on stderr.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dripsim/runner.hpp"
#include "dripsim/scenario.hpp"
#include "dripsim/sense.hpp"
#include "dripsim/sensors.hpp"
#include "dripsim/util.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

std::vector<std::pair<double, double>> read_pairs_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw dripsim::InputError("cannot open pairs file: " + path);
    std::vector<std::pair<double, double>> pairs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::istringstream row(line);
        std::string raw_field, ref_field;
        if (!std::getline(row, raw_field, ',') || !std::getline(row, ref_field)) {
            throw dripsim::InputError(path + ":" + std::to_string(line_no) +
                                      ": expected two comma-separated columns");
        }
        try {
            std::size_t raw_end = 0, ref_end = 0;
            const double raw = std::stod(raw_field, &raw_end);
            const double ref = std::stod(ref_field, &ref_end);
            pairs.emplace_back(raw, ref);
        } catch (const std::exception&) {
            if (line_no == 1) continue;  // tolerate a header row
            throw dripsim::InputError(path + ":" + std::to_string(line_no) +
                                      ": expected numeric raw,reference");
        }
    }
    return pairs;
}

std::vector<std::uint8_t> parse_hex(const std::string& hex) {
    std::vector<std::uint8_t> bytes;
    std::string digits;
    digits.reserve(hex.size());
    for (const char c : hex) {
        if (c == ' ' || c == '\t' || c == ':') continue;
        if (!std::isxdigit(static_cast<unsigned char>(c)))
            throw dripsim::InputError(std::string("not a hex digit: '") + c + "'");
        digits.push_back(c);
    }
    if (digits.size() % 2 != 0) throw dripsim::InputError("odd number of hex digits");
    for (std::size_t i = 0; i < digits.size(); i += 2)
        bytes.push_back(static_cast<std::uint8_t>(std::stoi(digits.substr(i, 2), nullptr, 16)));
    return bytes;
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed_override) {
    dripsim::sim::Scenario scenario = dripsim::sim::load_scenario(scenario_path);
    if (seed_override) scenario.seed = *seed_override;
    dripsim::log::info("running " + scenario_path + " for " +
                       std::to_string(scenario.duration_s) + "s, seed " +
                       std::to_string(scenario.seed));
    const dripsim::sim::RunSummary summary = dripsim::sim::run_scenario(scenario, out_dir);

    std::cout << "ticks: " << summary.ticks << "  evaluations: " << summary.evaluations << '\n';
    std::cout << "frames: sent " << summary.frames_sent << ", delivered "
              << summary.frames_delivered << ", dropped " << summary.frames_dropped
              << ", decode errors " << summary.decode_errors << ", lost " << summary.lost_frames
              << '\n';
    std::cout << "alerts:";
    if (summary.alerts.empty()) std::cout << " none";
    for (const auto& [kind, count] : summary.alerts)
        std::cout << ' ' << dripsim::control::to_string(kind) << '=' << count;
    std::cout << '\n';
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "final: valve %s, flow %.3f L/h, soil %.4f, p1 %.2f kPa",
                  summary.final_state.valve_open ? "open" : "closed",
                  summary.final_state.flow_lph, summary.final_state.soil_moisture,
                  summary.final_state.stations.p1_regulator);
    std::cout << buf << '\n';
    return kExitOk;
}

int cmd_calibrate(const std::string& pairs_path, const std::string& unit) {
    const auto pairs = read_pairs_csv(pairs_path);
    const auto curve = dripsim::sense::fit_calibration(pairs, unit);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "intercept = %.9g\nslope = %.9g\nunit = %s",
                  curve.intercept, curve.slope, curve.unit_label.c_str());
    std::cout << buf << '\n';
    return kExitOk;
}

int cmd_decode(const std::string& hex) {
    const auto bytes = parse_hex(hex);
    const auto decoded = dripsim::netlink::decode_frame(bytes);
    if (!decoded.ok()) {
        std::cout << "decode error: " << dripsim::netlink::to_string(decoded.error()) << '\n';
        return kExitRuntime;
    }
    const dripsim::netlink::Frame& f = decoded.value();
    std::cout << "version: " << int(f.version) << '\n';
    std::cout << "node:    " << int(f.node_id) << '\n';
    std::cout << "seq:     " << int(f.seq) << '\n';
    std::cout << "entries: " << f.entries.size() << '\n';
    for (const auto& e : f.entries) {
        char buf[96];
        const char* name = "unknown";
        for (const auto& info : dripsim::kSensorTable)
            if (info.id == e.sensor_id) name = info.name;
        std::snprintf(buf, sizeof(buf), "  sensor 0x%02X (%s): raw %u", e.sensor_id, name,
                      unsigned(e.value));
        std::cout << buf << '\n';
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dripsim: closed-loop drip irrigation simulator"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir = "out", pairs_path, hex, unit = "mca";
    std::optional<std::uint64_t> seed_override;

    CLI::App* run = app.add_subcommand("run", "run a scenario and write telemetry + events");
    run->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    run->add_option("--out", out_dir, "output directory (default: out)");
    run->add_option("--seed", seed_override, "override the scenario seed");

    CLI::App* calibrate =
        app.add_subcommand("calibrate", "fit a linear calibration from raw,reference CSV pairs");
    calibrate->add_option("--pairs", pairs_path, "two-column CSV of raw,reference")->required();
    calibrate->add_option("--unit", unit, "unit label for the fitted curve (default: mca)");

    CLI::App* decode = app.add_subcommand("decode-frame", "decode a hex-encoded telemetry frame");
    decode->add_option("--hex", hex, "frame bytes as hex")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (run->parsed()) return cmd_run(scenario_path, out_dir, seed_override);
        if (calibrate->parsed()) return cmd_calibrate(pairs_path, unit);
        if (decode->parsed()) return cmd_decode(hex);
    } catch (const dripsim::ScenarioError& e) {
        std::cerr << "scenario error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const dripsim::FitError& e) {
        std::cerr << "fit error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const dripsim::InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const dripsim::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitValidation;
}
