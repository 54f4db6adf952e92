#ifndef DRIPSIM_SENSE_HPP
#define DRIPSIM_SENSE_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>

#include "dripsim/rng.hpp"
#include "dripsim/util.hpp"

namespace dripsim::sense {

inline constexpr int kAdcMax = 1023;  // 10-bit converter
inline constexpr double kKpaPerMca = 9.80665;  // one metre of water column

enum class Quantity { Pressure, Flow, SoilMoisture, AirTemp, AirHumidity };

struct TransducerSpec {
    std::uint8_t sensor_id = 0;
    Quantity quantity = Quantity::Pressure;
    double span_min = 0.0;   // physical value mapped to count 0
    double span_max = 1.0;   // physical value mapped to count 1023
    double noise_sigma_counts = 0.0;
    int adc_max = kAdcMax;
};

struct RawSample {
    std::uint8_t sensor_id = 0;
    int raw = 0;  // [0, 1023]
    std::int64_t tick = 0;
};

/// Linear counts -> engineering-units map. slope is units per count.
struct CalibrationCurve {
    double intercept = 0.0;
    double slope = 1.0;
    std::string unit_label;
};

inline void validate(const TransducerSpec& spec) {
    if (!std::isfinite(spec.span_min) || !std::isfinite(spec.span_max) ||
        !(spec.span_max > spec.span_min))
        throw ConfigError("transducer: span_max must exceed span_min");
    if (!std::isfinite(spec.noise_sigma_counts) || spec.noise_sigma_counts < 0)
        throw ConfigError("transducer: noise sigma must be >= 0");
    if (spec.adc_max != kAdcMax)
        throw ConfigError("transducer: adc_max must be 1023");
}

// Quantizes a physical value onto the 10-bit range: scale to counts, add
// gaussian count noise, round half up, clamp to the rails. Consumes one
// gaussian draw (two engine words) even at sigma = 0.
inline RawSample transduce(double value, const TransducerSpec& spec, RngStream& rng,
                           std::int64_t tick = 0) {
    validate(spec);
    const double counts =
        (value - spec.span_min) / (spec.span_max - spec.span_min) * spec.adc_max +
        rng.gaussian(spec.noise_sigma_counts);
    const double rounded = std::floor(counts + 0.5);
    const int raw = static_cast<int>(std::clamp(rounded, 0.0, static_cast<double>(spec.adc_max)));
    return RawSample{spec.sensor_id, raw, tick};
}

/// intercept + slope * raw, exactly. raw must be a legal 10-bit count.
inline double apply_calibration(const CalibrationCurve& curve, int raw) {
    if (raw < 0 || raw > kAdcMax)
        throw InputError("apply_calibration: raw count outside [0,1023]");
    if (!std::isfinite(curve.slope) || curve.slope == 0.0)
        throw ConfigError("calibration curve: slope must be finite and nonzero");
    return curve.intercept + curve.slope * raw;
}

/// Ordinary least squares over (raw counts, reference value) pairs.
inline CalibrationCurve fit_calibration(std::span<const std::pair<double, double>> pairs,
                                        std::string unit_label = "mca") {
    if (pairs.size() < 2) throw FitError("fit_calibration: need at least 2 pairs");
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : pairs) {
        if (!std::isfinite(x) || !std::isfinite(y))
            throw FitError("fit_calibration: non-finite sample");
        sx += x;
        sy += y;
    }
    const double n = static_cast<double>(pairs.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pairs) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0.0) throw FitError("fit_calibration: raw counts have zero variance");
    CalibrationCurve curve;
    curve.slope = sxy / sxx;
    curve.intercept = my - curve.slope * mx;
    curve.unit_label = std::move(unit_label);
    return curve;
}

/// Metres of water column to kPa at standard gravity.
inline double mca_to_kpa(double mca) { return mca * kKpaPerMca; }

}  // namespace dripsim::sense

#endif
