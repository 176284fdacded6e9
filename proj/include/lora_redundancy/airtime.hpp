#pragma once

// LoRa frame timing and duty-cycle arithmetic.
//
// Durations are carried internally as integer counts of quarter symbols so
// that equality between frame lengths is exact; seconds are derived from the
// count and the symbol duration only at the boundary.

#include <cmath>
#include <cstdint>
#include <utility>

#include "errors.hpp"

namespace lora_redundancy {

struct RadioParams {
    int spreading_factor = 10;
    double bandwidth_hz = 125'000.0;
    int preamble_symbols = 8;
    int header_flag = 0;
    int ldro_flag = 0;
    int code_rate_index = 1;

    void validate() const {
        detail::require(spreading_factor >= 7 && spreading_factor <= 12,
                        "spreading factor must lie in 7..12");
        detail::require(bandwidth_hz > 0.0, "bandwidth must be positive");
        detail::require(preamble_symbols >= 0, "preamble symbol count must be non-negative");
        detail::require(header_flag == 0 || header_flag == 1, "header flag must be 0 or 1");
        detail::require(ldro_flag == 0 || ldro_flag == 1, "LDRO flag must be 0 or 1");
        detail::require(code_rate_index >= 1 && code_rate_index <= 4,
                        "code rate index must lie in 1..4");
        detail::require(spreading_factor - 2 * ldro_flag > 0, "s - 2l must be positive");
    }
};

struct TrafficModel {
    double period_s = 30.0;
    int measurement_bytes = 1;
    int channel_count = 1;
    double duty_limit = 0.01;

    [[nodiscard]] double same_channel_probability() const { return 1.0 / channel_count; }

    void validate() const {
        detail::require(period_s > 0.0, "traffic period must be positive");
        detail::require(measurement_bytes >= 1, "measurement size must be at least one byte");
        detail::require(channel_count >= 1, "channel count must be at least one");
        detail::require(duty_limit > 0.0 && duty_limit <= 1.0, "duty limit must lie in (0, 1]");
    }
};

/// Frame length in units of a quarter symbol.
using quarter_symbols = std::int64_t;

namespace detail {

constexpr std::int64_t ceil_div(std::int64_t num, std::int64_t den) {
    // den > 0
    return num >= 0 ? (num + den - 1) / den : -((-num) / den);
}

} // namespace detail

[[nodiscard]] inline double symbol_duration(const RadioParams& radio) {
    radio.validate();
    return std::ldexp(1.0, radio.spreading_factor) / radio.bandwidth_hz;
}

/// Payload symbol count: 8 + max(ceil((2b - s - 5h + 11) / (s - 2l)) (c + 4), 0).
[[nodiscard]] inline std::int64_t payload_symbols(const RadioParams& radio, std::int64_t bytes) {
    radio.validate();
    detail::require(bytes >= 0, "payload size must be non-negative");
    const std::int64_t s = radio.spreading_factor;
    const std::int64_t blocks =
        detail::ceil_div(2 * bytes - s - 5 * radio.header_flag + 11, s - 2 * radio.ldro_flag);
    const std::int64_t coded = blocks * (radio.code_rate_index + 4);
    return 8 + (coded > 0 ? coded : 0);
}

[[nodiscard]] inline quarter_symbols preamble_quarter_symbols(const RadioParams& radio) {
    radio.validate();
    return 4 * static_cast<quarter_symbols>(radio.preamble_symbols) + 17;
}

[[nodiscard]] inline quarter_symbols frame_quarter_symbols(const RadioParams& radio,
                                                           std::int64_t bytes) {
    return preamble_quarter_symbols(radio) + 4 * payload_symbols(radio, bytes);
}

[[nodiscard]] inline double payload_duration(const RadioParams& radio, std::int64_t bytes) {
    return static_cast<double>(payload_symbols(radio, bytes)) * symbol_duration(radio);
}

[[nodiscard]] inline double preamble_duration(const RadioParams& radio) {
    return (radio.preamble_symbols + 4.25) * symbol_duration(radio);
}

[[nodiscard]] inline double frame_duration(const RadioParams& radio, std::int64_t bytes) {
    return static_cast<double>(frame_quarter_symbols(radio, bytes)) / 4.0 *
           symbol_duration(radio);
}

/// Payload bytes of a frame carrying the current and `redundancy` past measurements.
[[nodiscard]] inline std::int64_t frame_payload_bytes(const TrafficModel& traffic, int redundancy) {
    detail::require(redundancy >= 0, "redundancy must be non-negative");
    return static_cast<std::int64_t>(redundancy + 1) * traffic.measurement_bytes;
}

/// Fraction of time spent transmitting: t_fr((r + 1) beta) / t.
[[nodiscard]] inline double duty_cycle(const RadioParams& radio, const TrafficModel& traffic,
                                       int redundancy) {
    traffic.validate();
    return frame_duration(radio, frame_payload_bytes(traffic, redundancy)) / traffic.period_s;
}

inline constexpr int duty_search_bound = 10'000;

/// Largest redundancy whose duty cycle stays within `traffic.duty_limit`.
[[nodiscard]] inline int max_redundancy_under_duty(const RadioParams& radio,
                                                   const TrafficModel& traffic) {
    if (duty_cycle(radio, traffic, 0) > traffic.duty_limit) {
        throw infeasible_duty("a single-measurement frame already exceeds the duty-cycle limit");
    }
    int r = 0;
    while (r < duty_search_bound && duty_cycle(radio, traffic, r + 1) <= traffic.duty_limit) {
        ++r;
    }
    return r;
}

/// Maximal contiguous payload interval around `bytes` with identical frame length.
[[nodiscard]] inline std::pair<std::int64_t, std::int64_t>
airtime_equivalence_range(const RadioParams& radio, std::int64_t bytes) {
    detail::require(bytes >= 1, "payload size must be at least one byte");
    const quarter_symbols length = frame_quarter_symbols(radio, bytes);
    std::int64_t lo = bytes;
    while (lo > 1 && frame_quarter_symbols(radio, lo - 1) == length) {
        --lo;
    }
    std::int64_t hi = bytes;
    while (frame_quarter_symbols(radio, hi + 1) == length) {
        ++hi;
    }
    return {lo, hi};
}

/// Radiated energy of one frame in millijoules.
[[nodiscard]] inline double frame_energy_mj(const RadioParams& radio, std::int64_t bytes,
                                            double transmit_watts) {
    return transmit_watts * frame_duration(radio, bytes) * 1e3;
}

} // namespace lora_redundancy
