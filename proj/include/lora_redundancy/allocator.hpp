#pragma once

// Redundancy allocation: how many past measurements to repeat in each frame.
//
// r_max bounds the redundancy by delay, sensor memory, and duty cycle. r* is
// the smallest admissible redundancy meeting the objective (or the best one
// when none does), and r~ stretches r* to the largest redundancy whose frame
// is no longer, which adds copies at zero energy cost.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "airtime.hpp"
#include "analysis.hpp"
#include "errors.hpp"

namespace lora_redundancy {

struct Constraints {
    double max_delay_s = 270.0;
    int memory_measurements = 10;
    double duty_limit = 0.01;

    void validate() const {
        detail::require(max_delay_s >= 0.0, "maximum delay must be non-negative");
        detail::require(memory_measurements >= 1, "memory must hold at least one measurement");
        detail::require(duty_limit > 0.0 && duty_limit <= 1.0, "duty limit must lie in (0, 1]");
    }
};

enum class objective_kind { failure_probability, energy };

struct AllocationResult {
    int r_max = 0;
    int r_star = 0;
    int r_tilde = 0;
    std::vector<OutageBreakdown> profile;
    /// Value compared against the target for each r (P_fail or expected E_m).
    std::vector<double> objective_values;
    bool target_met = false;
    objective_kind objective = objective_kind::failure_probability;
    double target = 0.0;
};

/// Absolute guard band on target comparisons, matching the analysis tolerance.
inline constexpr double selection_guard = 1e-9;

/// r_max = min(floor(d_max / t), b_max - 1, largest r within the duty limit).
/// A frame holds the current measurement plus r past ones, so a memory of
/// b_max measurements leaves room for b_max - 1 of history.
[[nodiscard]] inline int compute_r_max(const Constraints& constraints, const RadioParams& radio,
                                       const TrafficModel& traffic) {
    constraints.validate();
    traffic.validate();
    TrafficModel limited = traffic;
    limited.duty_limit = constraints.duty_limit;
    const int by_duty = max_redundancy_under_duty(radio, limited);
    const int by_delay = static_cast<int>(std::floor(constraints.max_delay_s / traffic.period_s + 1e-12));
    const int by_memory = constraints.memory_measurements / traffic.measurement_bytes - 1;
    return std::max(0, std::min({by_delay, by_memory, by_duty}));
}

/// Largest r <= r_max whose frame is exactly as long as the frame for r_star.
[[nodiscard]] inline int extend_to_equal_airtime(const RadioParams& radio, const TrafficModel& traffic,
                                                 int r_star, int r_max) {
    const quarter_symbols len = frame_quarter_symbols(radio, frame_payload_bytes(traffic, r_star));
    int r = r_star;
    while (r < r_max && frame_quarter_symbols(radio, frame_payload_bytes(traffic, r + 1)) == len) {
        ++r;
    }
    return r;
}

namespace detail {

/// Fills r_star, r_tilde and target_met from objective values over 0..r_max.
inline void select_redundancy(AllocationResult& result, const RadioParams& radio, const TrafficModel& traffic) {
    const auto& values = result.objective_values;
    std::optional<int> first_ok;
    for (int r = 0; r <= result.r_max; ++r) {
        if (values[static_cast<std::size_t>(r)] <= result.target + selection_guard) {
            first_ok = r;
            break;
        }
    }
    if (first_ok) {
        result.r_star = *first_ok;
        result.target_met = true;
    } else {
        // argmin; ties go to the smallest (cheapest) r.
        int best = 0;
        for (int r = 1; r <= result.r_max; ++r) {
            if (values[static_cast<std::size_t>(r)] < values[static_cast<std::size_t>(best)]) {
                best = r;
            }
        }
        result.r_star = best;
        result.target_met = false;
    }
    result.r_tilde = extend_to_equal_airtime(radio, traffic, result.r_star, result.r_max);
}

} // namespace detail

/// Allocation against a target failure probability.
[[nodiscard]] inline AllocationResult allocate(const ScenarioParams& sc, const Constraints& constraints,
                                               double target_probability, const AnalysisModes& modes = {}) {
    detail::require(target_probability > 0.0 && target_probability <= 1.0,
                    "target failure probability must lie in (0, 1]");
    AllocationResult result;
    result.objective = objective_kind::failure_probability;
    result.target = target_probability;
    result.r_max = compute_r_max(constraints, sc.radio, sc.traffic);
    result.profile = failure_profile(sc, result.r_max, modes);
    result.objective_values.reserve(result.profile.size());
    for (const auto& o : result.profile) {
        result.objective_values.push_back(o.p_fail);
    }
    detail::select_redundancy(result, sc.radio, sc.traffic);
    return result;
}

/// Which outage divides the frame energy in the expected-energy objective.
enum class energy_loss_basis {
    fading_only,      ///< E(r) / (1 - P_f)
    failure_probability, ///< E(r) / (1 - P_fail(r))
};

/// Allocation against a target expected energy per delivered measurement.
/// `frame_energy_mj(r)` is the energy of a frame carrying r past measurements.
[[nodiscard]] inline AllocationResult allocate_for_energy(const ScenarioParams& sc, const Constraints& constraints,
                                                          double target_energy_mj,
                                                          const std::function<double(int)>& frame_energy_mj,
                                                          const AnalysisModes& modes = {},
                                                          energy_loss_basis basis = energy_loss_basis::fading_only) {
    detail::require(target_energy_mj > 0.0, "target energy must be positive");
    AllocationResult result;
    result.objective = objective_kind::energy;
    result.target = target_energy_mj;
    result.r_max = compute_r_max(constraints, sc.radio, sc.traffic);
    result.profile = failure_profile(sc, result.r_max, modes);
    for (int r = 0; r <= result.r_max; ++r) {
        const auto& o = result.profile[static_cast<std::size_t>(r)];
        const double loss = basis == energy_loss_basis::fading_only ? o.p_fading : o.p_fail;
        const double expected = loss < 1.0 ? frame_energy_mj(r) / (1.0 - loss)
                                           : std::numeric_limits<double>::infinity();
        result.objective_values.push_back(expected);
    }
    detail::select_redundancy(result, sc.radio, sc.traffic);
    return result;
}

/// Radiated energy of the frame for redundancy r at the link's transmit power.
[[nodiscard]] inline std::function<double(int)> radiated_frame_energy(const ScenarioParams& sc,
                                                                      std::optional<double> watts = std::nullopt) {
    const double w = watts.value_or(sc.link.transmit_power_w);
    return [radio = sc.radio, traffic = sc.traffic, w](int r) {
        return frame_energy_mj(radio, frame_payload_bytes(traffic, r), w);
    };
}

} // namespace lora_redundancy
