#pragma once

// Analytical failure probability of a measurement carried by r + 1 frames.
//
// Per-frame loss combines an interference outage (the strongest concurrent
// same-channel interferer is within the capture margin of the desired
// signal) and a fading outage (received power below sensitivity). A
// measurement fails when every frame that carries it is lost.

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "airtime.hpp"
#include "channel.hpp"
#include "errors.hpp"
#include "quadrature.hpp"

namespace lora_redundancy {

struct ScenarioParams {
    int sensor_count = 40;
    RadioParams radio{};
    TrafficModel traffic{};
    FadingModel fading{};
    DistanceModel distances{};
    LinkBudget link{};
    /// Linear power ratio: an interferer at or below capture_ratio times the
    /// desired power cannot corrupt the desired frame. 0.25 ~ 6 dB.
    double capture_ratio = 0.25;

    void validate() const {
        detail::require(sensor_count >= 1, "sensor count must be at least one");
        detail::require(capture_ratio > 0.0 && capture_ratio < 1.0, "capture ratio must lie in (0, 1)");
        radio.validate();
        traffic.validate();
        link.validate();
    }
};

enum class interference_mode { general, equal_distance };
enum class interferer_count_model { poisson, exact };

struct AnalysisModes {
    interference_mode interference = interference_mode::general;
    interferer_count_model interferers = interferer_count_model::poisson;
    bool fading_equal_distance = false;
    /// Distance used by the equal-distance fading outage; defaults to E[D].
    std::optional<double> equal_distance_m{};

    [[nodiscard]] static AnalysisModes general() { return {}; }
    [[nodiscard]] static AnalysisModes equal_distance(std::optional<double> d = std::nullopt) {
        return {interference_mode::equal_distance, interferer_count_model::poisson, true, d};
    }
};

struct OutageBreakdown {
    double p_interference = 0.0;
    double p_fading = 0.0;
    double p_frame_loss = 0.0;
    double p_fail = 0.0;
};

/// Probability that one given other sensor transmits on the same channel at
/// a given instant: q f(r).
[[nodiscard]] inline double interferer_activity(const ScenarioParams& sc, int redundancy) {
    return sc.traffic.same_channel_probability() * duty_cycle(sc.radio, sc.traffic, redundancy);
}

/// Poisson mean of the number of concurrent interferers: v(r) = (n - 1) q f(r).
[[nodiscard]] inline double interferer_rate(const ScenarioParams& sc, int redundancy) {
    sc.validate();
    return (sc.sensor_count - 1) * interferer_activity(sc, redundancy);
}

namespace detail {

/// P(no interferer stronger than the threshold) given the per-interferer
/// probability `below` that an interferer's power stays under it.
[[nodiscard]] inline double no_capture_loss(double below, int sensor_count, double activity,
                                            interferer_count_model model) {
    const int others = sensor_count - 1;
    if (model == interferer_count_model::poisson) {
        return std::exp(-others * activity * (1.0 - below));
    }
    // Binomial(n - 1, q f) thinned by F: sum_k F^k C(n-1,k) p^k (1-p)^(n-1-k).
    return std::pow(1.0 - activity * (1.0 - below), others);
}

} // namespace detail

/// F_M(x): CDF of the strongest interferer's received power.
[[nodiscard]] inline double strongest_interferer_cdf(const ScenarioParams& sc, int redundancy, double x,
                                                     interferer_count_model model) {
    sc.validate();
    const double fp = received_power_cdf(sc.fading, sc.distances, sc.link, x);
    return detail::no_capture_loss(fp, sc.sensor_count, interferer_activity(sc, redundancy), model);
}

/// Interference outage evaluator for a fixed scenario.
///
/// In the general mode the innermost integral depends on the desired gain a
/// and distance w only through z = a w^-alpha, so it is tabulated once on a
/// uniform grid in ln z and interpolated with a cubic B-spline.
class InterferenceOutage {
public:
    static constexpr std::size_t spline_nodes = 4096;

    InterferenceOutage(const ScenarioParams& sc, interference_mode mode,
                       bool use_spline = true, quadrature::options opts = {})
        : sc_(sc), mode_(mode), opts_(opts) {
        sc_.validate();
        collapsed_ = mode_ == interference_mode::equal_distance || sc_.distances.is_point();
        if (!collapsed_ && use_spline) {
            build_spline();
        }
    }

    /// G(a, w) = E_u[F_A(delta a (u / w)^alpha)]: probability that a random
    /// interferer stays within the capture margin of a desired signal with
    /// gain a at distance w.
    [[nodiscard]] double capture_probability(double a, double w) const {
        if (collapsed_) {
            return sc_.fading.cdf(sc_.capture_ratio * a);
        }
        const double alpha = sc_.link.pathloss_exponent;
        const double y = std::log(a) - alpha * std::log(w);
        if (spline_ && y >= y_lo_ && y <= y_hi_) {
            return (*spline_)(y);
        }
        return capture_probability_direct(std::exp(y));
    }

    /// P_i for per-interferer activity q f(r).
    [[nodiscard]] double outage(double activity, interferer_count_model model) const {
        const int n = sc_.sensor_count;
        if (n <= 1 || activity <= 0.0) {
            return 0.0;
        }
        if (collapsed_) {
            const double success = sc_.fading.expect(
                [&](double a) { return detail::no_capture_loss(capture_probability(a, 1.0), n, activity, model); },
                opts_);
            return 1.0 - success;
        }
        const double success = sc_.distances.expect(
            [&](double w) {
                return sc_.fading.expect(
                    [&](double a) {
                        return detail::no_capture_loss(capture_probability(a, w), n, activity, model);
                    },
                    opts_);
            },
            opts_);
        return 1.0 - success;
    }

private:
    [[nodiscard]] double capture_probability_direct(double z) const {
        const double alpha = sc_.link.pathloss_exponent;
        return sc_.distances.expect(
            [&](double u) { return sc_.fading.cdf(sc_.capture_ratio * z * std::pow(u, alpha)); }, opts_);
    }

    void build_spline() {
        const double alpha = sc_.link.pathloss_exponent;
        const double a_lo = sc_.fading.quantile(1e-12);
        const double a_hi = sc_.fading.support_upper();
        y_lo_ = std::log(a_lo) - alpha * std::log(sc_.distances.max());
        y_hi_ = std::log(a_hi) - alpha * std::log(sc_.distances.min());
        const double step = (y_hi_ - y_lo_) / static_cast<double>(spline_nodes - 1);
        std::vector<double> values(spline_nodes);
        for (std::size_t i = 0; i < spline_nodes; ++i) {
            values[i] = capture_probability_direct(std::exp(y_lo_ + step * static_cast<double>(i)));
        }
        spline_ = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
            values.begin(), values.end(), y_lo_, step);
    }

    ScenarioParams sc_;
    interference_mode mode_;
    quadrature::options opts_;
    bool collapsed_ = false;
    double y_lo_ = 0.0;
    double y_hi_ = 0.0;
    std::shared_ptr<const boost::math::interpolators::cardinal_cubic_b_spline<double>> spline_;
};

[[nodiscard]] inline double interference_outage(const ScenarioParams& sc, int redundancy,
                                                interference_mode mode,
                                                interferer_count_model model = interferer_count_model::poisson) {
    return InterferenceOutage(sc, mode).outage(interferer_activity(sc, redundancy), model);
}

/// P_f: probability that the received power falls below the sensitivity.
/// Independent of the redundancy.
[[nodiscard]] inline double fading_outage(const ScenarioParams& sc, bool equal_distance,
                                          std::optional<double> distance_m = std::nullopt) {
    sc.validate();
    const double s = sc.link.sensitivity_w;
    if (s == 0.0) {
        return 0.0;
    }
    if (equal_distance) {
        const double d = distance_m.value_or(sc.distances.mean());
        return conditional_received_power_cdf(sc.fading, sc.link, d, s);
    }
    return received_power_cdf(sc.fading, sc.distances, sc.link, s);
}

/// P_fail(r) = (1 - (1 - P_i)(1 - P_f))^(r + 1).
[[nodiscard]] inline OutageBreakdown combine_outages(double p_interference, double p_fading, int redundancy) {
    OutageBreakdown out;
    out.p_interference = p_interference;
    out.p_fading = p_fading;
    out.p_frame_loss = 1.0 - (1.0 - p_interference) * (1.0 - p_fading);
    out.p_fail = std::pow(out.p_frame_loss, redundancy + 1);
    return out;
}

/// Failure probabilities for r = 0..r_max, sharing one interference evaluator.
/// P_i depends on r only through the frame length, so each distinct length is
/// integrated once.
[[nodiscard]] inline std::vector<OutageBreakdown> failure_profile(const ScenarioParams& sc, int r_max,
                                                                  const AnalysisModes& modes) {
    detail::require(r_max >= 0, "redundancy must be non-negative");
    const InterferenceOutage interference(sc, modes.interference);
    const double pf = fading_outage(sc, modes.fading_equal_distance, modes.equal_distance_m);
    std::map<quarter_symbols, double> by_length;
    std::vector<OutageBreakdown> profile;
    profile.reserve(static_cast<std::size_t>(r_max) + 1);
    for (int r = 0; r <= r_max; ++r) {
        const quarter_symbols len = frame_quarter_symbols(sc.radio, frame_payload_bytes(sc.traffic, r));
        auto it = by_length.find(len);
        if (it == by_length.end()) {
            it = by_length.emplace(len, interference.outage(interferer_activity(sc, r), modes.interferers)).first;
        }
        profile.push_back(combine_outages(it->second, pf, r));
    }
    return profile;
}

[[nodiscard]] inline OutageBreakdown failure_probability(const ScenarioParams& sc, int redundancy,
                                                         const AnalysisModes& modes = {}) {
    detail::require(redundancy >= 0, "redundancy must be non-negative");
    const double pi = interference_outage(sc, redundancy, modes.interference, modes.interferers);
    const double pf = fading_outage(sc, modes.fading_equal_distance, modes.equal_distance_m);
    return combine_outages(pi, pf, redundancy);
}

} // namespace lora_redundancy
