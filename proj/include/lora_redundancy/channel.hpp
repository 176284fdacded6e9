#pragma once

// Channel models: Nakagami-m power gain, sensor-gateway distance, and the
// link budget that turns both into received power P = gamma * A * D^-alpha.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "errors.hpp"
#include "quadrature.hpp"
#include "rng.hpp"

namespace lora_redundancy {

inline constexpr double speed_of_light_mps = 299'792'458.0;

[[nodiscard]] inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
[[nodiscard]] inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }
[[nodiscard]] inline double db_to_ratio(double db) { return std::pow(10.0, db / 10.0); }

/// Nakagami-m fading on power: A ~ Gamma(shape m, scale 1/m), so E[A] = 1.
class FadingModel {
public:
    /// Upper truncation of the gain support used by every fading integral.
    static constexpr double tail_mass = 1e-12;

    explicit FadingModel(double shape = 1.0) : shape_(shape) {
        detail::require(std::isfinite(shape) && shape > 0.0, "Nakagami shape must be positive");
    }

    [[nodiscard]] double shape() const noexcept { return shape_; }

    [[nodiscard]] double cdf(double x) const {
        if (!(x >= 0.0)) {
            throw invalid_parameter("fading CDF is undefined for negative gain");
        }
        if (std::isinf(x)) {
            return 1.0;
        }
        return boost::math::gamma_p(shape_, shape_ * x);
    }

    [[nodiscard]] double pdf(double a) const {
        if (a < 0.0) {
            return 0.0;
        }
        if (a == 0.0) {
            return shape_ == 1.0 ? 1.0 : (shape_ < 1.0 ? std::numeric_limits<double>::infinity() : 0.0);
        }
        return shape_ * boost::math::gamma_p_derivative(shape_, shape_ * a);
    }

    [[nodiscard]] double quantile(double p) const {
        return boost::math::gamma_p_inv(shape_, p) / shape_;
    }

    [[nodiscard]] double support_upper() const { return quantile(1.0 - tail_mass); }

    template <class Engine>
    [[nodiscard]] double sample(Engine& rng) const {
        std::gamma_distribution<double> dist(shape_, 1.0 / shape_);
        return dist(rng);
    }

    /// E[h(A)], integrating over the truncated support.
    template <class F>
    [[nodiscard]] double expect(F&& h, const quadrature::options& opts = {}) const {
        // Neither rule evaluates the endpoints, so the m < 1 pole at 0 is never hit.
        auto integrand = [&](double a) { return h(a) * pdf(a); };
        const double upper = support_upper();
        if (shape_ < 1.0) {
            return quadrature::integrate_singular(integrand, 0.0, upper, opts);
        }
        return quadrature::integrate(integrand, 0.0, upper, opts);
    }

private:
    double shape_;
};

struct PointDistance {
    double distance_m;
};

struct UniformDistance {
    double min_m;
    double max_m;
};

struct EmpiricalDistance {
    std::vector<double> distances_m;
    std::vector<double> weights;
};

/// Distribution of the sensor-gateway distance D.
class DistanceModel {
public:
    using variant_type = std::variant<PointDistance, UniformDistance, EmpiricalDistance>;

    DistanceModel() : model_(PointDistance{50.0}) {}
    DistanceModel(PointDistance p) : model_(p) { validate(); }
    DistanceModel(UniformDistance u) : model_(u) { validate(); }
    DistanceModel(EmpiricalDistance e) : model_(std::move(e)) { validate(); }

    [[nodiscard]] static DistanceModel point(double d) { return DistanceModel(PointDistance{d}); }
    [[nodiscard]] static DistanceModel uniform(double lo, double hi) {
        return DistanceModel(UniformDistance{lo, hi});
    }

    [[nodiscard]] const variant_type& variant() const noexcept { return model_; }
    [[nodiscard]] bool is_point() const { return std::holds_alternative<PointDistance>(model_); }

    [[nodiscard]] double min() const {
        return std::visit(
            [](const auto& m) -> double {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, PointDistance>) {
                    return m.distance_m;
                } else if constexpr (std::is_same_v<T, UniformDistance>) {
                    return m.min_m;
                } else {
                    return *std::min_element(m.distances_m.begin(), m.distances_m.end());
                }
            },
            model_);
    }

    [[nodiscard]] double max() const {
        return std::visit(
            [](const auto& m) -> double {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, PointDistance>) {
                    return m.distance_m;
                } else if constexpr (std::is_same_v<T, UniformDistance>) {
                    return m.max_m;
                } else {
                    return *std::max_element(m.distances_m.begin(), m.distances_m.end());
                }
            },
            model_);
    }

    [[nodiscard]] double mean() const {
        return expect([](double u) { return u; });
    }

    /// E[g(D)].
    template <class F>
    [[nodiscard]] double expect(F&& g, const quadrature::options& opts = {}) const {
        return std::visit(
            [&](const auto& m) -> double {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, PointDistance>) {
                    return g(m.distance_m);
                } else if constexpr (std::is_same_v<T, UniformDistance>) {
                    return quadrature::integrate(g, m.min_m, m.max_m, opts) / (m.max_m - m.min_m);
                } else {
                    double sum = 0.0;
                    for (std::size_t i = 0; i < m.distances_m.size(); ++i) {
                        sum += m.weights[i] * g(m.distances_m[i]);
                    }
                    return sum;
                }
            },
            model_);
    }

    template <class Engine>
    [[nodiscard]] double sample(Engine& rng) const {
        return std::visit(
            [&](const auto& m) -> double {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, PointDistance>) {
                    return m.distance_m;
                } else if constexpr (std::is_same_v<T, UniformDistance>) {
                    return std::uniform_real_distribution<double>(m.min_m, m.max_m)(rng);
                } else {
                    std::discrete_distribution<std::size_t> pick(m.weights.begin(), m.weights.end());
                    return m.distances_m[pick(rng)];
                }
            },
            model_);
    }

private:
    void validate() const {
        std::visit(
            [](const auto& m) {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, PointDistance>) {
                    detail::require(m.distance_m > 0.0, "distance must be positive");
                } else if constexpr (std::is_same_v<T, UniformDistance>) {
                    detail::require(m.min_m > 0.0 && m.min_m < m.max_m,
                                    "uniform distance range requires 0 < min < max");
                } else {
                    detail::require(!m.distances_m.empty() && m.distances_m.size() == m.weights.size(),
                                    "empirical distances need one weight per distance");
                    double total = 0.0;
                    for (std::size_t i = 0; i < m.distances_m.size(); ++i) {
                        detail::require(m.distances_m[i] > 0.0, "distance must be positive");
                        detail::require(m.weights[i] >= 0.0, "weights must be non-negative");
                        total += m.weights[i];
                    }
                    detail::require(std::abs(total - 1.0) < 1e-9, "empirical weights must sum to 1");
                }
            },
            model_);
    }

    variant_type model_;
};

/// Transmit power, carrier, pathloss exponent and receiver sensitivity, all linear.
struct LinkBudget {
    double transmit_power_w = dbm_to_watts(14.0);
    double carrier_frequency_hz = 868e6;
    double pathloss_exponent = 4.0;
    double sensitivity_w = dbm_to_watts(-132.0);

    [[nodiscard]] static LinkBudget from_dbm(double tx_dbm, double carrier_mhz, double alpha,
                                             double sensitivity_dbm) {
        LinkBudget lb{dbm_to_watts(tx_dbm), carrier_mhz * 1e6, alpha, dbm_to_watts(sensitivity_dbm)};
        lb.validate();
        return lb;
    }

    [[nodiscard]] double wavelength_m() const { return speed_of_light_mps / carrier_frequency_hz; }

    void validate() const {
        detail::require(transmit_power_w > 0.0, "transmit power must be positive");
        detail::require(carrier_frequency_hz > 0.0, "carrier frequency must be positive");
        detail::require(pathloss_exponent >= 0.0, "pathloss exponent must be non-negative");
        detail::require(sensitivity_w >= 0.0, "sensitivity must be non-negative");
    }
};

/// gamma = (lambda / 4 pi)^alpha * transmit power.
[[nodiscard]] inline double gamma_constant(const LinkBudget& lb) {
    lb.validate();
    return std::pow(lb.wavelength_m() / (4.0 * std::numbers::pi), lb.pathloss_exponent) *
           lb.transmit_power_w;
}

/// Mean received power (unit fading gain) at distance d.
[[nodiscard]] inline double mean_received_power(const LinkBudget& lb, double distance_m) {
    return gamma_constant(lb) * std::pow(distance_m, -lb.pathloss_exponent);
}

[[nodiscard]] inline double fading_cdf(const FadingModel& model, double x) { return model.cdf(x); }

template <class Engine>
[[nodiscard]] double fading_sample(const FadingModel& model, Engine& rng) {
    return model.sample(rng);
}

/// F_P(x | D = u) = F_A(gamma^-1 u^alpha x).
[[nodiscard]] inline double conditional_received_power_cdf(const FadingModel& fading,
                                                           const LinkBudget& lb, double distance_m,
                                                           double x) {
    return fading.cdf(std::pow(distance_m, lb.pathloss_exponent) * x / gamma_constant(lb));
}

/// F_P(x) = E_D[F_A(gamma^-1 D^alpha x)].
[[nodiscard]] inline double received_power_cdf(const FadingModel& fading, const DistanceModel& dist,
                                               const LinkBudget& lb, double x) {
    if (!(x >= 0.0)) {
        throw invalid_parameter("received power CDF is undefined for negative power");
    }
    if (std::isinf(x)) {
        return 1.0;
    }
    const double g = gamma_constant(lb);
    const double alpha = lb.pathloss_exponent;
    return dist.expect([&](double u) { return fading.cdf(std::pow(u, alpha) * x / g); });
}

} // namespace lora_redundancy
