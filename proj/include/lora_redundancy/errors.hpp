#pragma once

#include <stdexcept>
#include <string>

namespace lora_redundancy {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter set violates a type invariant.
class invalid_parameter : public error {
public:
    using error::error;
};

/// Even the smallest frame (r = 0) exceeds the duty-cycle limit.
class infeasible_duty : public error {
public:
    using error::error;
};

/// Adaptive quadrature could not reach the requested accuracy.
class quadrature_error : public error {
public:
    quadrature_error(const std::string& what, double error_estimate)
        : error(what + " (error estimate " + std::to_string(error_estimate) + ")"),
          error_estimate_(error_estimate) {}

    [[nodiscard]] double error_estimate() const noexcept { return error_estimate_; }

private:
    double error_estimate_;
};

/// A simulation run produced no frames.
class no_traffic : public error {
public:
    using error::error;
};

/// The statistical-reliability rule cannot be met (zero loss observed).
class not_estimable : public error {
public:
    using error::error;
};

/// Malformed scenario configuration or override.
class config_error : public error {
public:
    using error::error;
};

namespace detail {

inline void require(bool condition, const char* message) {
    if (!condition) {
        throw invalid_parameter(message);
    }
}

} // namespace detail

} // namespace lora_redundancy
