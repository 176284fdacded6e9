#pragma once

// Thin adaptive-quadrature layer over Boost.Math. Every integral in the
// analysis goes through here so tolerances and failure reporting are uniform.

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "errors.hpp"

namespace lora_redundancy::quadrature {

struct options {
    double relative_tolerance = 1e-10;
    unsigned max_depth = 20;
    /// An integral is rejected when its error estimate exceeds
    /// max(accept_absolute, accept_relative * L1 norm).
    double accept_absolute = 1e-9;
    double accept_relative = 1e-6;
};

namespace detail {

inline void check(double error, double l1, const options& opts, const char* what) {
    if (!(error <= std::max(opts.accept_absolute, opts.accept_relative * l1))) {
        throw quadrature_error(what, error);
    }
}

} // namespace detail

/// Adaptive 31-point Gauss-Kronrod over a finite interval; the integrand must be smooth.
template <class F>
[[nodiscard]] double integrate(F&& f, double lo, double hi, const options& opts = {}) {
    if (hi <= lo) {
        return 0.0;
    }
    double error = 0.0;
    double l1 = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, lo, hi, opts.max_depth, opts.relative_tolerance, &error, &l1);
    detail::check(error, l1, opts, "Gauss-Kronrod quadrature did not converge");
    return value;
}

/// Tanh-sinh quadrature; tolerates integrable endpoint singularities.
template <class F>
[[nodiscard]] double integrate_singular(F&& f, double lo, double hi, const options& opts = {}) {
    if (hi <= lo) {
        return 0.0;
    }
    boost::math::quadrature::tanh_sinh<double> integrator(15);
    double error = 0.0;
    double l1 = 0.0;
    std::size_t levels = 0;
    const double value =
        integrator.integrate(f, lo, hi, opts.relative_tolerance, &error, &l1, &levels);
    detail::check(error, l1, opts, "tanh-sinh quadrature did not converge");
    return value;
}

} // namespace lora_redundancy::quadrature
