#pragma once

// Adaptive quadrature helpers. Finite intervals go through Boost's adaptive
// Gauss-Kronrod (G7/K15); half-infinite intervals are mapped onto (0, 1] by a
// power substitution chosen so that a pure power-law integrand becomes constant.

#include "greencrit/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace greencrit {

inline constexpr unsigned kQuadMaxDepth = 30;

/// Largest log-radius evaluated explicitly; beyond it a power-law integrand is
/// extrapolated analytically.
inline constexpr double kLogCutoff = 690.0;

template <class F>
double integrate(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0)
{
    if (a == b)
        return 0.0;
    double error = 0.0;
    double l1 = 0.0;
    double value = 0.0;
    try {
        value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
            f, a, b, kQuadMaxDepth, rel_tol, &error, &l1);
    } catch (const std::exception& e) {
        throw NumericalFailure(std::string("quadrature: integrand evaluation failed: ") + e.what(),
                               std::numeric_limits<double>::quiet_NaN());
    }
    if (!std::isfinite(value))
        throw NumericalFailure("quadrature: non-finite result", value);
    if (error > 50.0 * rel_tol * l1 + abs_tol)
        throw NumericalFailure("quadrature: no convergence after maximal refinement on [" +
                                   std::to_string(a) + ", " + std::to_string(b) + "]",
                               value);
    return value;
}

/// Integral of f over [a, b] (0 < a <= b) computed in the variable x = ln t.
template <class F>
double integrate_log(F&& f, double a, double b, double rel_tol)
{
    auto g = [&f](double x) {
        const double t = std::exp(x);
        return f(t) * t;
    };
    return integrate(g, std::log(a), std::log(b), rel_tol);
}

/// Integral over [a, infinity) of an integrand given through
/// log_ft(ln t) = ln(f(t) * t). `decay` > 0 is the (estimated) rate with
/// f(t) t ~ t^-decay. The integral is taken in x = ln t until the integrand
/// has dropped by about e^-40 (or x reaches kLogCutoff); the remainder is
/// added as for a pure power law.
template <class LogFt>
double integrate_to_infinity_log(LogFt&& log_ft, double a, double decay, double rel_tol)
{
    if (!(decay > 0.0))
        throw PreconditionError("integrate_to_infinity: decay rate must be positive");
    const double log_a = std::log(a);
    const double x_end = std::min(log_a + 40.0 / decay, kLogCutoff);
    auto g = [&](double x) { return std::exp(log_ft(x)); };
    double value = 0.0;
    double x = log_a;
    if (x_end > log_a) {
        // Chunks of a few e-folds keep each piece well scaled. Once the
        // integrand is negligible (or close to underflow) the power-law
        // remainder takes over.
        const int chunks = std::max(1, static_cast<int>(std::ceil((x_end - log_a) * decay / 5.0 - 1e-9)));
        const double width = (x_end - log_a) / chunks;
        for (int k = 0; k < chunks; ++k) {
            x = log_a + k * width;
            const double level = log_ft(x);
            if (level < -600.0 || (value > 0.0 && level < std::log(value) - 45.0))
                return value + std::exp(level) / decay;
            const double b = k + 1 == chunks ? x_end : x + width;
            value += integrate(g, x, b, rel_tol);
        }
        x = x_end;
    }
    return value + std::exp(log_ft(x)) / decay;
}

template <class F>
double integrate_to_infinity(F&& f, double a, double decay, double rel_tol)
{
    auto log_ft = [&f](double log_t) {
        const double t = std::exp(log_t);
        const double v = f(t);
        return v > 0.0 ? std::log(v) + log_t : -std::numeric_limits<double>::infinity();
    };
    return integrate_to_infinity_log(log_ft, a, decay, rel_tol);
}

/// Integral over (0, b] of f with f(s) ~ s^power near 0 (power > -1).
template <class F>
double integrate_from_zero(F&& f, double b, double power, double rel_tol)
{
    if (!(power > -1.0))
        throw PreconditionError("integrate_from_zero: integrand not integrable at 0");
    const double rate = power + 1.0;
    const double log_b = std::log(b);
    auto h_at_log_u = [&](double log_u) {
        const double s = std::exp(log_b + log_u / rate);
        return f(s) * s / (rate * std::exp(log_u));
    };
    // Below s = b e^-230 the integrand is treated as its leading power; going
    // further risks inf * 0 in f for singular densities.
    const double log_u_cut = -230.0 * rate;
    double lower = 0.0;
    double extrapolated = 0.0;
    if (log_u_cut > -700.0 && log_u_cut < 0.0) {
        lower = std::exp(log_u_cut);
        extrapolated = lower * h_at_log_u(log_u_cut);
    }
    auto h = [&](double u) { return h_at_log_u(std::log(u)); };
    return integrate(h, lower, 1.0, rel_tol) + extrapolated;
}

} // namespace greencrit
