#pragma once

#include <vector>

namespace greencrit {

/// Asymptotic form r^power * prod_j (ln_j r)^log_powers[j] as r -> infinity,
/// where ln_1 = ln, ln_2 = ln ln, ... Constant factors are dropped.
///
/// Used as the closed-form escape hatch of the divergence classifier: when the
/// fitted slope of an integrand sits inside the classification margin, the
/// exact signature decides.
struct PowerLaw
{
    double power = 0.0;
    std::vector<double> log_powers;

    PowerLaw operator*(const PowerLaw& other) const;
    PowerLaw operator/(const PowerLaw& other) const;
    PowerLaw pow(double exponent) const;
    /// Signature of f(t^scale) given the signature of f(t); scale > 0.
    PowerLaw compose_power(double scale) const;
    /// Signature of f' for f with this signature (valid when power != 0).
    PowerLaw derivative() const;
};

PowerLaw monomial(double power);

/// Exact convergence of the integral of r^power * logs over [r0, infinity).
bool converges_at_infinity(const PowerLaw& signature);

/// Exact convergence of the integral of s^power over (0, s0].
bool converges_at_zero(double power);

} // namespace greencrit
